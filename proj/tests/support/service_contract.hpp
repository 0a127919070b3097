#pragma once

// End-to-end checks of the HTTP API against a live in-process service bound
// to an ephemeral port. Each check is reported separately so both the unit
// suite and the acceptance binary can consume the same list.

#include <chrono>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "clca/a2c.hpp"
#include "clca/checkpoint.hpp"
#include "clca/dataset.hpp"
#include "clca/service.hpp"
#include "fixtures.hpp"

namespace clca::testing {

struct ContractCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

class RunningService {
 public:
  explicit RunningService(ServiceOptions options) : service_(std::move(options)) {
    if (!service_.bind("127.0.0.1", 0)) throw std::runtime_error("bind failed");
    thread_ = std::thread([this] { service_.run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", service_.port());
    client_->set_read_timeout(120, 0);
    for (int i = 0; i < 200; ++i) {
      if (auto res = client_->Get("/healthz"); res && res->status == 200) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  ~RunningService() {
    service_.stop();
    thread_.join();
  }
  httplib::Client& client() { return *client_; }
  Service& service() { return service_; }

 private:
  Service service_;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

struct Reply {
  int status = 0;
  std::string body;
  Json json;
  httplib::Headers headers;
};

inline Reply to_reply(const httplib::Result& res) {
  Reply r;
  if (!res) return r;
  r.status = res->status;
  r.body = res->body;
  r.headers = res->headers;
  r.json = Json::parse(res->body, nullptr, false);
  return r;
}

inline Reply post(httplib::Client& c, const std::string& path, const Json& body) {
  return to_reply(c.Post(path, body.dump(), "application/json"));
}

inline Reply get(httplib::Client& c, const std::string& path) { return to_reply(c.Get(path)); }

inline bool is_canonical(const Reply& r) {
  return !r.json.is_discarded() && canonical_dump(r.json) == r.body;
}

inline Json wait_for_job(httplib::Client& c, const std::string& id, bool& monotone,
                         double timeout_s = 120) {
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(static_cast<int>(timeout_s * 1000));
  std::int64_t last = -1;
  monotone = true;
  Json job;
  while (std::chrono::steady_clock::now() < deadline) {
    job = get(c, "/api/train/" + id).json;
    if (!job.is_object()) break;
    const auto steps = job.value("steps_done", std::int64_t{-1});
    if (steps < last) monotone = false;
    last = steps;
    const std::string status = job.value("status", "");
    if (status == "done" || status == "failed") return job;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return job;
}

inline std::vector<ContractCheck> run_service_contract() {
  std::vector<ContractCheck> checks;
  auto check = [&](std::string name, bool ok, std::string detail = "") {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };

  TempDir dir("svc");
  const auto data_dir = (dir.path() / "data").string();
  const auto profile = to_json(acme_profile());

  // A small trained checkpoint to chat with.
  const auto dataset =
      generate_dataset(acme_profile(), TextProviderSpec::builtin(0), 5, 1);
  save_dataset(dataset, dir.file("train.jsonl"));
  A2CConfig quick;
  quick.total_timesteps = 500;
  const auto ckpt = dir.file("model.ckpt.json");
  save_checkpoint(train(dataset, quick, EnvConfig{}).model, ckpt);
  write_file(dir.file("broken.ckpt.json"), R"({"format":"clca-ckpt","version":2})");

  ServiceOptions opts;
  opts.default_checkpoint = ckpt;
  opts.data_dir = data_dir;
  opts.static_dir = (dir.path() / "no-webchat-here").string();
  opts.persist_transcripts = true;
  opts.seed = 5;
  RunningService svc(opts);
  auto& c = svc.client();

  check("static dir missing -> startup warning, API still served",
        !svc.service().startup_warning().empty());

  {
    auto r = to_reply(c.Get("/healthz"));
    check("GET /healthz -> 200 ok", r.status == 200 && r.body == "ok", r.body);
  }

  std::string sid;
  {
    auto r = post(c, "/api/sessions", {{"profile", profile}, {"checkpoint_path", ckpt}});
    sid = r.json.value("session_id", "");
    check("create session -> 201 {session_id}", r.status == 201 && !sid.empty() && is_canonical(r),
          r.body);
    auto d = post(c, "/api/sessions", {{"profile", profile}});
    check("create session with the default checkpoint -> 201", d.status == 201, d.body);
  }
  {
    auto r = post(c, "/api/sessions",
                  {{"profile", profile}, {"checkpoint_path", dir.file("nope.ckpt.json")}});
    check("missing checkpoint -> 404", r.status == 404, r.body);
  }
  {
    auto r = post(c, "/api/sessions",
                  {{"profile", profile}, {"checkpoint_path", dir.file("broken.ckpt.json")}});
    check("malformed checkpoint -> 422", r.status == 422, r.body);
  }
  {
    Json bad = profile;
    bad.erase("name");
    auto r = post(c, "/api/sessions", {{"profile", bad}, {"checkpoint_path", ckpt}});
    check("malformed profile -> 400 naming the field",
          r.status == 400 && r.body.find("name") != std::string::npos, r.body);
  }
  {
    std::filesystem::create_directories(std::filesystem::path(data_dir) / "profiles");
    write_file(std::filesystem::path(data_dir) / "profiles" / "acme.json", profile.dump());
    auto r = post(c, "/api/sessions", {{"profile_id", "acme"}});
    check("create session by profile_id -> 201", r.status == 201, r.body);
  }
  {
    auto r = post(c, "/api/sessions", {{"profile", profile}, {"model", "x"}});
    check("unknown request field -> 400", r.status == 400, r.body);
  }
  {
    auto r = to_reply(c.Post("/api/sessions", "{not json", "application/json"));
    check("invalid JSON body -> 400", r.status == 400, r.body);
  }

  Json first_reply;
  {
    auto r = post(c, "/api/sessions/" + sid + "/messages", {{"text", "Hi, what does it cost?"}});
    first_reply = r.json;
    bool shape = r.status == 200 && is_canonical(r) && r.json.contains("response") &&
                 r.json["response"].is_string() && r.json["action"].is_array() &&
                 r.json["action"].size() == 4 && r.json["candidates"].is_array() &&
                 r.json["candidates"].size() == 4 && r.json["selected_index"].is_number_unsigned();
    if (shape) {
      for (const auto& cand : r.json["candidates"]) {
        shape = shape && cand["text"].is_string() && cand["temperature"].is_number() &&
                cand["features"].is_array() && cand["features"].size() == 4 &&
                cand["score"].is_number();
      }
      const auto sel = r.json["selected_index"].get<std::size_t>();
      shape = shape && r.json["candidates"][sel]["text"] == r.json["response"];
    }
    check("post message -> 200 with response, action, candidates, selected_index", shape,
          r.body);
  }
  {
    auto other = post(c, "/api/sessions", {{"profile", profile}, {"checkpoint_path", ckpt}});
    const std::string sid2 = other.json.value("session_id", "");
    auto r = post(c, "/api/sessions/" + sid2 + "/messages", {{"text", "Hi, what does it cost?"}});
    check("same first message in two fresh sessions -> identical bodies",
          r.status == 200 && r.json == first_reply, r.body);
  }
  {
    auto r = post(c, "/api/sessions/s-999999/messages", {{"text", "hello"}});
    auto g = get(c, "/api/sessions/s-999999");
    check("unknown session -> 404", r.status == 404 && g.status == 404, r.body);
  }
  {
    auto r = post(c, "/api/sessions/" + sid + "/messages", {{"text", ""}});
    auto w = post(c, "/api/sessions/" + sid + "/messages", {{"text", "   "}});
    check("empty text -> 400", r.status == 400 && w.status == 400, r.body);
  }
  {
    post(c, "/api/sessions/" + sid + "/messages", {{"text", "Does it integrate with our API?"}});
    post(c, "/api/sessions/" + sid + "/messages", {{"text", "OK, send a proposal."}});
    auto r = get(c, "/api/sessions/" + sid);
    bool ok = r.status == 200 && is_canonical(r) && r.json["transcript"].size() == 6;
    for (std::size_t i = 0; ok && i < 6; ++i) {
      ok = r.json["transcript"][i]["speaker"] == (i % 2 == 0 ? "customer" : "representative");
    }
    ok = ok && r.json["transcript"][0]["message"] == "Hi, what does it cost?";
    check("transcript after 3 exchanges has 6 alternating turns", ok, r.body);

    const auto log = read_file(std::filesystem::path(data_dir) / "transcripts" / (sid + ".jsonl"));
    check("transcripts persisted as JSONL",
          std::count(log.begin(), log.end(), '\n') == 6, log);
  }

  std::string dataset_path;
  {
    auto r = post(c, "/api/datasets/generate", {{"profile", profile}, {"n", 5}, {"seed", 1}});
    dataset_path = r.json.value("path", "");
    const auto text = read_file(dataset_path);
    check("generate n=5 -> 200 and a 5-line file",
          r.status == 200 && is_canonical(r) && r.json.value("count", 0) == 5 &&
              std::count(text.begin(), text.end(), '\n') == 5,
          r.body);
    std::filesystem::copy_file(dataset_path, dir.file("first.jsonl"));
    auto again = post(c, "/api/datasets/generate", {{"profile", profile}, {"n", 5}, {"seed", 1}});
    check("generate twice -> byte-identical files",
          again.status == 200 && read_file(again.json.value("path", "")) ==
                                     read_file(dir.file("first.jsonl")),
          again.body);
  }
  {
    auto r = post(c, "/api/datasets/generate", {{"profile", profile}, {"n", 0}, {"seed", 1}});
    check("generate n=0 -> 400", r.status == 400, r.body);
    Json bad = profile;
    bad["company_id"] = "";
    auto p = post(c, "/api/datasets/generate", {{"profile", bad}, {"n", 2}});
    check("generate with invalid profile -> 400", p.status == 400, p.body);
  }

  {
    Json cfg{{"a2c_config", {{"total_timesteps", 3000}, {"seed", 2}}}};
    auto r = post(c, "/api/train", {{"dataset_path", dataset_path}, {"config", cfg}});
    const std::string job = r.json.value("job_id", "");
    check("start training -> 202 {job_id}", r.status == 202 && !job.empty(), r.body);
    bool monotone = true;
    const Json done = wait_for_job(c, job, monotone);
    const bool finished = done.value("status", "") == "done" && done["checkpoint_path"].is_string() &&
                          done.value("steps_done", 0) == 3000 &&
                          done.value("total_timesteps", 0) == 3000 && done["error"].is_null() &&
                          done["mean_reward_window"].is_number();
    bool loads = false;
    if (finished) {
      try {
        loads = load_checkpoint(done["checkpoint_path"].get<std::string>()).adam.step == 600;
      } catch (...) {
      }
    }
    check("training job reaches done with a loadable checkpoint", finished && loads, done.dump());
    check("training progress is monotone", monotone);
    auto dup = post(c, "/api/train", {{"dataset_path", dataset_path}, {"job_id", job}});
    check("duplicate job id -> 409", dup.status == 409, dup.body);
  }
  {
    auto r = post(c, "/api/train", {{"dataset_path", dir.file("missing.jsonl")}});
    check("training with a missing dataset -> 404", r.status == 404, r.body);
    auto g = get(c, "/api/train/no-such-job");
    check("unknown job -> 404", g.status == 404, g.body);
  }
  {
    Json cfg{{"a2c_config", {{"total_timesteps", 500}}},
             {"env_config", {{"r_success", 1e308}, {"r_failure", 1e308}}}};
    auto r = post(c, "/api/train", {{"dataset_path", dataset_path}, {"config", cfg}});
    bool monotone = true;
    const Json job = wait_for_job(c, r.json.value("job_id", ""), monotone);
    check("diverging training -> failed with an error string",
          job.value("status", "") == "failed" && job["error"].is_string() &&
              job["checkpoint_path"].is_null(),
          job.dump());
  }
  {
    Json cfg{{"a2c_config", {{"total_timesteps", 100000000}}}};
    auto r = post(c, "/api/train", {{"dataset_path", dataset_path}, {"config", cfg}});
    auto busy = post(c, "/api/train", {{"dataset_path", dataset_path}});
    check("second job while one is running -> 409", r.status == 202 && busy.status == 409,
          busy.body);
  }

  // Provider failures map to 502.
  {
    ServiceOptions bad = opts;
    bad.provider = TextProviderSpec::http(dead_endpoint());
    bad.data_dir = (dir.path() / "data-bad").string();
    bad.static_dir.clear();
    bad.persist_transcripts = false;
    RunningService broken(bad);
    auto& bc = broken.client();
    auto s = post(bc, "/api/sessions", {{"profile", profile}});
    auto m = post(bc, "/api/sessions/" + s.json.value("session_id", "") + "/messages",
                  {{"text", "hello"}});
    check("provider failure on message -> 502", m.status == 502, m.body);
    auto g = post(bc, "/api/datasets/generate", {{"profile", profile}, {"n", 3}});
    check("provider failure on generate -> 502 with completed count",
          g.status == 502 && g.json.value("completed", -1) == 0, g.body);
  }

  // Static assets and CORS.
  {
    std::filesystem::create_directories(dir.path() / "static");
    write_file(dir.path() / "static" / "index.html", "<html>ui</html>");
    ServiceOptions web = opts;
    web.static_dir = (dir.path() / "static").string();
    web.cors_origin = "http://localhost:5173";
    web.data_dir = (dir.path() / "data-web").string();
    RunningService site(web);
    auto& wc = site.client();
    auto page = to_reply(wc.Get("/index.html"));
    auto root = to_reply(wc.Get("/"));
    check("static files served at /", page.status == 200 && page.body == "<html>ui</html>" &&
                                          root.status == 200 && root.body == page.body &&
                                          site.service().startup_warning().empty(),
          page.body);
    auto pre = to_reply(wc.Options("/api/sessions"));
    auto h = to_reply(wc.Get("/healthz"));
    const auto origin = [](const Reply& r) {
      auto it = r.headers.find("Access-Control-Allow-Origin");
      return it == r.headers.end() ? std::string() : it->second;
    };
    check("CORS preflight and headers for the configured origin",
          (pre.status == 204 || pre.status == 200) && origin(pre) == web.cors_origin &&
              origin(h) == web.cors_origin,
          origin(pre));
  }
  return checks;
}

}  // namespace clca::testing
