#include "clca/service.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "clca/checkpoint.hpp"
#include "clca/dataset.hpp"
#include "clca/errors.hpp"
#include "clca/rng.hpp"

namespace clca {
namespace fs = std::filesystem;

namespace {

struct HttpError {
  int status;
  std::string message;
};

struct Session {
  std::mutex mutex;
  std::string id;
  ChatState chat;
  std::shared_ptr<const A2CModel> model;
  std::string model_ref;
  std::string created_at;
  std::size_t exchanges = 0;
};

enum class JobStatus { kQueued, kRunning, kDone, kFailed };

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::kQueued: return "queued";
    case JobStatus::kRunning: return "running";
    case JobStatus::kDone: return "done";
    case JobStatus::kFailed: return "failed";
  }
  return "failed";
}

struct JobSnapshot {
  std::string job_id;
  JobStatus status = JobStatus::kQueued;
  std::size_t steps_done = 0;
  std::size_t total_timesteps = 0;
  double mean_reward_window = 0.0;
  std::optional<std::string> checkpoint_path;
  std::optional<std::string> error;
};

Json to_json(const JobSnapshot& j) {
  return Json{{"job_id", j.job_id},
              {"status", to_string(j.status)},
              {"steps_done", j.steps_done},
              {"total_timesteps", j.total_timesteps},
              {"mean_reward_window", j.mean_reward_window},
              {"checkpoint_path",
               j.checkpoint_path ? Json(*j.checkpoint_path) : Json(nullptr)},
              {"error", j.error ? Json(*j.error) : Json(nullptr)}};
}

Json parse_body(const httplib::Request& req) {
  try {
    Json body = Json::parse(req.body);
    if (!body.is_object()) throw HttpError{400, "request body must be a JSON object"};
    return body;
  } catch (const Json::parse_error& e) {
    throw HttpError{400, std::string("request body is not valid JSON: ") + e.what()};
  }
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sanitize(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  httplib::Server server;
  std::string warning;
  int bound_port = -1;

  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::uint64_t next_session = 1;

  std::mutex models_mutex;
  std::map<std::string, std::shared_ptr<const A2CModel>> models;

  std::mutex jobs_mutex;
  std::map<std::string, JobSnapshot> jobs;
  std::uint64_t next_job = 1;
  bool job_active = false;
  std::thread job_thread;
  std::atomic<bool> cancel{false};

  explicit Impl(ServiceOptions opts) : options(std::move(opts)) {
    validate(options.selection);
    // httplib's defaults add SO_REUSEPORT, which lets a second server share an
    // occupied port; keep only SO_REUSEADDR so bind() reports the conflict.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes),
                 sizeof(yes));
    });
    routes();
  }

  ~Impl() {
    cancel = true;
    if (job_thread.joinable()) job_thread.join();
  }

  void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(canonical_dump(body), "application/json");
  }

  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const HttpError& e) {
        send_json(res, e.status, {{"error", e.message}});
      } catch (const SchemaError& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const InvalidArgument& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const EmptyMessage& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const ProviderUnavailable& e) {
        send_json(res, 502, {{"error", e.what()}});
      } catch (const MalformedProviderOutput& e) {
        send_json(res, 502, {{"error", e.what()}});
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
      }
    };
  }

  std::shared_ptr<const A2CModel> model_for(const std::string& path) {
    std::lock_guard lock(models_mutex);
    if (auto it = models.find(path); it != models.end()) return it->second;
    if (!fs::exists(path)) throw HttpError{404, "checkpoint not found: " + path};
    try {
      auto model = std::make_shared<const A2CModel>(load_checkpoint(path));
      models.emplace(path, model);
      return model;
    } catch (const FormatError& e) {
      throw HttpError{422, std::string("invalid checkpoint: ") + e.what()};
    } catch (const IoError& e) {
      throw HttpError{404, e.what()};
    }
  }

  CompanyProfile profile_from(const Json& body) {
    if (body.contains("profile")) {
      try {
        return profile_from_json(body["profile"]);
      } catch (const SchemaError& e) {
        throw HttpError{400, std::string("invalid profile: ") + e.what()};
      }
    }
    if (body.contains("profile_id")) {
      if (!body["profile_id"].is_string()) {
        throw HttpError{400, "invalid profile: field 'profile_id' must be a string"};
      }
      const fs::path path = fs::path(options.data_dir) / "profiles" /
                            (sanitize(body["profile_id"].get<std::string>()) + ".json");
      if (!fs::exists(path)) throw HttpError{404, "profile not found: " + path.string()};
      try {
        return load_profile(path.string());
      } catch (const SchemaError& e) {
        throw HttpError{400, std::string("invalid profile: ") + e.what()};
      }
    }
    throw HttpError{400, "invalid profile: missing field 'profile'"};
  }

  std::shared_ptr<Session> find_session(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw HttpError{404, "unknown session '" + id + "'"};
    return it->second;
  }

  fs::path data_subdir(std::string_view name) {
    fs::path dir = fs::path(options.data_dir) / name;
    fs::create_directories(dir);
    return dir;
  }

  void persist_turns(const Session& s, std::size_t from) {
    if (!options.persist_transcripts) return;
    std::ofstream out(data_subdir("transcripts") / (s.id + ".jsonl"),
                      std::ios::app | std::ios::binary);
    for (std::size_t i = from; i < s.chat.history.size(); ++i) {
      out << canonical_dump(clca::to_json(s.chat.history[i])) << '\n';
    }
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_body(req);
    reject_unknown_fields(body, {"profile", "profile_id", "checkpoint_path"},
                          "session request");
    CompanyProfile profile = profile_from(body);
    std::string ckpt = options.default_checkpoint;
    if (body.contains("checkpoint_path")) {
      if (!body["checkpoint_path"].is_string()) {
        throw HttpError{400, "field 'checkpoint_path' must be a string"};
      }
      ckpt = body["checkpoint_path"].get<std::string>();
    }
    if (ckpt.empty()) throw HttpError{404, "no checkpoint_path given and no default model"};
    auto model = model_for(ckpt);

    auto session = std::make_shared<Session>();
    session->chat.profile = std::move(profile);
    session->model = std::move(model);
    session->model_ref = ckpt;
    session->created_at = iso_now();
    {
      std::lock_guard lock(sessions_mutex);
      char id[32];
      std::snprintf(id, sizeof id, "s-%06llu",
                    static_cast<unsigned long long>(next_session++));
      session->id = id;
      sessions.emplace(session->id, session);
    }
    send_json(res, 201, {{"session_id", session->id}});
  }

  void post_message(const httplib::Request& req, httplib::Response& res) {
    auto session = find_session(req.matches[1]);
    const Json body = parse_body(req);
    reject_unknown_fields(body, {"text"}, "message request");
    const std::string text = require_string(body, "text", true);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw HttpError{400, "text must be non-empty"};
    }

    std::lock_guard lock(session->mutex);
    const std::uint64_t seed = derive_seed(options.seed, session->exchanges);
    const SelectionResult r = select_response(session->chat, text, *session->model,
                                              options.provider, options.selection, seed);
    const std::size_t before = session->chat.history.size();
    record_exchange(session->chat, text, r.response);
    ++session->exchanges;
    persist_turns(*session, before);

    Json candidates = Json::array();
    for (const auto& c : r.candidates) {
      candidates.push_back({{"text", c.candidate.text},
                            {"temperature", c.candidate.temperature},
                            {"features", c.features.values},
                            {"score", c.score}});
    }
    send_json(res, 200,
              {{"response", r.response},
               {"action", r.action.values},
               {"candidates", std::move(candidates)},
               {"selected_index", r.selected_index}});
  }

  void get_session(const httplib::Request& req, httplib::Response& res) {
    auto session = find_session(req.matches[1]);
    std::lock_guard lock(session->mutex);
    Json transcript = Json::array();
    for (const auto& t : session->chat.history) transcript.push_back(clca::to_json(t));
    send_json(res, 200, {{"transcript", std::move(transcript)}});
  }

  void generate(const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_body(req);
    reject_unknown_fields(body, {"profile", "n", "seed"}, "dataset request");
    CompanyProfile profile = profile_from(body);
    if (!body.contains("n") || !body["n"].is_number_integer() ||
        body["n"].get<std::int64_t>() < 1) {
      throw HttpError{400, "field 'n' must be an integer >= 1"};
    }
    const auto n = static_cast<std::size_t>(body["n"].get<std::int64_t>());
    const std::uint64_t seed = body.contains("seed") ? require_uint(body, "seed") : 0;

    TextProviderSpec provider = options.provider;
    provider.seed = seed;
    std::size_t completed = 0;
    DialogueDataset dataset;
    try {
      dataset = generate_dataset(profile, provider, n, seed, kDefaultEmbedDim,
                                 [&](std::size_t done) { completed = done; });
    } catch (const ProviderUnavailable& e) {
      send_json(res, 502, {{"error", e.what()}, {"completed", completed}});
      return;
    } catch (const MalformedProviderOutput& e) {
      send_json(res, 502, {{"error", e.what()}, {"completed", completed}});
      return;
    }
    const fs::path path = data_subdir("datasets") /
                          (sanitize(profile.company_id) + "-n" + std::to_string(n) +
                           "-s" + std::to_string(seed) + ".jsonl");
    save_dataset(dataset, path.string());
    send_json(res, 200, {{"path", path.string()}, {"count", dataset.size()}});
  }

  void start_training(const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_body(req);
    reject_unknown_fields(body, {"dataset_path", "config", "job_id"}, "train request");
    const std::string dataset_path = require_string(body, "dataset_path");
    TrainingConfig config;
    if (body.contains("config")) config = training_config_from_json(body["config"]);
    if (!fs::exists(dataset_path)) {
      throw HttpError{404, "dataset not found: " + dataset_path};
    }
    DialogueDataset dataset = load_dataset(dataset_path);
    if (dataset.empty()) throw HttpError{400, "dataset has no records"};

    std::string job_id;
    {
      std::lock_guard lock(jobs_mutex);
      if (body.contains("job_id")) {
        job_id = require_string(body, "job_id");
        if (jobs.count(job_id)) throw HttpError{409, "job '" + job_id + "' already exists"};
      } else {
        do {
          job_id = "job-" + std::to_string(next_job++);
        } while (jobs.count(job_id));
      }
      if (job_active) throw HttpError{409, "a training job is already running"};
      JobSnapshot snap;
      snap.job_id = job_id;
      snap.total_timesteps = config.a2c.total_timesteps;
      jobs.emplace(job_id, snap);
      job_active = true;
      if (job_thread.joinable()) job_thread.join();
      const fs::path ckpt = data_subdir("checkpoints") / (sanitize(job_id) + ".ckpt.json");
      job_thread = std::thread([this, job_id, config, ckpt,
                                data = std::move(dataset)] {
        run_job(job_id, data, config, ckpt.string());
      });
    }
    send_json(res, 202, {{"job_id", job_id}});
  }

  void update_job(const std::string& id, const std::function<void(JobSnapshot&)>& f) {
    std::lock_guard lock(jobs_mutex);
    f(jobs.at(id));
  }

  void run_job(const std::string& id, const DialogueDataset& data,
               const TrainingConfig& config, const std::string& ckpt) {
    update_job(id, [](JobSnapshot& j) { j.status = JobStatus::kRunning; });
    try {
      TrainResult result = train(data, config.a2c, config.env, [&](const TrainProgress& p) {
        if (cancel) throw Error("Cancelled", "service shutting down");
        update_job(id, [&](JobSnapshot& j) {
          j.steps_done = std::max(j.steps_done, p.steps_done);
          j.mean_reward_window = p.mean_reward_window;
        });
      });
      save_checkpoint(result.model, ckpt);
      update_job(id, [&](JobSnapshot& j) {
        j.status = JobStatus::kDone;
        j.checkpoint_path = ckpt;
      });
    } catch (const std::exception& e) {
      const Error* err = dynamic_cast<const Error*>(&e);
      const std::string message =
          err ? err->kind() + ": " + e.what() : std::string(e.what());
      update_job(id, [&](JobSnapshot& j) {
        j.status = JobStatus::kFailed;
        j.error = message;
      });
    }
    std::lock_guard lock(jobs_mutex);
    job_active = false;
  }

  void get_training(const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(jobs_mutex);
    auto it = jobs.find(req.matches[1]);
    if (it == jobs.end()) throw HttpError{404, "unknown job '" + req.matches[1].str() + "'"};
    send_json(res, 200, to_json(it->second));
  }

  void routes() {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok", "text/plain");
    });
    server.Post("/api/sessions",
                guarded([this](auto& q, auto& r) { create_session(q, r); }));
    server.Post(R"(/api/sessions/([^/]+)/messages)",
                guarded([this](auto& q, auto& r) { post_message(q, r); }));
    server.Get(R"(/api/sessions/([^/]+))",
               guarded([this](auto& q, auto& r) { get_session(q, r); }));
    server.Post("/api/datasets/generate",
                guarded([this](auto& q, auto& r) { generate(q, r); }));
    server.Post("/api/train", guarded([this](auto& q, auto& r) { start_training(q, r); }));
    server.Get(R"(/api/train/([^/]+))",
               guarded([this](auto& q, auto& r) { get_training(q, r); }));

    if (!options.cors_origin.empty()) {
      server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                  {"Vary", "Origin"}});
      server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
      });
    }

    if (!options.static_dir.empty()) {
      if (fs::is_directory(options.static_dir)) {
        server.set_mount_point("/", options.static_dir);
      } else {
        warning = "static directory '" + options.static_dir +
                  "' not found; serving the API only";
      }
    }
  }
};

Service::Service(ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() {
  stop();
}

bool Service::bind(const std::string& host, int port) {
  if (port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(host);
    return impl_->bound_port > 0;
  }
  if (!impl_->server.bind_to_port(host, port)) return false;
  impl_->bound_port = port;
  return true;
}

int Service::port() const { return impl_->bound_port; }

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_for_training() {
  std::thread t;
  {
    std::lock_guard lock(impl_->jobs_mutex);
    t = std::move(impl_->job_thread);
  }
  if (t.joinable()) t.join();
}

const std::string& Service::startup_warning() const { return impl_->warning; }

}  // namespace clca
