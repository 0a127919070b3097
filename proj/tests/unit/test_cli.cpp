#include <doctest.h>

#include <csignal>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>

#include "clca/checkpoint.hpp"
#include "clca/cli.hpp"
#include "fixtures.hpp"

extern char** environ;

using namespace clca;
using clca::testing::read_file;
using clca::testing::TempDir;
using clca::testing::write_file;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "clca");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string testing_join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += x + " ";
  return s;
}

std::size_t count_lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

struct Workspace {
  TempDir dir{"cli"};
  std::string profile = dir.file("profile.json");
  std::string data = dir.file("data.jsonl");
  std::string model = dir.file("model.ckpt.json");

  Workspace() {
    write_file(profile, to_json(clca::testing::acme_profile()).dump(2));
    REQUIRE(cli({"gen-data", "--profile", profile, "--n", "8", "--seed", "3", "--out", data}).code == 0);
    REQUIRE(cli({"train", "--data", data, "--steps", "2000", "--seed", "3", "--out", model}).code == 0);
  }
};

}  // namespace

TEST_CASE("gen-data writes n records deterministically") {
  Workspace ws;
  const auto a = ws.dir.file("a.jsonl");
  const auto b = ws.dir.file("b.jsonl");
  const auto r = cli({"gen-data", "--profile", ws.profile, "--n", "12", "--seed", "9", "--out", a});
  CHECK(r.code == 0);
  CHECK(r.out == "wrote 12 records to " + a + "\n");
  CHECK(count_lines(read_file(a)) == 12);
  CHECK(cli({"gen-data", "--profile", ws.profile, "--n", "12", "--seed", "9", "--out", b}).code == 0);
  CHECK(read_file(a) == read_file(b));

  CHECK(cli({"gen-data", "--profile", ws.profile, "--n", "0", "--seed", "9", "--out", a}).code == kExitUsage);

  const auto bad = ws.dir.file("bad.json");
  Json j = to_json(clca::testing::acme_profile());
  j.erase("sales_goals");
  write_file(bad, j.dump());
  const auto fail = cli({"gen-data", "--profile", bad, "--n", "2", "--seed", "1", "--out", b});
  CHECK(fail.code == kExitRuntime);
  CHECK(fail.err.find("sales_goals") != std::string::npos);

  const auto http = cli({"gen-data", "--profile", ws.profile, "--n", "2", "--seed", "1", "--out", b,
                         "--provider", "http", "--endpoint", clca::testing::dead_endpoint()});
  CHECK(http.code == kExitRuntime);
  CHECK(http.err.find("ProviderUnavailable") != std::string::npos);
}

TEST_CASE("train prints one CSV row per 1000 steps and is deterministic") {
  Workspace ws;
  const auto a = ws.dir.file("a.ckpt.json");
  const auto b = ws.dir.file("b.ckpt.json");
  const auto r1 = cli({"train", "--data", ws.data, "--steps", "3500", "--seed", "4", "--out", a});
  const auto r2 = cli({"train", "--data", ws.data, "--steps", "3500", "--seed", "4", "--out", b});
  REQUIRE(r1.code == 0);
  CHECK(r1.out == r2.out);
  CHECK(read_file(a) == read_file(b));
  std::istringstream lines(r1.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "steps,mean_reward");
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("1000,", 0) == 0);
  CHECK(rows[2].rfind("3000,", 0) == 0);

  CHECK(cli({"train", "--data", ws.dir.file("none.jsonl"), "--steps", "10", "--seed", "1", "--out", a})
            .code == kExitRuntime);
  const auto cfg = ws.dir.file("cfg.json");
  write_file(cfg, R"({"a2c_config":{"gamma":0.95,"n_steps":8},"env_config":{"outcome_mode":"aligned"}})");
  CHECK(cli({"train", "--data", ws.data, "--steps", "800", "--seed", "1", "--out", a, "--config", cfg})
            .code == 0);
  const auto m = load_checkpoint(a);
  CHECK(m.config.gamma == 0.95);
  CHECK(m.config.n_steps == 8);
  CHECK(m.env_config.outcome_mode == OutcomeMode::kAligned);
  CHECK(m.config.seed == 1);
  CHECK(m.env_config.seed == 1);

  write_file(cfg, R"({"a2c_config":{"gamma":0}})");
  CHECK(cli({"train", "--data", ws.data, "--steps", "800", "--seed", "1", "--out", a, "--config", cfg})
            .code == kExitRuntime);
}

TEST_CASE("eval reports policy and random baseline deterministically") {
  Workspace ws;
  const auto r1 = cli({"eval", "--data", ws.data, "--model", ws.model, "--episodes", "100000", "--seed", "7"});
  REQUIRE(r1.code == 0);
  const Json j = Json::parse(r1.out);
  for (const char* who : {"policy", "random"}) {
    CHECK(j.at(who).at("mean_episode_reward").is_number());
    CHECK(j.at(who).at("success_rate").get<double>() >= 0.0);
    CHECK(j.at(who).at("success_rate").get<double>() <= 1.0);
  }
  // Uniform-random shaping per step, from a 10^6-sample reference.
  CHECK(std::abs(j["random"]["mean_shaping_reward_per_step"].get<double>() - 0.015324) <= 0.003);
  CHECK(cli({"eval", "--data", ws.data, "--model", ws.model, "--episodes", "100000", "--seed", "7"}).out ==
        r1.out);
  CHECK(cli({"eval", "--data", ws.data, "--model", ws.model, "--episodes", "0", "--seed", "7"}).code ==
        kExitUsage);
  CHECK(cli({"eval", "--data", ws.data, "--model", ws.dir.file("x"), "--episodes", "5", "--seed", "7"})
            .code == kExitRuntime);
}

TEST_CASE("chat transcripts are reproducible") {
  Workspace ws;
  const std::string script = "Hi there\n\n   \nWhat does it cost?\nDo you integrate with our CRM?\n/quit\nignored\n";
  const auto a = cli({"chat", "--model", ws.model, "--profile", ws.profile, "--seed", "5"}, script);
  const auto b = cli({"chat", "--model", ws.model, "--profile", ws.profile, "--seed", "5"}, script);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  std::size_t agent = 0, action = 0, prompts = 0;
  for (std::size_t p = a.out.find("agent: "); p != std::string::npos; p = a.out.find("agent: ", p + 1)) ++agent;
  for (std::size_t p = a.out.find("action: engagement="); p != std::string::npos;
       p = a.out.find("action: engagement=", p + 1))
    ++action;
  for (std::size_t p = a.out.find("> "); p != std::string::npos; p = a.out.find("> ", p + 1)) ++prompts;
  CHECK(agent == 3);
  CHECK(action == 3);
  CHECK(prompts == 6);

  const auto eof = cli({"chat", "--model", ws.model, "--profile", ws.profile}, "hello\n");
  CHECK(eof.code == 0);
  CHECK(eof.out.find("agent: ") != std::string::npos);
}

TEST_CASE("exit codes for malformed invocations") {
  Workspace ws;
  const std::vector<std::vector<std::string>> usage{
      {},
      {"frobnicate"},
      {"gen-data"},
      {"gen-data", "--profile", ws.profile, "--n", "abc", "--seed", "1", "--out", "x"},
      {"gen-data", "--profile", ws.profile, "--n", "-3", "--seed", "1", "--out", "x"},
      {"gen-data", "--profile", ws.profile, "--n", "2", "--seed", "1", "--out", "x", "--bogus"},
      {"gen-data", "--profile", ws.profile, "--n", "2", "--seed", "1", "--out", "x", "--provider", "magic"},
      {"gen-data", "--profile", ws.profile, "--n", "2", "--seed", "1", "--out", "x", "--p-success", "2"},
      {"train", "--data", ws.data, "--steps", "0", "--seed", "1", "--out", "x"},
      {"train", "--data", ws.data, "--seed", "1", "--out", "x"},
      {"train", "--data", ws.data, "--steps", "10", "--seed", "x", "--out", "x"},
      {"eval", "--data", ws.data, "--model", ws.model, "--episodes", "5"},
      {"chat", "--profile", ws.profile},
      {"serve", "--model", ws.model},
      {"serve", "--model", ws.model, "--port", "70000"},
      {"serve", "--model", ws.model, "--port", "http"},
  };
  for (const auto& args : usage) {
    const auto r = cli(args);
    INFO("args: ", testing_join(args));
    CHECK(r.code == kExitUsage);
  }
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({"train", "--help"}).code == kExitOk);
}

TEST_CASE("randomly mangled flag sets never crash and use the documented exit codes") {
  Workspace ws;
  const std::vector<std::string> good{"gen-data", "--profile", ws.profile, "--n", "2",
                                      "--seed", "1", "--out", ws.dir.file("m.jsonl")};
  const std::vector<std::string> junk{"--n", "-1", "0", "", "--seed", "--zzz", "1e9", "nan", "--out"};
  // Mangling can turn any token into an output path; keep writes in the temp dir.
  const auto cwd = std::filesystem::current_path();
  std::filesystem::current_path(ws.dir.path());
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto args = good;
    const std::size_t edits = 1 + rng.below(3);
    for (std::size_t e = 0; e < edits; ++e) {
      const std::size_t pos = 1 + rng.below(args.size() - 1);
      switch (rng.below(3)) {
        case 0: args.erase(args.begin() + pos); break;
        case 1: args[pos] = junk[rng.below(junk.size())]; break;
        default: args.insert(args.begin() + pos, junk[rng.below(junk.size())]); break;
      }
    }
    const auto r = cli(args);
    CHECK((r.code == kExitOk || r.code == kExitRuntime || r.code == kExitUsage));
    if (r.code == kExitUsage) CHECK_FALSE(r.err.empty());
  }
  std::filesystem::current_path(cwd);
}

TEST_CASE("serve reports an occupied port") {
  Workspace ws;
  httplib::Server blocker;
  const int port = blocker.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  const auto r = cli({"serve", "--model", ws.model, "--port", std::to_string(port)});
  CHECK(r.code == kExitRuntime);
  CHECK(r.err.find("cannot listen") != std::string::npos);

  const auto bad = cli({"serve", "--model", ws.dir.file("missing"), "--port", std::to_string(port)});
  CHECK(bad.code == kExitRuntime);
}

TEST_CASE("serve binary answers /healthz and exits cleanly on SIGTERM") {
  Workspace ws;
  const int port = clca::testing::unused_port();
  const std::string port_s = std::to_string(port);
  const std::string missing_static = ws.dir.file("no-ui");
  std::vector<std::string> args{CLCA_BINARY, "serve", "--model", ws.model, "--port", port_s,
                                "--static-dir", missing_static, "--data-dir", ws.dir.file("d")};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  const auto log = ws.dir.file("serve.log");
  posix_spawn_file_actions_addopen(&actions, 2, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = 0;
  REQUIRE(posix_spawn(&pid, CLCA_BINARY, &actions, nullptr, argv.data(), environ) == 0);
  posix_spawn_file_actions_destroy(&actions);

  httplib::Client client("127.0.0.1", port);
  bool healthy = false;
  for (int i = 0; i < 300 && !healthy; ++i) {
    if (auto res = client.Get("/healthz"); res && res->status == 200 && res->body == "ok") {
      healthy = true;
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  CHECK(healthy);
  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(read_file(log).find("warning: static directory") != std::string::npos);
}
