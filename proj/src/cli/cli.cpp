#include "clca/cli.hpp"

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "clca/checkpoint.hpp"
#include "clca/dataset.hpp"
#include "clca/errors.hpp"
#include "clca/rng.hpp"
#include "clca/selection.hpp"
#include "clca/service.hpp"

namespace clca {
namespace {

struct ProviderFlags {
  std::string kind = "builtin";
  std::string endpoint;
  std::string model_name;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--provider", kind, "Text provider")
        ->check(CLI::IsMember({"builtin", "http"}));
    cmd->add_option("--endpoint", endpoint,
                    "Chat-completions base URL (default $CLCA_LLM_BASE_URL)");
    cmd->add_option("--model-name", model_name, "Model name sent to the http provider");
  }

  TextProviderSpec spec(std::uint64_t seed) const {
    TextProviderSpec p;
    p.seed = seed;
    if (kind == "http") {
      p.kind = ProviderKind::kHttpChat;
      if (!endpoint.empty()) p.endpoint = endpoint;
      if (!model_name.empty()) p.model_name = model_name;
    }
    return p;
  }
};

std::string fmt_action(const ActionVector& a) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3);
  for (std::size_t i = 0; i < kActionDim; ++i) {
    s << (i ? " " : "") << kActionNames[i] << '=' << a.values[i];
  }
  return s.str();
}

struct EvalSummary {
  double mean_episode_reward = 0.0;
  double mean_shaping_reward_per_step = 0.0;
  double success_rate = 0.0;
};

Json to_json(const EvalSummary& s) {
  return Json{{"mean_episode_reward", s.mean_episode_reward},
              {"mean_shaping_reward_per_step", s.mean_shaping_reward_per_step},
              {"success_rate", s.success_rate}};
}

template <class Policy>
EvalSummary run_episodes(const DialogueDataset& dataset, const EnvConfig& config,
                         std::size_t episodes, Policy&& policy) {
  SalesEnv env(dataset, config);
  double total_reward = 0.0;
  double shaping = 0.0;
  std::size_t steps = 0;
  std::size_t successes = 0;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    EnvState state = env.reset();
    while (true) {
      StepResult r = env.step(policy(state.observation));
      total_reward += r.reward;
      shaping += r.components.variety + r.components.extremity;
      ++steps;
      if (r.done) {
        if (r.components.outcome > 0.0) ++successes;
        break;
      }
      state = std::move(r.next_state);
    }
  }
  const double n = static_cast<double>(episodes);
  return {total_reward / n, shaping / static_cast<double>(steps),
          static_cast<double>(successes) / n};
}

volatile std::sig_atomic_t g_stop = 0;
extern "C" void on_signal(int) { g_stop = 1; }

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Continuous-learning sales dialogue agent: data, training, chat"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dialogue dataset");
  std::string gen_profile, gen_out;
  std::size_t gen_n = 0;
  std::uint64_t gen_seed = 0;
  double p_success = 0.5;
  ProviderFlags gen_provider;
  gen->add_option("--profile", gen_profile, "Company profile JSON")->required();
  gen->add_option("--n", gen_n, "Number of dialogues")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Seed")->required();
  gen->add_option("--out", gen_out, "Output JSONL path")->required();
  gen->add_option("--p-success", p_success, "Builtin success probability")
      ->check(CLI::Range(0.0, 1.0));
  gen_provider.add_to(gen);

  // train
  auto* tr = app.add_subcommand("train", "Train the A2C policy on a dataset");
  std::string tr_data, tr_out, tr_config;
  std::size_t tr_steps = 0;
  std::uint64_t tr_seed = 0;
  std::size_t tr_embed = kDefaultEmbedDim;
  tr->add_option("--data", tr_data, "Dataset JSONL")->required();
  tr->add_option("--steps", tr_steps, "Total environment steps")
      ->required()
      ->check(CLI::PositiveNumber);
  tr->add_option("--seed", tr_seed, "Seed (model, sampling and environment)")->required();
  tr->add_option("--out", tr_out, "Checkpoint output path")->required();
  tr->add_option("--config", tr_config, "Training config JSON");
  tr->add_option("--embed-dim", tr_embed, "Embedding dimension")->check(CLI::PositiveNumber);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint against a random baseline");
  std::string ev_data, ev_model;
  std::size_t ev_episodes = 0;
  std::uint64_t ev_seed = 0;
  ev->add_option("--data", ev_data, "Dataset JSONL")->required();
  ev->add_option("--model", ev_model, "Checkpoint")->required();
  ev->add_option("--episodes", ev_episodes, "Episodes")
      ->required()
      ->check(CLI::PositiveNumber);
  ev->add_option("--seed", ev_seed, "Seed")->required();

  // chat
  auto* ch = app.add_subcommand("chat", "Interactive chat on stdin/stdout");
  std::string ch_model, ch_profile, ch_lexicons;
  std::uint64_t ch_seed = 0;
  ProviderFlags ch_provider;
  ch->add_option("--model", ch_model, "Checkpoint")->required();
  ch->add_option("--profile", ch_profile, "Company profile JSON")->required();
  ch->add_option("--seed", ch_seed, "Seed");
  ch->add_option("--lexicons", ch_lexicons, "Directory with lexicon files");
  ch_provider.add_to(ch);

  // serve
  auto* sv = app.add_subcommand("serve", "Run the HTTP service");
  std::string sv_model, sv_static, sv_host = "127.0.0.1", sv_cors, sv_data_dir,
                                   sv_lexicons;
  int sv_port = 8080;
  std::uint64_t sv_seed = 0;
  bool sv_persist = false;
  ProviderFlags sv_provider;
  sv->add_option("--model", sv_model, "Default checkpoint")->required();
  sv->add_option("--port", sv_port, "Port")->required()->check(CLI::Range(1, 65535));
  sv->add_option("--static-dir", sv_static, "Web UI directory");
  sv->add_option("--host", sv_host, "Bind address");
  sv->add_option("--cors-origin", sv_cors, "Allowed UI origin");
  sv->add_option("--data-dir", sv_data_dir, "Data directory (default $CLCA_DATA_DIR)");
  sv->add_option("--seed", sv_seed, "Base seed for candidate generation");
  sv->add_option("--lexicons", sv_lexicons, "Directory with lexicon files");
  sv->add_flag("--persist-transcripts", sv_persist, "Append transcripts as JSONL");
  sv_provider.add_to(sv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*gen) {
      const CompanyProfile profile = load_profile(gen_profile);
      TextProviderSpec provider = gen_provider.spec(gen_seed);
      provider.p_success = p_success;
      const DialogueDataset d = generate_dataset(profile, provider, gen_n, gen_seed);
      save_dataset(d, gen_out);
      out << "wrote " << d.size() << " records to " << gen_out << "\n";
      return kExitOk;
    }

    if (*tr) {
      TrainingConfig config;
      if (!tr_config.empty()) config = load_training_config(tr_config);
      config.a2c.total_timesteps = tr_steps;
      config.a2c.seed = tr_seed;
      config.env.seed = tr_seed;
      const DialogueDataset d = load_dataset(tr_data, tr_embed);
      const TrainResult result = train(d, config.a2c, config.env);
      out << "steps,mean_reward\n";
      for (const auto& p : result.stats) {
        out << p.steps << ',' << Json(p.mean_reward).dump() << "\n";
      }
      save_checkpoint(result.model, tr_out);
      return kExitOk;
    }

    if (*ev) {
      const A2CModel model = load_checkpoint(ev_model);
      const DialogueDataset d = load_dataset(ev_data, model.embed_dim);
      EnvConfig env = model.env_config;
      env.seed = ev_seed;
      const EvalSummary policy = run_episodes(d, env, ev_episodes, [&](const auto& obs) {
        return predict(model.params, obs, true);
      });
      Rng rng(derive_seed(ev_seed, 1));
      const EvalSummary random = run_episodes(d, env, ev_episodes, [&](const auto&) {
        ActionVector a;
        for (double& v : a.values) v = rng.uniform();
        return a;
      });
      out << canonical_dump(Json{{"policy", to_json(policy)}, {"random", to_json(random)}})
          << "\n";
      return kExitOk;
    }

    if (*ch) {
      const A2CModel model = load_checkpoint(ch_model);
      ChatState chat;
      chat.profile = load_profile(ch_profile);
      SelectionConfig selection;
      if (!ch_lexicons.empty()) selection.lexicons = Lexicons::load_dir(ch_lexicons);
      const TextProviderSpec provider = ch_provider.spec(ch_seed);
      std::size_t exchanges = 0;
      std::string line;
      while (true) {
        out << "> " << std::flush;
        if (!std::getline(in, line)) break;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == "/quit") break;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const SelectionResult r = select_response(
            chat, line, model, provider, selection, derive_seed(ch_seed, exchanges++));
        record_exchange(chat, line, r.response);
        out << "agent: " << r.response << "\n"
            << "action: " << fmt_action(r.action) << "\n";
      }
      out << "\n";
      return kExitOk;
    }

    if (*sv) {
      ServiceOptions options;
      options.default_checkpoint = sv_model;
      options.static_dir = sv_static;
      options.cors_origin = sv_cors;
      options.seed = sv_seed;
      options.persist_transcripts = sv_persist;
      options.provider = sv_provider.spec(sv_seed);
      if (!sv_lexicons.empty()) options.selection.lexicons = Lexicons::load_dir(sv_lexicons);
      if (!sv_data_dir.empty()) {
        options.data_dir = sv_data_dir;
      } else if (const char* env = std::getenv("CLCA_DATA_DIR")) {
        options.data_dir = env;
      }
      load_checkpoint(sv_model);  // fail fast on a bad default model

      Service service(options);
      if (!service.startup_warning().empty()) {
        err << "warning: " << service.startup_warning() << "\n";
      }
      if (!service.bind(sv_host, sv_port)) {
        err << "error: cannot listen on " << sv_host << ":" << sv_port
            << " (address in use or not permitted)\n";
        return kExitRuntime;
      }
      err << "listening on http://" << sv_host << ":" << service.port() << "\n";
      g_stop = 0;
      auto previous_int = std::signal(SIGINT, on_signal);
      auto previous_term = std::signal(SIGTERM, on_signal);
      std::thread watcher([&] {
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        service.stop();
      });
      service.run();
      g_stop = 1;
      watcher.join();
      std::signal(SIGINT, previous_int);
      std::signal(SIGTERM, previous_term);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace clca
