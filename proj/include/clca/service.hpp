#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "clca/provider.hpp"
#include "clca/selection.hpp"

namespace clca {

struct ServiceOptions {
  // Used when POST /api/sessions omits checkpoint_path.
  std::string default_checkpoint;
  // Served at "/"; when missing the service runs API-only.
  std::string static_dir;
  // Datasets, checkpoints and transcripts are written below this directory.
  std::string data_dir = "clca-data";
  std::string cors_origin;
  bool persist_transcripts = false;
  TextProviderSpec provider;
  SelectionConfig selection;
  // Base seed for per-message candidate generation.
  std::uint64_t seed = 0;
};

// HTTP front end: chat sessions, dataset generation and background training.
// Sessions and jobs live in memory only.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds without serving. Port 0 picks a free port. Returns false when the
  // address is unavailable.
  bool bind(const std::string& host, int port);
  int port() const;
  // Blocks until stop().
  void run();
  void stop();
  // Waits for a background training job, if any (used by tests and shutdown).
  void wait_for_training();

  // Non-empty when the static directory was requested but does not exist.
  const std::string& startup_warning() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace clca
