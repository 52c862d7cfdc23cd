#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "mantra/bundle.h"
#include "mantra/projection.h"
#include "mantra/traversal.h"

namespace httplib {
class Server;
}

namespace mantra {

struct ServiceConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::filesystem::path index_path;
  std::optional<std::filesystem::path> grammar_path;
  std::optional<std::filesystem::path> weights_path;

  /// PORT, INDEX_PATH, GRAMMAR_PATH and WEIGHTS_PATH over the given defaults.
  static ServiceConfig from_env(ServiceConfig defaults);
  static ServiceConfig from_env();
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// JSON API over one loaded bundle. Requests before attach() get 503.
class Service {
 public:
  Service();
  ~Service();

  void attach(std::unique_ptr<Bundle> bundle);
  /// Loads the bundle named by config and attaches it.
  void load(const ServiceConfig& config);
  bool ready() const;

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body) const;
  /// Routes every request under /api/ to handle().
  void mount(httplib::Server& server) const;

 private:
  struct Session;
  std::shared_ptr<const Session> session() const;

  mutable std::mutex mu_;
  std::shared_ptr<const Session> session_;
};

/// Listens on config.host:port, loading the bundle in the background. Blocks
/// until the server stops; returns false when it could not bind.
bool serve(const ServiceConfig& config);

}  // namespace mantra
