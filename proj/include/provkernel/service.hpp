#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "provkernel/error.hpp"
#include "provkernel/executor.hpp"
#include "provkernel/kernel.hpp"

namespace provkernel::service {

struct ApiRequest {
  std::string method;  // GET, POST, PUT, DELETE
  std::string path;    // without query string
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

int http_status(ErrorCode code);
// {"code", "message", "detail"} with the status for `code`.
ApiResponse error_response(ErrorCode code, const std::string& message);

// Every endpoint of docs/api.md as a function of the request. Holds no
// mutable state of its own; safe to call from many threads.
class ApiRouter {
 public:
  ApiRouter(Kernel& kernel, sim::ExecutorConfig executor);

  ApiResponse handle(const ApiRequest& request);

 private:
  ApiResponse dispatch(const ApiRequest& request);

  Kernel& kernel_;
  ClusterStorage& storage_;
  sim::ExecutorConfig executor_;
};

enum class LogLevel { Debug, Info, Warn, Error, Off };
LogLevel parse_log_level(std::string_view text);

struct StorageConfig {
  std::string kind = "memory";  // memory | file | remote
  std::string root;             // file
  std::string base_url;         // remote
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  StorageConfig storage;
  std::string executor_path;  // executor.v1 file; empty for defaults
  LogLevel log_level = LogLevel::Info;
};

// {"listen": "host:port", "storage": {...}, "executor": path, "log_level": ...}.
// Relative paths resolve against the config file's directory. ConfigError.
ServiceConfig load_service_config(const std::string& path);
ServiceConfig service_config_from_json_text(const std::string& text, const std::string& base_dir);
// "host:port"; ConfigError when malformed.
void parse_listen(const std::string& listen, std::string& host, int& port);

// ConfigError for an unusable root or url.
std::unique_ptr<ClusterStorage> open_storage(const StorageConfig& config);
// Defaults when `path` is empty.
sim::ExecutorConfig load_executor_config(const std::string& path);

// httplib front end for an ApiRouter.
class HttpService {
 public:
  HttpService(ApiRouter& router, LogLevel log_level = LogLevel::Warn);
  ~HttpService();

  // Binds; port 0 picks a free port. BindFailure when the address is taken.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  // bind() then run() on a background thread; returns the bound port.
  int start_background(const std::string& host, int port);
  // Stops accepting and waits for in-flight requests.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace provkernel::service
