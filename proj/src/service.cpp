#include "provkernel/service.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "provkernel/analysis.hpp"
#include "provkernel/error.hpp"
#include "provkernel/json_codec.hpp"
#include "provkernel/opm.hpp"
#include "provkernel/remote_storage.hpp"

namespace provkernel::service {

using wire::Json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownItem:
    case ErrorCode::UnknownVersion:
    case ErrorCode::UnknownExecution:
    case ErrorCode::UnknownNode:
    case ErrorCode::UnknownAgent:
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::InvalidTransition:
    case ErrorCode::NotEligible:
    case ErrorCode::NotTerminal:
    case ErrorCode::EmptyExecution:
    case ErrorCode::AlreadyExists:
    case ErrorCode::ImmutableCluster:
      return 409;
    case ErrorCode::UnknownScript:
    case ErrorCode::PayloadUnavailable:
    case ErrorCode::ExecutorError:
      return 422;
    case ErrorCode::StorageUnavailable:
      return 503;
    case ErrorCode::StorageError:
    case ErrorCode::BindFailure:
    case ErrorCode::Internal:
      return 500;
    case ErrorCode::BadRequest:
    case ErrorCode::MalformedSpec:
    case ErrorCode::CycleIntroduced:
    case ErrorCode::MultipleHeads:
    case ErrorCode::MissingInput:
    case ErrorCode::OutcomeMissing:
    case ErrorCode::OutcomeUnexpected:
    case ErrorCode::InvalidPath:
    case ErrorCode::ParseError:
    case ErrorCode::SchemaViolation:
    case ErrorCode::InvalidGraph:
    case ErrorCode::ConfigError:
      return 400;
  }
  return 500;
}

ApiResponse error_response(ErrorCode code, const std::string& message) {
  ApiResponse response;
  response.status = http_status(code);
  response.body = wire::dump(Json{{"code", std::string(to_string(code))}, {"message", message}, {"detail", nullptr}});
  return response;
}

namespace {

ApiResponse json_response(int status, const Json& body) {
  ApiResponse response;
  response.status = status;
  response.body = wire::dump(body);
  return response;
}

Json body_json(const ApiRequest& request) {
  if (request.body.empty()) return Json::object();
  Json j = wire::parse_json(request.body);
  if (!j.is_object()) fail(ErrorCode::BadRequest, "request body must be a JSON object");
  return j;
}

int parse_positive(const std::string& text, const std::string& what) {
  std::uint64_t value = 0;
  if (!parse_uint(text, value) || value == 0 || value > 999999) {
    fail(ErrorCode::BadRequest, what + " must be a positive integer, got '" + text + "'");
  }
  return static_cast<int>(value);
}

std::string query(const ApiRequest& request, const std::string& key, const std::string& fallback = "") {
  auto it = request.query.find(key);
  return it == request.query.end() ? fallback : it->second;
}

std::vector<std::string> comma_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& part : split(text, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

int version_or_latest(Kernel& kernel, const ItemPath& item, const Json& j) {
  if (j.contains("version") && !j["version"].is_null()) return j["version"].get<int>();
  return kernel.latest_version(item);
}

Json item_summary(Kernel& kernel, const ItemPath& item) {
  Json lifecycle = Json::array();
  for (const auto& info : kernel.lifecycle(item)) lifecycle.push_back(wire::version_to_json(info));
  Json agents = Json::array();
  for (const auto& agent : kernel.agents(item)) agents.push_back(wire::agent_to_json(agent));
  Json properties = Json::object();
  for (const auto& [k, v] : kernel.properties(item)) properties[k] = v;
  return Json{{"item", item.str()},       {"properties", properties},          {"lifecycle", lifecycle},
              {"agents", agents},         {"runs", kernel.runs(item)},         {"latest_version", kernel.latest_version(item)}};
}

Json execution_json(Kernel& kernel, const ExecutionId& id) {
  return wire::execution_to_json(kernel.execution(id), kernel.status(id));
}

DataRef materialize(Kernel& kernel, const ItemPath& item, const std::string& name, const Json& value) {
  if (value.is_string()) return kernel.store_payload(item, name, value.get<std::string>(), MediaHint::Bytes);
  wire::InputValue input = wire::input_from_json(value);
  if (input.ref) return *input.ref;
  return kernel.store_payload(item, name, *input.bytes, input.media);
}

std::map<std::string, DataRef> inputs_from(Kernel& kernel, const ItemPath& item, const Json& j) {
  std::map<std::string, DataRef> inputs;
  if (!j.contains("inputs") || j["inputs"].is_null()) return inputs;
  if (!j["inputs"].is_object()) fail(ErrorCode::BadRequest, "'inputs' must be an object");
  for (const auto& [name, value] : j["inputs"].items()) inputs[name] = materialize(kernel, item, name, value);
  return inputs;
}

sim::ExecutorConfig executor_for(const Json& j, const sim::ExecutorConfig& fallback) {
  if (j.contains("executor") && !j["executor"].is_null()) return wire::executor_config_from_json(j["executor"]);
  return fallback;
}

// A workflow.v1 document, or {"item", "version"} naming a stored one.
WorkflowSpec spec_operand(Kernel& kernel, const Json& j, const std::string& what) {
  if (!j.is_object()) fail(ErrorCode::BadRequest, "'" + what + "' must be an object");
  if (j.contains("item") && !j.contains("nodes")) {
    ItemPath item = ItemPath::parse(j["item"].get<std::string>());
    return analysis::reconstruct_spec(kernel, item, version_or_latest(kernel, item, j));
  }
  return flatten(wire::spec_from_json(j));
}

const Json& member(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) fail(ErrorCode::BadRequest, std::string("missing '") + key + "'");
  return j[key];
}

}  // namespace

ApiRouter::ApiRouter(Kernel& kernel, sim::ExecutorConfig executor)
    : kernel_(kernel), storage_(kernel.storage()), executor_(std::move(executor)) {}

ApiResponse ApiRouter::handle(const ApiRequest& request) {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const Json::exception& e) {
    return error_response(ErrorCode::BadRequest, std::string("malformed request: ") + e.what());
  } catch (const std::exception& e) {
    return error_response(ErrorCode::Internal, e.what());
  }
}

ApiResponse ApiRouter::dispatch(const ApiRequest& request) {
  std::vector<std::string> seg;
  for (auto& part : split(request.path, '/')) {
    if (!part.empty()) seg.push_back(part);
  }
  const std::string& method = request.method;
  auto route = [&](const char* m, std::initializer_list<const char*> pattern) {
    if (method != m || seg.size() != pattern.size()) return false;
    std::size_t i = 0;
    for (const char* p : pattern) {
      if (p[0] != '*' && seg[i] != p) return false;
      ++i;
    }
    return true;
  };

  // Items and versions.
  if (route("GET", {"items"})) {
    Json items = Json::array();
    for (const auto& item : kernel_.items()) items.push_back(item.str());
    return json_response(200, Json{{"items", items}});
  }
  if (route("POST", {"items"})) {
    Json j = body_json(request);
    WorkflowSpec spec;
    std::vector<AgentDesc> agents;
    if (j.contains("workflow")) {
      spec = wire::spec_from_json(j["workflow"]);
      for (const auto& a : j.value("agents", Json::array())) agents.push_back(wire::agent_from_json(a));
    } else {
      spec = wire::spec_from_json(j);
    }
    if (agents.empty()) agents.push_back(executor_.agent);
    ItemPath item = kernel_.create_item(spec, agents);
    return json_response(201, Json{{"item", item.str()}, {"version", 1}});
  }
  if (route("GET", {"items", "*"})) {
    return json_response(200, item_summary(kernel_, ItemPath::parse(seg[1])));
  }
  if (route("POST", {"items", "*", "versions"})) {
    ItemPath item = ItemPath::parse(seg[1]);
    Json j = body_json(request);
    const Json& spec = j.contains("workflow") ? j["workflow"] : j;
    int version = kernel_.derive_version(item, wire::spec_from_json(spec), j.value("note", ""));
    return json_response(201, Json{{"item", item.str()}, {"version", version}});
  }
  if (route("GET", {"items", "*", "versions", "*"})) {
    ItemPath item = ItemPath::parse(seg[1]);
    return json_response(200, wire::spec_to_json(kernel_.stored_spec(item, parse_positive(seg[3], "version"))));
  }
  if (route("POST", {"items", "*", "agents"})) {
    ItemPath item = ItemPath::parse(seg[1]);
    AgentDesc agent = wire::agent_from_json(body_json(request));
    kernel_.register_agent(item, agent);
    return json_response(201, wire::agent_to_json(agent));
  }
  if (route("GET", {"items", "*", "reconstruct"})) {
    ItemPath item = ItemPath::parse(seg[1]);
    std::string v = query(request, "version");
    int version = v.empty() ? kernel_.latest_version(item) : parse_positive(v, "version");
    auto nodes = comma_list(query(request, "nodes"));
    WorkflowSpec spec = nodes.empty()
                            ? analysis::reconstruct_spec(kernel_, item, version)
                            : analysis::reconstruct_part(kernel_, item, version, {nodes.begin(), nodes.end()});
    return json_response(200, wire::spec_to_json(spec));
  }
  if (route("POST", {"items", "*", "annotations"})) {
    ItemPath item = ItemPath::parse(seg[1]);
    Json j = body_json(request);
    int version = version_or_latest(kernel_, item, j);
    Annotation annotation = wire::annotation_from_json(j.contains("annotation") ? j["annotation"] : j);
    int index = kernel_.annotate(item, version, annotation);
    return json_response(201, Json{{"item", item.str()}, {"version", version}, {"index", index}});
  }
  if (route("GET", {"items", "*", "opm"})) {
    ItemPath item = ItemPath::parse(seg[1]);
    ExecutionId id{item, parse_positive(query(request, "run"), "run")};
    ApiResponse response;
    response.content_type = "application/xml";
    response.body = opm::export_xml(opm::to_opm(kernel_, id));
    return response;
  }

  // Executions.
  if (route("GET", {"items", "*", "executions"})) {
    ItemPath item = ItemPath::parse(seg[1]);
    return json_response(200, Json{{"item", item.str()}, {"runs", kernel_.runs(item)}});
  }
  if (route("POST", {"items", "*", "executions"})) {
    ItemPath item = ItemPath::parse(seg[1]);
    Json j = body_json(request);
    int version = version_or_latest(kernel_, item, j);
    ExecutionId id = kernel_.start_execution(item, version, inputs_from(kernel_, item, j));
    if (j.value("execute", false)) {
      sim::SimExecutor executor(executor_for(j, executor_));
      kernel_.run_to_completion(id, executor);
    }
    return json_response(201, execution_json(kernel_, id));
  }
  if (seg.size() >= 3 && seg[0] == "executions") {
    ExecutionId id{ItemPath::parse(seg[1]), parse_positive(seg[2], "run")};
    if (route("GET", {"executions", "*", "*"})) return json_response(200, execution_json(kernel_, id));
    if (route("GET", {"executions", "*", "*", "trace"})) {
      return json_response(200, wire::events_to_json(kernel_.trace(id)));
    }
    if (route("POST", {"executions", "*", "*", "run"})) {
      sim::SimExecutor executor(executor_for(body_json(request), executor_));
      kernel_.run_to_completion(id, executor);
      return json_response(200, execution_json(kernel_, id));
    }
    if (route("GET", {"executions", "*", "*", "outcomes", "*"})) {
      auto outcome = kernel_.latest_outcome(id, seg[4]);
      if (!outcome) fail(ErrorCode::NotFound, "no outcome recorded for '" + seg[4] + "'");
      return json_response(200, wire::outcome_to_json(*outcome));
    }
    if (route("POST", {"executions", "*", "*", "events"})) {
      Json j = body_json(request);
      const std::string node = member(j, "node").get<std::string>();
      Transition transition = Transition::Start;
      try {
        transition = parse_transition(member(j, "transition").get<std::string>());
      } catch (const Error& e) {
        fail(ErrorCode::BadRequest, e.what());
      }
      const std::string agent = member(j, "agent").get<std::string>();
      std::optional<Outcome> outcome;
      if (j.contains("outcome") && !j["outcome"].is_null()) {
        const Json& o = j["outcome"];
        if (!o.is_object()) fail(ErrorCode::BadRequest, "'outcome' must be an object");
        // Validate the whole outcome before storing any payload.
        std::vector<std::pair<std::string, wire::InputValue>> outputs;
        if (o.contains("outputs") && !o["outputs"].is_null()) {
          if (!o["outputs"].is_object()) fail(ErrorCode::BadRequest, "'outputs' must be an object");
          for (const auto& [port, value] : o["outputs"].items()) {
            if (value.is_string()) {
              outputs.push_back({port, wire::InputValue{std::nullopt, value.get<std::string>(), MediaHint::Bytes}});
            } else {
              outputs.push_back({port, wire::input_from_json(value)});
            }
          }
        }
        Outcome value;
        value.log = o.value("log", "");
        if (o.contains("error") && !o["error"].is_null()) {
          const Json& e = o["error"];
          if (!e.is_object() || !e.contains("code") || !e["code"].is_string()) {
            fail(ErrorCode::BadRequest, "'error' needs a string 'code'");
          }
          value.error = OutcomeError{e["code"].get<std::string>(), e.value("message", "")};
        }
        for (auto& [port, input] : outputs) {
          value.outputs[port] = input.ref ? *input.ref
                                          : kernel_.store_payload(id.item, node + "/" + port, *input.bytes, input.media);
        }
        outcome = std::move(value);
      }
      Event event = kernel_.record_transition(id, node, transition, agent, outcome);
      return json_response(201, wire::event_to_json(event));
    }
  }

  // Analysis.
  if (route("POST", {"validate", "spec"})) {
    Json j = body_json(request);
    WorkflowSpec candidate = spec_operand(kernel_, member(j, "candidate"), "candidate");
    WorkflowSpec blueprint = spec_operand(kernel_, member(j, "blueprint"), "blueprint");
    auto findings = analysis::validate_spec(candidate, blueprint);
    return json_response(200, Json{{"findings", wire::findings_to_json(findings)}, {"ok", findings.empty()}});
  }
  if (route("POST", {"validate", "offline"})) {
    Json j = body_json(request);
    ExecutionId id = ExecutionId::parse(member(j, "execution").get<std::string>());
    auto ref = wire::refset_from_json(member(j, "reference"));
    return json_response(200, wire::report_to_json(analysis::validate_offline(kernel_, id, ref)));
  }
  if (route("POST", {"validate", "online"})) {
    Json j = body_json(request);
    ItemPath item = ItemPath::parse(member(j, "item").get<std::string>());
    int version = version_or_latest(kernel_, item, j);
    auto ref = wire::refset_from_json(member(j, "reference"));
    sim::SimExecutor executor(executor_for(j, executor_));
    auto report = analysis::validate_online(kernel_, item, version, inputs_from(kernel_, item, j), ref, executor);
    return json_response(200, wire::report_to_json(report));
  }
  if (route("GET", {"search", "annotations"})) {
    auto hits = analysis::search_annotations(kernel_, query(request, "q"), comma_list(query(request, "tags")));
    return json_response(200, Json{{"hits", wire::hits_to_json(hits)}});
  }
  if (route("GET", {"compare"})) {
    ExecutionId a = ExecutionId::parse(query(request, "a"));
    ExecutionId b = ExecutionId::parse(query(request, "b"));
    return json_response(200, wire::comparison_to_json(analysis::compare_analyses(kernel_, a, b)));
  }
  if (route("POST", {"opm", "import"})) {
    opm::Graph graph = opm::import_xml(request.body);
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& node : graph.nodes) ++counts[static_cast<int>(node.kind)];
    bool round_trip = opm::isomorphic(opm::import_xml(opm::export_xml(graph)), graph);
    return json_response(200, Json{{"valid", true},
                                   {"round_trip", round_trip},
                                   {"processes", counts[0]},
                                   {"artifacts", counts[1]},
                                   {"agents", counts[2]},
                                   {"edges", graph.edges.size()}});
  }

  // Raw cluster storage.
  if (route("GET", {"storage"})) {
    Json items = Json::array();
    for (const auto& item : storage_.items()) items.push_back(item.str());
    return json_response(200, Json{{"items", items}});
  }
  if (seg.size() >= 3 && seg[0] == "storage") {
    ItemPath item = ItemPath::parse(seg[1]);
    ClusterKind kind = ClusterKind::Property;
    try {
      kind = parse_cluster_kind(seg[2]);
    } catch (const Error& e) {
      fail(ErrorCode::InvalidPath, e.what());
    }
    if (seg.size() == 3 && method == "GET") {
      Json paths = Json::array();
      for (const auto& path : storage_.list(item, kind, query(request, "prefix"))) paths.push_back(path.path);
      return json_response(200, Json{{"paths", paths}});
    }
    if (seg.size() > 3) {
      std::vector<std::string> rest(seg.begin() + 3, seg.end());
      ClusterPath path = ClusterPath::make(item, kind, join(rest, "/"));
      if (method == "GET") {
        StoredDocument doc = storage_.get(path);
        ApiResponse response;
        response.content_type = "application/xml";
        response.body = doc.body;
        response.headers["X-Written-At"] = doc.written_at;
        return response;
      }
      if (method == "PUT") {
        auto it = request.headers.find("if-none-match");
        bool expected_absent = it != request.headers.end() && it->second == "*";
        storage_.put(StoredDocument{path, request.body, {}}, expected_absent);
        ApiResponse response;
        response.status = expected_absent ? 201 : 204;
        return response;
      }
      if (method == "DELETE") {
        storage_.remove(path);
        ApiResponse response;
        response.status = 204;
        return response;
      }
    }
  }

  fail(ErrorCode::NotFound, "no endpoint for " + method + " " + request.path);
}

LogLevel parse_log_level(std::string_view text) {
  std::string level = to_lower(text);
  if (level == "debug") return LogLevel::Debug;
  if (level == "info") return LogLevel::Info;
  if (level == "warn" || level == "warning") return LogLevel::Warn;
  if (level == "error") return LogLevel::Error;
  if (level == "off") return LogLevel::Off;
  fail(ErrorCode::ConfigError, "unknown log level '" + std::string(text) + "'");
}

void parse_listen(const std::string& listen, std::string& host, int& port) {
  auto colon = listen.rfind(':');
  std::uint64_t value = 0;
  if (colon == std::string::npos || colon == 0 || !parse_uint(listen.substr(colon + 1), value) || value > 65535) {
    fail(ErrorCode::ConfigError, "listen address must look like host:port, got '" + listen + "'");
  }
  host = listen.substr(0, colon);
  port = static_cast<int>(value);
}

ServiceConfig service_config_from_json_text(const std::string& text, const std::string& base_dir) {
  Json j;
  try {
    j = wire::parse_json(text);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ConfigError, "config must be a JSON object");
  auto resolve = [&](const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / path).lexically_normal().string();
  };
  try {
    ServiceConfig config;
    if (j.contains("listen")) parse_listen(j["listen"].get<std::string>(), config.host, config.port);
    if (j.contains("storage")) {
      const Json& s = j["storage"];
      config.storage.kind = s.value("kind", "memory");
      config.storage.root = resolve(s.value("root", ""));
      config.storage.base_url = s.value("base_url", "");
    }
    config.executor_path = resolve(j.value("executor", ""));
    if (j.contains("log_level")) config.log_level = parse_log_level(j["log_level"].get<std::string>());
    if (config.storage.kind == "file" && config.storage.root.empty()) {
      fail(ErrorCode::ConfigError, "file storage needs a root");
    }
    if (config.storage.kind == "remote" && !is_valid_base_url(config.storage.base_url)) {
      fail(ErrorCode::ConfigError, "remote storage needs a base_url like http://host:port");
    }
    if (config.storage.kind != "memory" && config.storage.kind != "file" && config.storage.kind != "remote") {
      fail(ErrorCode::ConfigError, "storage kind must be memory, file or remote");
    }
    return config;
  } catch (const Json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("malformed config: ") + e.what());
  }
}

namespace {
std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigError, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}
}  // namespace

ServiceConfig load_service_config(const std::string& path) {
  return service_config_from_json_text(read_file(path), std::filesystem::path(path).parent_path().string());
}

std::unique_ptr<ClusterStorage> open_storage(const StorageConfig& config) {
  if (config.kind == "memory") return std::make_unique<MemoryStorage>();
  if (config.kind == "file") {
    try {
      return std::make_unique<FileStorage>(config.root);
    } catch (const Error& e) {
      fail(ErrorCode::ConfigError, e.what());
    }
  }
  if (config.kind == "remote") return std::make_unique<RemoteStorage>(config.base_url);
  fail(ErrorCode::ConfigError, "unknown storage kind '" + config.kind + "'");
}

sim::ExecutorConfig load_executor_config(const std::string& path) {
  if (path.empty()) return sim::ExecutorConfig{};
  Json j;
  try {
    j = wire::parse_json(read_file(path));
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, path + ": " + e.what());
  }
  return wire::executor_config_from_json(j);
}

struct HttpService::Impl {
  ApiRouter& router;
  LogLevel log_level;
  httplib::Server server;
  std::thread thread;
  bool bound = false;

  Impl(ApiRouter& r, LogLevel level) : router(r), log_level(level) {}

  void serve(const httplib::Request& req, httplib::Response& res, const char* method) {
    ApiRequest request;
    request.method = method;
    request.path = req.path;
    for (const auto& [k, v] : req.params) request.query.emplace(k, v);
    for (const auto& [k, v] : req.headers) request.headers.emplace(to_lower(k), v);
    request.body = req.body;
    ApiResponse response = router.handle(request);
    res.status = response.status;
    for (const auto& [k, v] : response.headers) res.set_header(k, v);
    if (!response.body.empty() || response.status != 204) res.set_content(response.body, response.content_type);
    if (log_level <= LogLevel::Info) {
      std::cerr << "[info] " << method << " " << req.path << " -> " << response.status << "\n";
    }
  }
};

HttpService::HttpService(ApiRouter& router, LogLevel log_level)
    : impl_(std::make_unique<Impl>(router, log_level)) {
  auto& s = impl_->server;
  Impl* impl = impl_.get();
  s.set_tcp_nodelay(true);
  // Without SO_REUSEPORT, so a taken port is a bind failure.
  s.set_socket_options([](auto sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  s.Get(".*", [impl](const httplib::Request& req, httplib::Response& res) { impl->serve(req, res, "GET"); });
  s.Post(".*", [impl](const httplib::Request& req, httplib::Response& res) { impl->serve(req, res, "POST"); });
  s.Put(".*", [impl](const httplib::Request& req, httplib::Response& res) { impl->serve(req, res, "PUT"); });
  s.Delete(".*", [impl](const httplib::Request& req, httplib::Response& res) { impl->serve(req, res, "DELETE"); });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  int bound = 0;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) fail(ErrorCode::BindFailure, "cannot bind " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      fail(ErrorCode::BindFailure, "cannot bind " + host + ":" + std::to_string(port));
    }
    bound = port;
  }
  impl_->bound = true;
  return bound;
}

void HttpService::run() { impl_->server.listen_after_bind(); }

int HttpService::start_background(const std::string& host, int port) {
  int bound = bind(host, port);
  impl_->thread = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpService::stop() {
  if (impl_->bound) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->bound = false;
}

}  // namespace provkernel::service
