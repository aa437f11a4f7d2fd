#include "provkernel/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <pthread.h>

#include "CLI11.hpp"
#include "httplib.h"
#include "provkernel/error.hpp"
#include "provkernel/json_codec.hpp"
#include "provkernel/remote_storage.hpp"
#include "provkernel/service.hpp"

namespace provkernel::cli {

namespace {

using service::ApiRequest;
using service::ApiResponse;
using wire::Json;

class Transport {
 public:
  virtual ~Transport() = default;
  virtual ApiResponse send(const ApiRequest& request) = 0;
};

// The service router over a locally opened store.
class LocalTransport final : public Transport {
 public:
  LocalTransport(const service::StorageConfig& storage, sim::ExecutorConfig executor)
      : storage_(service::open_storage(storage)), kernel_(*storage_), router_(kernel_, std::move(executor)) {}
  ApiResponse send(const ApiRequest& request) override { return router_.handle(request); }

 private:
  std::unique_ptr<ClusterStorage> storage_;
  Kernel kernel_;
  service::ApiRouter router_;
};

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(const std::string& base_url) : client_(base_url) {
    client_.set_read_timeout(300, 0);
    client_.set_write_timeout(300, 0);
  }

  ApiResponse send(const ApiRequest& request) override {
    httplib::Params params(request.query.begin(), request.query.end());
    std::string target = request.path;
    if (!params.empty()) target += "?" + httplib::detail::params_to_query_str(params);
    httplib::Headers headers(request.headers.begin(), request.headers.end());
    httplib::Result result;
    if (request.method == "GET") {
      result = client_.Get(target, headers);
    } else if (request.method == "POST") {
      result = client_.Post(target, headers, request.body, content_type(request));
    } else if (request.method == "PUT") {
      result = client_.Put(target, headers, request.body, content_type(request));
    } else {
      result = client_.Delete(target, headers);
    }
    if (!result) {
      fail(ErrorCode::StorageUnavailable, "cannot reach service: " + httplib::to_string(result.error()));
    }
    ApiResponse response;
    response.status = result->status;
    response.body = result->body;
    response.content_type = result->get_header_value("Content-Type");
    return response;
  }

 private:
  static std::string content_type(const ApiRequest& request) {
    return request.body.starts_with("<") ? "application/xml" : "application/json";
  }
  httplib::Client client_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::BadRequest, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Json read_json_file(const std::string& path) {
  try {
    return wire::parse_json(read_file(path));
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::pair<std::string, std::string> key_value(const std::string& text, const std::string& option) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw CLI::ValidationError(option, "expected name=value, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

struct InputOptions {
  std::vector<std::string> text;
  std::vector<std::string> files;
  std::vector<std::string> hex;
  std::string media = "bytes";
  std::string inputs_file;

  void attach(CLI::App* app) {
    app->add_option("--input", text, "Literal input, name=text");
    app->add_option("--input-file", files, "Input from a file, name=path");
    app->add_option("--input-hex", hex, "Hex encoded input, name=hex");
    app->add_option("--media", media, "Media hint for literal inputs")
        ->check(CLI::IsMember({"bytes", "numeric-vector", "text"}));
    app->add_option("--inputs", inputs_file, "JSON object of inputs");
  }

  Json to_json() const {
    Json inputs = inputs_file.empty() ? Json::object() : read_json_file(inputs_file);
    if (!inputs.is_object()) fail(ErrorCode::BadRequest, inputs_file + ": inputs must be a JSON object");
    for (const auto& t : text) {
      auto [name, value] = key_value(t, "--input");
      inputs[name] = Json{{"payload", value}, {"media", media}};
    }
    for (const auto& f : files) {
      auto [name, path] = key_value(f, "--input-file");
      inputs[name] = Json{{"payload_hex", to_hex(read_file(path))}, {"media", media}};
    }
    for (const auto& h : hex) {
      auto [name, value] = key_value(h, "--input-hex");
      inputs[name] = Json{{"payload_hex", value}, {"media", media}};
    }
    return inputs;
  }
};

struct ExecutionOptions {
  std::string execution;
  std::string item;
  int run = 0;

  void attach(CLI::App* app) {
    app->add_option("--execution", execution, "Execution id <item>:<run>");
    app->add_option("--item", item, "Item id (with --run)");
    app->add_option("--run", run, "Run number (with --item)");
  }

  ExecutionId id() const {
    if (!execution.empty()) return ExecutionId::parse(execution);
    if (item.empty() || run < 1) throw CLI::ValidationError("--execution", "give --execution or --item and --run");
    return ExecutionId{ItemPath::parse(item), run};
  }
};

ApiRequest make(std::string method, std::string path, const Json& body = nullptr) {
  ApiRequest request;
  request.method = std::move(method);
  request.path = std::move(path);
  if (!body.is_null()) request.body = body.dump();
  return request;
}

std::string run_path(const ExecutionId& id) { return "/executions/" + id.item.str() + "/" + std::to_string(id.run); }

void print_status(std::ostream& out, const Json& execution) {
  out << execution["execution"].get<std::string>() << " " << execution["status"]["state"].get<std::string>() << "\n";
  for (const auto& [node, state] : execution["status"]["nodes"].items()) {
    out << "  " << node << ": " << state.get<std::string>() << "\n";
  }
}

bool print_report(std::ostream& out, const Json& report) {
  out << "execution " << report["execution"].get<std::string>() << "\n";
  for (const auto& r : report["results"]) {
    out << (r["matched"].get<bool>() ? "PASS " : "FAIL ") << r["node"].get<std::string>() << "."
        << r["port"].get<std::string>() << ": " << r["detail"].get<std::string>() << "\n";
  }
  bool overall = report["overall"].get<bool>();
  out << (overall ? "OK: all expectations matched" : "FAILED: some expectations unmatched") << "\n";
  return overall;
}

void print_findings(std::ostream& out, const Json& findings) {
  for (const auto& f : findings) {
    std::string location = f["location"].get<std::string>();
    out << f["severity"].get<std::string>() << " " << f["kind"].get<std::string>() << " "
        << (location.empty() ? "(workflow)" : location) << ": " << f["detail"].get<std::string>() << "\n";
  }
}

int serve(const service::ServiceConfig& config, const std::string& listen, std::ostream& out) {
  std::string host = config.host;
  int port = config.port;
  if (!listen.empty()) service::parse_listen(listen, host, port);
  auto storage = service::open_storage(config.storage);
  Kernel kernel(*storage);
  service::ApiRouter router(kernel, service::load_executor_config(config.executor_path));
  service::HttpService http(router, config.log_level);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  int bound = http.start_background(host, port);
  out << "listening on http://" << host << ":" << bound << " (" << storage->backend_id() << ")" << std::endl;
  int signal = 0;
  sigwait(&signals, &signal);
  http.stop();
  out << "stopped" << std::endl;
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Workflow provenance capture, query and validation", "provkernel"};
  app.require_subcommand(1);
  std::string config_path;
  std::string store_dir;
  std::string remote_url;
  std::string executor_path;
  bool json = false;
  app.add_option("--config", config_path, "Config file (default: $PROVKERNEL_CONFIG)");
  app.add_option("--store", store_dir, "File store root");
  app.add_option("--remote", remote_url, "Service base url, e.g. http://127.0.0.1:8080");
  app.add_option("--executor", executor_path, "executor.v1 file");
  app.add_flag("--json", json, "Print JSON responses");

  auto* item_create = app.add_subcommand("item-create", "Store a workflow.v1 spec as a new item");
  std::string spec_file;
  std::vector<std::string> agent_files;
  item_create->add_option("--spec", spec_file, "workflow.v1 file")->required();
  item_create->add_option("--agent", agent_files, "Agent JSON file");

  auto* derive = app.add_subcommand("derive", "Append a new version to an item");
  std::string item;
  std::string note;
  derive->add_option("--item", item)->required();
  derive->add_option("--spec", spec_file)->required();
  derive->add_option("--note", note);

  auto* run = app.add_subcommand("run", "Start an execution and run it with the simulated executor");
  int version = 0;
  bool no_execute = false;
  InputOptions inputs;
  run->add_option("--item", item)->required();
  run->add_option("--version", version, "Spec version (default: latest)");
  run->add_flag("--no-execute", no_execute, "Only start the execution");
  inputs.attach(run);

  auto* record = app.add_subcommand("record", "Record one externally observed transition");
  ExecutionOptions exec;
  std::string node;
  std::string transition;
  std::string agent;
  std::string outcome_file;
  std::vector<std::string> outputs;
  std::string error_code;
  std::string error_message;
  exec.attach(record);
  record->add_option("--node", node)->required();
  record->add_option("--transition", transition)->required();
  record->add_option("--agent", agent)->required();
  record->add_option("--outcome", outcome_file, "Outcome JSON file");
  record->add_option("--output", outputs, "Output port=text");
  record->add_option("--error-code", error_code);
  record->add_option("--error-message", error_message);

  auto* trace = app.add_subcommand("trace", "Print the event log of an execution");
  exec.attach(trace);

  auto* status = app.add_subcommand("status", "Print the status of an execution");
  exec.attach(status);

  auto* reconstruct = app.add_subcommand("reconstruct", "Print a stored version, whole or in part");
  std::vector<std::string> nodes;
  reconstruct->add_option("--item", item)->required();
  reconstruct->add_option("--version", version);
  reconstruct->add_option("--nodes", nodes, "Target nodes; ancestors are included")->delimiter(',');

  auto* validate_spec = app.add_subcommand("validate-spec", "Compare a spec against a blueprint");
  std::string candidate;
  std::string blueprint;
  validate_spec->add_option("--candidate", candidate, "workflow.v1 file")->required();
  validate_spec->add_option("--blueprint", blueprint, "workflow.v1 file")->required();

  auto* validate_offline = app.add_subcommand("validate-offline", "Check a finished execution against refset.v1");
  std::string reference;
  exec.attach(validate_offline);
  validate_offline->add_option("--reference", reference, "refset.v1 file")->required();

  auto* validate_online = app.add_subcommand("validate-online", "Re-execute and check against refset.v1");
  validate_online->add_option("--item", item)->required();
  validate_online->add_option("--version", version);
  validate_online->add_option("--reference", reference, "refset.v1 file")->required();
  inputs.attach(validate_online);

  auto* annotate = app.add_subcommand("annotate", "Attach an annotation to a version");
  std::string text;
  std::string author;
  std::vector<std::string> tags;
  annotate->add_option("--item", item)->required();
  annotate->add_option("--version", version);
  annotate->add_option("--node", node);
  annotate->add_option("--text", text)->required();
  annotate->add_option("--author", author);
  annotate->add_option("--tag", tags);

  auto* search = app.add_subcommand("search", "Search annotations");
  std::string query;
  search->add_option("--query", query);
  search->add_option("--tag", tags);

  auto* compare = app.add_subcommand("compare", "Compare two executions");
  std::string a;
  std::string b;
  compare->add_option("--a", a, "Execution id")->required();
  compare->add_option("--b", b, "Execution id")->required();

  auto* export_opm = app.add_subcommand("export-opm", "Export an execution as opm.v1 XML");
  std::string output_file;
  exec.attach(export_opm);
  export_opm->add_option("--output", output_file, "Write to a file instead of stdout");

  auto* import_opm = app.add_subcommand("import-opm", "Validate an opm.v1 document");
  std::string opm_file;
  import_opm->add_option("file", opm_file)->required();

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  std::string listen;
  serve_cmd->add_option("--listen", listen, "host:port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    service::ServiceConfig config;
    if (config_path.empty()) {
      if (const char* env = std::getenv("PROVKERNEL_CONFIG"); env && *env) config_path = env;
    }
    if (!config_path.empty()) {
      config = service::load_service_config(config_path);
    } else {
      config.storage = service::StorageConfig{"file", "provkernel-store", ""};
    }
    if (!store_dir.empty()) config.storage = service::StorageConfig{"file", store_dir, ""};
    if (!executor_path.empty()) config.executor_path = executor_path;

    if (serve_cmd->parsed()) {
      if (!remote_url.empty()) throw CLI::ValidationError("--remote", "serve needs a local store");
      return serve(config, listen, out);
    }

    sim::ExecutorConfig executor = service::load_executor_config(config.executor_path);
    std::unique_ptr<Transport> transport;
    if (!remote_url.empty()) {
      if (!is_valid_base_url(remote_url)) fail(ErrorCode::ConfigError, "malformed --remote url");
      transport = std::make_unique<HttpTransport>(remote_url);
    } else {
      transport = std::make_unique<LocalTransport>(config.storage, executor);
    }
    // Sent explicitly so local and remote runs use the same executor.
    Json executor_json = config.executor_path.empty() ? Json(nullptr) : wire::executor_config_to_json(executor);

    ApiRequest request;
    if (item_create->parsed()) {
      Json body{{"workflow", read_json_file(spec_file)}, {"agents", Json::array()}};
      for (const auto& f : agent_files) body["agents"].push_back(read_json_file(f));
      if (agent_files.empty()) body["agents"].push_back(wire::agent_to_json(executor.agent));
      request = make("POST", "/items", body);
    } else if (derive->parsed()) {
      request = make("POST", "/items/" + item + "/versions", Json{{"workflow", read_json_file(spec_file)}, {"note", note}});
    } else if (run->parsed()) {
      Json body{{"inputs", inputs.to_json()}, {"execute", !no_execute}, {"executor", executor_json}};
      if (version > 0) body["version"] = version;
      request = make("POST", "/items/" + item + "/executions", body);
    } else if (record->parsed()) {
      Json body{{"node", node}, {"transition", transition}, {"agent", agent}};
      if (!outcome_file.empty() || !outputs.empty() || !error_code.empty()) {
        Json outcome = outcome_file.empty() ? Json::object() : read_json_file(outcome_file);
        for (const auto& o : outputs) {
          auto [port, value] = key_value(o, "--output");
          outcome["outputs"][port] = Json{{"payload", value}};
        }
        if (!error_code.empty()) outcome["error"] = Json{{"code", error_code}, {"message", error_message}};
        body["outcome"] = outcome;
      }
      request = make("POST", run_path(exec.id()) + "/events", body);
    } else if (trace->parsed()) {
      request = make("GET", run_path(exec.id()) + "/trace");
    } else if (status->parsed()) {
      request = make("GET", run_path(exec.id()));
    } else if (reconstruct->parsed()) {
      request = make("GET", "/items/" + item + "/reconstruct");
      if (version > 0) request.query["version"] = std::to_string(version);
      if (!nodes.empty()) request.query["nodes"] = join(nodes, ",");
    } else if (validate_spec->parsed()) {
      request = make("POST", "/validate/spec",
                     Json{{"candidate", read_json_file(candidate)}, {"blueprint", read_json_file(blueprint)}});
    } else if (validate_offline->parsed()) {
      request = make("POST", "/validate/offline",
                     Json{{"execution", exec.id().to_string()}, {"reference", read_json_file(reference)}});
    } else if (validate_online->parsed()) {
      Json body{{"item", item},
                {"reference", read_json_file(reference)},
                {"inputs", inputs.to_json()},
                {"executor", executor_json}};
      if (version > 0) body["version"] = version;
      request = make("POST", "/validate/online", body);
    } else if (annotate->parsed()) {
      Json annotation{{"text", text}, {"author", author}, {"tags", tags}};
      if (!node.empty()) annotation["node"] = node;
      Json body{{"annotation", annotation}};
      if (version > 0) body["version"] = version;
      request = make("POST", "/items/" + item + "/annotations", body);
    } else if (search->parsed()) {
      request = make("GET", "/search/annotations");
      request.query["q"] = query;
      if (!tags.empty()) request.query["tags"] = join(tags, ",");
    } else if (compare->parsed()) {
      request = make("GET", "/compare");
      request.query["a"] = a;
      request.query["b"] = b;
    } else if (export_opm->parsed()) {
      ExecutionId id = exec.id();
      request = make("GET", "/items/" + id.item.str() + "/opm");
      request.query["run"] = std::to_string(id.run);
    } else if (import_opm->parsed()) {
      request = make("POST", "/opm/import");
      request.body = read_file(opm_file);
    }

    ApiResponse response = transport->send(request);
    if (response.status >= 300) {
      Json body = Json::parse(response.body, nullptr, false);
      if (body.is_object() && body.contains("code")) {
        err << "error: " << body["code"].get<std::string>() << ": " << body.value("message", "") << "\n";
      } else {
        err << "error: HTTP " << response.status << "\n";
      }
      return 1;
    }

    if (export_opm->parsed()) {
      if (output_file.empty()) {
        out << response.body;
      } else {
        std::ofstream file(output_file, std::ios::binary);
        file << response.body;
        if (!file) fail(ErrorCode::BadRequest, "cannot write " + output_file);
      }
      return 0;
    }

    Json body = wire::parse_json(response.body);
    int code = 0;
    if (validate_spec->parsed() && !body["ok"].get<bool>()) code = 1;
    if ((validate_offline->parsed() || validate_online->parsed()) && !body["overall"].get<bool>()) code = 1;
    if (import_opm->parsed() && !body["round_trip"].get<bool>()) code = 1;
    if (json || reconstruct->parsed()) {
      out << wire::dump(body);
      return code;
    }

    if (item_create->parsed()) {
      out << body["item"].get<std::string>() << "\n";
    } else if (derive->parsed()) {
      out << "version " << body["version"].get<int>() << "\n";
    } else if (run->parsed() || status->parsed()) {
      print_status(out, body);
    } else if (record->parsed()) {
      out << "seq " << body["seq"].get<int>() << ": " << body["node"].get<std::string>() << " "
          << body["transition"].get<std::string>() << "\n";
    } else if (trace->parsed()) {
      for (const auto& e : body) {
        out << e["seq"].get<int>() << " " << e["node"].get<std::string>() << " "
            << e["transition"].get<std::string>() << " " << e["agent"].get<std::string>() << " "
            << e["at"].get<std::string>() << "\n";
      }
    } else if (validate_spec->parsed()) {
      if (body["findings"].empty()) {
        out << "OK: no findings\n";
      } else {
        print_findings(out, body["findings"]);
      }
    } else if (validate_offline->parsed() || validate_online->parsed()) {
      print_report(out, body);
    } else if (annotate->parsed()) {
      out << "annotation " << body["index"].get<int>() << " on version " << body["version"].get<int>() << "\n";
    } else if (search->parsed()) {
      if (body["hits"].empty()) out << "no matches\n";
      for (const auto& hit : body["hits"]) {
        const Json& ann = hit["annotation"];
        out << hit["item"].get<std::string>() << " v" << hit["version"].get<int>() << " "
            << ann["at"].get<std::string>();
        if (!ann["node"].is_null()) out << " [" << ann["node"].get<std::string>() << "]";
        out << " " << ann["text"].get<std::string>() << "\n";
      }
    } else if (compare->parsed()) {
      if (body["identical"].get<bool>()) {
        out << "identical\n";
      } else {
        print_findings(out, body["spec_findings"]);
        for (const auto& d : body["outcome_diffs"]) {
          out << "outcome " << d["node"].get<std::string>() << ": only in a " << d["only_in_a"].dump()
              << ", only in b " << d["only_in_b"].dump() << ", digest mismatch " << d["digest_mismatch"].dump()
              << "\n";
        }
      }
    } else if (import_opm->parsed()) {
      out << "OK: " << body["processes"].get<int>() << " processes, " << body["artifacts"].get<int>()
          << " artifacts, " << body["agents"].get<int>() << " agents, " << body["edges"].get<int>() << " edges"
          << (body["round_trip"].get<bool>() ? "; round-trip verified" : "; round-trip FAILED") << "\n";
    }
    return code;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace provkernel::cli
