#include <gtest/gtest.h>

#include <fstream>
#include <regex>

#include "backends.hpp"
#include "httplib.h"
#include "provkernel/error.hpp"
#include "provkernel/json_codec.hpp"
#include "provkernel/remote_storage.hpp"
#include "provkernel/service.hpp"

using namespace provkernel;
using namespace provkernel::service;
using wire::Json;

namespace {

Json spec_json() {
  return wire::spec_to_json(WorkflowBuilder("pair")
                                .single("a", "concat", {"in"})
                                .single("b", "checksum", {"in"})
                                .depend("a", "b")
                                .bind_external("a", "in", "data")
                                .bind_upstream("b", "in", "a", "out")
                                .build());
}

class RouterTest : public ::testing::Test {
 protected:
  ApiResponse call(const std::string& method, const std::string& path, const Json& body = nullptr,
                   std::map<std::string, std::string> query = {}) {
    ApiRequest request;
    request.method = method;
    request.path = path;
    request.query = std::move(query);
    if (!body.is_null()) request.body = body.dump();
    return router.handle(request);
  }
  Json ok(const ApiResponse& response, int status = 200) {
    EXPECT_EQ(response.status, status) << response.body;
    return Json::parse(response.body);
  }
  std::string code(const ApiResponse& response) { return Json::parse(response.body).at("code").get<std::string>(); }

  std::string create() { return ok(call("POST", "/items", Json{{"workflow", spec_json()}}), 201)["item"]; }

  MemoryStorage storage;
  Kernel kernel{storage};
  ApiRouter router{kernel, sim::ExecutorConfig{}};
};

}  // namespace

TEST(HttpStatus, ClosedMapping) {
  EXPECT_EQ(http_status(ErrorCode::BadRequest), 400);
  EXPECT_EQ(http_status(ErrorCode::MalformedSpec), 400);
  EXPECT_EQ(http_status(ErrorCode::UnknownItem), 404);
  EXPECT_EQ(http_status(ErrorCode::NotFound), 404);
  EXPECT_EQ(http_status(ErrorCode::InvalidTransition), 409);
  EXPECT_EQ(http_status(ErrorCode::AlreadyExists), 409);
  EXPECT_EQ(http_status(ErrorCode::StorageUnavailable), 503);
  EXPECT_EQ(http_status(ErrorCode::Internal), 500);
  ApiResponse r = error_response(ErrorCode::NotEligible, "msg");
  EXPECT_EQ(r.status, 409);
  Json body = Json::parse(r.body);
  EXPECT_EQ(body["code"], "NotEligible");
  EXPECT_EQ(body["message"], "msg");
  EXPECT_TRUE(body.contains("detail"));
}

TEST_F(RouterTest, ItemLifecycle) {
  std::string item = create();
  Json summary = ok(call("GET", "/items/" + item));
  EXPECT_EQ(summary["latest_version"], 1);
  EXPECT_EQ(ok(call("GET", "/items"))["items"], Json::array({item}));
  ok(call("POST", "/items/" + item + "/versions", Json{{"workflow", spec_json()}, {"note", "n"}}), 201);
  EXPECT_EQ(ok(call("GET", "/items/" + item + "/versions/2"))["name"], "pair");
  Json lifecycle = ok(call("GET", "/items/" + item))["lifecycle"];
  ASSERT_EQ(lifecycle.size(), 2u);
  EXPECT_EQ(lifecycle[1]["parent"], 1);
  EXPECT_EQ(code(call("GET", "/items/" + item + "/versions/9")), "UnknownVersion");
  EXPECT_EQ(code(call("GET", "/items/" + ItemPath::generate().str())), "UnknownItem");
  EXPECT_EQ(code(call("GET", "/items/not-a-uuid")), "InvalidPath");
  EXPECT_EQ(call("GET", "/nowhere").status, 404);
  EXPECT_EQ(code(call("POST", "/items", Json{{"workflow", {{"nodes", 1}}}})), "MalformedSpec");
  ApiRequest broken;
  broken.method = "POST";
  broken.path = "/items";
  broken.body = "{";
  EXPECT_EQ(router.handle(broken).status, 400);
}

TEST_F(RouterTest, ExecutionAndEvents) {
  std::string item = create();
  Json started = ok(call("POST", "/items/" + item + "/executions",
                         Json{{"inputs", {{"data", {{"payload", "ab"}}}}}, {"execute", false}}),
                    201);
  std::string exec = started["execution"];
  ExecutionId id = ExecutionId::parse(exec);
  std::string base = "/executions/" + item + "/" + std::to_string(id.run);
  EXPECT_EQ(ok(call("GET", base))["status"]["state"], "Running");
  EXPECT_EQ(code(call("POST", base + "/events", Json{{"node", "b"}, {"transition", "Start"}, {"agent", "sim-ce"}})),
            "NotEligible");
  EXPECT_EQ(call("POST", base + "/events", Json{{"node", "b"}, {"transition", "Start"}, {"agent", "sim-ce"}}).status,
            409);
  EXPECT_EQ(code(call("POST", base + "/events", Json{{"node", "a"}, {"transition", "Jump"}, {"agent", "sim-ce"}})),
            "BadRequest");
  ok(call("POST", base + "/events", Json{{"node", "a"}, {"transition", "Start"}, {"agent", "sim-ce"}}), 201);
  Json done = ok(call("POST", base + "/events",
                      Json{{"node", "a"},
                           {"transition", "CompleteOk"},
                           {"agent", "sim-ce"},
                           {"outcome", {{"outputs", {{"out", "ab"}}}}}}),
                 201);
  EXPECT_EQ(done["seq"], 2);
  Json outcome = ok(call("GET", base + "/outcomes/a"));
  EXPECT_EQ(outcome["outputs"]["out"]["digest"], sha256_hex("ab"));
  EXPECT_EQ(code(call("GET", base + "/outcomes/b")), "NotFound");
  Json finished = ok(call("POST", base + "/run", Json::object()));
  EXPECT_EQ(finished["status"]["state"], "Succeeded");
  EXPECT_EQ(ok(call("GET", base + "/trace")).size(), 4u);

  ApiResponse opm = call("GET", "/items/" + item + "/opm", nullptr, {{"run", std::to_string(id.run)}});
  EXPECT_EQ(opm.status, 200);
  EXPECT_EQ(opm.content_type, "application/xml");
  ApiRequest import;
  import.method = "POST";
  import.path = "/opm/import";
  import.body = opm.body;
  Json imported = ok(router.handle(import));
  EXPECT_EQ(imported["round_trip"], true);
  EXPECT_EQ(imported["processes"], 2);
  import.body = "<opmGraph version=\"1.1\"/>";
  EXPECT_EQ(code(router.handle(import)), "SchemaViolation");
}

TEST_F(RouterTest, MissingInputNamesTheInput) {
  std::string item = create();
  ApiResponse r = call("POST", "/items/" + item + "/executions", Json{{"inputs", Json::object()}});
  EXPECT_EQ(code(r), "MissingInput");
  EXPECT_NE(r.body.find("data"), std::string::npos);
}

TEST_F(RouterTest, AnalysisEndpoints) {
  std::string item = create();
  Json run = ok(call("POST", "/items/" + item + "/executions",
                     Json{{"inputs", {{"data", {{"payload", "ab"}}}}}, {"execute", true}}),
                201);
  EXPECT_EQ(run["status"]["state"], "Succeeded");
  ok(call("POST", "/items/" + item + "/annotations",
          Json{{"annotation", {{"text", "Bad image here"}, {"author", "me"}, {"tags", {"warning"}}}}}),
     201);
  Json hits = ok(call("GET", "/search/annotations", nullptr, {{"q", "bad image"}, {"tags", "warning"}}));
  EXPECT_EQ(hits["hits"].size(), 1u);

  Json same = ok(call("POST", "/validate/spec", Json{{"candidate", spec_json()}, {"blueprint", {{"item", item}, {"version", 1}}}}));
  EXPECT_EQ(same["ok"], true);
  Json diff = ok(call("POST", "/validate/spec",
                      Json{{"candidate", {{"item", item}}}, {"blueprint", wire::spec_to_json(WorkflowBuilder("w").single("a", "concat", {"in"}).bind_external("a", "in", "data").build())}}));
  EXPECT_EQ(diff["ok"], false);

  Json ref{{"schema", "refset.v1"},
           {"expectations",
            {{{"node", "b"},
              {"port", "out"},
              {"comparator", "digest-only"},
              {"expected", {{"digest", sha256_hex(sha256_raw("ab"))}, {"size", 32}}}}}}};
  Json offline = ok(call("POST", "/validate/offline", Json{{"execution", run["execution"]}, {"reference", ref}}));
  EXPECT_EQ(offline["overall"], true) << offline.dump();
  Json online = ok(call("POST", "/validate/online",
                        Json{{"item", item}, {"inputs", {{"data", {{"payload", "zz"}}}}}, {"reference", ref}}));
  EXPECT_EQ(online["overall"], false);
  Json cmp = ok(call("GET", "/compare", nullptr, {{"a", run["execution"]}, {"b", online["execution"]}}));
  EXPECT_EQ(cmp["identical"], false);
  Json self = ok(call("GET", "/compare", nullptr, {{"a", run["execution"]}, {"b", run["execution"]}}));
  EXPECT_EQ(self["identical"], true);
}

TEST_F(RouterTest, StorageEndpoints) {
  std::string item = ItemPath::generate().str();
  ApiRequest put;
  put.method = "PUT";
  put.path = "/storage/" + item + "/properties/k";
  put.body = "<property key=\"k\">v</property>";
  put.headers["if-none-match"] = "*";
  EXPECT_EQ(router.handle(put).status, 201);
  EXPECT_EQ(code(router.handle(put)), "AlreadyExists");
  put.headers.clear();
  EXPECT_EQ(router.handle(put).status, 204);
  ApiResponse doc = call("GET", "/storage/" + item + "/properties/k");
  EXPECT_EQ(doc.status, 200);
  EXPECT_FALSE(doc.headers.at("X-Written-At").empty());
  EXPECT_EQ(ok(call("GET", "/storage/" + item + "/properties"))["paths"], Json::array({"k"}));
  EXPECT_EQ(code(call("GET", "/storage/" + item + "/blobs")), "InvalidPath");
  EXPECT_EQ(call("DELETE", "/storage/" + item + "/properties/k").status, 204);
  EXPECT_EQ(code(call("DELETE", "/storage/" + item + "/events/x")), "ImmutableCluster");
}

TEST_F(RouterTest, RepeatedReadsAreIdentical) {
  std::string item = create();
  Json run = ok(call("POST", "/items/" + item + "/executions",
                     Json{{"inputs", {{"data", {{"payload", "ab"}}}}}, {"execute", true}}),
                201);
  std::string base = "/executions/" + item + "/1";
  for (const std::string& path : {"/items/" + item, base, base + "/trace", base + "/outcomes/b",
                                  "/items/" + item + "/reconstruct", "/items/" + item + "/opm?run=1"}) {
    auto q = path.find('?');
    std::map<std::string, std::string> query;
    if (q != std::string::npos) query["run"] = "1";
    std::string p = path.substr(0, q);
    ApiResponse first = call("GET", p, nullptr, query);
    ApiResponse second = call("GET", p, nullptr, query);
    EXPECT_EQ(first.status, 200) << p;
    EXPECT_EQ(first.body, second.body) << p;
  }
}

TEST(ApiDocs, ErrorTableIsTheClosedCodeSet) {
  std::ifstream in(std::string(PROVKERNEL_FIXTURES) + "/../api.md");
  ASSERT_TRUE(in);
  std::map<std::string, int> documented;
  std::regex row(R"(^\| `(\w+)` \| (\d{3}) \|$)");
  std::smatch m;
  for (std::string line; std::getline(in, line);) {
    if (std::regex_match(line, m, row)) documented[m[1]] = std::stoi(m[2]);
  }
  std::map<std::string, int> actual;
  for (int i = 0; i <= static_cast<int>(ErrorCode::Internal); ++i) {
    auto code = static_cast<ErrorCode>(i);
    actual[std::string(to_string(code))] = http_status(code);
  }
  EXPECT_EQ(documented, actual);
}

TEST(ServiceConfig, ParsesAndResolves) {
  auto config = service_config_from_json_text(
      R"({"listen": "0.0.0.0:9000", "storage": {"kind": "file", "root": "data"}, "executor": "ex.json", "log_level": "debug"})",
      "/etc/pk");
  EXPECT_EQ(config.host, "0.0.0.0");
  EXPECT_EQ(config.port, 9000);
  EXPECT_EQ(config.storage.root, "/etc/pk/data");
  EXPECT_EQ(config.executor_path, "/etc/pk/ex.json");
  EXPECT_EQ(config.log_level, LogLevel::Debug);
  auto code_of = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  EXPECT_EQ(code_of([] { service_config_from_json_text(R"({"storage": {"kind": "tape"}})", "/"); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { service_config_from_json_text(R"({"storage": {"kind": "file"}})", "/"); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { service_config_from_json_text("{", "/"); }), ErrorCode::ConfigError);
  std::string host;
  int port = 0;
  EXPECT_EQ(code_of([&] { parse_listen("nohost", host, port); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { parse_listen("h:99999", host, port); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { load_service_config("/nonexistent/config.json"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { RemoteStorage("ftp://x"); }), ErrorCode::ConfigError);
}

TEST(HttpService, ServesTheRouterAndRejectsTakenPorts) {
  MemoryStorage storage;
  Kernel kernel(storage);
  ApiRouter router(kernel, sim::ExecutorConfig{});
  HttpService http(router, LogLevel::Off);
  int port = http.start_background("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto created = client.Post("/items", spec_json().dump(), "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  auto missing = client.Get("/items/" + ItemPath::generate().str());
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(Json::parse(missing->body)["code"], "UnknownItem");

  HttpService second(router, LogLevel::Off);
  try {
    second.bind("127.0.0.1", port);
    ADD_FAILURE() << "bound a taken port";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BindFailure);
  }
  http.stop();
}
