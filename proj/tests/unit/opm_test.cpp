#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"
#include "provkernel/error.hpp"
#include "provkernel/executor.hpp"
#include "provkernel/opm.hpp"

using namespace provkernel;
using namespace provkernel::opm;

namespace {

ErrorCode code_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no provkernel::Error thrown";
  return ErrorCode::Internal;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::set<std::string> rules_of(const Graph& g) {
  std::set<std::string> out;
  for (const auto& v : validate_graph(g)) out.insert(v.rule);
  return out;
}

struct Single {
  MemoryStorage storage;
  Kernel kernel{storage};
  ExecutionId id;

  Single(const std::string& script, const std::string& bytes) {
    auto spec = WorkflowBuilder("checksum-single").single("sum", script, {"in"}).bind_external("sum", "in", "data").build();
    sim::SimExecutor executor(sim::ExecutorConfig{});
    ItemPath item = kernel.create_item(spec, {executor.agent()});
    DataRef ref = kernel.store_payload(item, "data", bytes, MediaHint::Bytes);
    id = kernel.start_execution(item, 1, {{"data", ref}});
    kernel.run_to_completion(id, executor);
  }
};

const std::string kGood =
    "<opmGraph version=\"1.1\"><processes><process id=\"p\" label=\"p\"/></processes>"
    "<artifacts><artifact id=\"a\" label=\"a\"/></artifacts><agents/>"
    "<causalDependencies><used from=\"p\" to=\"a\" role=\"in\"/></causalDependencies></opmGraph>";

}  // namespace

TEST(Opm, SingleNodeExportMatchesFixture) {
  Single run("checksum", "ab");
  Graph g = to_opm(run.kernel, run.id);
  EXPECT_TRUE(validate_graph(g).empty());
  EXPECT_EQ(export_xml(g), read_file(std::string(PROVKERNEL_FIXTURES) + "/checksum-single.opm.xml"));
}

TEST(Opm, FixtureImportsToTheSameGraph) {
  Single run("checksum", "ab");
  Graph fixture = import_xml(read_file(std::string(PROVKERNEL_FIXTURES) + "/checksum-single.opm.xml"));
  EXPECT_TRUE(isomorphic(fixture, to_opm(run.kernel, run.id)));
  EXPECT_EQ(fixture.nodes.size(), 4u);
  EXPECT_EQ(fixture.edges.size(), 4u);
}

TEST(Opm, IdentityTransformMintsADistinctOutput) {
  // concat of one input reproduces its digest; sharing the id would loop.
  Single run("concat", "ab");
  Graph g = to_opm(run.kernel, run.id);
  EXPECT_TRUE(validate_graph(g).empty());
  EXPECT_FALSE(provkernel::testing::opm_has_cycle(g));
  std::string d = sha256_hex("ab");
  EXPECT_TRUE(g.find("art:" + d));
  EXPECT_TRUE(g.find("art:" + d + "/sum/out"));
}

TEST(Opm, FailedNodesAreProcessesWithoutOutputs) {
  MemoryStorage storage;
  Kernel kernel(storage);
  auto spec = WorkflowBuilder("w")
                  .single("a", "concat", {"in"})
                  .single("b", "scale", {"in"})
                  .single("c", "concat", {"in"})
                  .depend("a", "b")
                  .depend("b", "c")
                  .bind_external("a", "in", "data")
                  .bind_upstream("b", "in", "a", "out")
                  .bind_upstream("c", "in", "b", "out")
                  .build();
  sim::SimExecutor executor(sim::ExecutorConfig{});
  ItemPath item = kernel.create_item(spec, {executor.agent()});
  DataRef ref = kernel.store_payload(item, "data", "text", MediaHint::Bytes);
  ExecutionId id = kernel.start_execution(item, 1, {{"data", ref}});
  kernel.run_to_completion(id, executor);
  Graph g = to_opm(kernel, id);
  EXPECT_TRUE(validate_graph(g).empty());
  ASSERT_TRUE(g.find("proc:1:b"));
  EXPECT_EQ(g.find("proc:1:b")->attrs.at("status"), "failed");
  EXPECT_FALSE(g.find("proc:1:c"));
  bool b_generated = false, triggered = false;
  for (const auto& e : g.edges) {
    if (e.kind == EdgeKind::WasGeneratedBy && e.to == "proc:1:b") b_generated = true;
    if (e.kind == EdgeKind::WasTriggeredBy && e.from == "proc:1:b" && e.to == "proc:1:a") triggered = true;
  }
  EXPECT_FALSE(b_generated);
  EXPECT_TRUE(triggered);

  ExecutionId fresh = kernel.start_execution(item, 1, {{"data", ref}});
  EXPECT_EQ(code_of([&] { to_opm(kernel, fresh); }), ErrorCode::EmptyExecution);
  EXPECT_EQ(code_of([&] { to_opm(kernel, {item, 99}); }), ErrorCode::UnknownExecution);
}

TEST(Opm, ValidationRules) {
  Graph g;
  g.nodes = {{"p", NodeKind::Process, "", {}}, {"a", NodeKind::Artifact, "", {}}, {"g", NodeKind::Agent, "", {}}};
  EXPECT_TRUE(validate_graph(g).empty());

  Graph dup = g;
  dup.nodes.push_back({"p", NodeKind::Artifact, "", {}});
  EXPECT_EQ(rules_of(dup), std::set<std::string>{"duplicate-id"});

  Graph missing = g;
  missing.edges.push_back({EdgeKind::Used, "p", "ghost", "in"});
  EXPECT_EQ(rules_of(missing), std::set<std::string>{"missing-endpoint"});

  Graph typing = g;
  typing.edges.push_back({EdgeKind::Used, "a", "p", "in"});
  EXPECT_EQ(rules_of(typing), std::set<std::string>{"typing"});

  Graph role = g;
  role.nodes.push_back({"q", NodeKind::Process, "", {}});
  role.edges.push_back({EdgeKind::WasTriggeredBy, "p", "q", "why"});
  EXPECT_EQ(rules_of(role), std::set<std::string>{"role"});

  Graph cycle = g;
  cycle.nodes.push_back({"b", NodeKind::Artifact, "", {}});
  cycle.edges.push_back({EdgeKind::Used, "p", "a", "in"});
  cycle.edges.push_back({EdgeKind::WasGeneratedBy, "a", "p", "out"});
  EXPECT_EQ(rules_of(cycle), std::set<std::string>{"acyclicity"});
  EXPECT_EQ(code_of([&] { export_xml(cycle); }), ErrorCode::InvalidGraph);
}

TEST(Opm, RandomGraphsRoundTrip) {
  provkernel::testing::Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    Graph g = provkernel::testing::random_opm_graph(rng);
    ASSERT_TRUE(validate_graph(g).empty());
    ASSERT_FALSE(provkernel::testing::opm_has_cycle(g));
    Graph back = import_xml(export_xml(g));
    EXPECT_TRUE(isomorphic(back, g));
    EXPECT_EQ(provkernel::testing::graph_signature(back), provkernel::testing::graph_signature(g));
  }
}

TEST(Opm, IsomorphismIgnoresOrderButNotContent) {
  provkernel::testing::Rng rng(18);
  for (int i = 0; i < 50; ++i) {
    Graph g = provkernel::testing::random_opm_graph(rng);
    Graph shuffled = g;
    std::shuffle(shuffled.nodes.begin(), shuffled.nodes.end(), rng);
    std::shuffle(shuffled.edges.begin(), shuffled.edges.end(), rng);
    EXPECT_TRUE(isomorphic(g, shuffled));
    EXPECT_EQ(export_xml(g), export_xml(shuffled));
    if (!shuffled.nodes.empty()) {
      shuffled.nodes[0].label += "!";
      EXPECT_FALSE(isomorphic(g, shuffled));
    }
  }
}

TEST(Opm, ImportIsStrict) {
  EXPECT_NO_THROW(import_xml(kGood));
  std::string message;
  auto replaced = [](std::string text, const std::string& from, const std::string& to) {
    text.replace(text.find(from), from.size(), to);
    return text;
  };
  EXPECT_EQ(code_of([&] { import_xml("<opmGraph"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { import_xml(replaced(kGood, "1.1", "2.0")); }), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([&] { import_xml(replaced(kGood, "<agents/>", "")); }), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([&] { import_xml(replaced(kGood, "<agents/>", "<agents><robot id=\"r\"/></agents>")); },
                    &message),
            ErrorCode::SchemaViolation);
  EXPECT_NE(message.find("line"), std::string::npos);
  EXPECT_EQ(code_of([&] { import_xml(replaced(kGood, "label=\"p\"", "label=\"p\" colour=\"red\"")); }),
            ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([&] { import_xml(replaced(kGood, "to=\"a\"", "to=\"ghost\"")); }), ErrorCode::InvalidGraph);
  EXPECT_EQ(code_of([&] { import_xml(replaced(kGood, "<processes>", "<artifacts>")); }), ErrorCode::ParseError);
}
