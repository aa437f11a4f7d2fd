#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "backends.hpp"
#include "generators.hpp"
#include "provkernel/documents.hpp"
#include "provkernel/error.hpp"
#include "provkernel/storage.hpp"
#include "provkernel/xml.hpp"

using namespace provkernel;
using provkernel::testing::Backend;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no provkernel::Error thrown";
  return ErrorCode::Internal;
}

std::string property(const std::string& key, const std::string& value) {
  return xml::write(docs::encode_property(key, value));
}

class StorageContract : public ::testing::TestWithParam<std::string> {
 protected:
  void SetUp() override { backend = provkernel::testing::make_backend(GetParam()); }
  ClusterStorage& store() { return backend->storage(); }
  std::unique_ptr<Backend> backend;
  ItemPath item = ItemPath::generate();
};

}  // namespace

TEST_P(StorageContract, PutGetFindOverwrite) {
  ClusterPath p = ClusterPath::make(item, ClusterKind::Property, "name");
  EXPECT_FALSE(store().find(p));
  EXPECT_EQ(code_of([&] { store().get(p); }), ErrorCode::NotFound);
  store().put({p, property("name", "one"), {}}, true);
  StoredDocument doc = store().get(p);
  EXPECT_EQ(docs::decode_property(xml::parse(doc.body)), "one");
  EXPECT_FALSE(doc.written_at.empty());
  EXPECT_EQ(code_of([&] { store().put({p, property("name", "two"), {}}, true); }), ErrorCode::AlreadyExists);
  store().put({p, property("name", "two"), {}}, false);
  EXPECT_EQ(docs::decode_property(xml::parse(store().get(p).body)), "two");
}

TEST_P(StorageContract, RejectsInvalidDocuments) {
  ClusterPath p = ClusterPath::make(item, ClusterKind::Property, "x");
  EXPECT_EQ(code_of([&] { store().put({p, "not xml", {}}, false); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { store().put({p, "<event/>", {}}, false); }), ErrorCode::SchemaViolation);
  EXPECT_FALSE(store().find(p));
}

TEST_P(StorageContract, EventsAndWorkflowsAreImmutable) {
  ClusterPath e = ClusterPath::make(item, ClusterKind::Event, "000001/000001");
  Event event;
  event.item = item;
  event.seq = 1;
  event.execution = {item, 1};
  event.node = "a";
  event.agent = "ce";
  event.at = now_utc();
  std::string body = xml::write(docs::encode_event(event));
  store().put({e, body, {}}, false);
  EXPECT_EQ(code_of([&] { store().put({e, body, {}}, false); }), ErrorCode::AlreadyExists);
  EXPECT_EQ(code_of([&] { store().remove(e); }), ErrorCode::ImmutableCluster);
  EXPECT_EQ(docs::decode_event(xml::parse(store().get(e).body)), event);

  ClusterPath w = ClusterPath::make(item, ClusterKind::Workflow, "000001");
  EXPECT_EQ(code_of([&] { store().remove(w); }), ErrorCode::ImmutableCluster);
}

TEST_P(StorageContract, RemoveAndNotFound) {
  ClusterPath p = ClusterPath::make(item, ClusterKind::View, "latest/a");
  store().put({p, xml::write(docs::encode_view("latest", ClusterPath::make(item, ClusterKind::Outcome, "x"))), {}},
              false);
  store().remove(p);
  EXPECT_FALSE(store().find(p));
  EXPECT_EQ(code_of([&] { store().remove(p); }), ErrorCode::NotFound);
}

TEST_P(StorageContract, ListIsSortedAndPrefixFiltered) {
  for (const char* path : {"b/2", "a/10", "a/1", "c", "ab"}) {
    store().put({ClusterPath::make(item, ClusterKind::Property, path), property("k", path), {}}, false);
  }
  store().put({ClusterPath::make(item, ClusterKind::Agent, "ce"), xml::write(docs::encode_agent({"ce", "", {}})), {}},
              false);
  std::vector<std::string> all;
  for (const auto& p : store().list(item, ClusterKind::Property, "")) all.push_back(p.path);
  EXPECT_EQ(all, (std::vector<std::string>{"a/1", "a/10", "ab", "b/2", "c"}));
  std::vector<std::string> prefixed;
  for (const auto& p : store().list(item, ClusterKind::Property, "a/")) prefixed.push_back(p.path);
  EXPECT_EQ(prefixed, (std::vector<std::string>{"a/1", "a/10"}));
  EXPECT_TRUE(store().list(item, ClusterKind::Event, "").empty());
  EXPECT_TRUE(store().list(ItemPath::generate(), ClusterKind::Property, "").empty());

  ItemPath other = ItemPath::generate();
  store().put({ClusterPath::make(other, ClusterKind::Property, "k"), property("k", "v"), {}}, false);
  std::vector<ItemPath> expected{item, other};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(store().items(), expected);
}

TEST_P(StorageContract, CreateIfAbsentHasOneWinner) {
  ClusterPath p = ClusterPath::make(item, ClusterKind::Property, "race");
  std::atomic<int> wins{0}, losses{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      try {
        store().put({p, property("race", std::to_string(t)), {}}, true);
        ++wins;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::AlreadyExists) ++losses;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(wins.load(), 1);
  EXPECT_EQ(losses.load(), 3);
}

TEST_P(StorageContract, SurvivesReopen) {
  ClusterPath p = ClusterPath::make(item, ClusterKind::Property, "k");
  store().put({p, property("k", "v"), {}}, false);
  backend->reopen();
  if (GetParam() == "memory") GTEST_SKIP() << "memory storage has nothing to reopen";
  EXPECT_EQ(docs::decode_property(xml::parse(store().get(p).body)), "v");
  EXPECT_EQ(store().items(), std::vector<ItemPath>{item});
}

INSTANTIATE_TEST_SUITE_P(Backends, StorageContract, ::testing::Values("memory", "file", "remote"),
                         [](const auto& info) { return info.param; });

TEST(FileStorage, LayoutOnDisk) {
  provkernel::testing::TempDir dir;
  FileStorage store(dir.path());
  ItemPath item = ItemPath::generate();
  store.put({ClusterPath::make(item, ClusterKind::Outcome, "000001/000002"),
             xml::write(docs::encode_payload("x")), {}},
            false);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "items" / item.str() / "outcomes" / "000001" / "000002.xml"));
  FileStorage reopened(dir.path());
  EXPECT_EQ(reopened.list(item, ClusterKind::Outcome, "").size(), 1u);
  EXPECT_EQ(reopened.backend_id(), "file:" + dir.path().string());
}

TEST(Documents, WorkflowRoundTrip) {
  provkernel::testing::Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    WorkflowSpec spec = provkernel::testing::random_dag(rng);
    std::string text = xml::write(docs::encode_workflow(spec));
    WorkflowSpec back = docs::decode_workflow(xml::parse(text));
    EXPECT_EQ(back, spec);
    EXPECT_EQ(xml::write(docs::encode_workflow(back)), text);
  }
}

TEST(Documents, OutcomeMarkerAnnotationAgentRoundTrip) {
  ItemPath item = ItemPath::generate();
  DataRef ref{"a/out", sha256_hex("x"), 1, ClusterPath::make(item, ClusterKind::Outcome, "payloads/p"),
              MediaHint::NumericVector};
  Outcome outcome{{{"out", ref}}, "line one\nline <two>", std::nullopt};
  EXPECT_EQ(docs::decode_outcome(xml::parse(xml::write(docs::encode_outcome(outcome, "a", 1)))), outcome);
  Outcome failed{{}, "", OutcomeError{"CODE", "went & failed"}};
  EXPECT_EQ(docs::decode_outcome(xml::parse(xml::write(docs::encode_outcome(failed, "a", 1)))), failed);

  docs::ExecutionMarker marker{3, 2, "head", "2026-01-01T00:00:00.000Z", {{"data", ref}}};
  auto m = docs::decode_execution_marker(xml::parse(xml::write(docs::encode_execution_marker(marker))));
  EXPECT_EQ(m.run, 3);
  EXPECT_EQ(m.version, 2);
  EXPECT_EQ(m.head, "head");
  EXPECT_EQ(m.inputs, marker.inputs);

  Annotation a{"me", "t", "note <b>", {"x", "y"}, "n1"};
  EXPECT_EQ(docs::decode_annotation_property(xml::parse(xml::write(docs::encode_annotation_property(a, 2)))), a);
  AgentDesc agent{"ce", "desc", {{"k", "v"}}};
  EXPECT_EQ(docs::decode_agent(xml::parse(xml::write(docs::encode_agent(agent)))), agent);
  std::vector<ClusterPath> members{ref.payload_path.value()};
  EXPECT_EQ(docs::decode_collection(xml::parse(xml::write(docs::encode_collection("c", members)))), members);
  EXPECT_EQ(docs::decode_payload(xml::parse(xml::write(docs::encode_payload(std::string("\0\xff", 2))))),
            std::string("\0\xff", 2));
}

TEST(Documents, DecodersRejectForeignShapes) {
  EXPECT_EQ(code_of([] { docs::decode_payload(xml::parse("<outcome/>")); }), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([] { docs::decode_data_ref(xml::parse("<ref name=\"x\" digest=\"nothex\" size=\"1\"/>")); }),
            ErrorCode::SchemaViolation);
}
