#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "provkernel/address.hpp"
#include "provkernel/util.hpp"

namespace provkernel {

using NodeId = std::string;

enum class MediaHint { Bytes, NumericVector, Text };

std::string_view to_string(MediaHint media);
MediaHint parse_media_hint(std::string_view text);

// Reference to an immutable piece of data by content digest.
struct DataRef {
  std::string name;
  std::string digest;  // 64 hex chars
  std::uint64_t size = 0;
  std::optional<ClusterPath> payload_path;
  MediaHint media = MediaHint::Bytes;

  bool operator==(const DataRef&) const = default;
};

struct WorkflowSpec;

struct SingleActivity {
  std::string script_ref;
  bool operator==(const SingleActivity&) const = default;
};

// A node standing for a whole sub-workflow. Inside `sub`, External bindings
// name the composite's declared input ports; the composite's declared outputs
// are "<sub-node>/<port>" references into the sub-workflow.
struct CompositeActivity {
  std::shared_ptr<const WorkflowSpec> sub;
  bool operator==(const CompositeActivity& other) const;
};

struct ActivityNode {
  NodeId id;
  std::variant<SingleActivity, CompositeActivity> kind;
  StringMap metadata;
  std::vector<std::string> declared_inputs;
  std::vector<std::string> declared_outputs;

  bool is_composite() const { return std::holds_alternative<CompositeActivity>(kind); }
  const std::string& script_ref() const;  // empty for composites
  const WorkflowSpec& sub() const;        // composites only

  bool operator==(const ActivityNode&) const = default;
};

struct Dependency {
  NodeId from;
  NodeId to;
  auto operator<=>(const Dependency&) const = default;
};

struct ExternalSource {
  std::string input;
  auto operator<=>(const ExternalSource&) const = default;
};

struct UpstreamSource {
  NodeId node;
  std::string port;
  auto operator<=>(const UpstreamSource&) const = default;
};

struct InputBinding {
  NodeId node;
  std::string port;
  std::variant<ExternalSource, UpstreamSource> source;

  auto operator<=>(const InputBinding&) const = default;
};

struct Annotation {
  std::string author;
  std::string at;
  std::string text;
  std::vector<std::string> tags;
  std::optional<NodeId> node;  // nullopt targets the whole workflow

  bool operator==(const Annotation&) const = default;
};

struct VersionInfo {
  int version = 1;
  std::optional<int> parent;
  std::string created_at;
  std::string note;

  bool operator==(const VersionInfo&) const = default;
};

// Value type. Collections are kept normalised: nodes sorted by id, deps and
// bindings sorted and unique. Use WorkflowBuilder or normalize() after edits.
struct WorkflowSpec {
  std::string name;
  VersionInfo version_info;
  std::vector<ActivityNode> nodes;
  std::vector<Dependency> deps;
  std::vector<InputBinding> bindings;
  std::vector<Annotation> annotations;
  StringMap metadata;

  const ActivityNode* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::vector<NodeId> node_ids() const;

  bool operator==(const WorkflowSpec&) const = default;
};

void normalize(WorkflowSpec& spec);

// Every invariant violation, in a stable order; empty means valid.
std::vector<std::string> spec_problems(const WorkflowSpec& spec);
// Throws MalformedSpec listing the problems.
void require_valid(const WorkflowSpec& spec);

// Rejects unknown endpoints (UnknownNode), self loops and cycles
// (CycleIntroduced). Usable on partially built specs.
WorkflowSpec add_dependency(const WorkflowSpec& spec, const Dependency& dep);

NodeId head_node(const WorkflowSpec& spec);
std::set<NodeId> successors(const WorkflowSpec& spec, std::string_view id);
std::set<NodeId> predecessors(const WorkflowSpec& spec, std::string_view id);
// Kahn's algorithm, smallest ready id first.
std::vector<NodeId> topological_order(const WorkflowSpec& spec);
// `targets` plus every transitive predecessor.
std::set<NodeId> ancestor_closure(const WorkflowSpec& spec, const std::set<NodeId>& targets);
std::vector<NodeId> sink_nodes(const WorkflowSpec& spec);

// Expands composites recursively; sub-node ids become "<composite>/<id>".
WorkflowSpec flatten(const WorkflowSpec& spec);

// Canonical text of the structure only: name, annotations, version info and
// workflow-level metadata are excluded.
std::string structural_form(const WorkflowSpec& spec);
std::string structural_hash(const WorkflowSpec& spec);

class WorkflowBuilder {
 public:
  explicit WorkflowBuilder(std::string name);

  WorkflowBuilder& single(NodeId id, std::string script_ref,
                          std::vector<std::string> inputs = {},
                          std::vector<std::string> outputs = {"out"}, StringMap metadata = {});
  WorkflowBuilder& composite(NodeId id, WorkflowSpec sub, std::vector<std::string> inputs,
                             std::vector<std::string> outputs, StringMap metadata = {});
  WorkflowBuilder& depend(NodeId from, NodeId to);
  WorkflowBuilder& bind_external(NodeId node, std::string port, std::string input);
  WorkflowBuilder& bind_upstream(NodeId node, std::string port, NodeId from, std::string from_port);
  WorkflowBuilder& annotate(Annotation annotation);
  WorkflowBuilder& metadata(std::string key, std::string value);
  WorkflowBuilder& version(VersionInfo info);

  // Normalises and validates; throws MalformedSpec.
  WorkflowSpec build() const;
  WorkflowSpec build_unchecked() const;

 private:
  WorkflowSpec spec_;
};

}  // namespace provkernel
