#pragma once

#include <string>
#include <vector>

#include "provkernel/kernel.hpp"

namespace provkernel::opm {

enum class NodeKind { Process, Artifact, Agent };
enum class EdgeKind { Used, WasGeneratedBy, WasControlledBy, WasTriggeredBy, WasDerivedFrom };

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);
// Element names as they appear in opm.v1 XML.
std::string_view element_name(EdgeKind kind);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Process;
  std::string label;
  StringMap attrs;

  bool operator==(const Node&) const = default;
};

struct Edge {
  EdgeKind kind = EdgeKind::Used;
  std::string from;
  std::string to;
  std::string role;  // empty for WasTriggeredBy and WasDerivedFrom

  auto operator<=>(const Edge&) const = default;
};

struct Graph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  const Node* find(const std::string& id) const;
};

struct Violation {
  std::string rule;     // duplicate-id, missing-endpoint, typing, role, acyclicity
  std::string subject;  // node id, edge "kind from->to", or cycle members
  std::string detail;

  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_graph(const Graph& graph);

// Nodes by id, edges by (kind, from, to, role).
Graph canonical(Graph graph);
bool isomorphic(const Graph& a, const Graph& b);

// Canonical opm.v1 bytes. InvalidGraph if validate_graph reports anything.
std::string export_xml(const Graph& graph);
// Strict: ParseError, SchemaViolation (with line/column), InvalidGraph.
Graph import_xml(std::string_view text);

// Processes for nodes that reached Complete or Failed. Artifacts are shared by
// digest unless sharing would close a cycle, in which case the output gets its
// own "art:<digest>/<node>/<port>" id.
// UnknownExecution; EmptyExecution when no node reached Complete or Failed.
Graph to_opm(const Kernel& kernel, const ExecutionId& execution);

}  // namespace provkernel::opm
