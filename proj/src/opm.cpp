#include "provkernel/opm.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "provkernel/error.hpp"
#include "provkernel/xml.hpp"

namespace provkernel::opm {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Process: return "Process";
    case NodeKind::Artifact: return "Artifact";
    case NodeKind::Agent: return "Agent";
  }
  return "Process";
}

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Used: return "Used";
    case EdgeKind::WasGeneratedBy: return "WasGeneratedBy";
    case EdgeKind::WasControlledBy: return "WasControlledBy";
    case EdgeKind::WasTriggeredBy: return "WasTriggeredBy";
    case EdgeKind::WasDerivedFrom: return "WasDerivedFrom";
  }
  return "Used";
}

std::string_view element_name(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Used: return "used";
    case EdgeKind::WasGeneratedBy: return "wasGeneratedBy";
    case EdgeKind::WasControlledBy: return "wasControlledBy";
    case EdgeKind::WasTriggeredBy: return "wasTriggeredBy";
    case EdgeKind::WasDerivedFrom: return "wasDerivedFrom";
  }
  return "used";
}

namespace {

constexpr EdgeKind kEdgeKinds[] = {EdgeKind::Used, EdgeKind::WasGeneratedBy, EdgeKind::WasControlledBy,
                                   EdgeKind::WasTriggeredBy, EdgeKind::WasDerivedFrom};

struct Typing {
  NodeKind from;
  NodeKind to;
  bool has_role;
};

Typing typing(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Used: return {NodeKind::Process, NodeKind::Artifact, true};
    case EdgeKind::WasGeneratedBy: return {NodeKind::Artifact, NodeKind::Process, true};
    case EdgeKind::WasControlledBy: return {NodeKind::Process, NodeKind::Agent, true};
    case EdgeKind::WasTriggeredBy: return {NodeKind::Process, NodeKind::Process, false};
    case EdgeKind::WasDerivedFrom: return {NodeKind::Artifact, NodeKind::Artifact, false};
  }
  return {NodeKind::Process, NodeKind::Artifact, true};
}

std::string describe(const Edge& edge) {
  return std::string(to_string(edge.kind)) + " " + edge.from + "->" + edge.to;
}

// Tarjan's algorithm; returns components with more than one member or a self loop.
std::vector<std::vector<std::string>> cyclic_components(const std::map<std::string, std::set<std::string>>& adj) {
  std::map<std::string, int> index;
  std::map<std::string, int> low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  int counter = 0;

  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    auto it = adj.find(v);
    if (it != adj.end()) {
      for (const auto& w : it->second) {
        if (!index.count(w)) {
          visit(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack.count(w)) {
          low[v] = std::min(low[v], index[w]);
        }
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> component;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        component.push_back(w);
      } while (w != v);
      bool self_loop = it != adj.end() && it->second.count(v);
      if (component.size() > 1 || self_loop) {
        std::sort(component.begin(), component.end());
        out.push_back(std::move(component));
      }
    }
  };
  for (const auto& [v, targets] : adj) {
    if (!index.count(v)) visit(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

const Node* Graph::find(const std::string& id) const {
  for (const auto& node : nodes) {
    if (node.id == id) return &node;
  }
  return nullptr;
}

std::vector<Violation> validate_graph(const Graph& graph) {
  std::vector<Violation> out;
  std::map<std::string, NodeKind> kinds;
  for (const auto& node : graph.nodes) {
    if (node.id.empty()) {
      out.push_back({"missing-endpoint", "", "node without an id"});
      continue;
    }
    if (!kinds.emplace(node.id, node.kind).second) {
      out.push_back({"duplicate-id", node.id, "node id appears more than once"});
    }
  }

  std::map<std::string, std::set<std::string>> adj;
  for (const auto& edge : graph.edges) {
    Typing rule = typing(edge.kind);
    auto from = kinds.find(edge.from);
    auto to = kinds.find(edge.to);
    bool endpoints = true;
    if (from == kinds.end()) {
      out.push_back({"missing-endpoint", describe(edge), "no node '" + edge.from + "'"});
      endpoints = false;
    }
    if (to == kinds.end()) {
      out.push_back({"missing-endpoint", describe(edge), "no node '" + edge.to + "'"});
      endpoints = false;
    }
    if (endpoints && (from->second != rule.from || to->second != rule.to)) {
      out.push_back({"typing", describe(edge),
                     std::string(to_string(edge.kind)) + " runs " + std::string(to_string(rule.from)) + "->" +
                         std::string(to_string(rule.to)) + ", found " +
                         std::string(to_string(from->second)) + "->" + std::string(to_string(to->second))});
    }
    if (!rule.has_role && !edge.role.empty()) {
      out.push_back({"role", describe(edge), std::string(to_string(edge.kind)) + " takes no role"});
    }
    adj[edge.from].insert(edge.to);
  }

  for (const auto& component : cyclic_components(adj)) {
    out.push_back({"acyclicity", join(component, ","), "causal dependencies form a cycle"});
  }
  return out;
}

Graph canonical(Graph graph) {
  std::sort(graph.nodes.begin(), graph.nodes.end(), [](const Node& a, const Node& b) {
    if (a.id != b.id) return a.id < b.id;
    return a.kind < b.kind;
  });
  std::sort(graph.edges.begin(), graph.edges.end());
  return graph;
}

bool isomorphic(const Graph& a, const Graph& b) {
  Graph ca = canonical(a);
  Graph cb = canonical(b);
  return ca.nodes == cb.nodes && ca.edges == cb.edges;
}

namespace {

std::string_view node_element(NodeKind kind) {
  switch (kind) {
    case NodeKind::Process: return "process";
    case NodeKind::Artifact: return "artifact";
    case NodeKind::Agent: return "agent";
  }
  return "process";
}

std::string_view container_element(NodeKind kind) {
  switch (kind) {
    case NodeKind::Process: return "processes";
    case NodeKind::Artifact: return "artifacts";
    case NodeKind::Agent: return "agents";
  }
  return "processes";
}

[[noreturn]] void schema(const xml::Element& at, const std::string& message) {
  fail(ErrorCode::SchemaViolation, at.position() + ": " + message);
}

}  // namespace

std::string export_xml(const Graph& graph) {
  auto violations = validate_graph(graph);
  if (!violations.empty()) {
    const auto& v = violations.front();
    fail(ErrorCode::InvalidGraph, v.rule + " violation at " + v.subject + ": " + v.detail);
  }
  Graph g = canonical(graph);
  xml::Element root("opmGraph");
  root.set("version", "1.1");
  for (NodeKind kind : {NodeKind::Process, NodeKind::Artifact, NodeKind::Agent}) {
    xml::Element container{std::string(container_element(kind))};
    for (const auto& node : g.nodes) {
      if (node.kind != kind) continue;
      xml::Element element{std::string(node_element(kind))};
      element.set("id", node.id);
      element.set("label", node.label);
      for (const auto& [key, value] : node.attrs) {
        xml::Element attr("attr");
        attr.set("key", key);
        attr.with_text(value);
        element.add(std::move(attr));
      }
      container.add(std::move(element));
    }
    root.add(std::move(container));
  }
  xml::Element deps("causalDependencies");
  for (const auto& edge : g.edges) {
    xml::Element element{std::string(element_name(edge.kind))};
    element.set("from", edge.from);
    element.set("to", edge.to);
    if (typing(edge.kind).has_role) element.set("role", edge.role);
    deps.add(std::move(element));
  }
  root.add(std::move(deps));
  return xml::write(root);
}

Graph import_xml(std::string_view text) {
  xml::Element root = xml::parse(text);
  if (root.name != "opmGraph") schema(root, "root element must be <opmGraph>, found <" + root.name + ">");
  xml::expect_only_attributes(root, {"version"});
  if (root.required_attr("version") != "1.1") schema(root, "unsupported opmGraph version");
  xml::expect_no_text(root);

  static const char* const kOrder[] = {"processes", "artifacts", "agents", "causalDependencies"};
  if (root.children.size() != 4) schema(root, "<opmGraph> must contain exactly four sections");
  for (std::size_t i = 0; i < 4; ++i) {
    if (root.children[i].name != kOrder[i]) {
      schema(root.children[i], std::string("expected <") + kOrder[i] + ">, found <" + root.children[i].name + ">");
    }
    xml::expect_only_attributes(root.children[i], {});
    xml::expect_no_text(root.children[i]);
  }

  Graph graph;
  const NodeKind kinds[] = {NodeKind::Process, NodeKind::Artifact, NodeKind::Agent};
  for (std::size_t i = 0; i < 3; ++i) {
    for (const auto& element : root.children[i].children) {
      if (element.name != node_element(kinds[i])) {
        schema(element, "unexpected <" + element.name + "> in <" + root.children[i].name + ">");
      }
      xml::expect_only_attributes(element, {"id", "label"});
      xml::expect_no_text(element);
      Node node;
      node.id = element.required_attr("id");
      node.kind = kinds[i];
      node.label = element.attr_or("label", "");
      for (const auto& attr : element.children) {
        if (attr.name != "attr") schema(attr, "unexpected <" + attr.name + "> in <" + element.name + ">");
        xml::expect_only_attributes(attr, {"key"});
        xml::expect_no_children(attr);
        const std::string& key = attr.required_attr("key");
        if (!node.attrs.emplace(key, attr.text).second) schema(attr, "duplicate attr key '" + key + "'");
      }
      graph.nodes.push_back(std::move(node));
    }
  }
  for (const auto& element : root.children[3].children) {
    const EdgeKind* kind = nullptr;
    for (const auto& candidate : kEdgeKinds) {
      if (element.name == element_name(candidate)) kind = &candidate;
    }
    if (!kind) schema(element, "unexpected <" + element.name + "> in <causalDependencies>");
    if (typing(*kind).has_role) {
      xml::expect_only_attributes(element, {"from", "to", "role"});
    } else {
      xml::expect_only_attributes(element, {"from", "to"});
    }
    xml::expect_no_children(element);
    xml::expect_no_text(element);
    graph.edges.push_back(
        Edge{*kind, element.required_attr("from"), element.required_attr("to"), element.attr_or("role", "")});
  }

  auto violations = validate_graph(graph);
  if (!violations.empty()) {
    const auto& v = violations.front();
    fail(ErrorCode::InvalidGraph, v.rule + " violation at " + v.subject + ": " + v.detail);
  }
  return graph;
}

namespace {

class GraphBuilder {
 public:
  void add_node(Node node) {
    if (index_.count(node.id)) return;
    index_[node.id] = graph_.nodes.size();
    graph_.nodes.push_back(std::move(node));
  }
  bool has_node(const std::string& id) const { return index_.count(id) > 0; }

  void add_edge(Edge edge) {
    if (!edges_.insert(edge).second) return;
    adj_[edge.from].insert(edge.to);
    graph_.edges.push_back(std::move(edge));
  }

  // True if `to` is reachable from `from` over edges added so far.
  bool reaches(const std::string& from, const std::string& to) const {
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
      std::string v = stack.back();
      stack.pop_back();
      if (v == to) return true;
      auto it = adj_.find(v);
      if (it == adj_.end()) continue;
      for (const auto& w : it->second) {
        if (seen.insert(w).second) stack.push_back(w);
      }
    }
    return false;
  }

  Graph take() { return std::move(graph_); }

 private:
  Graph graph_;
  std::map<std::string, std::size_t> index_;
  std::set<Edge> edges_;
  std::map<std::string, std::set<std::string>> adj_;
};

Node artifact_node(const std::string& id, const DataRef& ref) {
  return Node{id,
              NodeKind::Artifact,
              ref.name,
              {{"digest", ref.digest}, {"media", std::string(to_string(ref.media))}, {"size", std::to_string(ref.size)}}};
}

}  // namespace

Graph to_opm(const Kernel& kernel, const ExecutionId& execution) {
  WorkflowSpec spec = kernel.execution_spec(execution);
  ExecutionStatus status = kernel.status(execution);
  std::vector<Event> events = kernel.trace(execution);

  std::map<NodeId, std::set<std::string>> node_agents;
  for (const auto& event : events) node_agents[event.node].insert(event.agent);

  auto is_process = [&](const NodeId& node) {
    auto it = status.nodes.find(node);
    return it != status.nodes.end() &&
           (it->second == ActivityState::Complete || it->second == ActivityState::Failed);
  };
  auto proc_id = [&](const NodeId& node) { return "proc:" + std::to_string(execution.run) + ":" + node; };

  std::vector<NodeId> processes;
  for (const auto& node : topological_order(spec)) {
    if (is_process(node)) processes.push_back(node);
  }
  if (processes.empty()) {
    fail(ErrorCode::EmptyExecution, "no node of " + execution.to_string() + " reached Complete or Failed");
  }

  GraphBuilder builder;
  std::set<std::string> agent_ids;
  for (const auto& [node, agents] : node_agents) agent_ids.insert(agents.begin(), agents.end());
  std::map<std::string, AgentDesc> known;
  for (const auto& agent : kernel.agents(execution.item)) known[agent.agent_id] = agent;
  for (const auto& id : agent_ids) {
    Node agent{"ag:" + id, NodeKind::Agent, id, {}};
    if (auto it = known.find(id); it != known.end()) {
      agent.label = it->second.description;
      agent.attrs = it->second.capabilities;
    }
    builder.add_node(std::move(agent));
  }

  std::map<std::pair<NodeId, std::string>, std::string> produced;  // (node, port) -> artifact id
  for (const auto& node_id : processes) {
    const ActivityNode& node = *spec.find(node_id);
    Outcome outcome = kernel.latest_outcome(execution, node_id).value_or(Outcome{});
    const std::string pid = proc_id(node_id);
    builder.add_node(Node{pid,
                          NodeKind::Process,
                          node_id,
                          {{"node", node_id},
                           {"run", std::to_string(execution.run)},
                           {"script", node.script_ref()},
                           {"status", status.nodes.at(node_id) == ActivityState::Complete ? "complete" : "failed"}}});

    std::vector<std::string> inputs;
    ResolvedInputs resolved = kernel.resolve_inputs(execution, node_id);
    for (const auto& [port, ref] : resolved.inputs) {
      std::string art = "art:" + ref.digest;
      for (const auto& binding : spec.bindings) {
        if (binding.node != node_id || binding.port != port) continue;
        if (const auto* up = std::get_if<UpstreamSource>(&binding.source)) {
          auto it = produced.find({up->node, up->port});
          if (it != produced.end()) art = it->second;
        }
      }
      if (!builder.has_node(art)) builder.add_node(artifact_node(art, ref));
      builder.add_edge(Edge{EdgeKind::Used, pid, art, port});
      inputs.push_back(art);
    }

    for (const auto& upstream : predecessors(spec, node_id)) {
      if (is_process(upstream)) builder.add_edge(Edge{EdgeKind::WasTriggeredBy, pid, proc_id(upstream), ""});
    }
    for (const auto& agent : node_agents[node_id]) {
      builder.add_edge(Edge{EdgeKind::WasControlledBy, pid, "ag:" + agent, "executed-on"});
    }

    // One WasGeneratedBy per (artifact, process): ports sharing a digest
    // collapse onto the smallest port name, which map order visits first.
    std::map<std::string, std::string> generated;  // artifact id -> port
    for (const auto& [port, ref] : outcome.outputs) {
      std::string art = "art:" + ref.digest;
      if (builder.reaches(pid, art)) art += "/" + node_id + "/" + port;
      if (!builder.has_node(art)) builder.add_node(artifact_node(art, ref));
      produced[{node_id, port}] = art;
      if (generated.emplace(art, port).second) builder.add_edge(Edge{EdgeKind::WasGeneratedBy, art, pid, port});
    }
    for (const auto& [art, port] : generated) {
      for (const auto& input : inputs) {
        if (art == input || builder.reaches(input, art)) continue;
        builder.add_edge(Edge{EdgeKind::WasDerivedFrom, art, input, ""});
      }
    }
  }
  return canonical(builder.take());
}

}  // namespace provkernel::opm
