#include "provkernel/workflow.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "provkernel/error.hpp"

namespace provkernel {

std::string_view to_string(MediaHint media) {
  switch (media) {
    case MediaHint::Bytes: return "bytes";
    case MediaHint::NumericVector: return "numeric-vector";
    case MediaHint::Text: return "text";
  }
  return "bytes";
}

MediaHint parse_media_hint(std::string_view text) {
  if (text == "bytes") return MediaHint::Bytes;
  if (text == "numeric-vector") return MediaHint::NumericVector;
  if (text == "text") return MediaHint::Text;
  fail(ErrorCode::BadRequest, "unknown media hint '" + std::string(text) + "'");
}

bool CompositeActivity::operator==(const CompositeActivity& other) const {
  if (sub == other.sub) return true;
  if (!sub || !other.sub) return false;
  return *sub == *other.sub;
}

const std::string& ActivityNode::script_ref() const {
  static const std::string kEmpty;
  if (const auto* single = std::get_if<SingleActivity>(&kind)) return single->script_ref;
  return kEmpty;
}

const WorkflowSpec& ActivityNode::sub() const {
  const auto* composite = std::get_if<CompositeActivity>(&kind);
  if (!composite || !composite->sub) fail(ErrorCode::MalformedSpec, "node '" + id + "' is not a composite");
  return *composite->sub;
}

const ActivityNode* WorkflowSpec::find(std::string_view id) const {
  for (const auto& node : nodes) {
    if (node.id == id) return &node;
  }
  return nullptr;
}

std::vector<NodeId> WorkflowSpec::node_ids() const {
  std::vector<NodeId> ids;
  ids.reserve(nodes.size());
  for (const auto& node : nodes) ids.push_back(node.id);
  return ids;
}

void normalize(WorkflowSpec& spec) {
  std::stable_sort(spec.nodes.begin(), spec.nodes.end(),
                   [](const ActivityNode& a, const ActivityNode& b) { return a.id < b.id; });
  std::sort(spec.deps.begin(), spec.deps.end());
  spec.deps.erase(std::unique(spec.deps.begin(), spec.deps.end()), spec.deps.end());
  std::sort(spec.bindings.begin(), spec.bindings.end());
  spec.bindings.erase(std::unique(spec.bindings.begin(), spec.bindings.end()), spec.bindings.end());
}

namespace {

using Adjacency = std::map<NodeId, std::vector<NodeId>>;

struct Graph {
  Adjacency out;
  Adjacency in;
};

// Edges whose endpoints are both known nodes.
Graph build_graph(const WorkflowSpec& spec) {
  Graph g;
  for (const auto& node : spec.nodes) {
    g.out[node.id];
    g.in[node.id];
  }
  for (const auto& dep : spec.deps) {
    if (!g.out.count(dep.from) || !g.out.count(dep.to)) continue;
    g.out[dep.from].push_back(dep.to);
    g.in[dep.to].push_back(dep.from);
  }
  return g;
}

bool reaches(const Adjacency& out, const NodeId& from, const NodeId& to) {
  std::vector<NodeId> stack{from};
  std::set<NodeId> seen{from};
  while (!stack.empty()) {
    NodeId current = stack.back();
    stack.pop_back();
    if (current == to) return true;
    auto it = out.find(current);
    if (it == out.end()) continue;
    for (const auto& next : it->second) {
      if (seen.insert(next).second) stack.push_back(next);
    }
  }
  return false;
}

// Kahn order; returns fewer ids than nodes when the graph has a cycle.
std::vector<NodeId> kahn(const Graph& g) {
  std::map<NodeId, std::size_t> indegree;
  for (const auto& [id, preds] : g.in) indegree[id] = preds.size();
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (const auto& [id, degree] : indegree) {
    if (degree == 0) ready.push(id);
  }
  std::vector<NodeId> order;
  while (!ready.empty()) {
    NodeId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& next : g.out.at(id)) {
      if (--indegree[next] == 0) ready.push(next);
    }
  }
  return order;
}

std::set<NodeId> transitive_predecessors(const Graph& g, const NodeId& id) {
  std::set<NodeId> seen;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    NodeId current = stack.back();
    stack.pop_back();
    for (const auto& pred : g.in.at(current)) {
      if (seen.insert(pred).second) stack.push_back(pred);
    }
  }
  return seen;
}

bool has_duplicates(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  return std::adjacent_find(values.begin(), values.end()) != values.end();
}

void collect_problems(const WorkflowSpec& spec, const std::string& scope,
                      std::vector<std::string>& problems) {
  auto report = [&](const std::string& message) { problems.push_back(scope + message); };

  if (spec.nodes.empty()) {
    report("workflow has no nodes");
    return;
  }

  std::set<NodeId> ids;
  for (const auto& node : spec.nodes) {
    if (!is_valid_relative_path(node.id)) report("invalid node id '" + node.id + "'");
    if (!ids.insert(node.id).second) report("duplicate node id '" + node.id + "'");
    for (const auto& port : node.declared_inputs) {
      if (!is_valid_relative_path(port)) report("node '" + node.id + "': invalid port name '" + port + "'");
    }
    for (const auto& port : node.declared_outputs) {
      if (!is_valid_relative_path(port)) report("node '" + node.id + "': invalid port name '" + port + "'");
    }
    if (has_duplicates(node.declared_inputs)) report("node '" + node.id + "': duplicate input port");
    if (has_duplicates(node.declared_outputs)) report("node '" + node.id + "': duplicate output port");
    if (const auto* composite = std::get_if<CompositeActivity>(&node.kind)) {
      if (!composite->sub) {
        report("composite '" + node.id + "' has no sub-workflow");
        continue;
      }
      const WorkflowSpec& sub = *composite->sub;
      std::size_t before = problems.size();
      collect_problems(sub, scope + "in composite '" + node.id + "': ", problems);
      if (problems.size() != before) continue;
      for (const auto& binding : sub.bindings) {
        if (const auto* ext = std::get_if<ExternalSource>(&binding.source)) {
          if (std::find(node.declared_inputs.begin(), node.declared_inputs.end(), ext->input) ==
              node.declared_inputs.end()) {
            report("composite '" + node.id + "': sub-workflow input '" + ext->input +
                   "' is not a declared input port");
          }
        }
      }
      for (const auto& port : node.declared_outputs) {
        auto slash = port.rfind('/');
        const ActivityNode* inner =
            slash == std::string::npos ? nullptr : sub.find(port.substr(0, slash));
        std::string inner_port = slash == std::string::npos ? "" : port.substr(slash + 1);
        if (!inner || std::find(inner->declared_outputs.begin(), inner->declared_outputs.end(),
                                inner_port) == inner->declared_outputs.end()) {
          report("composite '" + node.id + "': output '" + port +
                 "' does not name a sub-node output");
        }
      }
    }
  }

  bool edges_ok = true;
  std::set<Dependency> seen_deps;
  for (const auto& dep : spec.deps) {
    if (dep.from == dep.to) {
      report("self dependency on '" + dep.from + "'");
      edges_ok = false;
    }
    if (!ids.count(dep.from) || !ids.count(dep.to)) {
      report("dependency " + dep.from + "->" + dep.to + " references an unknown node");
      edges_ok = false;
    }
    if (!seen_deps.insert(dep).second) report("duplicate dependency " + dep.from + "->" + dep.to);
  }

  Graph g = build_graph(spec);
  bool acyclic = kahn(g).size() == spec.nodes.size();
  if (!acyclic) report("dependency graph has a cycle");

  std::vector<NodeId> roots;
  for (const auto& [id, preds] : g.in) {
    if (preds.empty()) roots.push_back(id);
  }
  if (roots.empty() && acyclic) report("no head node");
  if (roots.size() > 1) report("multiple head nodes: " + join(roots, ", "));
  if (roots.size() == 1 && acyclic && edges_ok) {
    for (const auto& id : ids) {
      if (id != roots.front() && !reaches(g.out, roots.front(), id)) {
        report("node '" + id + "' is unreachable from head '" + roots.front() + "'");
      }
    }
  }

  std::set<std::pair<NodeId, std::string>> bound;
  for (const auto& binding : spec.bindings) {
    const ActivityNode* node = spec.find(binding.node);
    std::string where = "binding " + binding.node + "." + binding.port;
    if (!node) {
      report(where + " references an unknown node");
      continue;
    }
    if (std::find(node->declared_inputs.begin(), node->declared_inputs.end(), binding.port) ==
        node->declared_inputs.end()) {
      report(where + " is not a declared input port");
    }
    if (!bound.insert({binding.node, binding.port}).second) report(where + " bound more than once");
    if (const auto* up = std::get_if<UpstreamSource>(&binding.source)) {
      const ActivityNode* source = spec.find(up->node);
      if (!source) {
        report(where + " reads from unknown node '" + up->node + "'");
        continue;
      }
      if (std::find(source->declared_outputs.begin(), source->declared_outputs.end(), up->port) ==
          source->declared_outputs.end()) {
        report(where + " reads undeclared output " + up->node + "." + up->port);
      }
      if (acyclic && !transitive_predecessors(g, binding.node).count(up->node)) {
        report(where + " reads from '" + up->node + "', which is not a predecessor");
      }
    } else if (std::get<ExternalSource>(binding.source).input.empty()) {
      report(where + " has an empty external input name");
    }
  }
  for (const auto& node : spec.nodes) {
    for (const auto& port : node.declared_inputs) {
      if (!bound.count({node.id, port})) report("input " + node.id + "." + port + " is unbound");
    }
  }

  for (const auto& annotation : spec.annotations) {
    if (annotation.node && !ids.count(*annotation.node)) {
      report("annotation targets unknown node '" + *annotation.node + "'");
    }
  }

  const VersionInfo& v = spec.version_info;
  if (v.version < 1) report("version must be positive");
  if (v.parent && (*v.parent < 1 || *v.parent >= v.version)) {
    report("parent version must be in [1, version)");
  }
}

}  // namespace

std::vector<std::string> spec_problems(const WorkflowSpec& spec) {
  std::vector<std::string> problems;
  collect_problems(spec, "", problems);
  return problems;
}

void require_valid(const WorkflowSpec& spec) {
  auto problems = spec_problems(spec);
  if (!problems.empty()) fail(ErrorCode::MalformedSpec, join(problems, "; "));
}

WorkflowSpec add_dependency(const WorkflowSpec& spec, const Dependency& dep) {
  if (!spec.contains(dep.from)) fail(ErrorCode::UnknownNode, "unknown node '" + dep.from + "'");
  if (!spec.contains(dep.to)) fail(ErrorCode::UnknownNode, "unknown node '" + dep.to + "'");
  if (dep.from == dep.to) fail(ErrorCode::CycleIntroduced, "self dependency on '" + dep.from + "'");
  Graph g = build_graph(spec);
  if (reaches(g.out, dep.to, dep.from)) {
    fail(ErrorCode::CycleIntroduced,
         "dependency " + dep.from + "->" + dep.to + " would introduce a cycle");
  }
  WorkflowSpec result = spec;
  result.deps.push_back(dep);
  normalize(result);
  return result;
}

NodeId head_node(const WorkflowSpec& spec) {
  Graph g = build_graph(spec);
  std::vector<NodeId> roots;
  for (const auto& [id, preds] : g.in) {
    if (preds.empty()) roots.push_back(id);
  }
  if (roots.size() != 1) {
    fail(ErrorCode::MalformedSpec,
         roots.empty() ? "workflow has no head node" : "multiple head nodes: " + join(roots, ", "));
  }
  return roots.front();
}

std::set<NodeId> successors(const WorkflowSpec& spec, std::string_view id) {
  if (!spec.contains(id)) fail(ErrorCode::UnknownNode, "unknown node '" + std::string(id) + "'");
  std::set<NodeId> out;
  for (const auto& dep : spec.deps) {
    if (dep.from == id) out.insert(dep.to);
  }
  return out;
}

std::set<NodeId> predecessors(const WorkflowSpec& spec, std::string_view id) {
  if (!spec.contains(id)) fail(ErrorCode::UnknownNode, "unknown node '" + std::string(id) + "'");
  std::set<NodeId> out;
  for (const auto& dep : spec.deps) {
    if (dep.to == id) out.insert(dep.from);
  }
  return out;
}

std::vector<NodeId> topological_order(const WorkflowSpec& spec) {
  for (const auto& dep : spec.deps) {
    if (!spec.contains(dep.from) || !spec.contains(dep.to)) {
      fail(ErrorCode::MalformedSpec, "dependency references an unknown node");
    }
  }
  Graph g = build_graph(spec);
  auto order = kahn(g);
  if (order.size() != g.out.size()) fail(ErrorCode::MalformedSpec, "dependency graph has a cycle");
  return order;
}

std::set<NodeId> ancestor_closure(const WorkflowSpec& spec, const std::set<NodeId>& targets) {
  Graph g = build_graph(spec);
  std::set<NodeId> closure;
  for (const auto& target : targets) {
    if (!spec.contains(target)) fail(ErrorCode::UnknownNode, "unknown node '" + target + "'");
    closure.insert(target);
    auto preds = transitive_predecessors(g, target);
    closure.insert(preds.begin(), preds.end());
  }
  return closure;
}

std::vector<NodeId> sink_nodes(const WorkflowSpec& spec) {
  Graph g = build_graph(spec);
  std::vector<NodeId> sinks;
  for (const auto& [id, succ] : g.out) {
    if (succ.empty()) sinks.push_back(id);
  }
  return sinks;
}

namespace {

struct Expansion {
  WorkflowSpec flat;
  NodeId head;
  std::vector<NodeId> sinks;
};

std::string prefixed(const NodeId& composite, const NodeId& inner) { return composite + "/" + inner; }

WorkflowSpec flatten_valid(const WorkflowSpec& spec) {
  bool any_composite = std::any_of(spec.nodes.begin(), spec.nodes.end(),
                                   [](const ActivityNode& n) { return n.is_composite(); });
  if (!any_composite) {
    WorkflowSpec copy = spec;
    normalize(copy);
    return copy;
  }

  std::map<NodeId, Expansion> expansions;
  for (const auto& node : spec.nodes) {
    if (!node.is_composite()) continue;
    Expansion e;
    e.flat = flatten_valid(node.sub());
    e.head = head_node(e.flat);
    e.sinks = sink_nodes(e.flat);
    expansions.emplace(node.id, std::move(e));
  }

  // Rewrites an outer-level source so it no longer points at a composite.
  auto rewrite_outer = [&](const std::variant<ExternalSource, UpstreamSource>& source) {
    if (const auto* up = std::get_if<UpstreamSource>(&source)) {
      if (expansions.count(up->node)) {
        auto slash = up->port.rfind('/');
        return std::variant<ExternalSource, UpstreamSource>(UpstreamSource{
            prefixed(up->node, up->port.substr(0, slash)), up->port.substr(slash + 1)});
      }
    }
    return source;
  };

  WorkflowSpec result;
  result.name = spec.name;
  result.version_info = spec.version_info;
  result.metadata = spec.metadata;

  for (const auto& node : spec.nodes) {
    auto it = expansions.find(node.id);
    if (it == expansions.end()) {
      result.nodes.push_back(node);
      continue;
    }
    // Composite-level metadata has no single-node home and is not carried over.
    const Expansion& e = it->second;
    for (ActivityNode inner : e.flat.nodes) {
      inner.id = prefixed(node.id, inner.id);
      result.nodes.push_back(std::move(inner));
    }
    for (const auto& dep : e.flat.deps) {
      result.deps.push_back({prefixed(node.id, dep.from), prefixed(node.id, dep.to)});
    }
    for (const auto& binding : e.flat.bindings) {
      InputBinding rewritten{prefixed(node.id, binding.node), binding.port, binding.source};
      if (const auto* up = std::get_if<UpstreamSource>(&binding.source)) {
        rewritten.source = UpstreamSource{prefixed(node.id, up->node), up->port};
      } else {
        const auto& input = std::get<ExternalSource>(binding.source).input;
        auto outer = std::find_if(spec.bindings.begin(), spec.bindings.end(),
                                  [&](const InputBinding& b) { return b.node == node.id && b.port == input; });
        if (outer == spec.bindings.end()) {
          fail(ErrorCode::MalformedSpec, "composite '" + node.id + "' input '" + input + "' is unbound");
        }
        rewritten.source = rewrite_outer(outer->source);
      }
      result.bindings.push_back(std::move(rewritten));
    }
    for (Annotation annotation : e.flat.annotations) {
      annotation.node = prefixed(node.id, annotation.node ? *annotation.node : e.head);
      result.annotations.push_back(std::move(annotation));
    }
  }

  for (const auto& dep : spec.deps) {
    std::vector<NodeId> from{dep.from};
    if (auto it = expansions.find(dep.from); it != expansions.end()) {
      from.clear();
      for (const auto& sink : it->second.sinks) from.push_back(prefixed(dep.from, sink));
    }
    NodeId to = dep.to;
    if (auto it = expansions.find(dep.to); it != expansions.end()) to = prefixed(dep.to, it->second.head);
    for (const auto& f : from) result.deps.push_back({f, to});
  }

  for (const auto& binding : spec.bindings) {
    if (expansions.count(binding.node)) continue;
    result.bindings.push_back({binding.node, binding.port, rewrite_outer(binding.source)});
  }

  for (Annotation annotation : spec.annotations) {
    if (annotation.node) {
      if (auto it = expansions.find(*annotation.node); it != expansions.end()) {
        annotation.node = prefixed(*annotation.node, it->second.head);
      }
    }
    result.annotations.push_back(std::move(annotation));
  }

  normalize(result);
  require_valid(result);
  return result;
}

void append_token(std::string& out, std::string_view token) {
  out += std::to_string(token.size());
  out.push_back(':');
  out += token;
  out.push_back(' ');
}

void append_structure(std::string& out, const WorkflowSpec& spec) {
  std::vector<const ActivityNode*> nodes;
  for (const auto& node : spec.nodes) nodes.push_back(&node);
  std::sort(nodes.begin(), nodes.end(),
            [](const ActivityNode* a, const ActivityNode* b) { return a->id < b->id; });
  for (const ActivityNode* node : nodes) {
    out += "N ";
    append_token(out, node->id);
    if (node->is_composite()) {
      out += "C ";
      append_token(out, structural_hash(node->sub()));
    } else {
      out += "S ";
      append_token(out, node->script_ref());
    }
    auto inputs = node->declared_inputs;
    auto outputs = node->declared_outputs;
    std::sort(inputs.begin(), inputs.end());
    std::sort(outputs.begin(), outputs.end());
    out += "I " + std::to_string(inputs.size()) + " ";
    for (const auto& port : inputs) append_token(out, port);
    out += "O " + std::to_string(outputs.size()) + " ";
    for (const auto& port : outputs) append_token(out, port);
    out += "M " + std::to_string(node->metadata.size()) + " ";
    for (const auto& [k, v] : node->metadata) {
      append_token(out, k);
      append_token(out, v);
    }
    out += "\n";
  }
  auto deps = spec.deps;
  std::sort(deps.begin(), deps.end());
  deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
  for (const auto& dep : deps) {
    out += "D ";
    append_token(out, dep.from);
    append_token(out, dep.to);
    out += "\n";
  }
  auto bindings = spec.bindings;
  std::sort(bindings.begin(), bindings.end());
  bindings.erase(std::unique(bindings.begin(), bindings.end()), bindings.end());
  for (const auto& binding : bindings) {
    out += "B ";
    append_token(out, binding.node);
    append_token(out, binding.port);
    if (const auto* up = std::get_if<UpstreamSource>(&binding.source)) {
      out += "U ";
      append_token(out, up->node);
      append_token(out, up->port);
    } else {
      out += "E ";
      append_token(out, std::get<ExternalSource>(binding.source).input);
    }
    out += "\n";
  }
}

}  // namespace

WorkflowSpec flatten(const WorkflowSpec& spec) {
  require_valid(spec);
  return flatten_valid(spec);
}

std::string structural_form(const WorkflowSpec& spec) {
  std::string out = "workflow-structure/1\n";
  append_structure(out, spec);
  return out;
}

std::string structural_hash(const WorkflowSpec& spec) { return sha256_hex(structural_form(spec)); }

WorkflowBuilder::WorkflowBuilder(std::string name) { spec_.name = std::move(name); }

WorkflowBuilder& WorkflowBuilder::single(NodeId id, std::string script_ref,
                                         std::vector<std::string> inputs,
                                         std::vector<std::string> outputs, StringMap metadata) {
  spec_.nodes.push_back(ActivityNode{std::move(id), SingleActivity{std::move(script_ref)},
                                     std::move(metadata), std::move(inputs), std::move(outputs)});
  return *this;
}

WorkflowBuilder& WorkflowBuilder::composite(NodeId id, WorkflowSpec sub,
                                            std::vector<std::string> inputs,
                                            std::vector<std::string> outputs, StringMap metadata) {
  spec_.nodes.push_back(
      ActivityNode{std::move(id), CompositeActivity{std::make_shared<const WorkflowSpec>(std::move(sub))},
                   std::move(metadata), std::move(inputs), std::move(outputs)});
  return *this;
}

WorkflowBuilder& WorkflowBuilder::depend(NodeId from, NodeId to) {
  spec_.deps.push_back({std::move(from), std::move(to)});
  return *this;
}

WorkflowBuilder& WorkflowBuilder::bind_external(NodeId node, std::string port, std::string input) {
  spec_.bindings.push_back({std::move(node), std::move(port), ExternalSource{std::move(input)}});
  return *this;
}

WorkflowBuilder& WorkflowBuilder::bind_upstream(NodeId node, std::string port, NodeId from,
                                                std::string from_port) {
  spec_.bindings.push_back(
      {std::move(node), std::move(port), UpstreamSource{std::move(from), std::move(from_port)}});
  return *this;
}

WorkflowBuilder& WorkflowBuilder::annotate(Annotation annotation) {
  spec_.annotations.push_back(std::move(annotation));
  return *this;
}

WorkflowBuilder& WorkflowBuilder::metadata(std::string key, std::string value) {
  spec_.metadata[std::move(key)] = std::move(value);
  return *this;
}

WorkflowBuilder& WorkflowBuilder::version(VersionInfo info) {
  spec_.version_info = std::move(info);
  return *this;
}

WorkflowSpec WorkflowBuilder::build() const {
  WorkflowSpec spec = build_unchecked();
  require_valid(spec);
  return spec;
}

WorkflowSpec WorkflowBuilder::build_unchecked() const {
  WorkflowSpec spec = spec_;
  normalize(spec);
  return spec;
}

}  // namespace provkernel
