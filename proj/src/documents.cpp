#include "provkernel/documents.hpp"

#include "provkernel/error.hpp"

namespace provkernel::docs {

namespace {

int parse_int_attr(const xml::Element& e, std::string_view key) {
  std::uint64_t value = 0;
  const std::string& text = e.required_attr(key);
  if (!parse_uint(text, value) || value > 0x7fffffff) {
    fail(ErrorCode::SchemaViolation, e.position() + ": attribute '" + std::string(key) +
                                         "' is not a non-negative integer");
  }
  return static_cast<int>(value);
}

void expect_root(const xml::Element& e, std::string_view name) {
  if (e.name != name) {
    fail(ErrorCode::SchemaViolation,
         e.position() + ": expected <" + std::string(name) + ">, found <" + e.name + ">");
  }
}

void encode_metadata(xml::Element& parent, const StringMap& metadata) {
  for (const auto& [k, v] : metadata) parent.add_child("metadata").set("key", k).with_text(v);
}

xml::Element encode_annotation(const Annotation& annotation) {
  xml::Element e("annotation");
  e.set("author", annotation.author).set("at", annotation.at);
  if (annotation.node) e.set("node", *annotation.node);
  e.add_child("text").with_text(annotation.text);
  for (const auto& tag : annotation.tags) e.add_child("tag").with_text(tag);
  return e;
}

Annotation decode_annotation(const xml::Element& e) {
  expect_root(e, "annotation");
  Annotation a;
  a.author = e.required_attr("author");
  a.at = e.required_attr("at");
  if (const auto* node = e.attr("node")) a.node = *node;
  for (const auto& child : e.children) {
    if (child.name == "text") a.text = child.text;
    else if (child.name == "tag") a.tags.push_back(child.text);
    else fail(ErrorCode::SchemaViolation, child.position() + ": unexpected <" + child.name + ">");
  }
  return a;
}

}  // namespace

xml::Element encode_workflow(const WorkflowSpec& spec) {
  xml::Element root("workflow");
  root.set("name", spec.name);
  root.set("version", std::to_string(spec.version_info.version));
  if (spec.version_info.parent) root.set("parent", std::to_string(*spec.version_info.parent));
  root.set("created_at", spec.version_info.created_at);
  if (!spec.version_info.note.empty()) root.add_child("note").with_text(spec.version_info.note);
  encode_metadata(root, spec.metadata);
  for (const auto& node : spec.nodes) {
    xml::Element& n = root.add_child("node");
    n.set("id", node.id);
    if (node.is_composite()) {
      n.set("kind", "composite");
    } else {
      n.set("kind", "single").set("script", node.script_ref());
    }
    encode_metadata(n, node.metadata);
    for (const auto& port : node.declared_inputs) n.add_child("input").set("port", port);
    for (const auto& port : node.declared_outputs) n.add_child("output").set("port", port);
    if (node.is_composite()) n.add(encode_workflow(node.sub()));
  }
  for (const auto& dep : spec.deps) root.add_child("dependency").set("from", dep.from).set("to", dep.to);
  for (const auto& binding : spec.bindings) {
    xml::Element& b = root.add_child("binding");
    b.set("node", binding.node).set("port", binding.port);
    if (const auto* up = std::get_if<UpstreamSource>(&binding.source)) {
      b.set("upstream-node", up->node).set("upstream-port", up->port);
    } else {
      b.set("external", std::get<ExternalSource>(binding.source).input);
    }
  }
  for (const auto& annotation : spec.annotations) root.add(encode_annotation(annotation));
  return root;
}

WorkflowSpec decode_workflow(const xml::Element& e) {
  expect_root(e, "workflow");
  WorkflowSpec spec;
  spec.name = e.required_attr("name");
  spec.version_info.version = parse_int_attr(e, "version");
  if (e.attr("parent")) spec.version_info.parent = parse_int_attr(e, "parent");
  spec.version_info.created_at = e.attr_or("created_at", "");
  for (const auto& child : e.children) {
    if (child.name == "note") {
      spec.version_info.note = child.text;
    } else if (child.name == "metadata") {
      spec.metadata[child.required_attr("key")] = child.text;
    } else if (child.name == "node") {
      ActivityNode node;
      node.id = child.required_attr("id");
      const std::string& kind = child.required_attr("kind");
      std::shared_ptr<const WorkflowSpec> sub;
      for (const auto& part : child.children) {
        if (part.name == "metadata") node.metadata[part.required_attr("key")] = part.text;
        else if (part.name == "input") node.declared_inputs.push_back(part.required_attr("port"));
        else if (part.name == "output") node.declared_outputs.push_back(part.required_attr("port"));
        else if (part.name == "workflow") sub = std::make_shared<const WorkflowSpec>(decode_workflow(part));
        else fail(ErrorCode::SchemaViolation, part.position() + ": unexpected <" + part.name + ">");
      }
      if (kind == "single") {
        node.kind = SingleActivity{child.required_attr("script")};
      } else if (kind == "composite") {
        if (!sub) fail(ErrorCode::SchemaViolation, child.position() + ": composite without <workflow>");
        node.kind = CompositeActivity{std::move(sub)};
      } else {
        fail(ErrorCode::SchemaViolation, child.position() + ": unknown node kind '" + kind + "'");
      }
      spec.nodes.push_back(std::move(node));
    } else if (child.name == "dependency") {
      spec.deps.push_back({child.required_attr("from"), child.required_attr("to")});
    } else if (child.name == "binding") {
      InputBinding b{child.required_attr("node"), child.required_attr("port"), ExternalSource{}};
      if (const auto* ext = child.attr("external")) {
        b.source = ExternalSource{*ext};
      } else {
        b.source = UpstreamSource{child.required_attr("upstream-node"), child.required_attr("upstream-port")};
      }
      spec.bindings.push_back(std::move(b));
    } else if (child.name == "annotation") {
      spec.annotations.push_back(decode_annotation(child));
    } else {
      fail(ErrorCode::SchemaViolation, child.position() + ": unexpected <" + child.name + ">");
    }
  }
  return spec;
}

xml::Element encode_data_ref(const DataRef& ref, std::string name) {
  xml::Element e(std::move(name));
  e.set("name", ref.name).set("digest", ref.digest).set("size", std::to_string(ref.size));
  e.set("media", std::string(to_string(ref.media)));
  if (ref.payload_path) e.set("payload", ref.payload_path->to_string());
  return e;
}

DataRef decode_data_ref(const xml::Element& e) {
  DataRef ref;
  ref.name = e.required_attr("name");
  ref.digest = e.required_attr("digest");
  if (!is_hex_digest(ref.digest)) fail(ErrorCode::SchemaViolation, e.position() + ": malformed digest");
  std::uint64_t size = 0;
  if (!parse_uint(e.required_attr("size"), size)) {
    fail(ErrorCode::SchemaViolation, e.position() + ": malformed size");
  }
  ref.size = size;
  ref.media = parse_media_hint(e.attr_or("media", "bytes"));
  if (const auto* payload = e.attr("payload")) ref.payload_path = ClusterPath::parse(*payload);
  return ref;
}

xml::Element encode_event(const Event& event) {
  xml::Element e("event");
  e.set("item", event.item.str())
      .set("seq", std::to_string(event.seq))
      .set("run", std::to_string(event.execution.run))
      .set("node", event.node)
      .set("transition", std::string(to_string(event.transition)))
      .set("agent", event.agent)
      .set("at", event.at);
  if (event.outcome_path) e.set("outcome", event.outcome_path->to_string());
  return e;
}

Event decode_event(const xml::Element& e) {
  expect_root(e, "event");
  Event event;
  event.item = ItemPath::parse(e.required_attr("item"));
  event.seq = parse_int_attr(e, "seq");
  event.execution = ExecutionId{event.item, parse_int_attr(e, "run")};
  event.node = e.required_attr("node");
  event.transition = parse_transition(e.required_attr("transition"));
  event.agent = e.required_attr("agent");
  event.at = e.attr_or("at", "");
  if (const auto* outcome = e.attr("outcome")) event.outcome_path = ClusterPath::parse(*outcome);
  return event;
}

xml::Element encode_outcome(const Outcome& outcome, const NodeId& node, int run) {
  xml::Element e("outcome");
  e.set("kind", "activity").set("node", node).set("run", std::to_string(run));
  e.add_child("log").with_text(outcome.log);
  if (outcome.error) e.add_child("error").set("code", outcome.error->code).with_text(outcome.error->message);
  for (const auto& [port, ref] : outcome.outputs) e.add(encode_data_ref(ref, "output")).set("port", port);
  return e;
}

Outcome decode_outcome(const xml::Element& e) {
  expect_root(e, "outcome");
  if (e.attr_or("kind", "") != "activity") {
    fail(ErrorCode::SchemaViolation, e.position() + ": not an activity outcome");
  }
  Outcome outcome;
  for (const auto& child : e.children) {
    if (child.name == "log") outcome.log = child.text;
    else if (child.name == "error") outcome.error = OutcomeError{child.required_attr("code"), child.text};
    else if (child.name == "output") outcome.outputs[child.required_attr("port")] = decode_data_ref(child);
    else fail(ErrorCode::SchemaViolation, child.position() + ": unexpected <" + child.name + ">");
  }
  return outcome;
}

xml::Element encode_payload(std::string_view bytes) {
  xml::Element e("outcome");
  e.set("kind", "payload").set("size", std::to_string(bytes.size()));
  e.with_text(to_hex(bytes));
  return e;
}

std::string decode_payload(const xml::Element& e) {
  expect_root(e, "outcome");
  if (e.attr_or("kind", "") != "payload") fail(ErrorCode::SchemaViolation, e.position() + ": not a payload");
  return from_hex(e.text);
}

xml::Element encode_property(const std::string& key, const std::string& value) {
  xml::Element e("property");
  e.set("key", key).with_text(value);
  return e;
}

std::string decode_property(const xml::Element& e) {
  expect_root(e, "property");
  return e.text;
}

xml::Element encode_execution_marker(const ExecutionMarker& marker) {
  xml::Element e("property");
  e.set("key", "executions/" + pad6(marker.run))
      .set("kind", "execution-start")
      .set("run", std::to_string(marker.run))
      .set("version", std::to_string(marker.version))
      .set("node", marker.head)
      .set("at", marker.started_at);
  for (const auto& [name, ref] : marker.inputs) e.add(encode_data_ref(ref, "input")).set("key", name);
  return e;
}

ExecutionMarker decode_execution_marker(const xml::Element& e) {
  expect_root(e, "property");
  if (e.attr_or("kind", "") != "execution-start") {
    fail(ErrorCode::SchemaViolation, e.position() + ": not an execution marker");
  }
  ExecutionMarker marker;
  marker.run = parse_int_attr(e, "run");
  marker.version = parse_int_attr(e, "version");
  marker.head = e.required_attr("node");
  marker.started_at = e.attr_or("at", "");
  for (const auto& child : e.children) {
    if (child.name != "input") fail(ErrorCode::SchemaViolation, child.position() + ": unexpected element");
    marker.inputs[child.required_attr("key")] = decode_data_ref(child);
  }
  return marker;
}

xml::Element encode_annotation_property(const Annotation& annotation, int version) {
  xml::Element e("property");
  e.set("kind", "annotation").set("version", std::to_string(version));
  e.add(encode_annotation(annotation));
  return e;
}

Annotation decode_annotation_property(const xml::Element& e) {
  expect_root(e, "property");
  if (e.attr_or("kind", "") != "annotation" || e.children.size() != 1) {
    fail(ErrorCode::SchemaViolation, e.position() + ": not an annotation property");
  }
  return decode_annotation(e.children.front());
}

xml::Element encode_view(const std::string& name, const ClusterPath& target) {
  xml::Element e("view");
  e.set("name", name).set("target", target.to_string());
  return e;
}

ClusterPath decode_view(const xml::Element& e) {
  expect_root(e, "view");
  return ClusterPath::parse(e.required_attr("target"));
}

xml::Element encode_collection(const std::string& name, const std::vector<ClusterPath>& members) {
  xml::Element e("collection");
  e.set("name", name);
  for (const auto& member : members) e.add_child("member").set("path", member.to_string());
  return e;
}

std::vector<ClusterPath> decode_collection(const xml::Element& e) {
  expect_root(e, "collection");
  std::vector<ClusterPath> members;
  for (const auto& child : e.children) members.push_back(ClusterPath::parse(child.required_attr("path")));
  return members;
}

xml::Element encode_agent(const AgentDesc& agent) {
  xml::Element e("agent");
  e.set("id", agent.agent_id).set("description", agent.description);
  for (const auto& [k, v] : agent.capabilities) e.add_child("capability").set("key", k).with_text(v);
  return e;
}

AgentDesc decode_agent(const xml::Element& e) {
  expect_root(e, "agent");
  AgentDesc agent;
  agent.agent_id = e.required_attr("id");
  agent.description = e.attr_or("description", "");
  for (const auto& child : e.children) agent.capabilities[child.required_attr("key")] = child.text;
  return agent;
}

}  // namespace provkernel::docs
