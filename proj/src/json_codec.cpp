#include "provkernel/json_codec.hpp"

#include "provkernel/error.hpp"

namespace provkernel::wire {

namespace {

// Field access that reports shape problems with a fixed error code.
class Reader {
 public:
  Reader(const Json& j, ErrorCode code, std::string where) : j_(j), code_(code), where_(std::move(where)) {
    if (!j_.is_object()) problem("expected an object");
  }

  [[noreturn]] void problem(const std::string& message) const {
    fail(code_, (where_.empty() ? "" : where_ + ": ") + message);
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const Json& at(const char* key) const {
    if (!has(key)) problem(std::string("missing '") + key + "'");
    return j_.at(key);
  }

  std::string str(const char* key) const {
    const Json& v = at(key);
    if (!v.is_string()) problem(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
  }
  std::string str_or(const char* key, std::string fallback) const { return has(key) ? str(key) : fallback; }

  std::int64_t integer(const char* key) const {
    const Json& v = at(key);
    if (!v.is_number_integer()) problem(std::string("'") + key + "' must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_or(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (v.is_string()) {
      std::uint64_t out = 0;
      if (parse_uint(v.get<std::string>(), out)) return out;
    }
    problem(std::string("'") + key + "' must be a non-negative integer");
  }

  double number_or(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (!v.is_number()) problem(std::string("'") + key + "' must be a number");
    return v.get<double>();
  }

  bool boolean_or(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (!v.is_boolean()) problem(std::string("'") + key + "' must be a boolean");
    return v.get<bool>();
  }

  const Json& array(const char* key) const {
    const Json& v = at(key);
    if (!v.is_array()) problem(std::string("'") + key + "' must be an array");
    return v;
  }
  Json array_or_empty(const char* key) const { return has(key) ? array(key) : Json::array(); }

  std::vector<std::string> strings_or_empty(const char* key) const {
    std::vector<std::string> out;
    for (const auto& v : array_or_empty(key)) {
      if (!v.is_string()) problem(std::string("'") + key + "' must hold strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  StringMap map_or_empty(const char* key) const {
    StringMap out;
    if (!has(key)) return out;
    const Json& v = at(key);
    if (!v.is_object()) problem(std::string("'") + key + "' must be an object");
    for (const auto& [k, value] : v.items()) {
      if (!value.is_string()) problem(std::string("'") + key + "." + k + "' must be a string");
      out[k] = value.get<std::string>();
    }
    return out;
  }

  ErrorCode code() const { return code_; }
  const std::string& where() const { return where_; }

 private:
  const Json& j_;
  ErrorCode code_;
  std::string where_;
};

Json string_map(const StringMap& map) {
  Json out = Json::object();
  for (const auto& [k, v] : map) out[k] = v;
  return out;
}

template <class F>
auto rethrow_as(ErrorCode code, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    if (e.code() == code) throw;
    fail(code, e.what());
  }
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::BadRequest, std::string("invalid JSON: ") + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json version_to_json(const VersionInfo& info) {
  Json out{{"version", info.version}, {"created_at", info.created_at}, {"note", info.note}};
  out["parent"] = info.parent ? Json(*info.parent) : Json(nullptr);
  return out;
}

Json annotation_to_json(const Annotation& annotation) {
  Json out{{"author", annotation.author}, {"at", annotation.at}, {"text", annotation.text},
           {"tags", annotation.tags}};
  out["node"] = annotation.node ? Json(*annotation.node) : Json(nullptr);
  return out;
}

Annotation annotation_from_json(const Json& j) {
  Reader r(j, ErrorCode::BadRequest, "annotation");
  Annotation annotation;
  annotation.author = r.str_or("author", "");
  annotation.at = r.str_or("at", "");
  annotation.text = r.str("text");
  annotation.tags = r.strings_or_empty("tags");
  if (r.has("node")) annotation.node = r.str("node");
  return annotation;
}

Json agent_to_json(const AgentDesc& agent) {
  return Json{{"id", agent.agent_id}, {"description", agent.description},
              {"capabilities", string_map(agent.capabilities)}};
}

AgentDesc agent_from_json(const Json& j) {
  Reader r(j, ErrorCode::BadRequest, "agent");
  return AgentDesc{r.str("id"), r.str_or("description", ""), r.map_or_empty("capabilities")};
}

namespace {

Json node_to_json(const ActivityNode& node) {
  Json out{{"id", node.id}, {"inputs", node.declared_inputs}, {"outputs", node.declared_outputs},
           {"metadata", string_map(node.metadata)}};
  if (node.is_composite()) {
    out["kind"] = "composite";
    out["workflow"] = spec_to_json(node.sub());
    out["workflow"].erase("schema");
  } else {
    out["kind"] = "single";
    out["script"] = node.script_ref();
  }
  return out;
}

WorkflowSpec spec_from_json_at(const Json& j, const std::string& where);

ActivityNode node_from_json(const Json& j, const std::string& where) {
  Reader r(j, ErrorCode::MalformedSpec, where);
  ActivityNode node;
  node.id = r.str("id");
  std::string kind = r.str_or("kind", "single");
  node.declared_inputs = r.strings_or_empty("inputs");
  node.declared_outputs = r.has("outputs") ? r.strings_or_empty("outputs") : std::vector<std::string>{"out"};
  node.metadata = r.map_or_empty("metadata");
  if (kind == "single") {
    node.kind = SingleActivity{r.str("script")};
  } else if (kind == "composite") {
    node.kind = CompositeActivity{
        std::make_shared<const WorkflowSpec>(spec_from_json_at(r.at("workflow"), where + "/" + node.id))};
  } else {
    r.problem("node kind must be 'single' or 'composite'");
  }
  return node;
}

WorkflowSpec spec_from_json_at(const Json& j, const std::string& where) {
  Reader r(j, ErrorCode::MalformedSpec, where);
  if (r.has("schema") && r.str("schema") != "workflow.v1") r.problem("schema must be 'workflow.v1'");
  WorkflowSpec spec;
  spec.name = r.str_or("name", "");
  if (r.has("version")) {
    Reader v(r.at("version"), ErrorCode::MalformedSpec, where + " version");
    spec.version_info.version = static_cast<int>(v.has("version") ? v.integer("version") : 1);
    if (v.has("parent")) spec.version_info.parent = static_cast<int>(v.integer("parent"));
    spec.version_info.created_at = v.str_or("created_at", "");
    spec.version_info.note = v.str_or("note", "");
  }
  for (const auto& node : r.array("nodes")) spec.nodes.push_back(node_from_json(node, where));
  for (const auto& dep : r.array_or_empty("deps")) {
    Reader d(dep, ErrorCode::MalformedSpec, where + " dependency");
    spec.deps.push_back(Dependency{d.str("from"), d.str("to")});
  }
  for (const auto& binding : r.array_or_empty("bindings")) {
    Reader b(binding, ErrorCode::MalformedSpec, where + " binding");
    InputBinding out{b.str("node"), b.str("port"), ExternalSource{}};
    if (b.has("external") == b.has("upstream")) b.problem("exactly one of 'external' or 'upstream' is required");
    if (b.has("external")) {
      out.source = ExternalSource{b.str("external")};
    } else {
      Reader u(b.at("upstream"), ErrorCode::MalformedSpec, where + " binding upstream");
      out.source = UpstreamSource{u.str("node"), u.str("port")};
    }
    spec.bindings.push_back(std::move(out));
  }
  for (const auto& annotation : r.array_or_empty("annotations")) {
    spec.annotations.push_back(rethrow_as(ErrorCode::MalformedSpec, [&] { return annotation_from_json(annotation); }));
  }
  spec.metadata = r.map_or_empty("metadata");
  normalize(spec);
  return spec;
}

}  // namespace

Json spec_to_json(const WorkflowSpec& spec) {
  Json nodes = Json::array();
  for (const auto& node : spec.nodes) nodes.push_back(node_to_json(node));
  Json deps = Json::array();
  for (const auto& dep : spec.deps) deps.push_back(Json{{"from", dep.from}, {"to", dep.to}});
  Json bindings = Json::array();
  for (const auto& binding : spec.bindings) {
    Json b{{"node", binding.node}, {"port", binding.port}};
    if (const auto* ext = std::get_if<ExternalSource>(&binding.source)) {
      b["external"] = ext->input;
    } else {
      const auto& up = std::get<UpstreamSource>(binding.source);
      b["upstream"] = Json{{"node", up.node}, {"port", up.port}};
    }
    bindings.push_back(std::move(b));
  }
  Json annotations = Json::array();
  for (const auto& annotation : spec.annotations) annotations.push_back(annotation_to_json(annotation));
  return Json{{"schema", "workflow.v1"}, {"name", spec.name},         {"version", version_to_json(spec.version_info)},
              {"nodes", nodes},          {"deps", deps},              {"bindings", bindings},
              {"annotations", annotations}, {"metadata", string_map(spec.metadata)}};
}

WorkflowSpec spec_from_json(const Json& j) { return spec_from_json_at(j, "workflow"); }

Json data_ref_to_json(const DataRef& ref) {
  Json out{{"name", ref.name}, {"digest", ref.digest}, {"size", ref.size},
           {"media", std::string(to_string(ref.media))}};
  out["payload"] = ref.payload_path ? Json(ref.payload_path->to_string()) : Json(nullptr);
  return out;
}

DataRef data_ref_from_json(const Json& j) {
  Reader r(j, ErrorCode::BadRequest, "data reference");
  DataRef ref;
  ref.name = r.str_or("name", "");
  ref.digest = r.str("digest");
  if (!is_hex_digest(ref.digest)) r.problem("digest must be 64 lowercase hex characters");
  ref.size = r.unsigned_or("size", 0);
  ref.media = rethrow_as(ErrorCode::BadRequest, [&] { return parse_media_hint(r.str_or("media", "bytes")); });
  if (r.has("payload")) {
    ref.payload_path = rethrow_as(ErrorCode::BadRequest, [&] { return ClusterPath::parse(r.str("payload")); });
  }
  return ref;
}

InputValue input_from_json(const Json& j) {
  Reader r(j, ErrorCode::BadRequest, "input");
  InputValue value;
  value.media = rethrow_as(ErrorCode::BadRequest, [&] { return parse_media_hint(r.str_or("media", "bytes")); });
  int forms = int(r.has("digest")) + int(r.has("payload") && !r.has("digest")) + int(r.has("payload_hex"));
  if (forms != 1) r.problem("give one of 'digest' (a stored reference), 'payload' or 'payload_hex'");
  if (r.has("digest")) {
    value.ref = data_ref_from_json(j);
  } else if (r.has("payload_hex")) {
    value.bytes = rethrow_as(ErrorCode::BadRequest, [&] { return from_hex(r.str("payload_hex")); });
  } else {
    value.bytes = r.str("payload");
  }
  return value;
}

Json outcome_to_json(const Outcome& outcome) {
  Json outputs = Json::object();
  for (const auto& [port, ref] : outcome.outputs) outputs[port] = data_ref_to_json(ref);
  Json out{{"outputs", outputs}, {"log", outcome.log}};
  out["error"] = outcome.error ? Json{{"code", outcome.error->code}, {"message", outcome.error->message}}
                               : Json(nullptr);
  return out;
}

Json event_to_json(const Event& event) {
  Json out{{"item", event.item.str()}, {"seq", event.seq},         {"run", event.execution.run},
           {"node", event.node},       {"transition", std::string(to_string(event.transition))},
           {"agent", event.agent},     {"at", event.at}};
  out["outcome"] = event.outcome_path ? Json(event.outcome_path->to_string()) : Json(nullptr);
  return out;
}

Event event_from_json(const Json& j) {
  Reader r(j, ErrorCode::BadRequest, "event");
  return rethrow_as(ErrorCode::BadRequest, [&] {
    Event event;
    event.item = ItemPath::parse(r.str("item"));
    event.seq = static_cast<int>(r.integer("seq"));
    event.execution = ExecutionId{event.item, static_cast<int>(r.integer("run"))};
    event.node = r.str("node");
    event.transition = parse_transition(r.str("transition"));
    event.agent = r.str("agent");
    event.at = r.str_or("at", "");
    if (r.has("outcome")) event.outcome_path = ClusterPath::parse(r.str("outcome"));
    return event;
  });
}

Json events_to_json(const std::vector<Event>& events) {
  Json out = Json::array();
  for (const auto& event : events) out.push_back(event_to_json(event));
  return out;
}

std::vector<Event> events_from_json(const Json& j) {
  if (!j.is_array()) fail(ErrorCode::BadRequest, "expected an array of events");
  std::vector<Event> out;
  for (const auto& e : j) out.push_back(event_from_json(e));
  return out;
}

Json status_to_json(const ExecutionStatus& status) {
  Json nodes = Json::object();
  for (const auto& [node, state] : status.nodes) nodes[node] = std::string(to_string(state));
  return Json{{"state", std::string(to_string(status.state))}, {"nodes", nodes}};
}

ExecutionStatus status_from_json(const Json& j) {
  Reader r(j, ErrorCode::BadRequest, "status");
  return rethrow_as(ErrorCode::BadRequest, [&] {
    ExecutionStatus status;
    status.state = parse_run_state(r.str("state"));
    for (const auto& [node, state] : r.map_or_empty("nodes")) status.nodes[node] = parse_activity_state(state);
    return status;
  });
}

Json execution_to_json(const ExecutionRecord& record, const ExecutionStatus& status) {
  Json inputs = Json::object();
  for (const auto& [name, ref] : record.inputs) inputs[name] = data_ref_to_json(ref);
  return Json{{"execution", record.id.to_string()}, {"item", record.id.item.str()}, {"run", record.id.run},
              {"version", record.version},          {"head", record.head},          {"started_at", record.started_at},
              {"inputs", inputs},                   {"status", status_to_json(status)}};
}

Json executor_config_to_json(const sim::ExecutorConfig& config) {
  Json faults = Json::array();
  for (const auto& entry : config.faults.entries) {
    Json f{{"node", entry.node}, {"mode", std::string(sim::to_string(entry.mode))}};
    if (entry.run) f["run"] = *entry.run;
    if (entry.mode == sim::FaultMode::FailWithProbability) {
      f["p"] = entry.p;
      f["seed"] = entry.seed;
    }
    faults.push_back(std::move(f));
  }
  return Json{{"schema", "executor.v1"}, {"seed", config.seed}, {"agent", agent_to_json(config.agent)},
              {"faults", faults}};
}

sim::ExecutorConfig executor_config_from_json(const Json& j) {
  return rethrow_as(ErrorCode::ConfigError, [&] {
    Reader r(j, ErrorCode::ConfigError, "executor config");
    if (r.has("schema") && r.str("schema") != "executor.v1") r.problem("schema must be 'executor.v1'");
    sim::ExecutorConfig config;
    config.seed = r.unsigned_or("seed", 0);
    if (r.has("agent")) config.agent = agent_from_json(r.at("agent"));
    for (const auto& f : r.array_or_empty("faults")) {
      Reader fr(f, ErrorCode::ConfigError, "fault");
      sim::FaultEntry entry;
      entry.node = fr.str("node");
      entry.mode = sim::parse_fault_mode(fr.str_or("mode", "always"));
      if (fr.has("run")) entry.run = static_cast<int>(fr.integer("run"));
      entry.p = fr.number_or("p", 0.0);
      entry.seed = fr.unsigned_or("seed", 0);
      config.faults.entries.push_back(std::move(entry));
    }
    config.faults.validate();
    return config;
  });
}

Json refset_to_json(const analysis::ReferenceDataset& ref) {
  Json expectations = Json::array();
  for (const auto& e : ref.expectations) {
    Json x{{"node", e.node},
           {"port", e.port},
           {"comparator", Json{{"kind", std::string(analysis::to_string(e.comparator.kind))},
                               {"abs", e.comparator.abs},
                               {"rel", e.comparator.rel}}},
           {"expected", data_ref_to_json(e.expected)}};
    if (e.bytes) x["value_hex"] = to_hex(*e.bytes);
    expectations.push_back(std::move(x));
  }
  return Json{{"schema", "refset.v1"}, {"expectations", expectations}};
}

analysis::ReferenceDataset refset_from_json(const Json& j) {
  Reader r(j, ErrorCode::BadRequest, "reference dataset");
  if (r.has("schema") && r.str("schema") != "refset.v1") r.problem("schema must be 'refset.v1'");
  analysis::ReferenceDataset ref;
  for (const auto& x : r.array("expectations")) {
    Reader xr(x, ErrorCode::BadRequest, "expectation");
    analysis::Expectation e;
    e.node = xr.str("node");
    e.port = xr.str_or("port", "out");
    if (xr.has("comparator")) {
      const Json& c = xr.at("comparator");
      if (c.is_string()) {
        e.comparator.kind = analysis::parse_comparator_kind(c.get<std::string>());
      } else {
        Reader cr(c, ErrorCode::BadRequest, "comparator");
        e.comparator.kind = analysis::parse_comparator_kind(cr.str("kind"));
        e.comparator.abs = cr.number_or("abs", 0.0);
        e.comparator.rel = cr.number_or("rel", 0.0);
      }
    }
    if (xr.has("value")) {
      e.bytes = xr.str("value");
    } else if (xr.has("value_hex")) {
      e.bytes = rethrow_as(ErrorCode::BadRequest, [&] { return from_hex(xr.str("value_hex")); });
    }
    if (xr.has("expected")) {
      e.expected = data_ref_from_json(xr.at("expected"));
      if (e.bytes && sha256_hex(*e.bytes) != e.expected.digest) {
        xr.problem("value for " + e.node + "." + e.port + " does not match the expected digest");
      }
    } else if (e.bytes) {
      e.expected.name = e.node + "/" + e.port;
      e.expected.digest = sha256_hex(*e.bytes);
      e.expected.size = e.bytes->size();
    } else {
      xr.problem("give 'expected', 'value' or 'value_hex'");
    }
    ref.expectations.push_back(std::move(e));
  }
  ref.validate();
  return ref;
}

Json findings_to_json(const std::vector<analysis::Finding>& findings) {
  Json out = Json::array();
  for (const auto& f : findings) {
    out.push_back(Json{{"severity", std::string(analysis::to_string(f.severity))},
                       {"kind", std::string(analysis::to_string(f.kind))},
                       {"location", f.location},
                       {"detail", f.detail}});
  }
  return out;
}

Json report_to_json(const analysis::ResultReport& report) {
  Json results = Json::array();
  for (const auto& r : report.results) {
    Json x{{"node", r.node}, {"port", r.port}, {"matched", r.matched}, {"detail", r.detail}};
    x["observed"] = r.observed ? data_ref_to_json(*r.observed) : Json(nullptr);
    results.push_back(std::move(x));
  }
  return Json{{"execution", report.execution.to_string()}, {"overall", report.overall}, {"results", results}};
}

Json hits_to_json(const std::vector<analysis::AnnotationHit>& hits) {
  Json out = Json::array();
  for (const auto& hit : hits) {
    out.push_back(Json{{"item", hit.item.str()}, {"version", hit.version},
                       {"annotation", annotation_to_json(hit.annotation)}});
  }
  return out;
}

Json comparison_to_json(const analysis::ComparisonReport& report) {
  Json diffs = Json::array();
  for (const auto& d : report.outcome_diffs) {
    diffs.push_back(Json{{"node", d.node},
                         {"only_in_a", d.only_in_a},
                         {"only_in_b", d.only_in_b},
                         {"digest_mismatch", d.digest_mismatch}});
  }
  return Json{{"spec_findings", findings_to_json(report.spec_findings)},
              {"outcome_diffs", diffs},
              {"status_a", status_to_json(report.status_a)},
              {"status_b", status_to_json(report.status_b)},
              {"identical", report.empty()}};
}

}  // namespace provkernel::wire
