#include "provkernel/kernel.hpp"

#include <algorithm>

#include "provkernel/documents.hpp"
#include "provkernel/error.hpp"

namespace provkernel {

namespace {

constexpr std::string_view kExecutionsPrefix = "executions/";
constexpr std::string_view kAnnotationsPrefix = "annotations/";

xml::Element parse_doc(const StoredDocument& doc) { return xml::parse(doc.body); }

class ItemPayloads final : public PayloadStore {
 public:
  ItemPayloads(Kernel& kernel, ItemPath item) : kernel_(kernel), item_(std::move(item)) {}

  std::string load(const DataRef& ref) override { return kernel_.load_payload(ref); }
  DataRef store(const std::string& name, std::string_view bytes, MediaHint media) override {
    return kernel_.store_payload(item_, name, bytes, media);
  }

 private:
  Kernel& kernel_;
  ItemPath item_;
};

void check_agent_id(const std::string& id) {
  if (!is_valid_segment(id)) fail(ErrorCode::BadRequest, "invalid agent id '" + id + "'");
}

}  // namespace

Kernel::Kernel(ClusterStorage& storage) : storage_(storage) {}

void Kernel::put_doc(const ClusterPath& path, const std::string& body, bool expected_absent) {
  storage_.put(StoredDocument{path, body, {}}, expected_absent);
}

std::shared_ptr<Kernel::ItemCache> Kernel::cache_for(const ItemPath& item) const {
  std::shared_ptr<ItemCache> cache;
  {
    std::lock_guard lock(caches_mutex_);
    auto& slot = caches_[item];
    if (!slot) slot = std::make_shared<ItemCache>();
    cache = slot;
  }
  {
    std::shared_lock lock(cache->mutex);
    if (cache->loaded) return cache;
  }
  std::unique_lock lock(cache->mutex);
  if (!cache->loaded) {
    load(item, *cache);
    cache->loaded = true;
  }
  return cache;
}

void Kernel::load(const ItemPath& item, ItemCache& cache) const {
  if (!storage_.find(ClusterPath::make(item, ClusterKind::Property, "name"))) {
    fail(ErrorCode::UnknownItem, "unknown item " + item.str());
  }
  StringMap properties;
  for (const auto& path : storage_.list(item, ClusterKind::Property, "")) {
    if (path.path.starts_with(kExecutionsPrefix) || path.path.starts_with(kAnnotationsPrefix)) continue;
    properties[path.path] = docs::decode_property(parse_doc(storage_.get(path)));
  }

  std::vector<std::shared_ptr<const WorkflowSpec>> versions;
  for (const auto& path : storage_.list(item, ClusterKind::Workflow, "")) {
    if (path.path != pad6(versions.size() + 1)) {
      fail(ErrorCode::StorageError, "lifecycle of " + item.str() + " is not contiguous at " + path.path);
    }
    versions.push_back(
        std::make_shared<const WorkflowSpec>(docs::decode_workflow(parse_doc(storage_.get(path)))));
  }

  std::map<std::string, AgentDesc> agents;
  for (const auto& path : storage_.list(item, ClusterKind::Agent, "")) {
    AgentDesc agent = docs::decode_agent(parse_doc(storage_.get(path)));
    agents[agent.agent_id] = std::move(agent);
  }

  std::map<int, RunCache> runs;
  for (const auto& path : storage_.list(item, ClusterKind::Property, kExecutionsPrefix)) {
    docs::ExecutionMarker marker = docs::decode_execution_marker(parse_doc(storage_.get(path)));
    if (marker.version < 1 || marker.version > static_cast<int>(versions.size())) {
      fail(ErrorCode::StorageError, "execution " + path.path + " references a missing version");
    }
    RunCache run;
    run.record = ExecutionRecord{ExecutionId{item, marker.run}, marker.version, marker.head,
                                 marker.started_at, marker.inputs};
    run.spec = versions[static_cast<std::size_t>(marker.version - 1)];
    for (const auto& node : run.spec->nodes) run.states[node.id] = ActivityState::Waiting;
    runs.emplace(marker.run, std::move(run));
  }

  std::vector<Event> events;
  for (const auto& path : storage_.list(item, ClusterKind::Event, "")) {
    events.push_back(docs::decode_event(parse_doc(storage_.get(path))));
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.seq < b.seq; });
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& event = events[i];
    if (event.seq != static_cast<int>(i + 1)) {
      fail(ErrorCode::StorageError, "event log of " + item.str() + " has a gap before seq " +
                                        std::to_string(event.seq));
    }
    auto run = runs.find(event.execution.run);
    if (run == runs.end()) {
      fail(ErrorCode::StorageError, "event " + std::to_string(event.seq) + " belongs to an unknown run");
    }
    auto& state = run->second.states[event.node];
    if (!is_legal(state, event.transition)) {
      fail(ErrorCode::StorageError, "event " + std::to_string(event.seq) + " replays an illegal transition");
    }
    state = apply_transition(state, event.transition);
    if (event.outcome_path) {
      run->second.latest_outcomes[event.node] = *event.outcome_path;
      run->second.outcome_paths.push_back(*event.outcome_path);
    }
    run->second.events.push_back(event);
  }

  cache.properties = std::move(properties);
  cache.versions = std::move(versions);
  cache.agents = std::move(agents);
  cache.runs = std::move(runs);
  cache.next_seq = static_cast<int>(events.size()) + 1;
}

ItemPath Kernel::create_item(const WorkflowSpec& spec, const std::vector<AgentDesc>& agents) {
  if (agents.empty()) fail(ErrorCode::BadRequest, "an item needs at least one agent");
  for (const auto& agent : agents) check_agent_id(agent.agent_id);
  WorkflowSpec flat = flatten(spec);
  flat.version_info.version = 1;
  flat.version_info.parent.reset();
  if (flat.version_info.created_at.empty()) flat.version_info.created_at = now_utc();

  ItemPath item = ItemPath::generate();
  auto cache = std::make_shared<ItemCache>();
  std::unique_lock lock(cache->mutex);
  {
    std::lock_guard guard(caches_mutex_);
    caches_[item] = cache;
  }

  put_doc(ClusterPath::make(item, ClusterKind::Workflow, pad6(1)),
          xml::write(docs::encode_workflow(flat)), true);
  for (const auto& agent : agents) {
    put_doc(ClusterPath::make(item, ClusterKind::Agent, agent.agent_id),
            xml::write(docs::encode_agent(agent)), false);
    cache->agents[agent.agent_id] = agent;
  }
  cache->properties["created_at"] = now_utc();
  cache->properties["name"] = flat.name;
  put_doc(ClusterPath::make(item, ClusterKind::Property, "created_at"),
          xml::write(docs::encode_property("created_at", cache->properties["created_at"])), false);
  // Written last: its presence marks the item as existing.
  put_doc(ClusterPath::make(item, ClusterKind::Property, "name"),
          xml::write(docs::encode_property("name", flat.name)), false);
  cache->versions.push_back(std::make_shared<const WorkflowSpec>(std::move(flat)));
  cache->loaded = true;
  return item;
}

int Kernel::derive_version(const ItemPath& item, const WorkflowSpec& edit, const std::string& note) {
  auto cache = cache_for(item);
  WorkflowSpec flat = flatten(edit);
  std::unique_lock lock(cache->mutex);
  int parent = static_cast<int>(cache->versions.size());
  flat.version_info = VersionInfo{parent + 1, parent, now_utc(), note};
  put_doc(ClusterPath::make(item, ClusterKind::Workflow, pad6(static_cast<std::uint64_t>(parent + 1))),
          xml::write(docs::encode_workflow(flat)), true);
  cache->versions.push_back(std::make_shared<const WorkflowSpec>(std::move(flat)));
  return parent + 1;
}

std::vector<ItemPath> Kernel::items() const {
  std::vector<ItemPath> out;
  for (const auto& item : storage_.items()) {
    if (exists(item)) out.push_back(item);
  }
  return out;
}

bool Kernel::exists(const ItemPath& item) const {
  try {
    cache_for(item);
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownItem) return false;
    throw;
  }
}

StringMap Kernel::properties(const ItemPath& item) const {
  auto cache = cache_for(item);
  std::shared_lock lock(cache->mutex);
  return cache->properties;
}

std::vector<VersionInfo> Kernel::lifecycle(const ItemPath& item) const {
  auto cache = cache_for(item);
  std::shared_lock lock(cache->mutex);
  std::vector<VersionInfo> out;
  for (const auto& spec : cache->versions) out.push_back(spec->version_info);
  return out;
}

int Kernel::latest_version(const ItemPath& item) const {
  auto cache = cache_for(item);
  std::shared_lock lock(cache->mutex);
  return static_cast<int>(cache->versions.size());
}

std::shared_ptr<const WorkflowSpec> Kernel::spec_locked(const ItemCache& cache, int version) const {
  if (version < 1 || version > static_cast<int>(cache.versions.size())) {
    fail(ErrorCode::UnknownVersion, "unknown version " + std::to_string(version));
  }
  return cache.versions[static_cast<std::size_t>(version - 1)];
}

WorkflowSpec Kernel::stored_spec(const ItemPath& item, int version) const {
  auto cache = cache_for(item);
  std::shared_lock lock(cache->mutex);
  return *spec_locked(*cache, version);
}

std::vector<AgentDesc> Kernel::agents(const ItemPath& item) const {
  auto cache = cache_for(item);
  std::shared_lock lock(cache->mutex);
  std::vector<AgentDesc> out;
  for (const auto& [id, agent] : cache->agents) out.push_back(agent);
  return out;
}

void Kernel::register_agent(const ItemPath& item, const AgentDesc& agent) {
  check_agent_id(agent.agent_id);
  auto cache = cache_for(item);
  std::unique_lock lock(cache->mutex);
  put_doc(ClusterPath::make(item, ClusterKind::Agent, agent.agent_id),
          xml::write(docs::encode_agent(agent)), false);
  cache->agents[agent.agent_id] = agent;
}

int Kernel::annotate(const ItemPath& item, int version, Annotation annotation) {
  auto cache = cache_for(item);
  std::unique_lock lock(cache->mutex);
  auto spec = spec_locked(*cache, version);
  if (annotation.node && !spec->contains(*annotation.node)) {
    fail(ErrorCode::UnknownNode, "annotation targets unknown node '" + *annotation.node + "'");
  }
  if (annotation.at.empty()) annotation.at = now_utc();
  std::string prefix = std::string(kAnnotationsPrefix) + pad6(static_cast<std::uint64_t>(version)) + "/";
  int index = static_cast<int>(storage_.list(item, ClusterKind::Property, prefix).size()) + 1;
  put_doc(ClusterPath::make(item, ClusterKind::Property, prefix + pad6(static_cast<std::uint64_t>(index))),
          xml::write(docs::encode_annotation_property(annotation, version)), true);
  return index;
}

std::vector<Annotation> Kernel::attached_annotations(const ItemPath& item, int version) const {
  auto cache = cache_for(item);
  std::shared_lock lock(cache->mutex);
  spec_locked(*cache, version);
  std::string prefix = std::string(kAnnotationsPrefix) + pad6(static_cast<std::uint64_t>(version)) + "/";
  std::vector<Annotation> out;
  for (const auto& path : storage_.list(item, ClusterKind::Property, prefix)) {
    out.push_back(docs::decode_annotation_property(parse_doc(storage_.get(path))));
  }
  return out;
}

DataRef Kernel::store_payload(const ItemPath& item, const std::string& name, std::string_view bytes,
                              MediaHint media) {
  DataRef ref;
  ref.name = name;
  ref.digest = sha256_hex(bytes);
  ref.size = bytes.size();
  ref.media = media;
  ref.payload_path = ClusterPath::make(item, ClusterKind::Outcome, "payloads/" + ref.digest);
  if (!storage_.find(*ref.payload_path)) {
    put_doc(*ref.payload_path, xml::write(docs::encode_payload(bytes)), false);
  }
  return ref;
}

std::string Kernel::load_payload(const DataRef& ref) const {
  if (!ref.payload_path) fail(ErrorCode::PayloadUnavailable, "data '" + ref.name + "' has no stored payload");
  auto doc = storage_.find(*ref.payload_path);
  if (!doc) {
    fail(ErrorCode::PayloadUnavailable, "payload missing at " + ref.payload_path->to_string());
  }
  std::string bytes = docs::decode_payload(parse_doc(*doc));
  if (sha256_hex(bytes) != ref.digest) {
    fail(ErrorCode::PayloadUnavailable, "payload at " + ref.payload_path->to_string() +
                                            " does not match digest " + ref.digest);
  }
  return bytes;
}

ExecutionId Kernel::start_execution(const ItemPath& item, int version,
                                    const std::map<std::string, DataRef>& inputs) {
  auto cache = cache_for(item);
  std::unique_lock lock(cache->mutex);
  auto spec = spec_locked(*cache, version);
  for (const auto& [name, ref] : inputs) {
    if (!is_hex_digest(ref.digest)) fail(ErrorCode::BadRequest, "input '" + name + "' has a malformed digest");
  }
  std::vector<std::string> missing;
  for (const auto& binding : spec->bindings) {
    if (const auto* ext = std::get_if<ExternalSource>(&binding.source)) {
      if (!inputs.count(ext->input) &&
          std::find(missing.begin(), missing.end(), ext->input) == missing.end()) {
        missing.push_back(ext->input);
      }
    }
  }
  if (!missing.empty()) fail(ErrorCode::MissingInput, "missing external input(s): " + join(missing, ", "));

  int run = cache->runs.empty() ? 1 : cache->runs.rbegin()->first + 1;
  docs::ExecutionMarker marker{run, version, head_node(*spec), now_utc(), inputs};
  try {
    put_doc(ClusterPath::make(item, ClusterKind::Property,
                              std::string(kExecutionsPrefix) + pad6(static_cast<std::uint64_t>(run))),
            xml::write(docs::encode_execution_marker(marker)), true);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AlreadyExists) throw;
    cache->loaded = false;
    fail(ErrorCode::StorageError, "another writer allocated run " + std::to_string(run));
  }
  RunCache cached;
  cached.record = ExecutionRecord{ExecutionId{item, run}, version, marker.head, marker.started_at, inputs};
  cached.spec = spec;
  for (const auto& node : spec->nodes) cached.states[node.id] = ActivityState::Waiting;
  cache->runs.emplace(run, std::move(cached));
  return ExecutionId{item, run};
}

const Kernel::RunCache& Kernel::run_of(const ItemCache& cache, const ExecutionId& id) const {
  auto it = cache.runs.find(id.run);
  if (it == cache.runs.end()) fail(ErrorCode::UnknownExecution, "unknown execution " + id.to_string());
  return it->second;
}

std::vector<int> Kernel::runs(const ItemPath& item) const {
  auto cache = cache_for(item);
  std::shared_lock lock(cache->mutex);
  std::vector<int> out;
  for (const auto& [run, state] : cache->runs) out.push_back(run);
  return out;
}

namespace {
ExecutionId checked(const ExecutionId& id) {
  if (id.item.empty() || id.run < 1) fail(ErrorCode::UnknownExecution, "invalid execution id");
  return id;
}

template <class F>
decltype(auto) translate_unknown_item(F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownItem) fail(ErrorCode::UnknownExecution, e.what());
    throw;
  }
}
}  // namespace

ExecutionRecord Kernel::execution(const ExecutionId& id) const {
  return translate_unknown_item([&] {
    auto cache = cache_for(checked(id).item);
    std::shared_lock lock(cache->mutex);
    return run_of(*cache, id).record;
  });
}

WorkflowSpec Kernel::execution_spec(const ExecutionId& id) const {
  return translate_unknown_item([&] {
    auto cache = cache_for(checked(id).item);
    std::shared_lock lock(cache->mutex);
    return *run_of(*cache, id).spec;
  });
}

std::set<NodeId> Kernel::eligible_nodes(const ExecutionId& id) const {
  return translate_unknown_item([&] {
    auto cache = cache_for(checked(id).item);
    std::shared_lock lock(cache->mutex);
    const RunCache& run = run_of(*cache, id);
    auto eligible = eligible_from_states(*run.spec, run.states);
    return std::set<NodeId>(eligible.begin(), eligible.end());
  });
}

ExecutionStatus Kernel::status(const ExecutionId& id) const {
  return translate_unknown_item([&] {
    auto cache = cache_for(checked(id).item);
    std::shared_lock lock(cache->mutex);
    const RunCache& run = run_of(*cache, id);
    return derive_status(*run.spec, run.states);
  });
}

std::vector<Event> Kernel::trace(const ExecutionId& id) const {
  return translate_unknown_item([&] {
    auto cache = cache_for(checked(id).item);
    std::shared_lock lock(cache->mutex);
    return run_of(*cache, id).events;
  });
}

std::optional<ClusterPath> Kernel::latest_outcome_path(const ExecutionId& id, const NodeId& node) const {
  return translate_unknown_item([&]() -> std::optional<ClusterPath> {
    auto cache = cache_for(checked(id).item);
    std::shared_lock lock(cache->mutex);
    const RunCache& run = run_of(*cache, id);
    auto it = run.latest_outcomes.find(node);
    if (it == run.latest_outcomes.end()) return std::nullopt;
    return it->second;
  });
}

std::optional<Outcome> Kernel::latest_outcome(const ExecutionId& id, const NodeId& node) const {
  auto path = latest_outcome_path(id, node);
  if (!path) return std::nullopt;
  return load_outcome(*path);
}

Outcome Kernel::load_outcome(const ClusterPath& path) const {
  return docs::decode_outcome(parse_doc(storage_.get(path)));
}

ResolvedInputs Kernel::resolve_locked(const RunCache& run, const NodeId& node) const {
  ResolvedInputs resolved;
  for (const auto& binding : run.spec->bindings) {
    if (binding.node != node) continue;
    if (const auto* ext = std::get_if<ExternalSource>(&binding.source)) {
      auto it = run.record.inputs.find(ext->input);
      if (it == run.record.inputs.end()) {
        resolved.unresolved.push_back(binding.port + ": external input '" + ext->input + "' not supplied");
      } else {
        resolved.inputs[binding.port] = it->second;
      }
      continue;
    }
    const auto& up = std::get<UpstreamSource>(binding.source);
    auto path = run.latest_outcomes.find(up.node);
    if (path == run.latest_outcomes.end()) {
      resolved.unresolved.push_back(binding.port + ": no outcome from '" + up.node + "'");
      continue;
    }
    Outcome producer = load_outcome(path->second);
    auto output = producer.outputs.find(up.port);
    if (output == producer.outputs.end()) {
      resolved.unresolved.push_back(binding.port + ": '" + up.node + "' produced no '" + up.port + "'");
      continue;
    }
    resolved.inputs[binding.port] = output->second;
  }
  return resolved;
}

ResolvedInputs Kernel::resolve_inputs(const ExecutionId& id, const NodeId& node) const {
  return translate_unknown_item([&] {
    auto cache = cache_for(checked(id).item);
    std::shared_lock lock(cache->mutex);
    const RunCache& run = run_of(*cache, id);
    if (!run.spec->contains(node)) fail(ErrorCode::UnknownNode, "unknown node '" + node + "'");
    return resolve_locked(run, node);
  });
}

Event Kernel::record_transition(const ExecutionId& id, const NodeId& node, Transition transition,
                                const std::string& agent_id, const std::optional<Outcome>& outcome) {
  auto cache = translate_unknown_item([&] { return cache_for(checked(id).item); });
  std::unique_lock lock(cache->mutex);
  auto run_it = cache->runs.find(id.run);
  if (run_it == cache->runs.end()) fail(ErrorCode::UnknownExecution, "unknown execution " + id.to_string());
  RunCache& run = run_it->second;

  if (!run.spec->contains(node)) fail(ErrorCode::UnknownNode, "unknown node '" + node + "'");
  if (!cache->agents.count(agent_id)) {
    fail(ErrorCode::UnknownAgent, "agent '" + agent_id + "' is not registered with item " + id.item.str());
  }
  ActivityState current = run.states.at(node);
  ActivityState next = apply_transition(current, transition);
  if (transition == Transition::Start) {
    auto eligible = eligible_from_states(*run.spec, run.states);
    if (std::find(eligible.begin(), eligible.end(), node) == eligible.end()) {
      fail(ErrorCode::NotEligible, "node '" + node + "' has predecessors that are not Complete");
    }
  }
  if (carries_outcome(transition)) {
    if (!outcome) {
      fail(ErrorCode::OutcomeMissing, std::string(to_string(transition)) + " requires an outcome");
    }
    if (transition == Transition::Fail && !outcome->error) {
      fail(ErrorCode::OutcomeMissing, "a Fail outcome must carry an error");
    }
    if (transition == Transition::Fail && !outcome->outputs.empty()) {
      fail(ErrorCode::OutcomeUnexpected, "a Fail outcome must not carry outputs");
    }
    if (transition == Transition::CompleteOk && outcome->error) {
      fail(ErrorCode::OutcomeUnexpected, "a CompleteOk outcome must not carry an error");
    }
    for (const auto& [port, ref] : outcome->outputs) {
      if (!is_hex_digest(ref.digest)) {
        fail(ErrorCode::BadRequest, "output '" + port + "' has a malformed digest");
      }
    }
  } else if (outcome) {
    fail(ErrorCode::OutcomeUnexpected, std::string(to_string(transition)) + " does not take an outcome");
  }

  int seq = cache->next_seq;
  std::string leaf = pad6(static_cast<std::uint64_t>(id.run)) + "/" + pad6(static_cast<std::uint64_t>(seq));
  Event event;
  event.item = id.item;
  event.seq = seq;
  event.execution = id;
  event.node = node;
  event.transition = transition;
  event.agent = agent_id;
  event.at = now_utc();
  if (outcome) {
    event.outcome_path = ClusterPath::make(id.item, ClusterKind::Outcome, leaf);
    put_doc(*event.outcome_path, xml::write(docs::encode_outcome(*outcome, node, id.run)), false);
  }
  try {
    put_doc(ClusterPath::make(id.item, ClusterKind::Event, leaf), xml::write(docs::encode_event(event)), true);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AlreadyExists) throw;
    cache->loaded = false;
    fail(ErrorCode::StorageError, "another writer appended event " + std::to_string(seq));
  }
  cache->next_seq = seq + 1;
  run.states[node] = next;
  run.events.push_back(event);
  if (event.outcome_path) {
    run.latest_outcomes[node] = *event.outcome_path;
    run.outcome_paths.push_back(*event.outcome_path);
    std::string run_segment = pad6(static_cast<std::uint64_t>(id.run));
    put_doc(ClusterPath::make(id.item, ClusterKind::View, "latest-outcome/" + run_segment + "/" + node),
            xml::write(docs::encode_view("latest-outcome/" + run_segment + "/" + node, *event.outcome_path)),
            false);
    put_doc(ClusterPath::make(id.item, ClusterKind::Collection, "outcomes/" + run_segment),
            xml::write(docs::encode_collection("outcomes/" + run_segment, run.outcome_paths)), false);
  }
  return event;
}

ExecutionStatus Kernel::run_to_completion(const ExecutionId& id, Executor& executor) {
  const AgentDesc& agent = executor.agent();
  {
    auto cache = translate_unknown_item([&] { return cache_for(checked(id).item); });
    std::shared_lock lock(cache->mutex);
    run_of(*cache, id);
    if (!cache->agents.count(agent.agent_id)) {
      fail(ErrorCode::UnknownAgent, "executor agent '" + agent.agent_id + "' is not registered");
    }
  }
  ItemPayloads payloads(*this, id.item);
  WorkflowSpec spec = execution_spec(id);
  while (true) {
    auto eligible = eligible_nodes(id);
    if (eligible.empty()) break;
    const NodeId node = *eligible.begin();
    const ActivityNode& activity = *spec.find(node);
    ResolvedInputs resolved = resolve_inputs(id, node);
    record_transition(id, node, Transition::Start, agent.agent_id, std::nullopt);

    Outcome outcome;
    if (!resolved.unresolved.empty()) {
      outcome.error = OutcomeError{"INPUT_UNRESOLVED", join(resolved.unresolved, "; ")};
    } else {
      TaskRequest request{activity.script_ref(), node, id.run, resolved.inputs, activity.metadata,
                          activity.declared_outputs};
      try {
        outcome = executor.execute(request, payloads);
      } catch (const Error& e) {
        outcome = Outcome{{}, {}, OutcomeError{std::string(to_string(e.code())), e.what()}};
      } catch (const std::exception& e) {
        outcome = Outcome{{}, {}, OutcomeError{"ExecutorError", e.what()}};
      }
    }
    if (outcome.error) outcome.outputs.clear();
    record_transition(id, node, outcome.error ? Transition::Fail : Transition::CompleteOk, agent.agent_id,
                      outcome);
  }
  return status(id);
}

}  // namespace provkernel
