#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "provkernel/provenance.hpp"
#include "provkernel/storage.hpp"
#include "provkernel/workflow.hpp"

namespace provkernel {

// Byte access for executors, scoped to one Item.
class PayloadStore {
 public:
  virtual ~PayloadStore() = default;
  // PayloadUnavailable if the bytes cannot be loaded or fail their digest.
  virtual std::string load(const DataRef& ref) = 0;
  virtual DataRef store(const std::string& name, std::string_view bytes, MediaHint media) = 0;
};

struct TaskRequest {
  std::string script_ref;
  NodeId node;
  int run = 0;
  std::map<std::string, DataRef> inputs;  // by input port
  StringMap metadata;
  std::vector<std::string> outputs;  // declared output ports
};

// What the kernel submits tasks to. Scheduling and execution are opaque to
// the kernel; it only records the returned Outcome. Throwing is allowed and
// is recorded as a Fail.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual const AgentDesc& agent() const = 0;
  virtual Outcome execute(const TaskRequest& request, PayloadStore& payloads) = 0;
};

struct ExecutionRecord {
  ExecutionId id;
  int version = 0;
  NodeId head;
  std::string started_at;
  std::map<std::string, DataRef> inputs;  // by external input name
};

struct ResolvedInputs {
  std::map<std::string, DataRef> inputs;  // by port
  std::vector<std::string> unresolved;    // "port: reason"
};

// Items, versions, events and outcomes over a ClusterStorage.
//
// All writes to one Item go through that Item's lock, so events receive
// contiguous per-item sequence numbers; event documents are additionally
// written create-if-absent at events/<run>/<seq>. Readers take the lock in
// shared mode and always observe a prefix of the log. State is cached per
// Item and rebuilt from storage the first time an Item is touched, so a fresh
// Kernel over an existing store sees everything that was recorded.
class Kernel {
 public:
  explicit Kernel(ClusterStorage& storage);
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  ClusterStorage& storage() { return storage_; }

  // Version 1 of the lifecycle is flatten(spec).
  ItemPath create_item(const WorkflowSpec& spec, const std::vector<AgentDesc>& agents);
  // Appends flatten(edit) with parent = previous latest. Returns the version.
  int derive_version(const ItemPath& item, const WorkflowSpec& edit, const std::string& note);

  std::vector<ItemPath> items() const;
  bool exists(const ItemPath& item) const;
  StringMap properties(const ItemPath& item) const;
  std::vector<VersionInfo> lifecycle(const ItemPath& item) const;
  int latest_version(const ItemPath& item) const;
  // The version as written, without later annotations.
  WorkflowSpec stored_spec(const ItemPath& item, int version) const;
  std::vector<AgentDesc> agents(const ItemPath& item) const;
  void register_agent(const ItemPath& item, const AgentDesc& agent);

  // Stores the annotation against one version; returns its 1-based index.
  int annotate(const ItemPath& item, int version, Annotation annotation);
  std::vector<Annotation> attached_annotations(const ItemPath& item, int version) const;

  DataRef store_payload(const ItemPath& item, const std::string& name, std::string_view bytes,
                        MediaHint media);
  std::string load_payload(const DataRef& ref) const;

  ExecutionId start_execution(const ItemPath& item, int version,
                              const std::map<std::string, DataRef>& inputs);
  std::vector<int> runs(const ItemPath& item) const;
  ExecutionRecord execution(const ExecutionId& id) const;
  WorkflowSpec execution_spec(const ExecutionId& id) const;
  std::set<NodeId> eligible_nodes(const ExecutionId& id) const;
  ExecutionStatus status(const ExecutionId& id) const;

  Event record_transition(const ExecutionId& id, const NodeId& node, Transition transition,
                          const std::string& agent_id, const std::optional<Outcome>& outcome);

  // Runs eligible nodes one at a time in ascending id order until none is
  // eligible. Executor exceptions become Fail transitions.
  ExecutionStatus run_to_completion(const ExecutionId& id, Executor& executor);

  std::vector<Event> trace(const ExecutionId& id) const;
  std::optional<ClusterPath> latest_outcome_path(const ExecutionId& id, const NodeId& node) const;
  std::optional<Outcome> latest_outcome(const ExecutionId& id, const NodeId& node) const;
  Outcome load_outcome(const ClusterPath& path) const;

  // Input DataRefs for `node` in this execution: external bindings from the
  // execution inputs, upstream bindings from the producer's latest outcome.
  ResolvedInputs resolve_inputs(const ExecutionId& id, const NodeId& node) const;

 private:
  struct RunCache {
    ExecutionRecord record;
    std::shared_ptr<const WorkflowSpec> spec;
    std::map<NodeId, ActivityState> states;
    std::map<NodeId, ClusterPath> latest_outcomes;
    std::vector<ClusterPath> outcome_paths;
    std::vector<Event> events;
  };

  struct ItemCache {
    mutable std::shared_mutex mutex;
    bool loaded = false;
    StringMap properties;
    std::vector<std::shared_ptr<const WorkflowSpec>> versions;  // index = version - 1
    std::map<std::string, AgentDesc> agents;
    std::map<int, RunCache> runs;
    int next_seq = 1;
  };

  std::shared_ptr<ItemCache> cache_for(const ItemPath& item) const;
  void load(const ItemPath& item, ItemCache& cache) const;
  const RunCache& run_of(const ItemCache& cache, const ExecutionId& id) const;
  ResolvedInputs resolve_locked(const RunCache& run, const NodeId& node) const;
  void put_doc(const ClusterPath& path, const std::string& body, bool expected_absent);
  std::shared_ptr<const WorkflowSpec> spec_locked(const ItemCache& cache, int version) const;

  ClusterStorage& storage_;
  mutable std::mutex caches_mutex_;
  mutable std::map<ItemPath, std::shared_ptr<ItemCache>> caches_;
};

}  // namespace provkernel
