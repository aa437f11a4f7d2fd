#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "provkernel/address.hpp"
#include "provkernel/workflow.hpp"

namespace provkernel {

// A compute element that executes activities.
struct AgentDesc {
  std::string agent_id;
  std::string description;
  StringMap capabilities;

  bool operator==(const AgentDesc&) const = default;
};

enum class ActivityState { Waiting, Started, Suspended, Interrupted, Complete, Failed };
enum class Transition { Start, Suspend, Resume, CompleteOk, Fail, Interrupt };

std::string_view to_string(ActivityState state);
std::string_view to_string(Transition transition);
ActivityState parse_activity_state(std::string_view text);
Transition parse_transition(std::string_view text);

bool is_terminal(ActivityState state);

// The activity state machine:
//   Waiting   --Start-->      Started
//   Started   --Suspend-->    Suspended
//   Suspended --Resume-->     Started
//   Started   --CompleteOk--> Complete
//   Started   --Fail-->       Failed
//   Waiting|Started|Suspended --Interrupt--> Interrupted
// Anything else throws InvalidTransition.
ActivityState apply_transition(ActivityState state, Transition transition);
bool is_legal(ActivityState state, Transition transition);
bool carries_outcome(Transition transition);

struct OutcomeError {
  std::string code;
  std::string message;
  bool operator==(const OutcomeError&) const = default;
};

struct Outcome {
  std::map<std::string, DataRef> outputs;
  std::string log;
  std::optional<OutcomeError> error;

  bool operator==(const Outcome&) const = default;
};

struct ExecutionId {
  ItemPath item;
  int run = 0;

  // "<uuid>:<run>"
  std::string to_string() const;
  static ExecutionId parse(std::string_view text);

  auto operator<=>(const ExecutionId&) const = default;
};

struct Event {
  ItemPath item;
  int seq = 0;
  ExecutionId execution;
  NodeId node;
  Transition transition = Transition::Start;
  std::string agent;
  std::string at;
  std::optional<ClusterPath> outcome_path;

  bool operator==(const Event&) const = default;
};

// Equality ignoring the timestamp.
bool same_modulo_time(const Event& a, const Event& b);

enum class RunState { Running, Succeeded, Failed, Interrupted };

std::string_view to_string(RunState state);
RunState parse_run_state(std::string_view text);

struct ExecutionStatus {
  RunState state = RunState::Running;
  std::map<NodeId, ActivityState> nodes;

  bool terminal() const { return state != RunState::Running; }
  bool operator==(const ExecutionStatus&) const = default;
};

// Overall status from per-node states: Succeeded when every node is Complete;
// Running while any node is Started/Suspended or eligible; otherwise Failed if
// any node Failed, else Interrupted.
ExecutionStatus derive_status(const WorkflowSpec& spec, const std::map<NodeId, ActivityState>& states);

// Waiting nodes whose predecessors are all Complete.
std::vector<NodeId> eligible_from_states(const WorkflowSpec& spec,
                                         const std::map<NodeId, ActivityState>& states);

}  // namespace provkernel
