#include "provkernel/provenance.hpp"

#include <array>

#include "provkernel/error.hpp"

namespace provkernel {

namespace {
constexpr std::array<std::string_view, 6> kStateNames = {"Waiting",     "Started",  "Suspended",
                                                         "Interrupted", "Complete", "Failed"};
constexpr std::array<std::string_view, 6> kTransitionNames = {"Start",      "Suspend", "Resume",
                                                              "CompleteOk", "Fail",    "Interrupt"};
constexpr std::array<std::string_view, 4> kRunStateNames = {"Running", "Succeeded", "Failed",
                                                            "Interrupted"};
}  // namespace

std::string_view to_string(ActivityState state) { return kStateNames[static_cast<int>(state)]; }
std::string_view to_string(Transition transition) {
  return kTransitionNames[static_cast<int>(transition)];
}
std::string_view to_string(RunState state) { return kRunStateNames[static_cast<int>(state)]; }

ActivityState parse_activity_state(std::string_view text) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == text) return static_cast<ActivityState>(i);
  }
  fail(ErrorCode::BadRequest, "unknown activity state '" + std::string(text) + "'");
}

Transition parse_transition(std::string_view text) {
  for (std::size_t i = 0; i < kTransitionNames.size(); ++i) {
    if (kTransitionNames[i] == text) return static_cast<Transition>(i);
  }
  fail(ErrorCode::BadRequest, "unknown transition '" + std::string(text) + "'");
}

RunState parse_run_state(std::string_view text) {
  for (std::size_t i = 0; i < kRunStateNames.size(); ++i) {
    if (kRunStateNames[i] == text) return static_cast<RunState>(i);
  }
  fail(ErrorCode::BadRequest, "unknown execution state '" + std::string(text) + "'");
}

bool is_terminal(ActivityState state) {
  return state == ActivityState::Interrupted || state == ActivityState::Complete ||
         state == ActivityState::Failed;
}

bool is_legal(ActivityState state, Transition transition) {
  using S = ActivityState;
  using T = Transition;
  switch (transition) {
    case T::Start: return state == S::Waiting;
    case T::Suspend: return state == S::Started;
    case T::Resume: return state == S::Suspended;
    case T::CompleteOk: return state == S::Started;
    case T::Fail: return state == S::Started;
    case T::Interrupt: return state == S::Waiting || state == S::Started || state == S::Suspended;
  }
  return false;
}

ActivityState apply_transition(ActivityState state, Transition transition) {
  if (!is_legal(state, transition)) {
    fail(ErrorCode::InvalidTransition, "transition " + std::string(to_string(transition)) +
                                           " is not allowed from state " +
                                           std::string(to_string(state)));
  }
  switch (transition) {
    case Transition::Start: return ActivityState::Started;
    case Transition::Suspend: return ActivityState::Suspended;
    case Transition::Resume: return ActivityState::Started;
    case Transition::CompleteOk: return ActivityState::Complete;
    case Transition::Fail: return ActivityState::Failed;
    case Transition::Interrupt: return ActivityState::Interrupted;
  }
  return state;
}

bool carries_outcome(Transition transition) {
  return transition == Transition::CompleteOk || transition == Transition::Fail;
}

std::string ExecutionId::to_string() const { return item.str() + ":" + std::to_string(run); }

ExecutionId ExecutionId::parse(std::string_view text) {
  auto colon = text.rfind(':');
  std::uint64_t run = 0;
  if (colon == std::string_view::npos || !parse_uint(text.substr(colon + 1), run) || run == 0 ||
      run > 999999) {
    fail(ErrorCode::BadRequest, "execution ids look like <item-uuid>:<run>");
  }
  return ExecutionId{ItemPath::parse(text.substr(0, colon)), static_cast<int>(run)};
}

bool same_modulo_time(const Event& a, const Event& b) {
  Event copy = b;
  copy.at = a.at;
  return a == copy;
}

std::vector<NodeId> eligible_from_states(const WorkflowSpec& spec,
                                         const std::map<NodeId, ActivityState>& states) {
  std::map<NodeId, std::vector<NodeId>> preds;
  for (const auto& dep : spec.deps) preds[dep.to].push_back(dep.from);
  auto state_of = [&](const NodeId& id) {
    auto it = states.find(id);
    return it == states.end() ? ActivityState::Waiting : it->second;
  };
  std::vector<NodeId> eligible;
  for (const auto& node : spec.nodes) {
    if (state_of(node.id) != ActivityState::Waiting) continue;
    bool ready = true;
    for (const auto& p : preds[node.id]) {
      if (state_of(p) != ActivityState::Complete) {
        ready = false;
        break;
      }
    }
    if (ready) eligible.push_back(node.id);
  }
  return eligible;
}

ExecutionStatus derive_status(const WorkflowSpec& spec, const std::map<NodeId, ActivityState>& states) {
  ExecutionStatus status;
  bool all_complete = true;
  bool active = false;
  bool failed = false;
  bool interrupted = false;
  for (const auto& node : spec.nodes) {
    auto it = states.find(node.id);
    ActivityState s = it == states.end() ? ActivityState::Waiting : it->second;
    status.nodes[node.id] = s;
    all_complete = all_complete && s == ActivityState::Complete;
    active = active || s == ActivityState::Started || s == ActivityState::Suspended;
    failed = failed || s == ActivityState::Failed;
    interrupted = interrupted || s == ActivityState::Interrupted;
  }
  if (all_complete) status.state = RunState::Succeeded;
  else if (active || !eligible_from_states(spec, status.nodes).empty()) status.state = RunState::Running;
  else if (failed) status.state = RunState::Failed;
  else if (interrupted) status.state = RunState::Interrupted;
  else status.state = RunState::Running;
  return status;
}

}  // namespace provkernel
