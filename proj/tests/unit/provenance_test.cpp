#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "provkernel/error.hpp"
#include "provkernel/json_codec.hpp"
#include "provkernel/provenance.hpp"

using namespace provkernel;

namespace {

constexpr ActivityState kStates[] = {ActivityState::Waiting,     ActivityState::Started,  ActivityState::Suspended,
                                     ActivityState::Interrupted, ActivityState::Complete, ActivityState::Failed};
constexpr Transition kTransitions[] = {Transition::Start,      Transition::Suspend, Transition::Resume,
                                       Transition::CompleteOk, Transition::Fail,    Transition::Interrupt};

WorkflowSpec chain() {
  return WorkflowBuilder("chain")
      .single("a", "concat")
      .single("b", "concat")
      .single("c", "concat")
      .depend("a", "b")
      .depend("b", "c")
      .build();
}

}  // namespace

// The state table written out by hand, checked against both the library
// and the oracle used by the acceptance suite.
TEST(StateMachine, ExhaustiveTable) {
  using S = ActivityState;
  using T = Transition;
  const std::map<std::pair<S, T>, S> legal = {
      {{S::Waiting, T::Start}, S::Started},         {{S::Started, T::Suspend}, S::Suspended},
      {{S::Suspended, T::Resume}, S::Started},      {{S::Started, T::CompleteOk}, S::Complete},
      {{S::Started, T::Fail}, S::Failed},           {{S::Waiting, T::Interrupt}, S::Interrupted},
      {{S::Started, T::Interrupt}, S::Interrupted}, {{S::Suspended, T::Interrupt}, S::Interrupted},
  };
  WorkflowSpec one = WorkflowBuilder("one").single("n", "concat").build();
  for (S s : kStates) {
    for (T t : kTransitions) {
      auto it = legal.find({s, t});
      EXPECT_EQ(is_legal(s, t), it != legal.end());
      if (it != legal.end()) {
        EXPECT_EQ(apply_transition(s, t), it->second);
      } else {
        try {
          apply_transition(s, t);
          ADD_FAILURE() << "illegal transition accepted";
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::InvalidTransition);
        }
      }
    }
  }
  EXPECT_TRUE(is_terminal(S::Complete));
  EXPECT_TRUE(is_terminal(S::Failed));
  EXPECT_TRUE(is_terminal(S::Interrupted));
  EXPECT_FALSE(is_terminal(S::Suspended));
  EXPECT_TRUE(carries_outcome(T::CompleteOk));
  EXPECT_TRUE(carries_outcome(T::Fail));
  EXPECT_FALSE(carries_outcome(T::Start));
}

TEST(StateMachine, RandomWalksAgreeWithOracle) {
  std::mt19937_64 rng(5);
  WorkflowSpec one = WorkflowBuilder("one").single("n", "concat").build();
  for (int walk = 0; walk < 500; ++walk) {
    ActivityState s = ActivityState::Waiting;
    std::vector<Event> trace;
    for (int step = 0; step < 6; ++step) {
      Transition t = kTransitions[rng() % 6];
      if (!is_legal(s, t)) continue;
      s = apply_transition(s, t);
      Event e;
      e.node = "n";
      e.transition = t;
      e.seq = static_cast<int>(trace.size()) + 1;
      trace.push_back(e);
    }
    std::map<NodeId, ActivityState> replayed;
    ASSERT_TRUE(provkernel::testing::replay_states(one, trace, replayed));
    EXPECT_EQ(replayed.at("n"), s);
  }
}

TEST(StateMachine, NamesRoundTrip) {
  for (ActivityState s : kStates) EXPECT_EQ(parse_activity_state(to_string(s)), s);
  for (Transition t : kTransitions) EXPECT_EQ(parse_transition(to_string(t)), t);
  for (RunState r : {RunState::Running, RunState::Succeeded, RunState::Failed, RunState::Interrupted}) {
    EXPECT_EQ(parse_run_state(to_string(r)), r);
  }
}

TEST(Status, DerivedFromNodeStates) {
  using S = ActivityState;
  WorkflowSpec s = chain();
  EXPECT_EQ(derive_status(s, {{"a", S::Waiting}, {"b", S::Waiting}, {"c", S::Waiting}}).state, RunState::Running);
  EXPECT_EQ(derive_status(s, {{"a", S::Complete}, {"b", S::Complete}, {"c", S::Complete}}).state,
            RunState::Succeeded);
  EXPECT_EQ(derive_status(s, {{"a", S::Complete}, {"b", S::Suspended}, {"c", S::Waiting}}).state, RunState::Running);
  EXPECT_EQ(derive_status(s, {{"a", S::Complete}, {"b", S::Failed}, {"c", S::Waiting}}).state, RunState::Failed);
  EXPECT_EQ(derive_status(s, {{"a", S::Interrupted}, {"b", S::Waiting}, {"c", S::Waiting}}).state,
            RunState::Interrupted);
  EXPECT_EQ(derive_status(s, {{"a", S::Complete}, {"b", S::Interrupted}, {"c", S::Failed}}).state, RunState::Failed);
}

TEST(Status, EligibleNodesNeedCompletePredecessors) {
  using S = ActivityState;
  WorkflowSpec s = chain();
  EXPECT_EQ(eligible_from_states(s, {{"a", S::Waiting}, {"b", S::Waiting}, {"c", S::Waiting}}),
            std::vector<NodeId>{"a"});
  EXPECT_EQ(eligible_from_states(s, {{"a", S::Complete}, {"b", S::Waiting}, {"c", S::Waiting}}),
            std::vector<NodeId>{"b"});
  EXPECT_TRUE(eligible_from_states(s, {{"a", S::Failed}, {"b", S::Waiting}, {"c", S::Waiting}}).empty());
}

TEST(Events, ExecutionIdText) {
  ExecutionId id{ItemPath::generate(), 12};
  EXPECT_EQ(id.to_string(), id.item.str() + ":12");
  EXPECT_EQ(ExecutionId::parse(id.to_string()), id);
  try {
    ExecutionId::parse("nope");
    FAIL();
  } catch (const Error&) {
  }
}

TEST(Events, JsonRoundTripAndTimeInsensitiveEquality) {
  ItemPath item = ItemPath::generate();
  Event e;
  e.item = item;
  e.seq = 3;
  e.execution = {item, 1};
  e.node = "b";
  e.transition = Transition::CompleteOk;
  e.agent = "ce-1";
  e.at = "2026-01-01T00:00:00.000Z";
  e.outcome_path = ClusterPath::make(item, ClusterKind::Outcome, "000001/000003");
  EXPECT_EQ(wire::event_from_json(wire::event_to_json(e)), e);
  Event later = e;
  later.at = "2026-02-02T00:00:00.000Z";
  EXPECT_TRUE(same_modulo_time(e, later));
  later.seq = 4;
  EXPECT_FALSE(same_modulo_time(e, later));
}
