// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <regex>
#include <sstream>

#include "backends.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "provkernel/analysis.hpp"
#include "provkernel/documents.hpp"
#include "provkernel/error.hpp"
#include "provkernel/json_codec.hpp"
#include "provkernel/opm.hpp"
#include "provkernel/xml.hpp"

using namespace provkernel;
using namespace provkernel::testing;

namespace {

constexpr int kRuns = 200;
constexpr int kReconstructions = 100;
constexpr int kValidations = 100;
constexpr int kOpmGraphs = 200;

struct Check {
  int passed = 0;
  int total = 0;
  std::vector<std::string> failures;

  void expect(bool condition, const std::string& what) {
    ++total;
    if (condition) {
      ++passed;
    } else if (failures.size() < 5) {
      failures.push_back(what);
    }
  }
  bool ok() const { return total > 0 && passed == total; }
  std::string summary() const {
    std::string out = std::to_string(passed) + "/" + std::to_string(total);
    for (const auto& f : failures) out += "\n    " + f;
    return out;
  }
  void merge(const Check& other, const std::string& prefix) {
    passed += other.passed;
    total += other.total;
    for (const auto& f : other.failures) {
      if (failures.size() < 5) failures.push_back(prefix + ": " + f);
    }
  }
};

std::string normalize_timestamps(std::string text) {
  static const std::regex stamp(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}\.\d{3}Z)");
  return std::regex_replace(text, stamp, "<time>");
}

std::string spec_text(const WorkflowSpec& spec) { return wire::dump(wire::spec_to_json(spec)); }

std::string status_text(const ExecutionStatus& status) { return wire::dump(wire::status_to_json(status)); }

std::string trace_text(const std::vector<Event>& trace) {
  std::string out;
  for (const auto& e : trace) out += event_signature(e) + "\n";
  return out;
}

// Everything a query returns for one run, with ids and timestamps removed.
std::string run_fingerprint(const Kernel& kernel, const RunResult& run) {
  std::string out = status_text(kernel.status(run.execution));
  out += trace_text(kernel.trace(run.execution));
  for (const auto& [node, state] : kernel.status(run.execution).nodes) {
    auto outcome = kernel.latest_outcome(run.execution, node);
    if (!outcome) continue;
    out += node + ":";
    for (const auto& [port, ref] : outcome->outputs) out += " " + port + "=" + ref.digest;
    if (outcome->error) out += " error=" + outcome->error->code;
    out += "\n";
  }
  try {
    out += opm::export_xml(opm::to_opm(kernel, run.execution));
  } catch (const Error& e) {
    out += std::string("opm: ") + std::string(to_string(e.code())) + "\n";
  }
  return normalize_timestamps(out);
}

struct SuiteResult {
  Check c1, c2, c3, c4_runs, c5, reopen;
  std::string fingerprint;
};

// Criteria 1 and 2 plus the to_opm half of criterion 4.
void check_runs(Backend& backend, SuiteResult& result, std::vector<RunResult>& runs,
                std::vector<WorkflowSpec>& specs) {
  Rng rng(20260101);
  Kernel kernel(backend.storage());
  for (int i = 0; i < kRuns; ++i) {
    WorkflowSpec spec = random_dag(rng);
    sim::ExecutorConfig config;
    config.faults = random_faults(rng, spec);
    config.seed = static_cast<std::uint64_t>(i);
    RunResult run = run_spec(kernel, spec, config);
    runs.push_back(run);
    specs.push_back(spec);
    std::string label = "run " + std::to_string(i);

    // Replay from storage through a kernel that has never seen this item.
    Kernel fresh(backend.storage());
    std::vector<Event> trace = fresh.trace(run.execution);
    std::map<NodeId, ActivityState> replayed;
    bool replay_ok = replay_states(spec, trace, replayed);
    result.c1.expect(run.status.terminal() && replay_ok && replayed == run.status.nodes &&
                         fresh.status(run.execution) == run.status,
                     label + ": replayed state map differs");

    SchedulingScan scan = scan_scheduling(spec, trace);
    result.c2.expect(scan.violations == 0, label + ": " + (scan.details.empty() ? "" : scan.details.front()));

    try {
      opm::Graph graph = opm::to_opm(fresh, run.execution);
      bool valid = opm::validate_graph(graph).empty() && !opm_has_cycle(graph);
      opm::Graph back = opm::import_xml(opm::export_xml(graph));
      result.c4_runs.expect(valid && opm::isomorphic(back, graph) && graph_signature(back) == graph_signature(graph),
                            label + ": to_opm graph invalid or not round-tripped");
    } catch (const Error& e) {
      result.c4_runs.expect(false, label + ": " + e.what());
    }
    result.fingerprint += run_fingerprint(fresh, run);
  }
}

void check_reconstruction(Backend& backend, Check& check, std::string& fingerprint) {
  Rng rng(777);
  Kernel kernel(backend.storage());
  AgentDesc agent{"sim-ce", "simulated compute element", {}};
  for (int i = 0; i < kReconstructions; ++i) {
    WorkflowSpec spec = random_dag(rng);
    ItemPath item = kernel.create_item(spec, {agent});
    Kernel fresh(backend.storage());
    WorkflowSpec rebuilt = analysis::reconstruct_spec(fresh, item, 1);
    std::string expected = spec_text(spec);
    std::string expected_xml = xml::write(docs::encode_workflow(spec));
    check.expect(spec_text(rebuilt) == expected && xml::write(docs::encode_workflow(rebuilt)) == expected_xml,
                 "spec " + std::to_string(i) + ": reconstruct_spec differs");
    fingerprint += spec_text(rebuilt);
  }
  for (int i = 0; i < kReconstructions; ++i) {
    WorkflowSpec spec = random_dag(rng);
    ItemPath item = kernel.create_item(spec, {agent});
    std::set<NodeId> targets;
    int k = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int t = 0; t < k; ++t) {
      targets.insert(spec.nodes[std::uniform_int_distribution<std::size_t>(0, spec.nodes.size() - 1)(rng)].id);
    }
    Kernel fresh(backend.storage());
    WorkflowSpec part = analysis::reconstruct_part(fresh, item, 1, targets);

    std::set<NodeId> keep = ancestors_by_dfs(spec, targets);
    std::vector<ActivityNode> nodes;
    for (const auto& n : spec.nodes) {
      if (keep.count(n.id)) nodes.push_back(n);
    }
    std::vector<Dependency> deps;
    for (const auto& d : spec.deps) {
      if (keep.count(d.from) && keep.count(d.to)) deps.push_back(d);
    }
    std::vector<InputBinding> bindings;
    for (const auto& b : spec.bindings) {
      if (keep.count(b.node)) bindings.push_back(b);
    }
    auto ids = part.node_ids();
    std::set<NodeId> got(ids.begin(), ids.end());
    check.expect(got == keep && part.nodes == nodes && part.deps == deps && part.bindings == bindings &&
                     spec_problems(part).empty(),
                 "part " + std::to_string(i) + ": reconstruct_part differs from ancestor closure");
    fingerprint += spec_text(part);
  }
}

struct Mutation {
  std::string name;
  WorkflowSpec spec;
  std::vector<std::pair<analysis::FindingKind, std::string>> expected;
};

std::vector<Mutation> mutations_of(const WorkflowSpec& s, Rng& rng) {
  using analysis::FindingKind;
  std::vector<Mutation> out;
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::vector<NodeId> order = topological_order(s);

  {
    WorkflowSpec m = s;
    const NodeId& parent = order[pick(order.size())];
    ActivityNode node;
    node.id = "zz-added";
    node.kind = SingleActivity{"checksum"};
    node.declared_outputs = {"out"};
    m.nodes.push_back(node);
    m.deps.push_back({parent, node.id});
    normalize(m);
    out.push_back({"node add", m, {{FindingKind::NodeAdded, node.id}, {FindingKind::EdgeAdded, parent + "->" + node.id}}});
  }
  std::vector<NodeId> sinks = sink_nodes(s);
  if (s.nodes.size() > 1) {
    WorkflowSpec m = s;
    NodeId victim = sinks[pick(sinks.size())];
    if (victim == head_node(s)) victim.clear();
    if (!victim.empty()) {
      std::vector<std::pair<FindingKind, std::string>> expected{{FindingKind::NodeRemoved, victim}};
      std::erase_if(m.nodes, [&](const ActivityNode& n) { return n.id == victim; });
      for (const auto& d : s.deps) {
        if (d.to == victim) expected.emplace_back(FindingKind::EdgeRemoved, d.from + "->" + d.to);
      }
      std::erase_if(m.deps, [&](const Dependency& d) { return d.to == victim; });
      std::erase_if(m.bindings, [&](const InputBinding& b) { return b.node == victim; });
      std::erase_if(m.annotations, [&](const Annotation& a) { return a.node == victim; });
      normalize(m);
      out.push_back({"node remove", m, expected});
    }
  }
  {
    std::set<Dependency> existing(s.deps.begin(), s.deps.end());
    std::vector<Dependency> candidates;
    for (std::size_t a = 0; a < order.size(); ++a) {
      for (std::size_t b = a + 1; b < order.size(); ++b) {
        Dependency d{order[a], order[b]};
        if (!existing.count(d) && order[b] != head_node(s)) candidates.push_back(d);
      }
    }
    if (!candidates.empty()) {
      Dependency d = candidates[pick(candidates.size())];
      WorkflowSpec m = s;
      m.deps.push_back(d);
      normalize(m);
      out.push_back({"edge add", m, {{FindingKind::EdgeAdded, d.from + "->" + d.to}}});
    }
  }
  {
    std::vector<Dependency> candidates;
    for (const auto& d : s.deps) {
      WorkflowSpec m = s;
      std::erase(m.deps, d);
      if (spec_problems(m).empty()) candidates.push_back(d);
    }
    if (!candidates.empty()) {
      Dependency d = candidates[pick(candidates.size())];
      WorkflowSpec m = s;
      std::erase(m.deps, d);
      out.push_back({"edge remove", m, {{FindingKind::EdgeRemoved, d.from + "->" + d.to}}});
    }
  }
  {
    WorkflowSpec m = s;
    auto& node = m.nodes[pick(m.nodes.size())];
    node.kind = SingleActivity{node.script_ref() + "-v2"};
    out.push_back({"script change", m, {{FindingKind::ScriptChanged, node.id}}});
  }
  return out;
}

void check_validation(Backend& backend, Check& check, std::string& fingerprint) {
  Rng rng(4242);
  Kernel kernel(backend.storage());
  AgentDesc agent{"sim-ce", "simulated compute element", {}};
  for (int i = 0; i < kValidations; ++i) {
    ItemPath item = kernel.create_item(random_dag(rng), {agent});
    Kernel fresh(backend.storage());
    WorkflowSpec s = fresh.stored_spec(item, 1);
    auto self = analysis::validate_spec(s, s);
    check.expect(self.empty(), "spec " + std::to_string(i) + ": self-validation reports findings");
    for (auto& mutation : mutations_of(s, rng)) {
      std::string label = "spec " + std::to_string(i) + " " + mutation.name;
      if (!spec_problems(mutation.spec).empty()) {
        check.expect(false, label + ": mutation produced an invalid spec");
        continue;
      }
      auto findings = analysis::validate_spec(mutation.spec, s);
      std::vector<std::pair<analysis::FindingKind, std::string>> got;
      for (const auto& f : findings) got.emplace_back(f.kind, f.location);
      std::sort(got.begin(), got.end());
      std::sort(mutation.expected.begin(), mutation.expected.end());
      check.expect(got == mutation.expected, label + ": findings differ");
      fingerprint += label + " " + std::to_string(findings.size()) + "\n";
    }
  }
}

SuiteResult run_suite(Backend& backend) {
  SuiteResult result;
  std::vector<RunResult> runs;
  std::vector<WorkflowSpec> specs;
  check_runs(backend, result, runs, specs);
  check_reconstruction(backend, result.c3, result.fingerprint);
  check_validation(backend, result.c5, result.fingerprint);

  // Close and reopen, then ask the same questions again.
  std::vector<std::string> before;
  {
    Kernel kernel(backend.storage());
    for (const auto& run : runs) before.push_back(run_fingerprint(kernel, run));
  }
  backend.reopen();
  Kernel reopened(backend.storage());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    result.reopen.expect(run_fingerprint(reopened, runs[i]) == before[i],
                         "run " + std::to_string(i) + ": query results changed after reopen");
    result.reopen.expect(spec_text(reopened.stored_spec(runs[i].item, 1)) == spec_text(specs[i]),
                         "run " + std::to_string(i) + ": stored spec changed after reopen");
  }
  return result;
}

void check_random_opm(Check& check) {
  Rng rng(99);
  for (int i = 0; i < kOpmGraphs; ++i) {
    opm::Graph g = random_opm_graph(rng);
    std::string label = "graph " + std::to_string(i);
    if (!opm::validate_graph(g).empty() || opm_has_cycle(g)) {
      check.expect(false, label + ": generator produced an invalid graph");
      continue;
    }
    try {
      std::string text = opm::export_xml(g);
      opm::Graph back = opm::import_xml(text);
      check.expect(opm::isomorphic(back, g) && graph_signature(back) == graph_signature(g) &&
                       opm::export_xml(back) == text,
                   label + ": round trip differs");
    } catch (const Error& e) {
      check.expect(false, label + ": " + e.what());
    }
  }
}

// The failing pipeline, the annotation, and the corrected re-run.
Check check_story() {
  Check check;
  MemoryStorage storage;
  Kernel kernel(storage);
  WorkflowSpec spec = WorkflowBuilder("image-study")
                          .single("load", "concat", {"images"})
                          .single("normalize", "scale", {"in"}, {"out"}, {{"factor", "0.5"}})
                          .single("qc", "noisy-threshold", {"in"}, {"out"}, {{"threshold", "1.0"}})
                          .single("stats", "scale", {"in"}, {"out"}, {{"factor", "2"}})
                          .single("report", "checksum", {"in"})
                          .depend("load", "normalize")
                          .depend("normalize", "qc")
                          .depend("qc", "stats")
                          .depend("stats", "report")
                          .bind_external("load", "images", "images")
                          .bind_upstream("normalize", "in", "load", "out")
                          .bind_upstream("qc", "in", "normalize", "out")
                          .bind_upstream("stats", "in", "qc", "out")
                          .bind_upstream("report", "in", "stats", "out")
                          .build();
  sim::SimExecutor executor(sim::ExecutorConfig{});
  ItemPath item = kernel.create_item(spec, {executor.agent()});

  // Bad group: one value normalises above the threshold.
  DataRef bad = kernel.store_payload(item, "images", "0.2 0.4 3.8 0.6", MediaHint::NumericVector);
  ExecutionId first = kernel.start_execution(item, 1, {{"images", bad}});
  ExecutionStatus status = kernel.run_to_completion(first, executor);
  check.expect(status.state == RunState::Failed, "first run did not fail");

  std::vector<Event> trace = kernel.trace(first);
  std::vector<NodeId> failed;
  for (const auto& e : trace) {
    if (e.transition == Transition::Fail) failed.push_back(e.node);
  }
  auto qc_outcome = kernel.latest_outcome(first, "qc");
  check.expect(failed == std::vector<NodeId>{"qc"} && qc_outcome && qc_outcome->error &&
                   qc_outcome->error->code == "THRESHOLD_EXCEEDED",
               "trace does not pinpoint qc");
  bool downstream_idle = true;
  for (const auto& e : trace) {
    if (e.node == "stats" || e.node == "report") downstream_idle = false;
  }
  check.expect(downstream_idle && status.nodes.at("stats") == ActivityState::Waiting,
               "nodes after qc were started");

  Annotation note{"analyst", now_utc(), "Bad image group in this batch: value above QC threshold", {"warning"}, "qc"};
  kernel.annotate(item, 1, note);
  auto hits = analysis::search_annotations(kernel, "bad image", {});
  check.expect(hits.size() == 1 && hits[0].item == item && hits[0].annotation.text == note.text,
               "annotation not found by search");
  check.expect(analysis::search_annotations(kernel, "bad image", {"warning"}).size() == 1,
               "annotation not found by tag");

  // Expected results of the corrected group, computed by hand.
  const std::string good_bytes = "0.2 0.4 0.8 0.6";
  analysis::ReferenceDataset ref;
  analysis::Expectation stats_exp;
  stats_exp.node = "stats";
  stats_exp.port = "out";
  stats_exp.expected = DataRef{"stats", sha256_hex(good_bytes), good_bytes.size(), std::nullopt, MediaHint::NumericVector};
  stats_exp.bytes = good_bytes;
  stats_exp.comparator = {analysis::ComparatorKind::NumericTolerance, 1e-9, 0.0};
  analysis::Expectation report_exp;
  report_exp.node = "report";
  report_exp.port = "out";
  report_exp.expected = DataRef{"report", sha256_hex(sha256_raw(good_bytes)), 32, std::nullopt, MediaHint::Bytes};
  report_exp.comparator = {analysis::ComparatorKind::DigestOnly, 0, 0};
  ref.expectations = {stats_exp, report_exp};

  auto offline = analysis::validate_offline(kernel, first, ref);
  check.expect(!offline.overall && offline.results.size() == 2 && !offline.results[0].matched &&
                   !offline.results[1].matched,
               "offline validation did not report the unmatched expectations");

  WorkflowSpec revised = kernel.stored_spec(item, 1);
  int v2 = kernel.derive_version(item, revised, "re-run with corrected image group");
  check.expect(v2 == 2 && kernel.lifecycle(item).back().parent == 1, "derived version has wrong lineage");
  DataRef good = kernel.store_payload(item, "images", good_bytes, MediaHint::NumericVector);
  auto online = analysis::validate_online(kernel, item, v2, {{"images", good}}, ref, executor);
  bool all_matched = online.overall && online.results.size() == 2;
  for (const auto& r : online.results) all_matched = all_matched && r.matched;
  check.expect(all_matched, "online validation of the corrected version did not match");
  check.expect(kernel.status(online.execution).state == RunState::Succeeded, "corrected run did not succeed");
  return check;
}

// Two independent full runs with equal seeds.
Check check_determinism() {
  Check check;
  auto one_pass = [](std::vector<std::string>& traces, std::vector<std::string>& exports) {
    MemoryStorage storage;
    Kernel kernel(storage);
    Rng rng(5150);
    for (int i = 0; i < 50; ++i) {
      WorkflowSpec spec = random_dag(rng);
      sim::ExecutorConfig config;
      config.faults = random_faults(rng, spec, 0.15);
      config.seed = 17;
      RunResult run = run_spec(kernel, spec, config);
      traces.push_back(trace_text(kernel.trace(run.execution)) + status_text(run.status));
      exports.push_back(normalize_timestamps(opm::export_xml(opm::to_opm(kernel, run.execution))));
    }
  };
  std::vector<std::string> traces_a, traces_b, exports_a, exports_b;
  one_pass(traces_a, exports_a);
  one_pass(traces_b, exports_b);
  for (std::size_t i = 0; i < traces_a.size(); ++i) {
    check.expect(traces_a[i] == traces_b[i], "run " + std::to_string(i) + ": traces differ");
    check.expect(exports_a[i] == exports_b[i], "run " + std::to_string(i) + ": opm exports differ");
  }
  return check;
}

bool report(int number, const std::string& title, const Check& check) {
  std::cout << (check.ok() ? "PASS" : "FAIL") << " criterion " << number << ": " << title << " ("
            << check.summary() << ")" << std::endl;
  return check.ok();
}

}  // namespace

int main() {
  auto started = std::chrono::steady_clock::now();
  std::map<std::string, SuiteResult> suites;
  for (const auto& name : backend_names()) {
    auto backend = make_backend(name);
    suites[name] = run_suite(*backend);
    auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cerr << "backend " << name << " done after " << seconds << "s" << std::endl;
  }

  Check c1, c2, c3, c4, c5, c7;
  for (const auto& [name, suite] : suites) {
    c1.merge(suite.c1, name);
    c2.merge(suite.c2, name);
    c3.merge(suite.c3, name);
    c4.merge(suite.c4_runs, name);
    c5.merge(suite.c5, name);
    c7.merge(suite.c1, name);
    c7.merge(suite.c2, name);
    c7.merge(suite.c3, name);
    c7.merge(suite.c4_runs, name);
    c7.merge(suite.c5, name);
    c7.merge(suite.reopen, name + " reopen");
    c7.expect(suite.fingerprint == suites.at("memory").fingerprint, name + ": results differ from memory backend");
  }
  Check random_opm;
  check_random_opm(random_opm);
  c4.merge(random_opm, "random graphs");

  bool ok = true;
  ok &= report(1, "event log replay reproduces final state", c1);
  ok &= report(2, "no Start before predecessor CompleteOk", c2);
  ok &= report(3, "reconstruction fidelity", c3);
  ok &= report(4, "opm round trip and validity", c4);
  ok &= report(5, "spec validation correctness", c5);
  ok &= report(6, "failing pipeline story end to end", check_story());
  ok &= report(7, "backend interchangeability", c7);
  ok &= report(8, "determinism under equal seeds", check_determinism());

  auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::cout << "total " << seconds << "s" << std::endl;
  return ok ? 0 : 1;
}
