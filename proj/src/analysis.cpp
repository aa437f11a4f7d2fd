#include "provkernel/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "provkernel/error.hpp"

namespace provkernel::analysis {

std::string_view to_string(Severity severity) { return severity == Severity::Error ? "Error" : "Warning"; }

std::string_view to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::NodeAdded: return "NodeAdded";
    case FindingKind::NodeRemoved: return "NodeRemoved";
    case FindingKind::EdgeAdded: return "EdgeAdded";
    case FindingKind::EdgeRemoved: return "EdgeRemoved";
    case FindingKind::ScriptChanged: return "ScriptChanged";
    case FindingKind::BindingChanged: return "BindingChanged";
    case FindingKind::MetadataChanged: return "MetadataChanged";
  }
  return "NodeAdded";
}

std::string_view to_string(ComparatorKind kind) {
  switch (kind) {
    case ComparatorKind::ExactBytes: return "exact-bytes";
    case ComparatorKind::NumericTolerance: return "numeric-tolerance";
    case ComparatorKind::DigestOnly: return "digest-only";
  }
  return "digest-only";
}

ComparatorKind parse_comparator_kind(std::string_view text) {
  if (text == "exact-bytes") return ComparatorKind::ExactBytes;
  if (text == "numeric-tolerance") return ComparatorKind::NumericTolerance;
  if (text == "digest-only") return ComparatorKind::DigestOnly;
  fail(ErrorCode::BadRequest, "unknown comparator '" + std::string(text) + "'");
}

namespace {

std::vector<std::string> sorted(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  return values;
}

std::vector<InputBinding> bindings_of(const WorkflowSpec& spec, const NodeId& node) {
  std::vector<InputBinding> out;
  for (const auto& binding : spec.bindings) {
    if (binding.node == node) out.push_back(binding);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string edge_location(const Dependency& dep) { return dep.from + "->" + dep.to; }

}  // namespace

std::vector<Finding> validate_spec(const WorkflowSpec& candidate, const WorkflowSpec& blueprint) {
  std::vector<Finding> out;
  auto add = [&](FindingKind kind, std::string location, std::string detail) {
    Severity severity = kind == FindingKind::MetadataChanged ? Severity::Warning : Severity::Error;
    out.push_back(Finding{severity, kind, std::move(location), std::move(detail)});
  };

  for (const auto& node : candidate.nodes) {
    const ActivityNode* reference = blueprint.find(node.id);
    if (!reference) {
      add(FindingKind::NodeAdded, node.id, "node not in blueprint");
      continue;
    }
    if (node.kind != reference->kind || sorted(node.declared_outputs) != sorted(reference->declared_outputs)) {
      std::string detail = node.script_ref() != reference->script_ref()
                               ? "script '" + reference->script_ref() + "' became '" + node.script_ref() + "'"
                               : "activity definition differs";
      add(FindingKind::ScriptChanged, node.id, detail);
    }
    if (sorted(node.declared_inputs) != sorted(reference->declared_inputs) ||
        bindings_of(candidate, node.id) != bindings_of(blueprint, node.id)) {
      add(FindingKind::BindingChanged, node.id, "input ports or bindings differ");
    }
    if (node.metadata != reference->metadata) add(FindingKind::MetadataChanged, node.id, "node metadata differs");
  }
  for (const auto& node : blueprint.nodes) {
    if (!candidate.contains(node.id)) add(FindingKind::NodeRemoved, node.id, "blueprint node missing");
  }

  std::set<Dependency> candidate_deps(candidate.deps.begin(), candidate.deps.end());
  std::set<Dependency> blueprint_deps(blueprint.deps.begin(), blueprint.deps.end());
  for (const auto& dep : candidate_deps) {
    if (!blueprint_deps.count(dep)) add(FindingKind::EdgeAdded, edge_location(dep), "dependency not in blueprint");
  }
  for (const auto& dep : blueprint_deps) {
    if (!candidate_deps.count(dep)) add(FindingKind::EdgeRemoved, edge_location(dep), "blueprint dependency missing");
  }

  if (candidate.metadata != blueprint.metadata) add(FindingKind::MetadataChanged, "", "workflow metadata differs");

  std::stable_sort(out.begin(), out.end(), [](const Finding& a, const Finding& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.location < b.location;
  });
  return out;
}

WorkflowSpec reconstruct_spec(const Kernel& kernel, const ItemPath& item, int version) {
  WorkflowSpec spec = kernel.stored_spec(item, version);
  for (auto& annotation : kernel.attached_annotations(item, version)) {
    spec.annotations.push_back(std::move(annotation));
  }
  return spec;
}

WorkflowSpec sub_spec(const WorkflowSpec& spec, const std::set<NodeId>& targets) {
  if (targets.empty()) fail(ErrorCode::BadRequest, "at least one target node is required");
  std::set<NodeId> keep = ancestor_closure(spec, targets);
  WorkflowSpec out;
  out.name = spec.name;
  out.version_info = spec.version_info;
  out.metadata = spec.metadata;
  for (const auto& node : spec.nodes) {
    if (keep.count(node.id)) out.nodes.push_back(node);
  }
  for (const auto& dep : spec.deps) {
    if (keep.count(dep.from) && keep.count(dep.to)) out.deps.push_back(dep);
  }
  for (const auto& binding : spec.bindings) {
    if (keep.count(binding.node)) out.bindings.push_back(binding);
  }
  for (const auto& annotation : spec.annotations) {
    if (!annotation.node || keep.count(*annotation.node)) out.annotations.push_back(annotation);
  }
  normalize(out);
  return out;
}

WorkflowSpec reconstruct_part(const Kernel& kernel, const ItemPath& item, int version,
                              const std::set<NodeId>& targets) {
  return sub_spec(reconstruct_spec(kernel, item, version), targets);
}

void ReferenceDataset::validate() const {
  std::set<std::pair<NodeId, std::string>> seen;
  for (const auto& e : expectations) {
    if (!(e.comparator.abs >= 0.0) || !(e.comparator.rel >= 0.0)) {
      fail(ErrorCode::BadRequest, "tolerances for " + e.node + "." + e.port + " must be non-negative");
    }
    if (!seen.insert({e.node, e.port}).second) {
      fail(ErrorCode::BadRequest, "duplicate expectation for " + e.node + "." + e.port);
    }
  }
}

bool numeric_match(const std::vector<double>& observed, const std::vector<double>& expected, double abs,
                   double rel, std::string* detail) {
  if (observed.size() != expected.size()) {
    if (detail) {
      *detail = "length " + std::to_string(observed.size()) + " differs from expected " +
                std::to_string(expected.size());
    }
    return false;
  }
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double limit = abs + rel * std::fabs(expected[i]);
    if (!(std::fabs(observed[i] - expected[i]) <= limit)) {
      if (detail) {
        *detail = "element " + std::to_string(i) + ": " + format_numeric_vector({observed[i]}) + " vs expected " +
                  format_numeric_vector({expected[i]});
      }
      return false;
    }
  }
  if (detail) *detail = "within tolerance";
  return true;
}

namespace {

ExpectationResult check(const Kernel& kernel, const ExecutionId& execution, const Expectation& e) {
  ExpectationResult result{e.node, e.port, false, std::nullopt, ""};
  auto outcome = kernel.latest_outcome(execution, e.node);
  if (!outcome) {
    result.detail = "no outcome";
    return result;
  }
  if (outcome->error) {
    result.detail = "node failed: " + outcome->error->code;
    return result;
  }
  auto it = outcome->outputs.find(e.port);
  if (it == outcome->outputs.end()) {
    result.detail = "no output on port '" + e.port + "'";
    return result;
  }
  result.observed = it->second;
  const DataRef& observed = it->second;

  if (e.comparator.kind == ComparatorKind::DigestOnly) {
    result.matched = observed.digest == e.expected.digest;
    result.detail = result.matched ? "digest matches" : "digest " + observed.digest + " differs";
    return result;
  }

  std::string reference;
  if (e.bytes) {
    reference = *e.bytes;
  } else if (e.expected.payload_path) {
    reference = kernel.load_payload(e.expected);
  } else if (e.comparator.kind == ComparatorKind::ExactBytes) {
    result.matched = observed.digest == e.expected.digest;
    result.detail = result.matched ? "bytes match" : "bytes differ";
    return result;
  } else {
    result.detail = "reference bytes unavailable";
    return result;
  }
  std::string actual = kernel.load_payload(observed);

  if (e.comparator.kind == ComparatorKind::ExactBytes) {
    result.matched = actual == reference;
    result.detail = result.matched ? "bytes match" : "bytes differ";
    return result;
  }
  std::vector<double> o;
  std::vector<double> x;
  if (!parse_numeric_vector(actual, o)) {
    result.detail = "observed output is not a numeric vector";
    return result;
  }
  if (!parse_numeric_vector(reference, x)) {
    result.detail = "reference is not a numeric vector";
    return result;
  }
  result.matched = numeric_match(o, x, e.comparator.abs, e.comparator.rel, &result.detail);
  return result;
}

}  // namespace

ResultReport validate_offline(const Kernel& kernel, const ExecutionId& execution, const ReferenceDataset& ref) {
  ref.validate();
  ExecutionStatus status = kernel.status(execution);
  if (!status.terminal()) fail(ErrorCode::NotTerminal, "execution " + execution.to_string() + " is still running");
  ResultReport report;
  report.execution = execution;
  for (const auto& expectation : ref.expectations) {
    report.results.push_back(check(kernel, execution, expectation));
    report.overall = report.overall && report.results.back().matched;
  }
  return report;
}

ResultReport validate_online(Kernel& kernel, const ItemPath& item, int version,
                             const std::map<std::string, DataRef>& inputs, const ReferenceDataset& ref,
                             Executor& executor) {
  ref.validate();
  ExecutionId execution = kernel.start_execution(item, version, inputs);
  kernel.run_to_completion(execution, executor);
  return validate_offline(kernel, execution, ref);
}

std::vector<AnnotationHit> search_annotations(const Kernel& kernel, const std::string& query,
                                              const std::vector<std::string>& tags) {
  const std::string needle = to_lower(query);
  auto matches = [&](const Annotation& annotation) {
    if (to_lower(annotation.text).find(needle) == std::string::npos) return false;
    for (const auto& tag : tags) {
      if (std::find(annotation.tags.begin(), annotation.tags.end(), tag) == annotation.tags.end()) return false;
    }
    return true;
  };
  std::vector<AnnotationHit> hits;
  for (const auto& item : kernel.items()) {
    int latest = kernel.latest_version(item);
    for (int version = 1; version <= latest; ++version) {
      for (const auto& annotation : reconstruct_spec(kernel, item, version).annotations) {
        if (matches(annotation)) hits.push_back(AnnotationHit{item, version, annotation});
      }
    }
  }
  std::stable_sort(hits.begin(), hits.end(), [](const AnnotationHit& a, const AnnotationHit& b) {
    if (a.item != b.item) return a.item < b.item;
    if (a.version != b.version) return a.version < b.version;
    return a.annotation.at < b.annotation.at;
  });
  return hits;
}

ComparisonReport compare_analyses(const Kernel& kernel, const ExecutionId& a, const ExecutionId& b) {
  ComparisonReport report;
  report.status_a = kernel.status(a);
  report.status_b = kernel.status(b);
  if (!report.status_a.terminal()) fail(ErrorCode::NotTerminal, "execution " + a.to_string() + " is still running");
  if (!report.status_b.terminal()) fail(ErrorCode::NotTerminal, "execution " + b.to_string() + " is still running");

  WorkflowSpec spec_a = kernel.execution_spec(a);
  WorkflowSpec spec_b = kernel.execution_spec(b);
  report.spec_findings = validate_spec(spec_a, spec_b);

  std::set<NodeId> nodes;
  for (const auto& node : spec_a.nodes) nodes.insert(node.id);
  for (const auto& node : spec_b.nodes) nodes.insert(node.id);
  for (const auto& node : nodes) {
    std::map<std::string, DataRef> outputs_a;
    std::map<std::string, DataRef> outputs_b;
    if (spec_a.contains(node)) {
      if (auto outcome = kernel.latest_outcome(a, node)) outputs_a = outcome->outputs;
    }
    if (spec_b.contains(node)) {
      if (auto outcome = kernel.latest_outcome(b, node)) outputs_b = outcome->outputs;
    }
    OutcomeDiff diff{node, {}, {}, {}};
    for (const auto& [port, ref] : outputs_a) {
      auto other = outputs_b.find(port);
      if (other == outputs_b.end()) {
        diff.only_in_a.push_back(port);
      } else if (other->second.digest != ref.digest) {
        diff.digest_mismatch.push_back(port);
      }
    }
    for (const auto& [port, ref] : outputs_b) {
      if (!outputs_a.count(port)) diff.only_in_b.push_back(port);
    }
    if (!diff.only_in_a.empty() || !diff.only_in_b.empty() || !diff.digest_mismatch.empty()) {
      report.outcome_diffs.push_back(std::move(diff));
    }
  }
  return report;
}

}  // namespace provkernel::analysis
