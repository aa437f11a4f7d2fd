#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "provkernel/kernel.hpp"

namespace provkernel::analysis {

enum class Severity { Error, Warning };
enum class FindingKind {
  NodeAdded,
  NodeRemoved,
  EdgeAdded,
  EdgeRemoved,
  ScriptChanged,
  BindingChanged,
  MetadataChanged
};

std::string_view to_string(Severity severity);
std::string_view to_string(FindingKind kind);

struct Finding {
  Severity severity = Severity::Error;
  FindingKind kind = FindingKind::NodeAdded;
  std::string location;  // node id, "from->to", or "" for the workflow itself
  std::string detail;

  bool operator==(const Finding&) const = default;
};

// Ordered by kind, then location. MetadataChanged findings are warnings.
std::vector<Finding> validate_spec(const WorkflowSpec& candidate, const WorkflowSpec& blueprint);

// The stored version with any annotations attached to it since appended.
WorkflowSpec reconstruct_spec(const Kernel& kernel, const ItemPath& item, int version);
// `targets` and all their ancestors, with the induced deps and bindings.
WorkflowSpec reconstruct_part(const Kernel& kernel, const ItemPath& item, int version,
                              const std::set<NodeId>& targets);
WorkflowSpec sub_spec(const WorkflowSpec& spec, const std::set<NodeId>& targets);

enum class ComparatorKind { ExactBytes, NumericTolerance, DigestOnly };

std::string_view to_string(ComparatorKind kind);
ComparatorKind parse_comparator_kind(std::string_view text);

struct Comparator {
  ComparatorKind kind = ComparatorKind::DigestOnly;
  double abs = 0.0;
  double rel = 0.0;

  bool operator==(const Comparator&) const = default;
};

struct Expectation {
  NodeId node;
  std::string port;
  DataRef expected;
  // Reference bytes; ExactBytes and NumericTolerance load them from
  // expected.payload_path when absent.
  std::optional<std::string> bytes;
  Comparator comparator;

  bool operator==(const Expectation&) const = default;
};

struct ReferenceDataset {
  std::vector<Expectation> expectations;

  // BadRequest on negative tolerances or duplicate (node, port).
  void validate() const;
};

struct ExpectationResult {
  NodeId node;
  std::string port;
  bool matched = false;
  std::optional<DataRef> observed;
  std::string detail;

  bool operator==(const ExpectationResult&) const = default;
};

struct ResultReport {
  ExecutionId execution;
  std::vector<ExpectationResult> results;
  bool overall = true;

  bool operator==(const ResultReport&) const = default;
};

// |o - e| <= abs + rel * |e| elementwise; differing lengths never match.
bool numeric_match(const std::vector<double>& observed, const std::vector<double>& expected, double abs,
                   double rel, std::string* detail = nullptr);

// NotTerminal unless the execution has finished.
ResultReport validate_offline(const Kernel& kernel, const ExecutionId& execution, const ReferenceDataset& ref);
ResultReport validate_online(Kernel& kernel, const ItemPath& item, int version,
                             const std::map<std::string, DataRef>& inputs, const ReferenceDataset& ref,
                             Executor& executor);

struct AnnotationHit {
  ItemPath item;
  int version = 0;
  Annotation annotation;

  bool operator==(const AnnotationHit&) const = default;
};

// Case-insensitive substring on text; every tag in `tags` must be present.
std::vector<AnnotationHit> search_annotations(const Kernel& kernel, const std::string& query,
                                              const std::vector<std::string>& tags);

struct OutcomeDiff {
  NodeId node;
  std::vector<std::string> only_in_a;  // ports
  std::vector<std::string> only_in_b;
  std::vector<std::string> digest_mismatch;

  bool operator==(const OutcomeDiff&) const = default;
};

struct ComparisonReport {
  std::vector<Finding> spec_findings;
  std::vector<OutcomeDiff> outcome_diffs;  // nodes with at least one difference
  ExecutionStatus status_a;
  ExecutionStatus status_b;

  bool empty() const { return spec_findings.empty() && outcome_diffs.empty(); }
};

ComparisonReport compare_analyses(const Kernel& kernel, const ExecutionId& a, const ExecutionId& b);

}  // namespace provkernel::analysis
