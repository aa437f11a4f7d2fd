#pragma once

// JSON forms shared by the service and the CLI: workflow.v1, executor.v1,
// refset.v1 and the report/response bodies described in docs/api.md.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "provkernel/analysis.hpp"
#include "provkernel/executor.hpp"
#include "provkernel/kernel.hpp"

namespace provkernel::wire {

using Json = nlohmann::json;

// BadRequest on syntax errors.
Json parse_json(std::string_view text);

// workflow.v1. Shape errors are MalformedSpec; graph invariants are left to
// require_valid / flatten.
Json spec_to_json(const WorkflowSpec& spec);
WorkflowSpec spec_from_json(const Json& j);

Json version_to_json(const VersionInfo& info);
Json annotation_to_json(const Annotation& annotation);
Annotation annotation_from_json(const Json& j);
Json agent_to_json(const AgentDesc& agent);
AgentDesc agent_from_json(const Json& j);

Json data_ref_to_json(const DataRef& ref);
DataRef data_ref_from_json(const Json& j);

// An execution input or outcome output: a stored DataRef, or literal bytes
// to be stored first ({"payload": text} or {"payload_hex": hex}).
struct InputValue {
  std::optional<DataRef> ref;
  std::optional<std::string> bytes;
  MediaHint media = MediaHint::Bytes;
};
InputValue input_from_json(const Json& j);

Json outcome_to_json(const Outcome& outcome);
Json event_to_json(const Event& event);
Event event_from_json(const Json& j);
Json events_to_json(const std::vector<Event>& events);
std::vector<Event> events_from_json(const Json& j);
Json status_to_json(const ExecutionStatus& status);
ExecutionStatus status_from_json(const Json& j);
Json execution_to_json(const ExecutionRecord& record, const ExecutionStatus& status);

// executor.v1
Json executor_config_to_json(const sim::ExecutorConfig& config);
// Builtin registry; ConfigError on bad shape or fault plan.
sim::ExecutorConfig executor_config_from_json(const Json& j);

// refset.v1
Json refset_to_json(const analysis::ReferenceDataset& ref);
analysis::ReferenceDataset refset_from_json(const Json& j);

Json findings_to_json(const std::vector<analysis::Finding>& findings);
Json report_to_json(const analysis::ResultReport& report);
Json hits_to_json(const std::vector<analysis::AnnotationHit>& hits);
Json comparison_to_json(const analysis::ComparisonReport& report);

// Stable JSON text: sorted keys, two-space indent, trailing newline.
std::string dump(const Json& j);

}  // namespace provkernel::wire
