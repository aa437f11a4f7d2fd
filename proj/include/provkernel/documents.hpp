#pragma once

// storage.v1: the XML documents kept in each cluster. docs/storage.md
// describes every element and attribute.

#include <string>
#include <vector>

#include "provkernel/provenance.hpp"
#include "provkernel/workflow.hpp"
#include "provkernel/xml.hpp"

namespace provkernel::docs {

xml::Element encode_workflow(const WorkflowSpec& spec);
WorkflowSpec decode_workflow(const xml::Element& element);

xml::Element encode_event(const Event& event);
Event decode_event(const xml::Element& element);

xml::Element encode_outcome(const Outcome& outcome, const NodeId& node, int run);
Outcome decode_outcome(const xml::Element& element);

// An Outcome-cluster document holding raw bytes (hex encoded).
xml::Element encode_payload(std::string_view bytes);
std::string decode_payload(const xml::Element& element);

xml::Element encode_property(const std::string& key, const std::string& value);
std::string decode_property(const xml::Element& element);

struct ExecutionMarker {
  int run = 0;
  int version = 0;
  NodeId head;
  std::string started_at;
  std::map<std::string, DataRef> inputs;
};
// Stored as a property document under "executions/<run>".
xml::Element encode_execution_marker(const ExecutionMarker& marker);
ExecutionMarker decode_execution_marker(const xml::Element& element);

// Stored as a property document under "annotations/<version>/<n>".
xml::Element encode_annotation_property(const Annotation& annotation, int version);
Annotation decode_annotation_property(const xml::Element& element);

xml::Element encode_view(const std::string& name, const ClusterPath& target);
ClusterPath decode_view(const xml::Element& element);

xml::Element encode_collection(const std::string& name, const std::vector<ClusterPath>& members);
std::vector<ClusterPath> decode_collection(const xml::Element& element);

xml::Element encode_agent(const AgentDesc& agent);
AgentDesc decode_agent(const xml::Element& element);

xml::Element encode_data_ref(const DataRef& ref, std::string element_name);
DataRef decode_data_ref(const xml::Element& element);

}  // namespace provkernel::docs
