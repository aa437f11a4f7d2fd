#include "provkernel/executor.hpp"

#include <algorithm>

#include "provkernel/error.hpp"

namespace provkernel::sim {

namespace {

std::string concat_all(const PortBytes& inputs) {
  std::string out;
  for (const auto& [port, bytes] : inputs) out += bytes;
  return out;
}

std::vector<double> numeric_inputs(const PortBytes& inputs) {
  std::vector<double> values;
  for (const auto& [port, bytes] : inputs) {
    std::vector<double> part;
    if (!parse_numeric_vector(bytes, part)) {
      throw ScriptFailure("BAD_INPUT", "input '" + port + "' is not a numeric vector");
    }
    values.insert(values.end(), part.begin(), part.end());
  }
  return values;
}

double metadata_number(const StringMap& metadata, const std::string& key, double fallback) {
  auto it = metadata.find(key);
  if (it == metadata.end()) return fallback;
  std::vector<double> parsed;
  if (!parse_numeric_vector(it->second, parsed) || parsed.size() != 1) {
    throw ScriptFailure("BAD_METADATA", "metadata '" + key + "' is not a number");
  }
  return parsed[0];
}

PortBytes concat(const PortBytes& inputs, const ScriptContext&) { return {{"out", concat_all(inputs)}}; }

PortBytes checksum(const PortBytes& inputs, const ScriptContext&) {
  return {{"out", sha256_raw(concat_all(inputs))}};
}

PortBytes scale(const PortBytes& inputs, const ScriptContext& context) {
  double factor = metadata_number(context.metadata, "factor", 2.0);
  std::vector<double> values = numeric_inputs(inputs);
  for (double& v : values) v *= factor;
  return {{"out", format_numeric_vector(values)}};
}

PortBytes noisy_threshold(const PortBytes& inputs, const ScriptContext& context) {
  double threshold = metadata_number(context.metadata, "threshold", 1.0);
  double noise = metadata_number(context.metadata, "noise", 0.0);
  std::vector<double> values = numeric_inputs(inputs);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > threshold) {
      throw ScriptFailure("THRESHOLD_EXCEEDED", "value " + std::to_string(values[i]) + " at index " +
                                                    std::to_string(i) + " exceeds " +
                                                    std::to_string(threshold));
    }
  }
  if (noise != 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      double u = unit_interval(std::to_string(context.seed) + "|" + std::to_string(i));
      values[i] += noise * (2.0 * u - 1.0);
    }
  }
  return {{"out", format_numeric_vector(values)}};
}

}  // namespace

void TaskRegistry::add(const std::string& script_ref, Transform transform, MediaHint output_media) {
  if (script_ref.empty()) fail(ErrorCode::ConfigError, "script name must not be empty");
  scripts_[script_ref] = Entry{std::move(transform), output_media};
}

std::vector<std::string> TaskRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : scripts_) out.push_back(name);
  return out;
}

const TaskRegistry::Entry& TaskRegistry::entry(const std::string& script_ref) const {
  auto it = scripts_.find(script_ref);
  if (it == scripts_.end()) fail(ErrorCode::UnknownScript, "unknown script '" + script_ref + "'");
  return it->second;
}

PortBytes TaskRegistry::run(const std::string& script_ref, const PortBytes& inputs,
                            const ScriptContext& context) const {
  return entry(script_ref).transform(inputs, context);
}

MediaHint TaskRegistry::output_media(const std::string& script_ref) const { return entry(script_ref).media; }

TaskRegistry TaskRegistry::builtin() {
  TaskRegistry registry;
  registry.add("concat", concat, MediaHint::Bytes);
  registry.add("checksum", checksum, MediaHint::Bytes);
  registry.add("scale", scale, MediaHint::NumericVector);
  registry.add("noisy-threshold", noisy_threshold, MediaHint::NumericVector);
  return registry;
}

std::string_view to_string(FaultMode mode) {
  switch (mode) {
    case FaultMode::AlwaysFail: return "always";
    case FaultMode::FailOnRun: return "fail-on-run";
    case FaultMode::FailWithProbability: return "probability";
  }
  return "always";
}

FaultMode parse_fault_mode(std::string_view text) {
  if (text == "always") return FaultMode::AlwaysFail;
  if (text == "fail-on-run") return FaultMode::FailOnRun;
  if (text == "probability") return FaultMode::FailWithProbability;
  fail(ErrorCode::ConfigError, "unknown fault mode '" + std::string(text) + "'");
}

void FaultPlan::validate() const {
  for (const auto& entry : entries) {
    if (entry.node.empty()) fail(ErrorCode::ConfigError, "fault entry without a node");
    if (entry.run && *entry.run < 1) fail(ErrorCode::ConfigError, "fault run numbers start at 1");
    if (entry.mode == FaultMode::FailOnRun && !entry.run) {
      fail(ErrorCode::ConfigError, "fail-on-run fault for '" + entry.node + "' needs a run");
    }
    if (entry.mode == FaultMode::FailWithProbability && !(entry.p >= 0.0 && entry.p <= 1.0)) {
      fail(ErrorCode::ConfigError, "fault probability for '" + entry.node + "' is outside [0,1]");
    }
  }
}

double fault_coin(std::uint64_t seed, const NodeId& node, int run) {
  return unit_interval(std::to_string(seed) + "|" + node + "|" + std::to_string(run));
}

std::optional<FaultEntry> FaultPlan::triggered(const NodeId& node, int run) const {
  for (const auto& entry : entries) {
    if (entry.node != node) continue;
    if (entry.run && *entry.run != run) continue;
    switch (entry.mode) {
      case FaultMode::AlwaysFail:
      case FaultMode::FailOnRun:
        return entry;
      case FaultMode::FailWithProbability:
        if (fault_coin(entry.seed, node, run) < entry.p) return entry;
        break;
    }
  }
  return std::nullopt;
}

std::uint64_t transform_seed(std::uint64_t seed, const NodeId& node) {
  return hash64(std::to_string(seed) + "|" + node);
}

Outcome execute_node(const ExecutorConfig& config, const TaskRequest& request, PayloadStore& payloads) {
  MediaHint media = config.registry.output_media(request.script_ref);

  PortBytes inputs;
  for (const auto& [port, ref] : request.inputs) inputs[port] = payloads.load(ref);

  Outcome outcome;
  if (auto fault = config.faults.triggered(request.node, request.run)) {
    outcome.error = OutcomeError{"INJECTED_FAULT", "injected " + std::string(to_string(fault->mode)) +
                                                       " fault on '" + request.node + "' run " +
                                                       std::to_string(request.run)};
    outcome.log = "fault injected\n";
    return outcome;
  }

  PortBytes produced;
  try {
    ScriptContext context{request.metadata, transform_seed(config.seed, request.node)};
    produced = config.registry.run(request.script_ref, inputs, context);
  } catch (const ScriptFailure& failure) {
    outcome.error = OutcomeError{failure.code(), failure.what()};
    return outcome;
  }

  if (!request.outputs.empty()) {
    PortBytes declared;
    for (const auto& port : request.outputs) {
      auto it = produced.find(port);
      if (it == produced.end()) {
        outcome.error = OutcomeError{"MISSING_OUTPUT", "script '" + request.script_ref +
                                                           "' produced no output for port '" + port + "'"};
        return outcome;
      }
      declared.insert(*it);
    }
    produced = std::move(declared);
  }

  for (const auto& [port, bytes] : produced) {
    DataRef ref = payloads.store(request.node + "/" + port, bytes, media);
    outcome.log += port + ": " + ref.digest + " (" + std::to_string(ref.size) + " bytes)\n";
    outcome.outputs[port] = std::move(ref);
  }
  return outcome;
}

SimExecutor::SimExecutor(ExecutorConfig config) : config_(std::move(config)) { config_.faults.validate(); }

Outcome SimExecutor::execute(const TaskRequest& request, PayloadStore& payloads) {
  return execute_node(config_, request, payloads);
}

}  // namespace provkernel::sim
