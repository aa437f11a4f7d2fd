#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "provkernel/kernel.hpp"

namespace provkernel::sim {

using PortBytes = std::map<std::string, std::string>;

struct ScriptContext {
  const StringMap& metadata;
  std::uint64_t seed;
};

// Thrown by a transform to report a semantic failure of the task itself.
class ScriptFailure : public std::runtime_error {
 public:
  ScriptFailure(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Must be a pure function of its arguments.
using Transform = std::function<PortBytes(const PortBytes& inputs, const ScriptContext& context)>;

class TaskRegistry {
 public:
  void add(const std::string& script_ref, Transform transform, MediaHint output_media);
  bool contains(const std::string& script_ref) const { return scripts_.count(script_ref) > 0; }
  std::vector<std::string> names() const;

  // UnknownScript if absent.
  PortBytes run(const std::string& script_ref, const PortBytes& inputs, const ScriptContext& context) const;
  MediaHint output_media(const std::string& script_ref) const;

  // concat, checksum, scale, noisy-threshold. All write a single port "out".
  static TaskRegistry builtin();

 private:
  struct Entry {
    Transform transform;
    MediaHint media;
  };
  const Entry& entry(const std::string& script_ref) const;
  std::map<std::string, Entry> scripts_;
};

enum class FaultMode { AlwaysFail, FailOnRun, FailWithProbability };

std::string_view to_string(FaultMode mode);
FaultMode parse_fault_mode(std::string_view text);

struct FaultEntry {
  NodeId node;
  std::optional<int> run;  // unset: every run
  FaultMode mode = FaultMode::AlwaysFail;
  double p = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const FaultEntry&) const = default;
};

struct FaultPlan {
  std::vector<FaultEntry> entries;

  // ConfigError for p outside [0,1] or FailOnRun without a run.
  void validate() const;
  // First entry that fires for (node, run), if any.
  std::optional<FaultEntry> triggered(const NodeId& node, int run) const;

  bool operator==(const FaultPlan&) const = default;
};

// hash(seed | node | run) mapped onto [0, 1).
double fault_coin(std::uint64_t seed, const NodeId& node, int run);

struct ExecutorConfig {
  TaskRegistry registry = TaskRegistry::builtin();
  FaultPlan faults;
  std::uint64_t seed = 0;
  AgentDesc agent{"sim-ce", "simulated compute element", {}};
};

// Seed handed to a node's transform; independent of the run number.
std::uint64_t transform_seed(std::uint64_t seed, const NodeId& node);

// Throws UnknownScript and PayloadUnavailable; every other failure is
// reported in the returned Outcome.
Outcome execute_node(const ExecutorConfig& config, const TaskRequest& request, PayloadStore& payloads);

class SimExecutor final : public Executor {
 public:
  explicit SimExecutor(ExecutorConfig config);
  const AgentDesc& agent() const override { return config_.agent; }
  Outcome execute(const TaskRequest& request, PayloadStore& payloads) override;
  const ExecutorConfig& config() const { return config_; }

 private:
  ExecutorConfig config_;
};

}  // namespace provkernel::sim
