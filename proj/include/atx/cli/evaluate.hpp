#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "atx/checker/relaxed.hpp"
#include "atx/sim/mp_runner.hpp"
#include "atx/sim/scenario.hpp"
#include "atx/sim/shm_runner.hpp"
#include "atx/sim/trace.hpp"

namespace atx::cli {

enum class CheckMode { Exact, MonitorsOnly };

struct RunOptions {
  CheckMode check = CheckMode::Exact;
  std::optional<sim::BroadcastMode> broadcast;  // overrides the scenario
  sim::Protocol protocol = sim::Protocol::Broadcast;
  checker::SearchLimits limits{256, 4'000'000};
};

// Everything here is recomputed from the trace alone.
struct Metrics {
  std::map<std::string, std::uint64_t> messages;  // by type
  std::uint64_t total_messages = 0;
  std::uint64_t broadcasts = 0;
  std::uint64_t transfers_invoked = 0;
  std::uint64_t transfers_succeeded = 0;
  std::uint64_t delivered_transfers = 0;  // distinct records applied somewhere
  std::uint64_t applies = 0;
  std::vector<std::uint64_t> latency;  // trace steps from invoke to respond
  std::uint64_t stalled_ops = 0;
  std::uint64_t rejected_forgeries = 0;
  std::uint64_t rejected = 0;
  std::uint64_t steps = 0;
};

Metrics metrics_of(const sim::Trace& t);
nlohmann::json to_json(const Metrics& m);

struct Verdict {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct RunResult {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::vector<Verdict> verdicts;
  Metrics metrics;
  sim::Trace trace;

  bool pass() const;
  const Verdict* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

// Effective scenario after command-line overrides.
sim::Scenario apply_options(sim::Scenario s, const RunOptions& opt);

// Checks one shared-memory run.
std::vector<Verdict> check_shm_run(const sim::ShmRun& run, const sim::Scenario& s,
                                   const RunOptions& opt);

// Checks a finished message-passing trace.
std::vector<Verdict> check_trace(const sim::Trace& t, const RunOptions& opt);

// Runs one seed of the scenario and checks it.
RunResult evaluate(const sim::Scenario& s, std::uint64_t seed, const RunOptions& opt = {});

// Correct-process operations that must have completed but did not.
std::vector<std::string> liveness_failures(const sim::Trace& t);

}  // namespace atx::cli
