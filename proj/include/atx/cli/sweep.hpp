#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "atx/cli/evaluate.hpp"

namespace atx::cli {

struct SweepSummary {
  std::string scenario_id;
  bool exhaustive = false;
  std::uint64_t runs = 0;
  std::uint64_t passed = 0;
  std::vector<std::uint64_t> failing;  // seeds, or interleaving indices
  std::string first_failure;
  std::map<std::string, std::uint64_t> verdict_failures;

  std::uint64_t total_messages = 0;
  std::uint64_t broadcasts = 0;
  std::uint64_t transfers_succeeded = 0;
  std::uint64_t latency_sum = 0;
  std::uint64_t latency_count = 0;
  std::uint64_t latency_max = 0;
  std::uint64_t stalled_ops = 0;

  bool pass() const { return runs > 0 && passed == runs; }
  void add(std::uint64_t id, const RunResult& r);
  bool operator==(const SweepSummary&) const = default;
  nlohmann::json to_json() const;
  std::string line() const;
};

// Seeds first..last inclusive. The parallel and serial versions fold
// results in seed order and return identical summaries.
SweepSummary sweep(const sim::Scenario& s, std::uint64_t first, std::uint64_t last,
                   const RunOptions& opt = {});
SweepSummary sweep_serial(const sim::Scenario& s, std::uint64_t first,
                          std::uint64_t last, const RunOptions& opt = {});

// Every interleaving of a shared-memory scenario.
SweepSummary sweep_exhaustive(const sim::Scenario& s, const RunOptions& opt = {});

}  // namespace atx::cli
