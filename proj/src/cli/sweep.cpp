#include "atx/cli/sweep.hpp"

#include <exception>
#include <sstream>

namespace atx::cli {

using nlohmann::json;

void SweepSummary::add(std::uint64_t id, const RunResult& r) {
  ++runs;
  if (r.pass()) {
    ++passed;
  } else {
    failing.push_back(id);
    for (const auto& v : r.verdicts)
      if (!v.pass) {
        ++verdict_failures[v.name];
        if (first_failure.empty())
          first_failure = std::to_string(id) + ": " + v.name + ": " + v.detail;
      }
  }
  total_messages += r.metrics.total_messages;
  broadcasts += r.metrics.broadcasts;
  transfers_succeeded += r.metrics.transfers_succeeded;
  for (auto l : r.metrics.latency) {
    latency_sum += l;
    latency_max = std::max(latency_max, l);
  }
  latency_count += r.metrics.latency.size();
  stalled_ops += r.metrics.stalled_ops;
}

json SweepSummary::to_json() const {
  json j{{"scenario", scenario_id},
         {"exhaustive", exhaustive},
         {"runs", runs},
         {"passed", passed},
         {"pass", pass()},
         {"failing", failing},
         {"verdict_failures", verdict_failures},
         {"total_messages", total_messages},
         {"broadcasts", broadcasts},
         {"transfers_succeeded", transfers_succeeded},
         {"stalled_ops", stalled_ops}};
  if (transfers_succeeded)
    j["messages_per_transfer"] =
        static_cast<double>(total_messages) / static_cast<double>(transfers_succeeded);
  if (latency_count)
    j["latency"] = {{"mean", static_cast<double>(latency_sum) /
                                 static_cast<double>(latency_count)},
                    {"max", latency_max}};
  if (!first_failure.empty()) j["first_failure"] = first_failure;
  return j;
}

std::string SweepSummary::line() const {
  std::ostringstream out;
  out << scenario_id << ": " << passed << "/" << runs
      << (exhaustive ? " interleavings pass" : " seeds pass");
  if (transfers_succeeded && total_messages)
    out << ", " << static_cast<double>(total_messages) /
                       static_cast<double>(transfers_succeeded)
        << " messages per successful transfer";
  if (!first_failure.empty()) out << "; first failure " << first_failure;
  return out.str();
}

namespace {

SweepSummary fold(const sim::Scenario& s, std::uint64_t first,
                  const std::vector<RunResult>& results) {
  SweepSummary sum;
  sum.scenario_id = s.id;
  for (std::size_t i = 0; i < results.size(); ++i) sum.add(first + i, results[i]);
  return sum;
}

// Traces are dropped as soon as a run is checked; a sweep keeps only
// verdicts and metrics.
RunResult light(const sim::Scenario& s, std::uint64_t seed, const RunOptions& opt) {
  RunResult r = evaluate(s, seed, opt);
  r.trace = {};
  return r;
}

}  // namespace

SweepSummary sweep_serial(const sim::Scenario& s, std::uint64_t first,
                          std::uint64_t last, const RunOptions& opt) {
  s.validate();
  std::vector<RunResult> results;
  for (std::uint64_t seed = first; seed <= last; ++seed)
    results.push_back(light(s, seed, opt));
  return fold(s, first, results);
}

SweepSummary sweep(const sim::Scenario& s, std::uint64_t first, std::uint64_t last,
                   const RunOptions& opt) {
  s.validate();
  const auto n = static_cast<std::int64_t>(last - first + 1);
  std::vector<RunResult> results(static_cast<std::size_t>(n));
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      results[static_cast<std::size_t>(i)] =
          light(s, first + static_cast<std::uint64_t>(i), opt);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return fold(s, first, results);
}

SweepSummary sweep_exhaustive(const sim::Scenario& base, const RunOptions& opt) {
  const sim::Scenario s = apply_options(base, opt);
  if (s.model != sim::ModelKind::SharedMemory)
    throw Error(ErrorCode::ConfigError, "exhaustive enumeration is shared-memory only");
  SweepSummary sum;
  sum.scenario_id = s.id;
  sum.exhaustive = true;
  std::uint64_t index = 0;
  sim::enumerate_shm(s, [&](const sim::ShmRun& run) {
    RunResult r;
    r.scenario_id = s.id;
    r.verdicts = check_shm_run(run, s, opt);
    r.metrics = metrics_of(run.trace);
    sum.add(index++, r);
  });
  return sum;
}

}  // namespace atx::cli
