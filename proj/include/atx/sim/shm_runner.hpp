#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "atx/checker/history.hpp"
#include "atx/shm/transfer_consensus.hpp"
#include "atx/sim/scenario.hpp"
#include "atx/sim/trace.hpp"

namespace atx::sim {

struct ShmRun {
  Trace trace;
  checker::History history;  // ledger operations; timestamps are trace steps
  std::uint64_t steps = 0;
  bool step_bound_hit = false;
  bool all_finished = false;  // every live process completed its script
  std::map<Pid, std::uint64_t> own_steps;
  std::set<Pid> crashed;

  std::size_t negative_snapshots = 0;
  std::size_t max_kc_invocations = 0;
  std::size_t k = 0;
  bool logs_prefix_consistent = true;

  // Consensus from transfer only.
  std::vector<shm::TransferConsensus::Outcome> outcomes;
  std::map<Pid, std::int64_t> proposals;
  Amount election_balance = 0;
};

// Picks an index into the list of processes that can take a step.
using Chooser = std::function<std::size_t(const std::vector<Pid>& enabled)>;

// Runs the scenario under its own scheduler policy (exhaustive: first
// branch only).
ShmRun run_shm(const Scenario& s, std::uint64_t seed);
ShmRun run_shm(const Scenario& s, std::uint64_t seed, const Chooser& choose);

// Every interleaving of process steps, each exactly once, in DFS order with
// processes ranked by id. Throws BoundExceeded if a run needs more than
// s.scheduler.bound steps. Returns the number of runs.
std::uint64_t enumerate_shm(const Scenario& s,
                            const std::function<void(const ShmRun&)>& visit);

struct ConsensusVerdict {
  bool agreement = true;
  bool validity = true;
  bool termination = true;
  bool winner_identified = true;
  std::string detail;

  bool pass() const {
    return agreement && validity && termination && winner_identified;
  }
};

ConsensusVerdict check_consensus_run(const ShmRun& run);

}  // namespace atx::sim
