#pragma once

#include <string>
#include <vector>

#include "atx/sim/trace.hpp"

namespace atx::checker {

struct Violation {
  std::string monitor;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// Trace assertions. Broadcast: integrity, agreement, validity, source
// order. Transfers: per-source prefix agreement, sequence discipline, non-
// negative balances, conservation. Shared memory: consensus object
// capacity, decision prefix agreement, negative snapshots.
std::vector<Violation> monitors(const sim::Trace& t);

}  // namespace atx::checker
