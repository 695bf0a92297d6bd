#pragma once

#include <set>

#include "atx/checker/history.hpp"
#include "atx/sim/scenario.hpp"
#include "atx/sim/trace.hpp"

namespace atx::checker {

// Roles and run status recovered from a trace's header and fault events.
struct TraceView {
  sim::Scenario scenario;
  std::uint64_t seed = 0;
  std::string protocol;
  std::set<Pid> byzantine;
  std::set<Pid> crashed;
  bool quiescent = false;
  bool step_bound_hit = false;

  bool benign(Pid p) const { return !byzantine.count(p); }
  bool correct(Pid p) const { return benign(p) && !crashed.count(p); }

  // Throws InvalidArgument if the trace has no scenario header.
  static TraceView of(const sim::Trace& t);
};

// Operations rebuilt from invoke/respond/effect records, ordered by
// invocation. Timestamps are trace steps.
struct TracedOp : HistoryOp {
  std::uint64_t op_id = 0;
};
std::vector<TracedOp> traced_ops(const sim::Trace& t);
History history_of(const sim::Trace& t);

}  // namespace atx::checker
