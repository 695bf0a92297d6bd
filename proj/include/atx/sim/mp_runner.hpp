#pragma once

#include <cstdint>
#include <set>

#include "atx/sim/scenario.hpp"
#include "atx/sim/trace.hpp"

namespace atx::sim {

enum class Protocol {
  Broadcast,  // consensus-free transfers over secure broadcast
  Baseline,   // every transfer ordered by one sequencer (process 1)
};

struct MpRun {
  Trace trace;
  std::uint64_t steps = 0;
  bool step_bound_hit = false;
  bool quiescent = false;  // ran out of events before the bound
  std::set<Pid> crashed;
};

// One message-passing execution under the fair random scheduler: each step
// is one operation invocation or one message receipt with its handler.
MpRun run_mp(const Scenario& s, std::uint64_t seed,
             Protocol protocol = Protocol::Broadcast);

}  // namespace atx::sim
