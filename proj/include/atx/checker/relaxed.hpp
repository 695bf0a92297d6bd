#pragma once

#include <map>

#include "atx/checker/history.hpp"
#include "atx/checker/order_search.hpp"
#include "atx/sim/trace.hpp"

namespace atx::checker {

struct RelaxedOptions {
  // Place other correct processes' reads and failed transfers in every
  // per-process order, with their recorded responses.
  bool include_foreign = false;
  SearchLimits limits{256, 4'000'000};
};

struct RelaxedVerdict {
  bool pass = false;
  Verdict part1;
  std::map<Pid, Verdict> part2;
  std::string detail;
};

// Relaxed correctness of a message-passing run:
//  (1) successful transfers of correct processes are linearizable, with
//      records of faulty issuers free to go anywhere;
//  (2) for every correct p, some legal sequential order contains everything
//      p applied and every completed op of correct processes, and agrees
//      with p's own local order.
RelaxedVerdict check_relaxed(const sim::Trace& t, const RelaxedOptions& opt = {});

}  // namespace atx::checker
