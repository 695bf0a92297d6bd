#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "atx/core.hpp"

namespace atx::checker {

inline constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

// One operation of a concurrent history. Timestamps are logical event
// times: `invoke` < `respond` for a complete operation. `effect` marks a
// pending transfer whose update became visible to other processes (the
// snapshot update in shared memory, self-validation in message passing).
struct HistoryOp {
  Pid process{};
  Operation op;
  std::optional<Response> response;
  std::uint64_t invoke = 0;
  std::uint64_t respond = kNever;
  std::uint64_t effect = kNever;

  bool complete() const { return response.has_value(); }
};

struct History {
  std::vector<HistoryOp> ops;
};

struct Verdict {
  bool pass = false;
  std::vector<SequentialStep> witness;
  std::vector<HistoryOp> violating_prefix;
  std::string detail;
};

}  // namespace atx::checker
