#pragma once

// Test-side reference implementations, written without the library's
// sequential specification or search engine.

#include <algorithm>
#include <random>
#include <vector>

#include "atx/checker/history.hpp"

namespace atx::testing {

struct NaiveLedger {
  std::map<AccountId, Amount> bal;
  OwnershipMap mu;

  bool step(Pid p, const Operation& op, const Response& r) {
    if (!bal.count(op.source)) return false;
    if (op.is_read()) return r.kind == Response::Kind::Balance && r.value == bal[op.source];
    if (!bal.count(op.dest) || r.kind != Response::Kind::Bool) return false;
    const auto& owners = mu[op.source];
    const bool can = owners.count(p) && bal[op.source] >= op.amount;
    if (can != r.ok) return false;
    if (can) {
      bal[op.source] -= op.amount;
      bal[op.dest] += op.amount;
    }
    return true;
  }
};

// Tries every order of the complete operations that respects real time.
class PermutationOracle {
 public:
  PermutationOracle(const checker::History& h, const LedgerState& q0, const OwnershipMap& mu)
      : ops_(h.ops), start_{q0.balances, mu} {}

  bool linearizable() {
    used_.assign(ops_.size(), false);
    return extend(start_, 0);
  }

 private:
  bool extend(const NaiveLedger& s, std::size_t placed) {
    if (placed == ops_.size()) return true;
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (used_[i]) continue;
      bool blocked = false;
      for (std::size_t j = 0; j < ops_.size() && !blocked; ++j)
        blocked = !used_[j] && j != i && ops_[j].respond < ops_[i].invoke;
      if (blocked) continue;
      NaiveLedger next = s;
      if (!next.step(ops_[i].process, ops_[i].op, *ops_[i].response)) continue;
      used_[i] = true;
      if (extend(next, placed + 1)) return true;
      used_[i] = false;
    }
    return false;
  }

  std::vector<checker::HistoryOp> ops_;
  NaiveLedger start_;
  std::vector<bool> used_;
};

struct RandomHistory {
  checker::History h;
  LedgerState q0;
  OwnershipMap mu;
};

// A random concurrent history over 3 accounts and up to 3 processes. It is
// built around a legal sequential run and then, half the time, one response
// is perturbed, so both verdicts are common.
inline RandomHistory random_history(std::mt19937_64& rng, std::size_t max_ops) {
  RandomHistory out;
  const int procs = 2 + static_cast<int>(rng() % 2);
  for (int a = 1; a <= 3; ++a) {
    out.q0.balances[account(a)] = static_cast<Amount>(rng() % 6);
    out.mu[account(a)] = {pid(1 + static_cast<int>(rng() % procs))};
  }
  const std::size_t n = 1 + rng() % max_ops;
  NaiveLedger state{out.q0.balances, out.mu};
  std::vector<std::uint64_t> free_at(static_cast<std::size_t>(procs) + 1, 0);
  std::uint64_t clock = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Pid p = pid(1 + static_cast<int>(rng() % procs));
    const AccountId a = account(1 + static_cast<int>(rng() % 3));
    const AccountId b = account(1 + static_cast<int>(rng() % 3));
    Operation op = rng() % 3 == 0 ? Operation::read(a)
                                  : Operation::transfer(a, b, 1 + static_cast<Amount>(rng() % 4));
    Response r;
    if (op.is_read()) {
      r = Response::balance(state.bal[a]);
    } else {
      const bool ok = state.mu[a].count(p) && state.bal[a] >= op.amount;
      r = Response::boolean(ok);
    }
    state.step(p, op, r);
    // The linearization point sits at `clock`; the interval stretches
    // around it without overlapping the process's previous operation.
    clock += 2;
    auto& ready = free_at[static_cast<std::size_t>(to_int(p))];
    const std::uint64_t lo = std::max<std::uint64_t>(ready, clock - std::min<std::uint64_t>(clock, rng() % 6));
    const std::uint64_t inv = std::min(lo, clock);
    const std::uint64_t res = clock + 1 + rng() % 6;
    ready = res + 1;
    out.h.ops.push_back({p, op, r, inv, res, checker::kNever});
  }
  // Operations of one process must not overlap.
  std::map<Pid, std::uint64_t> last;
  for (auto& op : out.h.ops) {
    if (auto it = last.find(op.process); it != last.end() && op.invoke <= it->second)
      op.invoke = it->second + 1;
    if (op.respond <= op.invoke) op.respond = op.invoke + 1;
    last[op.process] = op.respond;
  }
  if (rng() % 2 == 0 && !out.h.ops.empty()) {
    auto& op = out.h.ops[rng() % out.h.ops.size()];
    if (op.op.is_read())
      op.response = Response::balance(op.response->value + 1 - static_cast<Amount>(rng() % 3));
    else
      op.response = Response::boolean(!op.response->ok);
  }
  return out;
}

}  // namespace atx::testing
