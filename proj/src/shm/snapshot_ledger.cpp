#include "atx/shm/snapshot_ledger.hpp"

namespace atx::shm {

SnapshotLedger::SnapshotLedger(int n, LedgerState q0, OwnershipMap mu)
    : SharedLedger(std::move(q0), std::move(mu)),
      n_(n),
      as_(n),
      ops_(static_cast<std::size_t>(n)),
      counters_(static_cast<std::size_t>(n), 0) {
  for (const auto& [a, owners] : mu_) {
    if (owners.size() > 1)
      throw Error(ErrorCode::InvalidArgument,
                  "snapshot ledger needs single-owner accounts; account " +
                      std::to_string(to_int(a)) + " has " +
                      std::to_string(owners.size()));
  }
}

Amount SnapshotLedger::balance(
    AccountId a, const std::vector<std::optional<Cell>>& snap) const {
  Amount b = q0_.at(a);
  for (const auto& cell : snap) {
    if (!cell) continue;
    for (const auto& t : *cell) {
      if (t.dest == a) b = checked_add(b, t.amount);
      if (t.source == a) b = checked_sub(b, t.amount);
    }
  }
  return b;
}

void SnapshotLedger::audit(const std::vector<std::optional<Cell>>& snap) {
  for (const auto& [a, _] : q0_.balances) {
    if (balance(a, snap) < 0) {
      ++negative_snapshots_;
      return;
    }
  }
}

Proc<bool> SnapshotLedger::transfer(Pid p, AccountId a, AccountId b, Amount x,
                                    std::uint64_t op_id) {
  check_accounts(a, b);
  if (to_int(p) < 1 || to_int(p) > n_)
    throw Error(ErrorCode::InvalidArgument, "process id out of range");
  const auto idx = static_cast<std::size_t>(to_int(p) - 1);

  co_await step();
  auto snap = as_.snapshot();
  audit(snap);
  if (!owns(mu_, p, a) || (!skip_balance_check_ && balance(a, snap) < x))
    co_return false;

  ops_[idx].insert(TransferRecord{a, b, x, p, ++counters_[idx]});
  co_await step();
  as_.update(p, ops_[idx]);
  effect(op_id);
  co_return true;
}

Proc<Amount> SnapshotLedger::read(Pid p, AccountId a) {
  (void)p;
  require_account(q0_, a);
  co_await step();
  auto snap = as_.snapshot();
  audit(snap);
  co_return balance(a, snap);
}

}  // namespace atx::shm
