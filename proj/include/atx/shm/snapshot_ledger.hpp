#pragma once

#include <atomic>
#include <set>
#include <vector>

#include "atx/shm/ledger.hpp"
#include "atx/shm/primitives.hpp"

namespace atx::shm {

// Wait-free asset transfer for single-owner accounts from one atomic
// snapshot object. Process p keeps the set of its successful transfers in
// cell p; a balance is q0 plus incoming minus outgoing over all cells.
// Outgoing transfers of an account live in its owner's cell only, so the
// owner's snapshot always sees every debit of that account.
class SnapshotLedger final : public SharedLedger {
 public:
  using Cell = std::set<TransferRecord>;

  // Processes are 1..n. Every account must have at most one owner.
  SnapshotLedger(int n, LedgerState q0, OwnershipMap mu);

  Proc<bool> transfer(Pid p, AccountId a, AccountId b, Amount x,
                      std::uint64_t op_id = kUntracked) override;
  Proc<Amount> read(Pid p, AccountId a) override;

  // Number of snapshots (by any process) in which some account balance was
  // negative. Always zero for a correct implementation.
  std::size_t negative_snapshots() const { return negative_snapshots_; }

  std::vector<std::optional<Cell>> peek() const { return as_.snapshot(); }

  // Test-only: accept transfers regardless of the snapshot balance.
  void skip_balance_check(bool on) { skip_balance_check_ = on; }

 private:
  Amount balance(AccountId a,
                 const std::vector<std::optional<Cell>>& snap) const;
  void audit(const std::vector<std::optional<Cell>>& snap);

  int n_;
  AtomicSnapshot<Cell> as_;
  std::vector<Cell> ops_;
  std::vector<std::uint64_t> counters_;
  std::atomic<std::size_t> negative_snapshots_{0};
  bool skip_balance_check_ = false;
};

}  // namespace atx::shm
