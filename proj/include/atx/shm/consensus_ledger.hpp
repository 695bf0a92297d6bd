#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <vector>

#include "atx/shm/ledger.hpp"
#include "atx/shm/primitives.hpp"

namespace atx::shm {

// A transfer as announced by its proposer. Ordered oldest first: by the
// proposer's round counter at announcement, ties broken by process id.
struct AnnouncedTransfer {
  std::uint64_t round = 0;
  Pid proposer{};
  AccountId source{};
  AccountId dest{};
  Amount amount = 0;
  std::uint64_t op_id = kUntracked;

  auto operator<=>(const AnnouncedTransfer&) const = default;
};

struct Decision {
  AnnouncedTransfer tx;
  bool success = false;

  auto operator<=>(const Decision&) const = default;
};

// k-shared asset transfer from k-consensus objects. The owners of an
// account agree, round by round, on the order and outcome of its outgoing
// transfers; one k-consensus object per account per round. Owners announce
// pending transfers in per-account registers so that any owner can help.
class ConsensusLedger final : public SharedLedger {
 public:
  using Cell = std::set<Decision>;

  // Processes are 1..n; k is the capacity of each consensus object and
  // must be at least the largest owner set.
  ConsensusLedger(int n, std::size_t k, LedgerState q0, OwnershipMap mu);

  Proc<bool> transfer(Pid p, AccountId a, AccountId b, Amount x,
                      std::uint64_t op_id = kUntracked) override;
  Proc<Amount> read(Pid p, AccountId a) override;

  std::size_t k() const { return k_; }

  // Largest number of invocations seen by any single consensus object.
  std::size_t max_invocations() const;
  // Decisions per account in the order process p learned them.
  const std::vector<Decision>& decision_log(Pid p, AccountId a) const;
  // True if, for every account, all processes' decision logs are prefixes
  // of one another.
  bool logs_prefix_consistent() const;
  std::size_t rounds(AccountId a) const;

 private:
  struct AccountShared {
    std::deque<Register<AnnouncedTransfer>> announce;
    KConsensusList<Decision> consensus;
    AccountShared(int n, std::size_t k);
  };
  struct Local {
    Cell hist;
    std::map<AccountId, std::set<AnnouncedTransfer>> committed;
    std::map<AccountId, std::uint64_t> round;
    std::map<AccountId, std::vector<Decision>> log;
  };

  Amount balance(AccountId a,
                 const std::vector<std::optional<Cell>>& snap) const;
  void publish(Pid p, const Cell& hist);

  int n_;
  std::size_t k_;
  AtomicSnapshot<Cell> as_;
  std::map<AccountId, std::unique_ptr<AccountShared>> shared_;
  std::vector<Local> local_;

  std::mutex visible_mu_;
  std::set<AnnouncedTransfer> visible_;
};

}  // namespace atx::shm
