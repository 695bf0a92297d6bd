#pragma once

#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "atx/shm/ledger.hpp"
#include "atx/shm/primitives.hpp"

namespace atx::shm {

// Consensus among processes 1..k from registers and one k-shared ledger.
// Account `kElection` starts with 2k and is owned by 1..k; process p tries
// to move 2k-p to the sink. Any two such withdrawals exceed 2k, so exactly
// one succeeds and the remaining balance names the winner.
class TransferConsensus {
 public:
  using Value = std::int64_t;

  static constexpr AccountId kElection = account(1);
  static constexpr AccountId kSink = account(2);

  struct Outcome {
    bool finished = false;
    bool transfer_ok = false;
    Amount balance_seen = 0;
    Value decided = 0;
  };

  // The ledger configuration the algorithm requires for a given k.
  static LedgerState initial_state(int k);
  static OwnershipMap ownership(int k);

  // `ledger` must have been built from initial_state(k) / ownership(k).
  TransferConsensus(int k, SharedLedger& ledger);

  Proc<Value> propose(Pid p, Value v);

  int k() const { return k_; }
  std::vector<Outcome> outcomes() const;

 private:
  int k_;
  SharedLedger& ledger_;
  std::deque<Register<Value>> proposals_;
  mutable std::mutex outcome_mu_;
  std::vector<Outcome> outcomes_;
};

}  // namespace atx::shm
