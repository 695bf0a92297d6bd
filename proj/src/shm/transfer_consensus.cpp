#include "atx/shm/transfer_consensus.hpp"

namespace atx::shm {

LedgerState TransferConsensus::initial_state(int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  LedgerState q0;
  q0.balances[kElection] = 2 * static_cast<Amount>(k);
  q0.balances[kSink] = 0;
  return q0;
}

OwnershipMap TransferConsensus::ownership(int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  OwnershipMap mu;
  for (int i = 1; i <= k; ++i) mu[kElection].insert(pid(i));
  mu[kSink] = {};
  return mu;
}

TransferConsensus::TransferConsensus(int k, SharedLedger& ledger)
    : k_(k), ledger_(ledger), outcomes_(static_cast<std::size_t>(k)) {
  if (ledger.initial() != initial_state(k) || ledger.owners() != ownership(k))
    throw Error(ErrorCode::InvalidArgument,
                "ledger does not match the election configuration for k=" +
                    std::to_string(k));
  for (int i = 1; i <= k; ++i) proposals_.emplace_back(pid(i));
}

Proc<TransferConsensus::Value> TransferConsensus::propose(Pid p, Value v) {
  const int me = to_int(p);
  if (me < 1 || me > k_)
    throw Error(ErrorCode::InvalidArgument,
                "proposer must be in 1..k, got " + std::to_string(me));

  co_await step();
  proposals_[static_cast<std::size_t>(me - 1)].write(p, v);

  const Amount withdraw = 2 * static_cast<Amount>(k_) - me;
  const bool ok = co_await ledger_.transfer(p, kElection, kSink, withdraw);
  const Amount winner = co_await ledger_.read(p, kElection);
  if (winner < 1 || winner > k_)
    throw Error(ErrorCode::InvalidArgument,
                "election balance " + std::to_string(winner) +
                    " does not name a process");

  co_await step();
  auto decided = proposals_[static_cast<std::size_t>(winner - 1)].read();
  if (!decided)
    throw Error(ErrorCode::InvalidArgument, "winner has not announced");

  {
    std::lock_guard lock(outcome_mu_);
    outcomes_[static_cast<std::size_t>(me - 1)] = {true, ok, winner, *decided};
  }
  co_return *decided;
}

std::vector<TransferConsensus::Outcome> TransferConsensus::outcomes() const {
  std::lock_guard lock(outcome_mu_);
  return outcomes_;
}

}  // namespace atx::shm
