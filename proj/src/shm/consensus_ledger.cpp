#include "atx/shm/consensus_ledger.hpp"

#include <algorithm>

namespace atx::shm {

ConsensusLedger::AccountShared::AccountShared(int n, std::size_t k)
    : consensus(k) {
  for (int i = 1; i <= n; ++i) announce.emplace_back(pid(i));
}

ConsensusLedger::ConsensusLedger(int n, std::size_t k, LedgerState q0,
                                 OwnershipMap mu)
    : SharedLedger(std::move(q0), std::move(mu)),
      n_(n),
      k_(k),
      as_(n),
      local_(static_cast<std::size_t>(n)) {
  for (const auto& [a, _] : q0_.balances) {
    auto it = mu_.find(a);
    if (it != mu_.end() && it->second.size() > k_)
      throw Error(ErrorCode::InvalidArgument,
                  "account " + std::to_string(to_int(a)) + " has " +
                      std::to_string(it->second.size()) +
                      " owners, more than k=" + std::to_string(k_));
    shared_.emplace(a, std::make_unique<AccountShared>(n, k_));
  }
}

Amount ConsensusLedger::balance(
    AccountId a, const std::vector<std::optional<Cell>>& snap) const {
  // A decision may sit in several cells; count each transfer once.
  std::set<AnnouncedTransfer> seen;
  Amount b = q0_.at(a);
  for (const auto& cell : snap) {
    if (!cell) continue;
    for (const auto& d : *cell) {
      if (!d.success || !seen.insert(d.tx).second) continue;
      if (d.tx.dest == a) b = checked_add(b, d.tx.amount);
      if (d.tx.source == a) b = checked_sub(b, d.tx.amount);
    }
  }
  return b;
}

void ConsensusLedger::publish(Pid p, const Cell& hist) {
  std::vector<std::uint64_t> fresh;
  {
    std::lock_guard lock(visible_mu_);
    as_.update(p, hist);
    for (const auto& d : hist)
      if (d.success && visible_.insert(d.tx).second) fresh.push_back(d.tx.op_id);
  }
  for (auto id : fresh) effect(id);
}

Proc<bool> ConsensusLedger::transfer(Pid p, AccountId a, AccountId b,
                                     Amount x, std::uint64_t op_id) {
  check_accounts(a, b);
  if (to_int(p) < 1 || to_int(p) > n_)
    throw Error(ErrorCode::InvalidArgument, "process id out of range");
  if (!owns(mu_, p, a)) co_return false;

  Local& me = local_[static_cast<std::size_t>(to_int(p) - 1)];
  AccountShared& acct = *shared_.at(a);
  std::uint64_t& round = me.round[a];
  std::set<AnnouncedTransfer>& committed = me.committed[a];

  const AnnouncedTransfer tx{round, p, a, b, x, op_id};
  co_await step();
  acct.announce[static_cast<std::size_t>(to_int(p) - 1)].write(p, tx);

  std::set<AnnouncedTransfer> collected;
  for (auto& reg : acct.announce) {
    co_await step();
    if (auto v = reg.read()) collected.insert(*v);
  }
  for (const auto& t : committed) collected.erase(t);

  while (collected.count(tx)) {
    const AnnouncedTransfer req = *collected.begin();
    co_await step();
    auto snap = as_.snapshot();
    const Decision proposal{req, balance(a, snap) >= req.amount};

    co_await step();
    auto decision = acct.consensus.at(round).propose(p, proposal);
    if (!decision)
      throw Error(ErrorCode::InvalidArgument,
                  "k-consensus object invoked more than k times");
    me.hist.insert(*decision);
    me.log[a].push_back(*decision);

    co_await step();
    publish(p, me.hist);
    committed.insert(decision->tx);
    collected.erase(decision->tx);
    ++round;
  }
  co_return me.hist.count(Decision{tx, true}) != 0;
}

Proc<Amount> ConsensusLedger::read(Pid p, AccountId a) {
  (void)p;
  require_account(q0_, a);
  co_await step();
  auto snap = as_.snapshot();
  co_return balance(a, snap);
}

std::size_t ConsensusLedger::max_invocations() const {
  std::size_t m = 0;
  for (const auto& [_, acct] : shared_)
    for (auto c : acct->consensus.invocation_counts()) m = std::max(m, c);
  return m;
}

const std::vector<Decision>& ConsensusLedger::decision_log(Pid p,
                                                           AccountId a) const {
  static const std::vector<Decision> empty;
  const Local& me = local_.at(static_cast<std::size_t>(to_int(p) - 1));
  auto it = me.log.find(a);
  return it == me.log.end() ? empty : it->second;
}

bool ConsensusLedger::logs_prefix_consistent() const {
  for (const auto& [a, _] : shared_) {
    const std::vector<Decision>* longest = nullptr;
    for (int i = 1; i <= n_; ++i) {
      const auto& log = decision_log(pid(i), a);
      if (!longest || log.size() > longest->size()) longest = &log;
    }
    for (int i = 1; i <= n_; ++i) {
      const auto& log = decision_log(pid(i), a);
      if (!std::equal(log.begin(), log.end(), longest->begin())) return false;
    }
  }
  return true;
}

std::size_t ConsensusLedger::rounds(AccountId a) const {
  return shared_.at(a)->consensus.size();
}

}  // namespace atx::shm
