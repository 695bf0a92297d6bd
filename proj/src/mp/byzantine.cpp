#include "atx/mp/byzantine.hpp"

namespace atx::mp {

using nlohmann::json;
using sim::ByzantineStrategy;

ByzantineActor::ByzantineActor(Pid self, ByzantineStrategy strategy, LedgerNode& view,
                               bcast::Endpoint& ep, NodeContext& ctx)
    : self_(self), strategy_(strategy), view_(view), ep_(ep), ctx_(ctx) {
  ep_.set_behavior(strategy == ByzantineStrategy::Silent
                       ? bcast::Endpoint::Behavior::Silent
                       : bcast::Endpoint::Behavior::Byzantine);
}

AccountId ByzantineActor::other_account(AccountId a, AccountId b) const {
  for (const auto& [c, _] : view_.config().q0.balances)
    if (c != a && c != b) return c;
  return b;
}

std::string ByzantineActor::encode(const TransferRecord& t,
                                   const std::set<TransferRecord>& deps) const {
  return TransferMsg{t, deps, {}}.encode();
}

void ByzantineActor::send(const TransferRecord& t, const std::set<TransferRecord>& deps) {
  ep_.broadcast(encode(t, deps));
}

void ByzantineActor::act(const Operation& op) {
  if (strategy_ == ByzantineStrategy::Silent || op.is_read()) return;
  const auto& mu = view_.config().mu;
  const AccountId a = op.source;
  const bool mine = owns(mu, self_, a);
  ctx_.record(self_, "byz",
              {{"strategy", sim::to_string(strategy_)}, {"op", sim::to_json(op)}});

  if (mine && mu.at(a).size() > 1) {
    // Shared account: go through the sequencing service like everyone else;
    // a compromised service is where the damage comes from.
    ctx_.request_sequence(self_, a, {a, op.dest, op.amount, self_, 0}, view_.deps(a));
    return;
  }

  const auto deps = view_.deps(a);
  const std::uint64_t s = view_.seq(a) + 1;
  const Amount bal = view_.read(a);
  switch (strategy_) {
    case ByzantineStrategy::Equivocate: {
      const TransferRecord ta{a, op.dest, op.amount, self_, s};
      const TransferRecord tb{a, other_account(a, op.dest), op.amount, self_, s};
      ep_.equivocate(bcast::StreamId::sender(self_), ep_.take_own_seq(),
                     encode(ta, deps), encode(tb, deps));
      break;
    }
    case ByzantineStrategy::DoubleSpendRace: {
      // Two transfers competing for one sequence number, then a third that
      // spends the full balance again under the next number.
      const Amount half = std::max<Amount>(1, bal / 2);
      send({a, op.dest, half, self_, s}, deps);
      send({a, other_account(a, op.dest), half, self_, s}, deps);
      send({a, op.dest, std::max<Amount>(1, bal), self_, s + 1}, {});
      break;
    }
    case ByzantineStrategy::BadSeq:
      send({a, op.dest, op.amount, self_, s + 1}, deps);
      break;
    case ByzantineStrategy::ForgeOwner: {
      AccountId victim = a;
      for (const auto& [c, owners] : mu)
        if (!owners.count(self_) && owners.size() == 1) {
          victim = c;
          break;
        }
      const AccountId dest = owns(mu, self_, op.source) ? op.source : op.dest;
      send({victim, dest, op.amount, self_, ++forged_}, {});
      break;
    }
    case ByzantineStrategy::StaleDeps: {
      auto fake = deps;
      const AccountId from = other_account(a, a);
      Pid owner = self_;
      if (auto it = mu.find(from); it != mu.end() && !it->second.empty())
        owner = *it->second.begin();
      fake.insert({from, a, 1'000'000, owner, 1'000'000});
      send({a, op.dest, op.amount, self_, s}, fake);
      break;
    }
    case ByzantineStrategy::Silent:
      break;
  }
}

void ByzantineActor::on_sequence(const json& resp) {
  if (!resp.value("ok", false)) return;
  TransferMsg m;
  m.t = sim::record_from_json(resp.at("record"));
  m.deps = records_from_json(resp.at("deps"));
  for (const auto& s : resp.at("cert"))
    m.cert.push_back({s.at(0).get<int>(), s.at(1).get<std::uint64_t>()});
  ep_.broadcast_account(m.t.source, m.t.counter, m.encode());
}

}  // namespace atx::mp
