#pragma once

#include "atx/bcast/broadcast.hpp"
#include "atx/mp/node.hpp"

namespace atx::mp {

// A malicious process. It tracks the system honestly through its own
// LedgerNode (so it knows its balance and sequence numbers) but deviates
// at the broadcast layer: it fabricates, duplicates or withholds messages.
// Each scripted transfer triggers one attack built from that transfer.
class ByzantineActor {
 public:
  ByzantineActor(Pid self, sim::ByzantineStrategy strategy, LedgerNode& view,
                 bcast::Endpoint& ep, NodeContext& ctx);

  void act(const Operation& op);
  void on_sequence(const nlohmann::json& resp);

  sim::ByzantineStrategy strategy() const { return strategy_; }

 private:
  AccountId other_account(AccountId a, AccountId b) const;
  std::string encode(const TransferRecord& t, const std::set<TransferRecord>& deps) const;
  void send(const TransferRecord& t, const std::set<TransferRecord>& deps);

  Pid self_;
  sim::ByzantineStrategy strategy_;
  LedgerNode& view_;
  bcast::Endpoint& ep_;
  NodeContext& ctx_;
  std::uint64_t forged_ = 0;
};

}  // namespace atx::mp
