#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>

#include "atx/bcast/broadcast.hpp"
#include "atx/mp/message.hpp"
#include "atx/sim/scenario.hpp"

namespace atx::mp {

// Side effects of a node, provided by the simulator.
class NodeContext {
 public:
  virtual ~NodeContext() = default;
  virtual void broadcast(Pid self, std::string payload) = 0;
  virtual void broadcast_account(Pid self, AccountId a, std::uint64_t seq,
                                 std::string payload) = 0;
  virtual void request_sequence(Pid self, AccountId a, const TransferRecord& t,
                                const std::set<TransferRecord>& deps) = 0;
  virtual void record(Pid self, const char* kind, nlohmann::json data) = 0;
  virtual void effect(Pid self, std::uint64_t op_id) = 0;
  virtual void complete(Pid self, std::uint64_t op_id, Response r) = 0;
};

struct NodeConfig {
  LedgerState q0;
  OwnershipMap mu;
  bool deps_count_toward_balance = true;
  sim::Mutations mutations;
  const bcast::Authenticator* auth = nullptr;
};

// Asset transfer over secure broadcast, one instance per process. Accounts
// with one owner broadcast on the owner's stream with locally chosen
// sequence numbers; shared accounts get sequence numbers and a certificate
// from the account's sequencing service and use the account's stream.
class LedgerNode {
 public:
  LedgerNode(Pid self, NodeConfig cfg, NodeContext& ctx);

  // Returns the response if the operation completed without waiting.
  // Throws NotOwner, PendingOperation, UnknownAccount.
  std::optional<Response> invoke(const Operation& op, std::uint64_t op_id);
  void on_deliver(const bcast::Delivery& d);
  // Sequencing service answer for this node's pending shared transfer.
  void on_sequence(const nlohmann::json& resp);

  bool pending() const { return pending_.has_value(); }
  Amount read(AccountId a) const;
  std::uint64_t seq(AccountId a) const;
  std::uint64_t rec(bcast::StreamId s) const;
  const std::set<TransferRecord>& hist(AccountId a) const;
  const std::set<TransferRecord>& deps(AccountId a) const;
  std::size_t to_validate() const { return to_validate_.size(); }
  Pid self() const { return self_; }
  const NodeConfig& config() const { return cfg_; }

 private:
  struct Entry {
    Pid origin{};
    bcast::StreamId stream;
    TransferMsg msg;
  };
  enum class Check { Valid, Wait, Malicious };

  struct Pending {
    std::uint64_t op_id = 0;
    Operation op;
    std::optional<TransferRecord> record;  // empty while awaiting a sequence
  };

  bool shared(AccountId a) const;
  Check valid(const Entry& e, std::string& why) const;
  void apply(const Entry& e);
  void validate();
  Amount balance(AccountId a, const std::set<TransferRecord>& extra) const;

  Pid self_;
  NodeConfig cfg_;
  NodeContext& ctx_;
  std::map<AccountId, std::uint64_t> seq_;
  std::map<bcast::StreamId, std::uint64_t> rec_;
  std::map<AccountId, std::set<TransferRecord>> hist_;
  std::map<AccountId, std::set<TransferRecord>> deps_;
  std::deque<Entry> to_validate_;
  std::optional<Pending> pending_;
};

}  // namespace atx::mp
