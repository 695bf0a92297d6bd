#pragma once

#include <optional>
#include <set>

#include "atx/bcast/auth.hpp"
#include "atx/mp/message.hpp"
#include "atx/sim/scenario.hpp"

namespace atx::mp {

// Per-account sequence numbers for a shared account, standing in for a
// replicated service run by the account's owners. Correct mode keeps the
// union D of submitted dependencies, checks the balance against D and its
// own successful outputs, and certifies (record, seq, D) with owner
// signatures. Equivocate hands out every sequence number twice without a
// balance check. Stall never answers.
class SequenceService {
 public:
  SequenceService(AccountId a, std::set<Pid> owners, sim::SequencerMode mode,
                  Amount initial, const bcast::Authenticator& auth);

  // Request body: {"record": [...], "deps": [...]}. Returns the response
  // body for the requester, or nothing.
  std::optional<nlohmann::json> on_request(Pid from, const nlohmann::json& req);

  AccountId account() const { return a_; }
  sim::SequencerMode mode() const { return mode_; }
  std::uint64_t assigned() const { return next_; }

 private:
  nlohmann::json certify(const TransferRecord& t) const;

  AccountId a_;
  std::set<Pid> owners_;
  sim::SequencerMode mode_;
  LedgerState q0_;
  const bcast::Authenticator& auth_;
  std::uint64_t next_ = 0;
  std::uint64_t requests_ = 0;
  std::set<TransferRecord> deps_;
  std::set<TransferRecord> outputs_;
};

}  // namespace atx::mp
