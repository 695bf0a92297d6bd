#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>

#include "atx/core.hpp"
#include "atx/shm/proc.hpp"

namespace atx::shm {

inline constexpr std::uint64_t kUntracked =
    std::numeric_limits<std::uint64_t>::max();

// Called with an operation id when that operation's effect becomes visible
// to other processes. Used to build history completions.
using EffectSink = std::function<void(std::uint64_t op_id)>;

// A shared asset-transfer object, as seen by one process at a time.
class SharedLedger {
 public:
  SharedLedger(LedgerState q0, OwnershipMap mu)
      : q0_(std::move(q0)), mu_(std::move(mu)) {}
  virtual ~SharedLedger() = default;

  virtual Proc<bool> transfer(Pid p, AccountId a, AccountId b, Amount x,
                              std::uint64_t op_id = kUntracked) = 0;
  virtual Proc<Amount> read(Pid p, AccountId a) = 0;

  const LedgerState& initial() const { return q0_; }
  const OwnershipMap& owners() const { return mu_; }
  void set_effect_sink(EffectSink sink) { sink_ = std::move(sink); }

 protected:
  void effect(std::uint64_t op_id) const {
    if (sink_ && op_id != kUntracked) sink_(op_id);
  }
  void check_accounts(AccountId a, AccountId b) const {
    require_account(q0_, a);
    require_account(q0_, b);
  }

  LedgerState q0_;
  OwnershipMap mu_;
  EffectSink sink_;
};

// The asset-transfer type itself as one atomic object: every operation is a
// single step applying the sequential specification.
class AtomicLedger final : public SharedLedger {
 public:
  AtomicLedger(LedgerState q0, OwnershipMap mu)
      : SharedLedger(q0, std::move(mu)), state_(std::move(q0)) {}

  Proc<bool> transfer(Pid p, AccountId a, AccountId b, Amount x,
                      std::uint64_t op_id = kUntracked) override;
  Proc<Amount> read(Pid p, AccountId a) override;

  LedgerState state() const {
    std::lock_guard lock(mu_lock_);
    return state_;
  }

 private:
  mutable std::mutex mu_lock_;
  LedgerState state_;
};

}  // namespace atx::shm
