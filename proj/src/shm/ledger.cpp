#include "atx/shm/ledger.hpp"

namespace atx::shm {

Proc<bool> AtomicLedger::transfer(Pid p, AccountId a, AccountId b, Amount x,
                                  std::uint64_t op_id) {
  check_accounts(a, b);
  co_await step();
  Response r;
  {
    std::lock_guard lock(mu_lock_);
    r = apply_step(state_, p, Operation::transfer(a, b, x), mu_);
  }
  if (r.ok) effect(op_id);
  co_return r.ok;
}

Proc<Amount> AtomicLedger::read(Pid p, AccountId a) {
  require_account(q0_, a);
  co_await step();
  std::lock_guard lock(mu_lock_);
  co_return apply_step(state_, p, Operation::read(a), mu_).value;
}

}  // namespace atx::shm
