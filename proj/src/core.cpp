#include "atx/core.hpp"


namespace atx {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownAccount: return "UnknownAccount";
    case ErrorCode::ArithmeticOverflow: return "ArithmeticOverflow";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotWriter: return "NotWriter";
    case ErrorCode::NotOwner: return "NotOwner";
    case ErrorCode::PendingOperation: return "PendingOperation";
    case ErrorCode::SearchBoundExceeded: return "SearchBoundExceeded";
    case ErrorCode::StepBoundExceeded: return "StepBoundExceeded";
    case ErrorCode::BoundExceeded: return "BoundExceeded";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Amount checked_add(Amount a, Amount b) {
  Amount r;
  if (__builtin_add_overflow(a, b, &r))
    throw Error(ErrorCode::ArithmeticOverflow, "amount overflow");
  return r;
}

Amount checked_sub(Amount a, Amount b) {
  Amount r;
  if (__builtin_sub_overflow(a, b, &r))
    throw Error(ErrorCode::ArithmeticOverflow, "amount underflow");
  return r;
}

Amount LedgerState::at(AccountId a) const {
  auto it = balances.find(a);
  if (it == balances.end())
    throw Error(ErrorCode::UnknownAccount,
                "unknown account " + std::to_string(to_int(a)));
  return it->second;
}

Amount LedgerState::total() const {
  Amount sum = 0;
  for (const auto& [_, v] : balances) sum = checked_add(sum, v);
  return sum;
}

Operation Operation::transfer(AccountId a, AccountId b, Amount x) {
  if (x < 0) throw Error(ErrorCode::InvalidArgument, "negative amount");
  return {Kind::Transfer, a, b, x};
}

Operation Operation::read(AccountId a) { return {Kind::Read, a, a, 0}; }

std::string describe(const Operation& op) {
  if (op.is_read()) return "read(" + std::to_string(to_int(op.source)) + ")";
  return "transfer(" + std::to_string(to_int(op.source)) + "," +
         std::to_string(to_int(op.dest)) + "," + std::to_string(op.amount) +
         ")";
}

std::string describe(const Response& r) {
  if (r.kind == Response::Kind::Bool) return r.ok ? "true" : "false";
  return std::to_string(r.value);
}

std::string describe(const TransferRecord& t) {
  return std::to_string(to_int(t.source)) + "->" +
         std::to_string(to_int(t.dest)) + ":" + std::to_string(t.amount) +
         "#" + std::to_string(to_int(t.issuer)) + "." +
         std::to_string(t.counter);
}

bool owns(const OwnershipMap& mu, Pid p, AccountId a) {
  auto it = mu.find(a);
  return it != mu.end() && it->second.count(p) != 0;
}

void require_account(const LedgerState& state, AccountId a) {
  if (!state.contains(a))
    throw Error(ErrorCode::UnknownAccount,
                "unknown account " + std::to_string(to_int(a)));
}

Response apply_step(LedgerState& state, Pid p, const Operation& op,
                    const OwnershipMap& mu) {
  require_account(state, op.source);
  if (op.is_read()) return Response::balance(state.balances[op.source]);

  require_account(state, op.dest);
  Amount& from = state.balances[op.source];
  if (!owns(mu, p, op.source) || from < op.amount)
    return Response::boolean(false);
  if (op.source == op.dest) return Response::boolean(true);
  Amount credited = checked_add(state.balances[op.dest], op.amount);
  from -= op.amount;
  state.balances[op.dest] = credited;
  return Response::boolean(true);
}

std::pair<LedgerState, Response> seq_step(const LedgerState& state, Pid p,
                                          const Operation& op,
                                          const OwnershipMap& mu) {
  LedgerState next = state;
  Response r = apply_step(next, p, op, mu);
  return {std::move(next), r};
}

bool replay_legal(const std::vector<SequentialStep>& seq,
                  const LedgerState& q0, const OwnershipMap& mu) {
  LedgerState state = q0;
  try {
    for (const auto& s : seq) {
      if (apply_step(state, s.process, s.op, mu) != s.response) return false;
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace atx
