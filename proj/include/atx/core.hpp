#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace atx {

enum class ErrorCode {
  UnknownAccount,
  ArithmeticOverflow,
  InvalidArgument,
  NotWriter,
  NotOwner,
  PendingOperation,
  SearchBoundExceeded,
  StepBoundExceeded,
  BoundExceeded,
  ConfigError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class Pid : int {};
enum class AccountId : int {};

constexpr int to_int(Pid p) { return static_cast<int>(p); }
constexpr int to_int(AccountId a) { return static_cast<int>(a); }
constexpr Pid pid(int v) { return static_cast<Pid>(v); }
constexpr AccountId account(int v) { return static_cast<AccountId>(v); }

// Amounts are exact non-negative integers. Signed storage lets balance
// computations expose (rather than wrap) an illegal negative result.
using Amount = std::int64_t;

Amount checked_add(Amount a, Amount b);
Amount checked_sub(Amount a, Amount b);

using OwnershipMap = std::map<AccountId, std::set<Pid>>;

struct LedgerState {
  std::map<AccountId, Amount> balances;

  Amount at(AccountId a) const;
  bool contains(AccountId a) const { return balances.count(a) != 0; }
  Amount total() const;
  bool operator==(const LedgerState&) const = default;
};

struct Operation {
  enum class Kind { Transfer, Read };

  Kind kind = Kind::Read;
  AccountId source{};
  AccountId dest{};
  Amount amount = 0;

  static Operation transfer(AccountId a, AccountId b, Amount x);
  static Operation read(AccountId a);

  bool is_transfer() const { return kind == Kind::Transfer; }
  bool is_read() const { return kind == Kind::Read; }
  auto operator<=>(const Operation&) const = default;
};

struct Response {
  enum class Kind { Bool, Balance };

  Kind kind = Kind::Bool;
  bool ok = false;
  Amount value = 0;

  static Response boolean(bool v) { return {Kind::Bool, v, 0}; }
  static Response balance(Amount v) { return {Kind::Balance, false, v}; }
  bool operator==(const Response&) const = default;
};

// One money movement. (issuer, counter) is the uniqueness tag: two
// otherwise identical transfers stay distinct records.
struct TransferRecord {
  AccountId source{};
  AccountId dest{};
  Amount amount = 0;
  Pid issuer{};
  std::uint64_t counter = 0;

  auto operator<=>(const TransferRecord&) const = default;
};

std::string describe(const Operation& op);
std::string describe(const Response& r);
std::string describe(const TransferRecord& t);

bool owns(const OwnershipMap& mu, Pid p, AccountId a);
void require_account(const LedgerState& state, AccountId a);

// Sequential specification of the asset-transfer type.
std::pair<LedgerState, Response> seq_step(const LedgerState& state, Pid p,
                                          const Operation& op,
                                          const OwnershipMap& mu);

// In-place variant used by hot search loops; returns the response.
Response apply_step(LedgerState& state, Pid p, const Operation& op,
                    const OwnershipMap& mu);

// q0(a) + incoming - outgoing over `records`. Signed so an illegal record
// set shows up as a negative balance.
template <class Range>
Amount balance_of(AccountId a, const Range& records, const LedgerState& q0) {
  Amount b = q0.at(a);
  for (const TransferRecord& t : records) {
    if (t.dest == a) b = checked_add(b, t.amount);
    if (t.source == a) b = checked_sub(b, t.amount);
  }
  return b;
}

struct SequentialStep {
  Pid process{};
  Operation op;
  Response response;
};

bool replay_legal(const std::vector<SequentialStep>& seq,
                  const LedgerState& q0, const OwnershipMap& mu);

}  // namespace atx
