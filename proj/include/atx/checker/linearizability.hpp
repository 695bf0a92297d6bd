#pragma once

#include "atx/checker/history.hpp"
#include "atx/checker/order_search.hpp"

namespace atx::checker {

// Ledger state as a dense vector so search states hash cheaply.
class LedgerModel {
 public:
  using State = std::vector<Amount>;

  struct Element {
    Pid process{};
    Operation op;
    Response response;
  };

  LedgerModel(const LedgerState& q0, const OwnershipMap& mu,
              std::vector<Element> elements);

  State initial() const { return initial_; }
  bool apply(State& s, std::size_t i) const;
  bool mutates(std::size_t i) const;
  std::size_t hash(const State& s) const;

  const std::vector<Element>& elements() const { return elements_; }

 private:
  std::size_t index_of(AccountId a) const;

  std::vector<AccountId> accounts_;
  std::vector<std::vector<Pid>> owners_;
  State initial_;
  std::vector<Element> elements_;
  std::vector<std::size_t> src_, dst_;
};

// Linearizability against the sequential ledger specification. Pending
// transfers with a visible effect are completed with `true`; other pending
// operations are dropped.
Verdict check_linearizable(const History& h, const LedgerState& q0,
                           const OwnershipMap& mu, SearchLimits limits = {});

// The operations that the completion rule keeps, completed.
std::vector<HistoryOp> complete_history(const History& h);

}  // namespace atx::checker
