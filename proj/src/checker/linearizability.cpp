#include "atx/checker/linearizability.hpp"

#include <algorithm>
#include <set>

namespace atx::checker {

namespace {
constexpr std::size_t kNoAccount = static_cast<std::size_t>(-1);
}

LedgerModel::LedgerModel(const LedgerState& q0, const OwnershipMap& mu,
                         std::vector<Element> elements)
    : elements_(std::move(elements)) {
  for (const auto& [a, v] : q0.balances) {
    accounts_.push_back(a);
    initial_.push_back(v);
    std::vector<Pid> owners;
    if (auto it = mu.find(a); it != mu.end())
      owners.assign(it->second.begin(), it->second.end());
    owners_.push_back(std::move(owners));
  }
  for (const auto& e : elements_) {
    src_.push_back(index_of(e.op.source));
    dst_.push_back(index_of(e.op.dest));
  }
}

std::size_t LedgerModel::index_of(AccountId a) const {
  auto it = std::lower_bound(accounts_.begin(), accounts_.end(), a);
  if (it == accounts_.end() || *it != a) return kNoAccount;
  return static_cast<std::size_t>(it - accounts_.begin());
}

bool LedgerModel::mutates(std::size_t i) const {
  const auto& e = elements_[i];
  return e.op.is_transfer() && e.response.kind == Response::Kind::Bool &&
         e.response.ok && src_[i] != dst_[i];
}

bool LedgerModel::apply(State& s, std::size_t i) const {
  const auto& e = elements_[i];
  const std::size_t a = src_[i];
  if (a == kNoAccount) return false;
  if (e.op.is_read())
    return e.response.kind == Response::Kind::Balance &&
           e.response.value == s[a];

  const std::size_t b = dst_[i];
  if (b == kNoAccount || e.response.kind != Response::Kind::Bool)
    return false;
  const auto& owners = owners_[a];
  const bool owner =
      std::find(owners.begin(), owners.end(), e.process) != owners.end();
  const bool succeeds = owner && s[a] >= e.op.amount;
  if (succeeds != e.response.ok) return false;
  if (succeeds && a != b) {
    Amount credited;
    if (__builtin_add_overflow(s[b], e.op.amount, &credited)) return false;
    s[a] -= e.op.amount;
    s[b] = credited;
  }
  return true;
}

std::size_t LedgerModel::hash(const State& s) const {
  std::size_t h = 14695981039346656037ull;
  for (Amount v : s) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
  return h;
}

std::vector<HistoryOp> complete_history(const History& h) {
  std::vector<HistoryOp> out;
  for (const auto& op : h.ops) {
    if (op.complete()) {
      out.push_back(op);
    } else if (op.op.is_transfer() && op.effect != kNever) {
      HistoryOp c = op;
      c.response = Response::boolean(true);
      c.respond = kNever;
      out.push_back(c);
    }
  }
  return out;
}

namespace {

std::optional<std::vector<SequentialStep>> search(const History& h,
                                                  const LedgerState& q0,
                                                  const OwnershipMap& mu,
                                                  SearchLimits limits) {
  const auto ops = complete_history(h);
  std::vector<LedgerModel::Element> elements;
  elements.reserve(ops.size());
  for (const auto& op : ops)
    elements.push_back({op.process, op.op, *op.response});

  std::vector<OpSet> preds(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i)
    for (std::size_t j = 0; j < ops.size(); ++j)
      if (i != j && ops[j].respond != kNever &&
          ops[j].respond < ops[i].invoke)
        preds[i].set(j);

  LedgerModel model(q0, mu, std::move(elements));
  OrderSearch<LedgerModel> engine(model, std::move(preds), limits);
  auto order = engine.run(model.initial());
  if (!order) return std::nullopt;
  std::vector<SequentialStep> witness;
  for (std::size_t i : *order) {
    const auto& e = model.elements()[i];
    witness.push_back({e.process, e.op, e.response});
  }
  return witness;
}

History prefix_at(const History& h, std::uint64_t t) {
  History p;
  for (const auto& op : h.ops) {
    if (op.invoke > t) continue;
    HistoryOp c = op;
    if (c.respond == kNever || c.respond > t) {
      c.response.reset();
      c.respond = kNever;
    }
    if (c.effect != kNever && c.effect > t) c.effect = kNever;
    p.ops.push_back(c);
  }
  return p;
}

}  // namespace

Verdict check_linearizable(const History& h, const LedgerState& q0,
                           const OwnershipMap& mu, SearchLimits limits) {
  Verdict v;
  if (auto witness = search(h, q0, mu, limits)) {
    v.pass = true;
    v.witness = std::move(*witness);
    return v;
  }
  v.pass = false;
  std::set<std::uint64_t> cuts;
  for (const auto& op : h.ops) {
    cuts.insert(op.invoke);
    if (op.respond != kNever) cuts.insert(op.respond);
    if (op.effect != kNever) cuts.insert(op.effect);
  }
  for (std::uint64_t t : cuts) {
    History p = prefix_at(h, t);
    if (!search(p, q0, mu, limits)) {
      v.violating_prefix = std::move(p.ops);
      v.detail = "no legal linearization of the history up to time " +
                 std::to_string(t);
      return v;
    }
  }
  v.violating_prefix = h.ops;
  v.detail = "no legal linearization";
  return v;
}

}  // namespace atx::checker
