#include "atx/checker/relaxed.hpp"

#include <algorithm>
#include <set>

#include "atx/checker/linearizability.hpp"
#include "atx/checker/trace_view.hpp"

namespace atx::checker {

namespace {

struct Applied {
  TransferRecord record;
  std::vector<TransferRecord> deps;
};

struct Facts {
  TraceView view;
  LedgerState q0;
  OwnershipMap mu;
  std::vector<TracedOp> ops;
  std::map<int, std::vector<Applied>> applied;  // benign node -> in order
  std::map<TransferRecord, std::vector<TransferRecord>> known;
};

Facts gather(const sim::Trace& t) {
  Facts f{TraceView::of(t), {}, {}, traced_ops(t), {}, {}};
  f.q0 = f.view.scenario.q0();
  f.mu = f.view.scenario.mu();
  for (const auto& r : t.records()) {
    if (r.kind != "apply" || !f.view.benign(pid(r.node))) continue;
    Applied a{sim::record_from_json(r.data.at("record")), {}};
    if (r.data.contains("deps"))
      for (const auto& d : r.data.at("deps")) a.deps.push_back(sim::record_from_json(d));
    f.known.emplace(a.record, a.deps);
    f.applied[r.node].push_back(std::move(a));
  }
  return f;
}

Operation op_of(const TransferRecord& r) {
  return Operation::transfer(r.source, r.dest, r.amount);
}

std::string first_negative(const Facts& f) {
  for (const auto& [node, list] : f.applied) {
    if (!f.view.correct(pid(node))) continue;
    std::set<TransferRecord> seen;
    for (const auto& a : list) {
      seen.insert(a.deps.begin(), a.deps.end());
      seen.insert(a.record);
      if (!f.q0.contains(a.record.source)) continue;
      const Amount b = balance_of(a.record.source, seen, f.q0);
      if (b < 0)
        return "; process " + std::to_string(node) + " holds balance " +
               std::to_string(b) + " on account " +
               std::to_string(to_int(a.record.source)) + " after " +
               describe(a.record);
    }
  }
  return "";
}

Verdict part1(const Facts& f, const RelaxedOptions& opt) {
  History h;
  for (const auto& op : f.ops) {
    if (!f.view.correct(op.process) || !op.op.is_transfer()) continue;
    const bool ok = op.response ? op.response->ok : op.effect != kNever;
    if (ok) h.ops.push_back(op);
  }
  std::set<TransferRecord> free;
  for (const auto& [rec, _] : f.known)
    if (!f.view.correct(rec.issuer)) free.insert(rec);
  for (const auto& rec : free) {
    HistoryOp op;
    op.process = rec.issuer;
    op.op = op_of(rec);
    op.response = Response::boolean(true);
    op.invoke = 0;
    op.respond = kNever;
    op.effect = 0;
    h.ops.push_back(op);
  }
  Verdict v = check_linearizable(h, f.q0, f.mu, opt.limits);
  if (!v.pass) v.detail += first_negative(f);
  return v;
}

class Part2 {
 public:
  Part2(const Facts& f, Pid p, const RelaxedOptions& opt) : f_(f), p_(p), opt_(opt) {}

  Verdict run(const sim::Trace& t) {
    Verdict v;
    if (!build(v.detail)) return v;
    LedgerModel model(f_.q0, f_.mu, elements_);
    if (auto order = constructive(t, model)) {
      v.pass = true;
      v.witness = witness(model, *order);
      return v;
    }
    OrderSearch<LedgerModel> engine(model, preds_, opt_.limits);
    if (auto order = engine.run(model.initial())) {
      v.pass = true;
      v.witness = witness(model, *order);
      return v;
    }
    v.detail = "no legal sequential order for process " + std::to_string(to_int(p_)) +
               " over " + std::to_string(elements_.size()) + " operations";
    return v;
  }

 private:
  std::size_t add(Pid p, const Operation& op, const Response& r) {
    elements_.push_back({p, op, r});
    return elements_.size() - 1;
  }

  bool build(std::string& why) {
    static const std::vector<Applied> kNone;
    auto it = f_.applied.find(to_int(p_));
    const auto& mine = it == f_.applied.end() ? kNone : it->second;

    std::set<TransferRecord> universe;
    std::vector<TransferRecord> work;
    for (const auto& a : mine) work.push_back(a.record);
    for (const auto& [rec, _] : f_.known)
      if (f_.view.correct(rec.issuer)) work.push_back(rec);
    std::map<AccountId, std::vector<TransferRecord>> by_source;
    for (const auto& [rec, _] : f_.known) by_source[rec.source].push_back(rec);
    while (!work.empty()) {
      const TransferRecord r = work.back();
      work.pop_back();
      if (!universe.insert(r).second) continue;
      if (auto k = f_.known.find(r); k != f_.known.end())
        for (const auto& d : k->second) work.push_back(d);
      for (const auto& o : by_source[r.source])
        if (o.counter < r.counter) work.push_back(o);
    }
    for (const auto& r : universe)
      record_index_[r] = add(r.issuer, op_of(r), Response::boolean(true));

    // p's own operations in program order
    std::vector<TransferRecord> own_applied;
    for (const auto& a : mine)
      if (a.record.issuer == p_) own_applied.push_back(a.record);
    std::size_t next_own = 0;
    for (const auto& op : f_.ops) {
      const bool ok_transfer =
          op.op.is_transfer() &&
          (op.response ? op.response->ok : op.effect != kNever);
      if (op.process == p_) {
        if (ok_transfer) {
          if (next_own >= own_applied.size()) {
            why = "process " + std::to_string(to_int(p_)) +
                  " completed a transfer it never applied";
            return false;
          }
          program_.push_back(record_index_.at(own_applied[next_own++]));
        } else if (op.response) {
          const auto i = add(p_, op.op, *op.response);
          program_.push_back(i);
          op_index_[op.op_id] = i;
        }
      } else if (opt_.include_foreign && f_.view.correct(op.process) && op.response &&
                 !ok_transfer) {
        const auto i = add(op.process, op.op, *op.response);
        foreign_.push_back(i);
      }
    }

    preds_.assign(elements_.size(), OpSet{});
    if (elements_.size() > OpSet::kMax || elements_.size() > opt_.limits.max_ops)
      throw Error(ErrorCode::SearchBoundExceeded,
                  "history has " + std::to_string(elements_.size()) +
                      " operations; search bound is " +
                      std::to_string(opt_.limits.max_ops));
    for (const auto& [r, i] : record_index_) {
      if (auto k = f_.known.find(r); k != f_.known.end())
        for (const auto& d : k->second) preds_[i].set(record_index_.at(d));
      for (const auto& o : by_source[r.source])
        if (o.counter < r.counter) preds_[i].set(record_index_.at(o));
    }
    for (std::size_t k = 1; k < program_.size(); ++k)
      for (std::size_t j = 0; j < k; ++j) preds_[program_[k]].set(program_[j]);
    return true;
  }

  struct Walk {
    const LedgerModel& model;
    const std::vector<OpSet>& preds;
    LedgerModel::State state;
    OpSet placed;
    std::vector<std::size_t> order;

    bool place(std::size_t i) {
      if (placed.test(i)) return true;
      if (!placed.covers(preds[i])) return false;
      auto next = state;
      if (!model.apply(next, i)) return false;
      state = std::move(next);
      placed.set(i);
      order.push_back(i);
      return true;
    }
  };

  // Follow p's own trace order, slotting other elements in greedily.
  std::optional<std::vector<std::size_t>> constructive(const sim::Trace& t,
                                                       const LedgerModel& model) {
    Walk w{model, preds_, model.initial(), {}, {}};
    auto sweep = [&] {
      for (auto i : foreign_) w.place(i);
    };
    sweep();
    for (const auto& r : t.records()) {
      if (r.node != to_int(p_)) continue;
      if (r.kind == "apply") {
        if (!w.place(record_index_.at(sim::record_from_json(r.data.at("record")))))
          return std::nullopt;
      } else if (r.kind == "respond" && r.data.contains("op_id")) {
        auto it = op_index_.find(r.data.at("op_id").get<std::uint64_t>());
        if (it != op_index_.end() && !w.place(it->second)) return std::nullopt;
      } else {
        continue;
      }
      sweep();
    }
    for (bool progress = true; progress;) {
      progress = false;
      for (std::size_t i = 0; i < elements_.size(); ++i)
        if (!w.placed.test(i) && w.place(i)) progress = true;
    }
    if (w.order.size() != elements_.size()) return std::nullopt;
    return w.order;
  }

  static std::vector<SequentialStep> witness(const LedgerModel& model,
                                             const std::vector<std::size_t>& order) {
    std::vector<SequentialStep> out;
    for (auto i : order) {
      const auto& e = model.elements()[i];
      out.push_back({e.process, e.op, e.response});
    }
    return out;
  }

  const Facts& f_;
  Pid p_;
  const RelaxedOptions& opt_;
  std::vector<LedgerModel::Element> elements_;
  std::vector<OpSet> preds_;
  std::map<TransferRecord, std::size_t> record_index_;
  std::map<std::uint64_t, std::size_t> op_index_;
  std::vector<std::size_t> program_;
  std::vector<std::size_t> foreign_;
};

}  // namespace

RelaxedVerdict check_relaxed(const sim::Trace& t, const RelaxedOptions& opt) {
  const Facts f = gather(t);
  RelaxedVerdict out;
  out.part1 = part1(f, opt);
  out.pass = out.part1.pass;
  if (!out.part1.pass) out.detail = "part 1: " + out.part1.detail;
  for (int i = 1; i <= f.view.scenario.n; ++i) {
    const Pid p = pid(i);
    if (!f.view.correct(p)) continue;
    Verdict v = Part2(f, p, opt).run(t);
    if (!v.pass) {
      if (out.pass) out.detail = "part 2: " + v.detail;
      out.pass = false;
    }
    out.part2.emplace(p, std::move(v));
  }
  return out;
}

}  // namespace atx::checker
