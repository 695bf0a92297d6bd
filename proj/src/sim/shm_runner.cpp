#include "atx/sim/shm_runner.hpp"

#include <memory>
#include <random>
#include <variant>

#include "atx/shm/consensus_ledger.hpp"
#include "atx/shm/snapshot_ledger.hpp"

namespace atx::sim {

using nlohmann::json;

namespace {

std::unique_ptr<shm::SharedLedger> make_ledger(Algorithm alg, int n,
                                               std::size_t k, LedgerState q0,
                                               OwnershipMap mu) {
  switch (alg) {
    case Algorithm::AtomicLedger:
      return std::make_unique<shm::AtomicLedger>(std::move(q0), std::move(mu));
    case Algorithm::SnapshotLedger:
      return std::make_unique<shm::SnapshotLedger>(n, std::move(q0), std::move(mu));
    case Algorithm::ConsensusLedger:
      return std::make_unique<shm::ConsensusLedger>(n, k, std::move(q0),
                                                    std::move(mu));
    default:
      throw Error(ErrorCode::ConfigError,
                  std::string("not a shared-memory ledger: ") + to_string(alg));
  }
}

class World {
 public:
  World(const Scenario& s, std::uint64_t seed) : s_(s) {
    s.validate();
    if (s.algorithm == Algorithm::TransferConsensus) {
      const int k = static_cast<int>(s.k);
      ledger_ = make_ledger(s.election_ledger, k, s.k,
                            shm::TransferConsensus::initial_state(k),
                            shm::TransferConsensus::ownership(k));
      tc_ = std::make_unique<shm::TransferConsensus>(k, *ledger_);
    } else {
      ledger_ = make_ledger(s.algorithm, s.n, s.capacity(), s.q0(), s.mu());
      if (auto* l = dynamic_cast<shm::SnapshotLedger*>(ledger_.get()))
        l->skip_balance_check(s.mutations.skip_balance_check);
    }
    ledger_->set_effect_sink([this](std::uint64_t id) {
      const auto st = run_.trace.add(current_, "effect", {{"op_id", id}});
      auto& op = run_.history.ops.at(id);
      if (op.effect == checker::kNever) op.effect = st;
    });
    procs_.resize(static_cast<std::size_t>(s.n) + 1);
    json header = to_json(s);
    header["seed"] = seed;
    run_.trace.add(0, "scenario", header);
  }

  std::vector<Pid> enabled() {
    apply_crashes();
    std::vector<Pid> out;
    for (int i = 1; i <= s_.n; ++i) {
      const auto& ps = procs_[static_cast<std::size_t>(i)];
      if (ps.crashed) continue;
      if (ps.busy() || ps.next < script(pid(i)).size()) out.push_back(pid(i));
    }
    return out;
  }

  std::uint64_t steps() const { return run_.steps; }

  void step(Pid p) {
    auto& ps = procs_[static_cast<std::size_t>(to_int(p))];
    current_ = to_int(p);
    ++run_.steps;
    run_.trace.add(current_, "step", {{"t", run_.steps}});
    if (!ps.busy()) invoke(p, ps);
    std::visit(
        [&](auto& proc) {
          if constexpr (!std::is_same_v<std::decay_t<decltype(proc)>, std::monostate>)
            shm::advance(proc, ps.driver);
        },
        ps.proc);
    ++ps.own_steps;
    finish_if_done(p, ps);
  }

  ShmRun finish(bool bound_hit) {
    run_.step_bound_hit = bound_hit;
    bool all = true;
    for (int i = 1; i <= s_.n; ++i) {
      const auto& ps = procs_[static_cast<std::size_t>(i)];
      run_.own_steps[pid(i)] = ps.own_steps;
      if (ps.crashed) {
        run_.crashed.insert(pid(i));
        continue;
      }
      if (ps.busy() || ps.next < script(pid(i)).size()) all = false;
    }
    run_.all_finished = all;
    if (auto* l = dynamic_cast<shm::SnapshotLedger*>(ledger_.get()))
    {
      run_.negative_snapshots = l->negative_snapshots();
      run_.trace.add(0, "audit", {{"negative_snapshots", run_.negative_snapshots}});
    }
    if (auto* l = dynamic_cast<shm::ConsensusLedger*>(ledger_.get())) {
      run_.max_kc_invocations = l->max_invocations();
      run_.k = l->k();
      run_.logs_prefix_consistent = l->logs_prefix_consistent();
      run_.trace.add(0, "kc_stats",
                     {{"k", l->k()},
                      {"max_invocations", l->max_invocations()},
                      {"prefix_consistent", l->logs_prefix_consistent()}});
    }
    if (tc_) {
      run_.outcomes = tc_->outcomes();
      for (const auto& [p, items] : s_.scripts)
        if (!items.empty()) run_.proposals[p] = items.front().value;
      if (auto* l = dynamic_cast<shm::AtomicLedger*>(ledger_.get()))
        run_.election_balance = l->state().at(shm::TransferConsensus::kElection);
      else
        run_.election_balance = shm::run_free(
            ledger_->read(pid(1), shm::TransferConsensus::kElection));
    }
    run_.trace.add(0, "end",
                   {{"steps", run_.steps},
                    {"step_bound_hit", bound_hit},
                    {"all_finished", all}});
    return std::move(run_);
  }

 private:
  struct ProcState {
    std::size_t next = 0;
    std::variant<std::monostate, shm::Proc<bool>, shm::Proc<std::int64_t>> proc;
    shm::Driver driver;
    std::uint64_t op_id = 0;
    bool tracked = false;
    bool crashed = false;
    std::uint64_t own_steps = 0;

    bool busy() const { return !std::holds_alternative<std::monostate>(proc); }
  };

  const std::vector<ScriptItem>& script(Pid p) const {
    static const std::vector<ScriptItem> kEmpty;
    auto it = s_.scripts.find(p);
    return it == s_.scripts.end() ? kEmpty : it->second;
  }

  void apply_crashes() {
    for (int i = 1; i <= s_.n; ++i) {
      auto& ps = procs_[static_cast<std::size_t>(i)];
      if (ps.crashed) continue;
      const Pid p = pid(i);
      bool crash = false;
      if (auto it = s_.faults.crashes.find(p);
          it != s_.faults.crashes.end() && run_.steps >= it->second)
        crash = true;
      if (auto it = s_.faults.crash_after_steps.find(p);
          it != s_.faults.crash_after_steps.end() && ps.own_steps >= it->second)
        crash = true;
      if (crash) {
        ps.crashed = true;
        run_.trace.add(i, "crash", {{"t", run_.steps}});
      }
    }
  }

  void invoke(Pid p, ProcState& ps) {
    const ScriptItem& item = script(p).at(ps.next);
    ps.driver = shm::Driver{};
    json data;
    if (item.kind == ScriptItem::Kind::Propose) {
      ps.tracked = false;
      data = {{"propose", item.value}};
      run_.trace.add(to_int(p), "invoke", data);
      ps.proc = tc_->propose(p, item.value);
      std::get<shm::Proc<std::int64_t>>(ps.proc).start(ps.driver);
      return;
    }
    ps.tracked = true;
    ps.op_id = run_.history.ops.size();
    data = {{"op_id", ps.op_id}, {"op", to_json(item.op)}};
    const auto st = run_.trace.add(to_int(p), "invoke", data);
    run_.history.ops.push_back({p, item.op, std::nullopt, st});
    if (item.op.is_transfer()) {
      ps.proc = ledger_->transfer(p, item.op.source, item.op.dest,
                                  item.op.amount, ps.op_id);
      std::get<shm::Proc<bool>>(ps.proc).start(ps.driver);
    } else {
      ps.proc = ledger_->read(p, item.op.source);
      std::get<shm::Proc<std::int64_t>>(ps.proc).start(ps.driver);
    }
  }

  void finish_if_done(Pid p, ProcState& ps) {
    std::optional<Response> resp;
    std::int64_t decided = 0;
    bool done = false;
    if (auto* t = std::get_if<shm::Proc<bool>>(&ps.proc); t && t->done()) {
      resp = Response::boolean(t->take());
      done = true;
    } else if (auto* r = std::get_if<shm::Proc<std::int64_t>>(&ps.proc);
               r && r->done()) {
      decided = r->take();
      if (ps.tracked) resp = Response::balance(decided);
      done = true;
    }
    if (!done) return;
    if (ps.tracked) {
      const auto st = run_.trace.add(
          to_int(p), "respond", {{"op_id", ps.op_id}, {"response", to_json(*resp)}});
      auto& op = run_.history.ops[ps.op_id];
      op.response = resp;
      op.respond = st;
    } else {
      run_.trace.add(to_int(p), "respond", {{"decided", decided}});
    }
    ps.proc = std::monostate{};
    ++ps.next;
  }

  const Scenario& s_;
  std::unique_ptr<shm::SharedLedger> ledger_;
  std::unique_ptr<shm::TransferConsensus> tc_;
  std::vector<ProcState> procs_;
  ShmRun run_;
  int current_ = 0;
};

ShmRun drive(const Scenario& s, std::uint64_t seed, const Chooser& choose,
             std::uint64_t bound, bool throw_on_bound) {
  World w(s, seed);
  for (;;) {
    auto enabled = w.enabled();
    if (enabled.empty()) return w.finish(false);
    if (w.steps() >= bound) {
      if (throw_on_bound)
        throw Error(ErrorCode::BoundExceeded,
                    "interleaving needs more than " + std::to_string(bound) +
                        " steps");
      return w.finish(true);
    }
    const std::size_t i = choose(enabled);
    w.step(enabled.at(i));
  }
}

}  // namespace

ShmRun run_shm(const Scenario& s, std::uint64_t seed, const Chooser& choose) {
  return drive(s, seed, choose, s.step_bound, false);
}

ShmRun run_shm(const Scenario& s, std::uint64_t seed) {
  switch (s.scheduler.policy) {
    case Policy::FairRandom: {
      std::mt19937_64 rng(seed);
      return run_shm(s, seed, [&](const std::vector<Pid>& en) {
        return std::uniform_int_distribution<std::size_t>(0, en.size() - 1)(rng);
      });
    }
    case Policy::Scripted: {
      std::size_t pos = 0;
      return run_shm(s, seed, [&](const std::vector<Pid>& en) -> std::size_t {
        while (pos < s.scheduler.steps.size()) {
          const Pid want = pid(s.scheduler.steps[pos++]);
          for (std::size_t i = 0; i < en.size(); ++i)
            if (en[i] == want) return i;
        }
        return 0;
      });
    }
    case Policy::Exhaustive:
      break;
  }
  return run_shm(s, seed, [](const std::vector<Pid>&) { return std::size_t{0}; });
}

std::uint64_t enumerate_shm(const Scenario& s,
                            const std::function<void(const ShmRun&)>& visit) {
  std::vector<std::size_t> prefix;
  std::uint64_t count = 0;
  for (;;) {
    std::vector<std::size_t> choices, widths;
    auto choose = [&](const std::vector<Pid>& en) {
      const std::size_t d = choices.size();
      const std::size_t c = d < prefix.size() ? prefix[d] : 0;
      choices.push_back(c);
      widths.push_back(en.size());
      return c;
    };
    ShmRun run = drive(s, s.scheduler.seed, choose, s.scheduler.bound, true);
    visit(run);
    ++count;
    std::size_t i = choices.size();
    while (i > 0 && choices[i - 1] + 1 >= widths[i - 1]) --i;
    if (i == 0) break;
    prefix.assign(choices.begin(), choices.begin() + static_cast<std::ptrdiff_t>(i));
    ++prefix.back();
  }
  return count;
}

ConsensusVerdict check_consensus_run(const ShmRun& run) {
  ConsensusVerdict v;
  auto fail = [&](bool& flag, const std::string& why) {
    flag = false;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += why;
  };
  std::optional<std::int64_t> agreed;
  int winners = 0;
  for (std::size_t i = 0; i < run.outcomes.size(); ++i) {
    const Pid p = pid(static_cast<int>(i) + 1);
    const auto& o = run.outcomes[i];
    if (!o.finished) {
      if (!run.crashed.count(p) && run.proposals.count(p))
        fail(v.termination, "process " + std::to_string(i + 1) + " did not decide");
      continue;
    }
    if (agreed && *agreed != o.decided)
      fail(v.agreement, "decisions " + std::to_string(*agreed) + " and " +
                            std::to_string(o.decided) + " differ");
    agreed = o.decided;
    bool proposed = false;
    for (const auto& [_, val] : run.proposals) proposed |= val == o.decided;
    if (!proposed)
      fail(v.validity, "decided " + std::to_string(o.decided) + " was never proposed");
    if (o.transfer_ok) ++winners;
    // The balance left after the single successful withdrawal of 2k-q is q.
    if (o.balance_seen != run.election_balance)
      fail(v.winner_identified, "process " + std::to_string(i + 1) + " saw balance " +
                                    std::to_string(o.balance_seen));
    if (o.transfer_ok && o.balance_seen != static_cast<Amount>(i + 1))
      fail(v.winner_identified, "winner " + std::to_string(i + 1) +
                                    " read balance " + std::to_string(o.balance_seen));
    auto it = run.proposals.find(pid(static_cast<int>(o.balance_seen)));
    if (it == run.proposals.end() || it->second != o.decided)
      fail(v.winner_identified, "decision does not match the winner's proposal");
  }
  if (winners > 1) fail(v.agreement, "more than one withdrawal succeeded");
  return v;
}

}  // namespace atx::sim
