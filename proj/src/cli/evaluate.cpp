#include "atx/cli/evaluate.hpp"

#include <set>

#include "atx/checker/linearizability.hpp"
#include "atx/checker/monitors.hpp"
#include "atx/checker/trace_view.hpp"
#include "atx/sim/shm_runner.hpp"

namespace atx::cli {

using nlohmann::json;

Metrics metrics_of(const sim::Trace& t) {
  Metrics m;
  std::map<std::uint64_t, std::uint64_t> invoked;
  std::set<std::uint64_t> transfers;
  std::set<TransferRecord> delivered;
  for (const auto& r : t.records()) {
    if (r.kind == "send") {
      ++m.messages[r.data.at("type").get<std::string>()];
      ++m.total_messages;
    } else if (r.kind == "bcast") {
      ++m.broadcasts;
    } else if (r.kind == "invoke" && r.data.contains("op_id")) {
      const auto id = r.data.at("op_id").get<std::uint64_t>();
      invoked[id] = r.step;
      if (sim::operation_from_json(r.data.at("op")).is_transfer()) {
        ++m.transfers_invoked;
        transfers.insert(id);
      }
    } else if (r.kind == "respond" && r.data.contains("op_id")) {
      const auto id = r.data.at("op_id").get<std::uint64_t>();
      if (auto it = invoked.find(id); it != invoked.end()) {
        m.latency.push_back(r.step - it->second);
        invoked.erase(it);
      }
      if (transfers.count(id) && sim::response_from_json(r.data.at("response")).ok)
        ++m.transfers_succeeded;
    } else if (r.kind == "apply") {
      ++m.applies;
      delivered.insert(sim::record_from_json(r.data.at("record")));
    } else if (r.kind == "reject") {
      ++m.rejected;
      if (r.data.value("reason", std::string{}) == "owner") ++m.rejected_forgeries;
    } else if (r.kind == "end") {
      m.steps = r.data.value("steps", std::uint64_t{0});
    }
  }
  m.stalled_ops = invoked.size();
  m.delivered_transfers = delivered.size();
  return m;
}

json to_json(const Metrics& m) {
  json lat = json::object();
  if (!m.latency.empty()) {
    std::uint64_t sum = 0, mx = 0;
    for (auto v : m.latency) {
      sum += v;
      mx = std::max(mx, v);
    }
    lat = {{"count", m.latency.size()},
           {"mean", static_cast<double>(sum) / static_cast<double>(m.latency.size())},
           {"max", mx}};
  }
  return {{"messages", m.messages},
          {"total_messages", m.total_messages},
          {"broadcasts", m.broadcasts},
          {"transfers_invoked", m.transfers_invoked},
          {"transfers_succeeded", m.transfers_succeeded},
          {"delivered_transfers", m.delivered_transfers},
          {"applies", m.applies},
          {"latency", lat},
          {"stalled_ops", m.stalled_ops},
          {"rejected", m.rejected},
          {"rejected_forgeries", m.rejected_forgeries},
          {"steps", m.steps}};
}

bool RunResult::pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

const Verdict* RunResult::find(const std::string& name) const {
  for (const auto& v : verdicts)
    if (v.name == name) return &v;
  return nullptr;
}

json RunResult::to_json() const {
  json vs = json::object();
  for (const auto& v : verdicts) {
    json e{{"pass", v.pass}};
    if (!v.detail.empty()) e["detail"] = v.detail;
    vs[v.name] = e;
  }
  return {{"scenario", scenario_id},
          {"seed", seed},
          {"pass", pass()},
          {"verdicts", vs},
          {"metrics", cli::to_json(metrics)}};
}

sim::Scenario apply_options(sim::Scenario s, const RunOptions& opt) {
  if (opt.broadcast && s.model == sim::ModelKind::MessagePassing)
    s.broadcast.mode = *opt.broadcast;
  return s;
}

std::vector<std::string> liveness_failures(const sim::Trace& t) {
  const auto v = checker::TraceView::of(t);
  std::vector<std::string> out;
  if (v.step_bound_hit) out.push_back("step bound reached before quiescence");
  const auto ops = checker::traced_ops(t);
  for (int i = 1; i <= v.scenario.n; ++i) {
    const Pid p = pid(i);
    if (!v.correct(p)) continue;
    auto it = v.scenario.scripts.find(p);
    const std::size_t expected = it == v.scenario.scripts.end() ? 0 : it->second.size();
    std::size_t invoked = 0;
    bool exempt = false;
    for (const auto& op : ops) {
      if (op.process != p) continue;
      ++invoked;
      if (op.complete()) continue;
      auto seqr = v.scenario.sequencers.find(op.op.source);
      if (op.op.is_transfer() && seqr != v.scenario.sequencers.end() &&
          seqr->second != sim::SequencerMode::Correct) {
        exempt = true;
        continue;
      }
      out.push_back("process " + std::to_string(i) + " never completed " +
                    describe(op.op));
    }
    if (!exempt && invoked < expected)
      out.push_back("process " + std::to_string(i) + " invoked " +
                    std::to_string(invoked) + " of " + std::to_string(expected) +
                    " operations");
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
  return s;
}

Verdict monitor_verdict(const sim::Trace& t) {
  Verdict v{"monitors", true, ""};
  std::vector<std::string> lines;
  for (const auto& m : checker::monitors(t)) lines.push_back(m.monitor + ": " + m.detail);
  v.pass = lines.empty();
  v.detail = join(lines);
  return v;
}

std::vector<Verdict> check_shm(const sim::ShmRun& run, const sim::Scenario& s,
                               const RunOptions& opt) {
  std::vector<Verdict> out;
  if (s.algorithm == sim::Algorithm::TransferConsensus) {
    const auto c = sim::check_consensus_run(run);
    out.push_back({"consensus", c.pass(), c.detail});
  } else if (opt.check == CheckMode::Exact) {
    const auto l = checker::check_linearizable(run.history, s.q0(), s.mu(), opt.limits);
    out.push_back({"linearizable", l.pass, l.detail});
  }
  out.push_back(monitor_verdict(run.trace));
  const bool crashes = !s.faults.crashes.empty() || !s.faults.crash_after_steps.empty();
  if (!crashes) {
    Verdict term{"termination", run.all_finished && !run.step_bound_hit, ""};
    if (!term.pass) term.detail = "some process did not finish its script";
    out.push_back(term);
  }
  return out;
}

}  // namespace

std::vector<Verdict> check_trace(const sim::Trace& t, const RunOptions& opt) {
  std::vector<Verdict> out;
  if (opt.check == CheckMode::Exact) {
    checker::RelaxedOptions ro;
    ro.limits = opt.limits;
    const auto r = checker::check_relaxed(t, ro);
    out.push_back({"relaxed", r.pass, r.detail});
  }
  out.push_back(monitor_verdict(t));
  const auto live = liveness_failures(t);
  out.push_back({"liveness", live.empty(), join(live)});
  return out;
}

std::vector<Verdict> check_shm_run(const sim::ShmRun& run, const sim::Scenario& s,
                                   const RunOptions& opt) {
  return check_shm(run, s, opt);
}

RunResult evaluate(const sim::Scenario& base, std::uint64_t seed, const RunOptions& opt) {
  const sim::Scenario s = apply_options(base, opt);
  RunResult r;
  r.scenario_id = s.id;
  r.seed = seed;
  if (s.model == sim::ModelKind::SharedMemory) {
    auto run = sim::run_shm(s, seed);
    r.verdicts = check_shm(run, s, opt);
    r.trace = std::move(run.trace);
  } else {
    auto run = sim::run_mp(s, seed, opt.protocol);
    r.verdicts = check_trace(run.trace, opt);
    r.trace = std::move(run.trace);
  }
  r.metrics = metrics_of(r.trace);
  return r;
}

}  // namespace atx::cli
