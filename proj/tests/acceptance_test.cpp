#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "atx/checker/linearizability.hpp"
#include "atx/cli/evaluate.hpp"
#include "atx/cli/sweep.hpp"
#include "oracle.hpp"

namespace atx {
namespace {

using cli::RunOptions;
using cli::SweepSummary;
using nlohmann::json;

sim::Scenario load(const std::string& id) {
  return sim::load_scenario(std::string(ATX_SCENARIO_DIR) + "/" + id + ".json");
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int n, bool ok, const std::string& text) {
  std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", text.c_str());
  std::fflush(stdout);
  EXPECT_TRUE(ok) << "criterion " << n << ": " << text;
}

std::string fmt(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs", s);
  return buf;
}

bool all_pass(const std::vector<SweepSummary>& sums, std::string& text) {
  bool ok = true;
  for (const auto& s : sums) {
    ok = ok && s.pass();
    text += s.line() + "; ";
    if (!s.pass()) text += "first failure: " + s.first_failure + "; ";
  }
  return ok;
}

// Applied records per benign node, straight from the trace.
struct Applied {
  std::map<int, std::vector<TransferRecord>> by_node;
  std::set<int> benign;
};

Applied applied(const sim::Trace& t) {
  Applied a;
  const json& h = *t.header();
  std::set<int> byz;
  if (h.contains("faults") && h.at("faults").contains("byzantine"))
    for (const auto& [k, _] : h.at("faults").at("byzantine").items()) byz.insert(std::stoi(k));
  for (int p = 1; p <= h.at("n").get<int>(); ++p)
    if (!byz.count(p)) a.benign.insert(p);
  for (const auto& r : t.records())
    if (r.kind == "apply" && a.benign.count(r.node))
      a.by_node[r.node].push_back(sim::record_from_json(r.data.at("record")));
  return a;
}

// A double spend: one benign node applies two records under one (source, seq),
// two benign nodes apply different records under it, or a benign node lets
// an account's applied debits exceed what it ever had.
std::vector<std::string> double_spends(const sim::Trace& t, const sim::Scenario& s) {
  std::vector<std::string> out;
  const auto a = applied(t);
  std::map<std::pair<AccountId, std::uint64_t>, TransferRecord> global;
  for (const auto& [node, recs] : a.by_node) {
    std::set<std::pair<AccountId, std::uint64_t>> seen;
    std::map<AccountId, Amount> bal;
    for (const auto& acc : s.accounts) bal[acc.id] = acc.balance;
    for (const auto& r : recs) {
      const auto key = std::make_pair(r.source, r.counter);
      if (!seen.insert(key).second)
        out.push_back("node " + std::to_string(node) + " applied two records at one slot");
      auto [it, fresh] = global.emplace(key, r);
      if (!fresh && !(it->second == r))
        out.push_back("nodes disagree on a slot of account " + std::to_string(to_int(r.source)));
      bal[r.source] -= r.amount;
      bal[r.dest] += r.amount;
      if (bal[r.source] < 0)
        out.push_back("node " + std::to_string(node) + " overdrew account " +
                      std::to_string(to_int(r.source)));
    }
  }
  return out;
}

TEST(Acceptance, C1_SnapshotLedgerLinearizable) {
  const Clock c;
  std::vector<SweepSummary> sums{cli::sweep_exhaustive(load("fig1_basic")),
                                 cli::sweep_exhaustive(load("fig1_race")),
                                 cli::sweep(load("fig1_fair_n4"), 1, 1000)};
  std::string text;
  bool ok = all_pass(sums, text);
  ok = ok && sums[2].runs >= 1000 && c.seconds() < 60;
  report(1, ok, text + fmt(c.seconds()));
}

TEST(Acceptance, C2_ConsensusFromSharedTransfer) {
  const Clock c;
  std::vector<SweepSummary> sums{cli::sweep_exhaustive(load("fig2_exhaustive_k2")),
                                 cli::sweep(load("fig2_k3"), 1, 1000)};
  std::string text;
  bool ok = all_pass(sums, text);
  ok = ok && sums[0].runs == 70 && c.seconds() < 30;
  report(2, ok, text + fmt(c.seconds()));
}

TEST(Acceptance, C3_SharedTransferFromKConsensus) {
  const Clock c;
  std::vector<SweepSummary> sums;
  std::size_t over_capacity = 0;
  for (const char* id : {"fig3_two_owners", "fig3_three_owners"}) {
    const auto s = load(id);
    sums.push_back(cli::sweep(s, 1, 1000));
    const std::size_t k = s.capacity();
    for (std::uint64_t seed = 1; seed <= 1000; seed += 37) {
      const auto run = sim::run_shm(s, seed);
      over_capacity += run.max_kc_invocations > k;
    }
  }
  std::string text;
  bool ok = all_pass(sums, text);
  ok = ok && over_capacity == 0 && c.seconds() < 120;
  report(3, ok, text + "k-consensus over capacity: " + std::to_string(over_capacity) + "; " +
                    fmt(c.seconds()));
}

TEST(Acceptance, C4_ByzantineRelaxedCorrectness) {
  const Clock c;
  const auto s = load("fig4_byz_doublespend_N7f2");
  const auto sum = cli::sweep(s, 1, 500);
  std::size_t dup = 0;
  for (std::uint64_t seed = 1; seed <= 500; ++seed)
    dup += double_spends(sim::run_mp(s, seed).trace, s).size();
  const bool ok = sum.pass() && dup == 0 && c.seconds() < 300;
  report(4, ok, sum.line() + "; duplicate or overdrawn slots: " + std::to_string(dup) + "; " +
                    fmt(c.seconds()));
}

TEST(Acceptance, C5_Liveness) {
  const Clock c;
  auto fault_free = load("fig4_byz_doublespend_N7f2");
  fault_free.id = "N7_fault_free";
  fault_free.faults = {};
  std::uint64_t runs = 0, ok_runs = 0;
  std::string first;
  RunOptions opt;
  opt.check = cli::CheckMode::MonitorsOnly;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    auto s = fault_free;
    if (seed > 100) {
      s.id = "N7_crash_only";
      std::mt19937_64 rng(seed);
      s.faults.crashes[pid(6)] = rng() % 400;
      if (seed > 200) s.faults.crash_after_sends[pid(7)] = rng() % 60;
    }
    const auto r = cli::evaluate(s, seed, opt);
    ++runs;
    const auto live = r.find("liveness");
    if (live && live->pass) {
      ++ok_runs;
    } else if (first.empty()) {
      first = s.id + " seed " + std::to_string(seed) + ": " + (live ? live->detail : "");
    }
  }
  report(5, ok_runs == runs,
         std::to_string(ok_runs) + "/" + std::to_string(runs) +
             " fault-free and crash-only runs complete every correct operation" +
             (first.empty() ? "" : "; " + first) + "; " + fmt(c.seconds()));
}

TEST(Acceptance, C6_CompromisedAccountContained) {
  const Clock c;
  const auto s = load("k7_compromised_account");
  std::size_t spends = 0, runs_with_healthy = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto run = sim::run_mp(s, seed);
    spends += double_spends(run.trace, s).size();
    std::map<int, std::size_t> responded;
    for (const auto& r : run.trace.records())
      if (r.kind == "respond") ++responded[r.node];
    bool healthy = false;
    for (int p = 1; p <= 7; ++p)
      healthy = healthy || responded[p] == s.scripts.at(pid(p)).size();
    runs_with_healthy += healthy;
  }
  report(6, spends == 0 && runs_with_healthy == 200,
         "double spends at benign nodes: " + std::to_string(spends) +
             "; runs where a healthy account completes its script: " +
             std::to_string(runs_with_healthy) + "/200; " + fmt(c.seconds()));
}

TEST(Acceptance, C7_MessageAccounting) {
  const Clock c;
  const auto s = load("baseline_compare");
  bool ok = true;
  std::string text;

  RunOptions ideal;
  ideal.broadcast = sim::BroadcastMode::Idealized;
  std::uint64_t bcasts = 0, succeeded = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto r = cli::evaluate(s, seed, ideal);
    ok = ok && r.pass();
    for (const auto& rec : r.trace.records()) {
      bcasts += rec.kind == "bcast";
      if (rec.kind == "respond" && rec.data.at("response").contains("bool"))
        succeeded += rec.data.at("response").at("bool").get<bool>();
    }
  }
  ok = ok && bcasts == succeeded;
  text += "idealized: " + std::to_string(bcasts) + " broadcasts for " +
          std::to_string(succeeded) + " successful transfers; ";

  const std::uint64_t n = static_cast<std::uint64_t>(s.n);
  const std::uint64_t analytic = n + n + n + n * n;
  std::uint64_t sends = 0, quorum_bcasts = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = cli::evaluate(s, seed);
    ok = ok && r.pass();
    for (const auto& rec : r.trace.records()) {
      sends += rec.kind == "send";
      quorum_bcasts += rec.kind == "bcast";
    }
  }
  ok = ok && quorum_bcasts > 0 && sends == analytic * quorum_bcasts;
  text += "quorum N=10: " + std::to_string(sends) + " messages for " +
          std::to_string(quorum_bcasts) + " transfers (analytic " + std::to_string(analytic) +
          " each); ";

  RunOptions base;
  base.protocol = sim::Protocol::Baseline;
  const auto q = cli::sweep(s, 1, 20);
  const auto b = cli::sweep(s, 1, 20, base);
  ok = ok && q.pass() && b.pass() && b.transfers_succeeded > 0;
  const double per_q = double(q.total_messages) / double(q.transfers_succeeded);
  const double per_b = double(b.total_messages) / double(b.transfers_succeeded);
  const auto path = std::filesystem::path(ATX_ACCEPTANCE_OUT) / "baseline_report.json";
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path) << json{{"scenario", s.id},
                              {"broadcast", q.to_json()},
                              {"baseline", b.to_json()},
                              {"messages_per_transfer", {{"broadcast", per_q}, {"baseline", per_b}}}}
                             .dump(2);
  ok = ok && std::filesystem::exists(path);
  char buf[128];
  std::snprintf(buf, sizeof buf, "baseline report: %.1f vs %.1f messages per transfer; ", per_q,
                per_b);
  report(7, ok, text + buf + fmt(c.seconds()));
}

TEST(Acceptance, C8_CheckerSelfValidation) {
  const Clock c;
  std::mt19937_64 rng(2024);
  std::size_t agree = 0, total = 10'000, lin = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const auto r = testing::random_history(rng, 8);
    const bool expect = testing::PermutationOracle(r.h, r.q0, r.mu).linearizable();
    const bool got = checker::check_linearizable(r.h, r.q0, r.mu).pass;
    agree += expect == got;
    lin += got;
  }

  auto race = load("fig1_race");
  race.mutations.skip_balance_check = true;
  const auto shm_balance = cli::sweep_exhaustive(race);

  auto byz = load("fig4_byz_doublespend_N7f2");
  byz.mutations.skip_balance_check = true;
  const auto mp_balance = cli::sweep(byz, 1, 50);
  byz.mutations = {};
  byz.mutations.skip_seq_check = true;
  const auto mp_seq = cli::sweep(byz, 1, 50);

  const bool balance_caught = !shm_balance.pass() || !mp_balance.pass();
  const bool seq_caught = !mp_seq.pass();
  const bool ok = agree == total && balance_caught && seq_caught;
  report(8, ok,
         std::to_string(agree) + "/" + std::to_string(total) + " histories agree (" +
             std::to_string(lin) + " linearizable); balance mutation fails " +
             std::to_string(shm_balance.runs - shm_balance.passed) + "/" +
             std::to_string(shm_balance.runs) + " fig1_race interleavings and " +
             std::to_string(mp_balance.runs - mp_balance.passed) + "/50 N7f2 seeds; seq mutation fails " +
             std::to_string(mp_seq.runs - mp_seq.passed) + "/50 N7f2 seeds; " + fmt(c.seconds()));
}

}  // namespace
}  // namespace atx
