#include <gtest/gtest.h>

#include "atx/cli/evaluate.hpp"
#include "atx/cli/sweep.hpp"

namespace atx::cli {
namespace {

sim::Scenario load(const std::string& id) {
  return sim::load_scenario(std::string(ATX_SCENARIO_DIR) + "/" + id + ".json");
}

std::vector<std::string> names(const RunResult& r) {
  std::vector<std::string> out;
  for (const auto& v : r.verdicts) out.push_back(v.name);
  return out;
}

TEST(Evaluate, SharedMemoryVerdicts) {
  const auto r = evaluate(load("fig1_basic"), 1);
  EXPECT_EQ(names(r), (std::vector<std::string>{"linearizable", "monitors", "termination"}));
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.to_json().at("scenario"), "fig1_basic");
}

TEST(Evaluate, ConsensusScenarioAddsConsensusVerdict) {
  const auto r = evaluate(load("fig2_k3"), 5);
  ASSERT_NE(r.find("consensus"), nullptr);
  EXPECT_TRUE(r.pass());
}

TEST(Evaluate, MessagePassingVerdicts) {
  const auto r = evaluate(load("fig4_fairN4"), 3);
  EXPECT_EQ(names(r), (std::vector<std::string>{"relaxed", "monitors", "liveness"}));
  EXPECT_TRUE(r.pass());
  EXPECT_GT(r.metrics.transfers_succeeded, 0u);
  EXPECT_LE(r.metrics.transfers_succeeded, r.metrics.transfers_invoked);
  EXPECT_FALSE(r.metrics.latency.empty());
}

TEST(Evaluate, MonitorsOnlySkipsExactChecks) {
  RunOptions opt;
  opt.check = CheckMode::MonitorsOnly;
  const auto r = evaluate(load("fig4_fairN4"), 3, opt);
  EXPECT_EQ(r.find("relaxed"), nullptr);
  EXPECT_NE(r.find("monitors"), nullptr);
}

// The quorum broadcast costs n SEND, n ACK, n CERT and n*n READY messages.
TEST(Metrics, QuorumMessagesPerTransfer) {
  const auto r = evaluate(load("fig4_fairN4"), 7);
  const std::uint64_t n = 4;
  EXPECT_EQ(r.metrics.total_messages, r.metrics.broadcasts * (3 * n + n * n));
  EXPECT_EQ(r.metrics.messages.at("READY"), r.metrics.broadcasts * n * n);
  EXPECT_EQ(r.metrics.broadcasts, r.metrics.transfers_succeeded);
}

TEST(Metrics, IdealizedIsOneBroadcastPerSuccessfulTransfer) {
  RunOptions opt;
  opt.broadcast = sim::BroadcastMode::Idealized;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = evaluate(load("fig4_fairN4"), seed, opt);
    ASSERT_TRUE(r.pass());
    EXPECT_EQ(r.metrics.broadcasts, r.metrics.transfers_succeeded);
    EXPECT_EQ(r.metrics.messages.size(), 1u);
  }
}

TEST(Metrics, ForgedOwnerIsRejectedAndRunStillPasses) {
  auto s = load("fig4_fairN4");
  s.faults.byzantine[pid(4)] = sim::ByzantineStrategy::ForgeOwner;
  const auto r = evaluate(s, 2);
  EXPECT_TRUE(r.pass());
  EXPECT_GT(r.metrics.rejected_forgeries, 0u);
}

TEST(Baseline, SequencerCrashStallsEveryone) {
  auto s = load("fig4_fairN4");
  s.faults.crashes[pid(1)] = 0;
  RunOptions opt;
  opt.protocol = sim::Protocol::Baseline;
  const auto r = evaluate(s, 1, opt);
  ASSERT_NE(r.find("liveness"), nullptr);
  EXPECT_FALSE(r.find("liveness")->pass);
  EXPECT_FALSE(liveness_failures(r.trace).empty());
}

TEST(Baseline, FaultFreeRunPasses) {
  RunOptions opt;
  opt.protocol = sim::Protocol::Baseline;
  const auto r = evaluate(load("fig4_fairN4"), 4, opt);
  EXPECT_TRUE(r.pass()) << r.to_json().dump();
  EXPECT_GT(r.metrics.messages.at("TO_REQ"), 0u);
}

TEST(Sweep, ParallelMatchesSerial) {
  for (const char* id : {"fig1_fair_n4", "fig4_fairN4"}) {
    const auto s = load(id);
    const auto par = sweep(s, 1, 24);
    const auto ser = sweep_serial(s, 1, 24);
    EXPECT_EQ(par, ser) << id;
    EXPECT_EQ(par.runs, 24u);
    EXPECT_TRUE(par.pass()) << par.first_failure;
  }
}

TEST(Sweep, FailuresAreCollectedInSeedOrder) {
  auto s = load("fig4_byz_doublespend_N7f2");
  s.mutations.skip_seq_check = true;
  RunOptions opt;
  opt.check = CheckMode::MonitorsOnly;
  const auto sum = sweep(s, 1, 6, opt);
  EXPECT_EQ(sum, sweep_serial(s, 1, 6, opt));
  EXPECT_FALSE(sum.pass());
  EXPECT_TRUE(std::is_sorted(sum.failing.begin(), sum.failing.end()));
  EXPECT_GT(sum.verdict_failures.at("monitors"), 0u);
  EXPECT_FALSE(sum.first_failure.empty());
}

TEST(Sweep, ExhaustiveCountsInterleavings) {
  const auto sum = sweep_exhaustive(load("fig2_exhaustive_k2"));
  EXPECT_EQ(sum.runs, 70u);
  EXPECT_TRUE(sum.pass());
  EXPECT_EQ(sum.line(), "fig2_exhaustive_k2: 70/70 interleavings pass");
}

TEST(Sweep, ExhaustiveRejectsMessagePassing) {
  try {
    sweep_exhaustive(load("fig4_fairN4"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Sweep, BadQuorumIsAConfigError) {
  try {
    sim::load_scenario(std::string(ATX_TEST_DATA_DIR) + "/bad_quorum.json").validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

}  // namespace
}  // namespace atx::cli
