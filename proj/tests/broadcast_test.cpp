#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "atx/bcast/broadcast.hpp"

namespace atx::bcast {
namespace {

using sim::BroadcastMode;

// Messages sit in a bag and are delivered in a seeded random order.
class Bag final : public Network {
 public:
  void send(Message m) override {
    if (crashed.count(m.from)) return;
    if (send_limit.count(m.from) && sent[m.from]++ >= send_limit[m.from]) {
      crashed.insert(m.from);
      return;
    }
    ++count[m.type];
    msgs.push_back(std::move(m));
  }
  void record(int, const char*, nlohmann::json) override {}

  std::vector<Message> msgs;
  std::map<MsgType, int> count;
  std::set<int> crashed;
  std::map<int, int> send_limit;
  std::map<int, int> sent;
};

struct Cluster {
  Cluster(int n, BroadcastMode mode, std::uint64_t seed)
      : n(n), auth(n), oracle(n), rng(seed), delivered(static_cast<std::size_t>(n) + 1) {
    for (int i = 1; i <= n; ++i)
      eps.push_back(std::make_unique<Endpoint>(i, n, mode, auth, net, &oracle));
  }

  Endpoint& ep(int i) { return *eps.at(static_cast<std::size_t>(i - 1)); }

  void run() {
    while (!net.msgs.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, net.msgs.size() - 1);
      const std::size_t i = pick(rng);
      Message m = std::move(net.msgs[i]);
      net.msgs.erase(net.msgs.begin() + static_cast<std::ptrdiff_t>(i));
      if (net.crashed.count(m.to)) continue;
      for (auto& d : ep(m.to).handle(m)) delivered[static_cast<std::size_t>(m.to)].push_back(d);
    }
  }

  int n;
  StubAuthenticator auth;
  IdealOracle oracle;
  Bag net;
  std::mt19937_64 rng;
  std::vector<std::unique_ptr<Endpoint>> eps;
  std::vector<std::vector<Delivery>> delivered;
};

TEST(Auth, StubTagsVerifyOnlyForSignerAndBytes) {
  StubAuthenticator a(3);
  const auto s = a.sign(2, "hello");
  EXPECT_TRUE(a.verify(s, "hello"));
  EXPECT_FALSE(a.verify(s, "hellp"));
  EXPECT_FALSE(a.verify({3, s.tag}, "hello"));
  EXPECT_FALSE(a.verify({9, s.tag}, "hello"));
}

TEST(Auth, DigestIsFnv1a) {
  EXPECT_EQ(digest(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(digest("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Stream, StringRoundTrip) {
  EXPECT_EQ(to_string(StreamId::sender(pid(3))), "p3");
  EXPECT_EQ(to_string(StreamId::of(account(10))), "a10");
  EXPECT_EQ(stream_from_string("a10"), StreamId::of(account(10)));
  EXPECT_THROW(stream_from_string("x1"), Error);
}

TEST(Quorum, Size) {
  EXPECT_EQ(quorum_size(4), 3u);
  EXPECT_EQ(quorum_size(7), 5u);
  EXPECT_EQ(quorum_size(10), 7u);
}

// Any two quorums share more than f processes, hence a correct one, which
// never acknowledges two payloads for one slot.
TEST(Quorum, IntersectionAboveF) {
  for (int n = 4; n <= 13; ++n) {
    const int f = (n - 1) / 3;
    const auto q = static_cast<int>(quorum_size(n));
    EXPECT_GT(2 * q - n, f) << "n=" << n;
    EXPECT_LE(q, n - f) << "n=" << n;
  }
}

class Modes : public ::testing::TestWithParam<BroadcastMode> {};

TEST_P(Modes, CorrectSenderDeliversEverywhereInOrder) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Cluster c(4, GetParam(), seed);
    for (int k = 0; k < 3; ++k) c.ep(2).broadcast("m" + std::to_string(k));
    c.run();
    for (int i = 1; i <= 4; ++i) {
      const auto& d = c.delivered[static_cast<std::size_t>(i)];
      ASSERT_EQ(d.size(), 3u) << "node " << i;
      for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(d[k].seq, k + 1);
        EXPECT_EQ(d[k].payload, "m" + std::to_string(k));
        EXPECT_EQ(d[k].sender, 2);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, Modes,
                         ::testing::Values(BroadcastMode::Idealized, BroadcastMode::Quorum,
                                           BroadcastMode::Raw));

TEST(QuorumBroadcast, MessageCountPerBroadcast) {
  for (int n : {4, 7, 10}) {
    Cluster c(n, BroadcastMode::Quorum, 3);
    c.ep(1).broadcast("x");
    c.run();
    EXPECT_EQ(c.net.count[MsgType::Send], n);
    EXPECT_EQ(c.net.count[MsgType::Ack], n);
    EXPECT_EQ(c.net.count[MsgType::Cert], n);
    EXPECT_EQ(c.net.count[MsgType::Ready], n * n);
  }
}

TEST(IdealBroadcast, OneMessagePerReceiver) {
  Cluster c(4, BroadcastMode::Idealized, 1);
  c.ep(1).broadcast("x");
  c.run();
  EXPECT_EQ(c.net.count[MsgType::Ideal], 4);
  EXPECT_EQ(c.net.msgs.size(), 0u);
}

std::map<std::uint64_t, std::set<Digest>> per_seq(const std::vector<std::vector<Delivery>>& all,
                                                  const std::set<int>& benign) {
  std::map<std::uint64_t, std::set<Digest>> out;
  for (int i : benign)
    for (const auto& d : all[static_cast<std::size_t>(i)]) out[d.seq].insert(d.digest);
  return out;
}

TEST(QuorumBroadcast, EquivocatingSenderNeverSplitsBenignNodes) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Cluster c(4, BroadcastMode::Quorum, seed);
    c.ep(4).set_behavior(Endpoint::Behavior::Byzantine);
    for (int k = 1; k <= 4; ++k) c.ep(4).broadcast("ok" + std::to_string(k));
    c.ep(4).equivocate(StreamId::sender(pid(4)), c.ep(4).take_own_seq(), "left", "right");
    c.run();
    for (const auto& [seq, ds] : per_seq(c.delivered, {1, 2, 3}))
      EXPECT_EQ(ds.size(), 1u) << "seed " << seed << " seq " << seq;
  }
}

TEST(RawBroadcast, EquivocationSplitsNodes) {
  Cluster c(4, BroadcastMode::Raw, 1);
  c.ep(4).equivocate(StreamId::sender(pid(4)), c.ep(4).take_own_seq(), "left", "right");
  c.run();
  EXPECT_EQ(per_seq(c.delivered, {1, 2, 3})[1].size(), 2u);
}

// Two compromised owners push different payloads under one account slot.
// With five correct nodes one payload always gathers a quorum, never both.
TEST(AccountOrder, ConflictingSlotDeliversExactlyOne) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Cluster c(7, BroadcastMode::Quorum, seed);
    c.ep(6).set_behavior(Endpoint::Behavior::Byzantine);
    c.ep(7).set_behavior(Endpoint::Behavior::Byzantine);
    c.ep(6).broadcast_account(account(9), 1, "pay-a");
    c.ep(7).broadcast_account(account(9), 1, "pay-b");
    c.run();
    const auto ds = per_seq(c.delivered, {1, 2, 3, 4, 5});
    ASSERT_EQ(ds.size(), 1u) << "seed " << seed;
    EXPECT_EQ(ds.begin()->second.size(), 1u) << "seed " << seed;
  }
}

TEST(AccountOrder, OutOfOrderSendsStillDeliverInOrder) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Cluster c(4, BroadcastMode::Quorum, seed);
    c.ep(1).broadcast_account(account(5), 2, "second");
    c.ep(1).broadcast_account(account(5), 1, "first");
    c.ep(1).broadcast_account(account(5), 3, "third");
    c.run();
    for (int i = 1; i <= 4; ++i) {
      const auto& d = c.delivered[static_cast<std::size_t>(i)];
      ASSERT_EQ(d.size(), 3u);
      EXPECT_EQ(d[0].payload, "first");
      EXPECT_EQ(d[1].payload, "second");
      EXPECT_EQ(d[2].payload, "third");
    }
  }
}

TEST(QuorumBroadcast, ForgedEnvelopeIgnored) {
  Cluster c(4, BroadcastMode::Quorum, 1);
  Message m;
  m.type = MsgType::Send;
  m.from = 3;
  m.to = 1;
  m.env = {2, StreamId::sender(pid(2)), 1, "fake", c.auth.sign(3, "whatever")};
  c.net.send(m);
  c.run();
  EXPECT_EQ(c.net.count[MsgType::Ack], 0);
}

// Crash the sender after each possible number of its own sends: the
// correct processes deliver all together or not at all.
TEST(QuorumBroadcast, SenderCrashSweepAgreement) {
  const int n = 4;
  const int total_sender_msgs = n + 1 + n + n;  // SEND, own ACK, CERT, READY
  for (int limit = 0; limit <= total_sender_msgs; ++limit)
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Cluster c(n, BroadcastMode::Quorum, seed);
      c.net.send_limit[1] = limit;
      c.ep(1).broadcast("x");
      c.run();
      std::set<std::size_t> sizes;
      for (int i = 2; i <= n; ++i) sizes.insert(c.delivered[static_cast<std::size_t>(i)].size());
      EXPECT_EQ(sizes.size(), 1u) << "limit " << limit << " seed " << seed;
      if (limit == total_sender_msgs) {
        EXPECT_EQ(*sizes.begin(), 1u);
      }
    }
}

}  // namespace
}  // namespace atx::bcast
