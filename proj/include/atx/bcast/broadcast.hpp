#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "atx/bcast/auth.hpp"
#include "atx/core.hpp"
#include "atx/sim/scenario.hpp"
#include "json.hpp"

namespace atx::bcast {

using sim::BroadcastMode;

// A broadcast stream: the messages of one sender, or the messages tagged
// with one account (account order).
struct StreamId {
  enum class Kind { Sender, Account };
  Kind kind = Kind::Sender;
  int id = 0;

  static StreamId sender(Pid p) { return {Kind::Sender, to_int(p)}; }
  static StreamId of(AccountId a) { return {Kind::Account, to_int(a)}; }
  auto operator<=>(const StreamId&) const = default;
};

std::string to_string(StreamId s);
StreamId stream_from_string(const std::string& s);

struct Envelope {
  int sender = 0;
  StreamId stream;
  std::uint64_t seq = 0;
  std::string payload;
  Signature auth;

  Digest digest() const { return bcast::digest(payload); }
  std::string signing_bytes() const;
};

std::string ack_bytes(StreamId stream, std::uint64_t seq, Digest d);

enum class MsgType {
  Send,
  Ack,
  Cert,
  Ready,
  Raw,
  Ideal,
  SeqReq,
  SeqResp,
  ToReq,
  Reject,
};

const char* to_string(MsgType t);

struct Message {
  MsgType type = MsgType::Send;
  int from = 0;
  int to = 0;
  Envelope env;                 // Send, Cert, Ready, Raw, Ideal
  Digest digest = 0;            // Ack
  Signature sig;                // Ack
  std::vector<Signature> cert;  // Cert, Ready
  nlohmann::json body;          // sequencing service and baseline traffic
};

struct Delivery {
  int sender = 0;
  StreamId stream;
  std::uint64_t seq = 0;
  std::string payload;
  Digest digest = 0;
};

// What the endpoints need from the simulated network.
class Network {
 public:
  virtual ~Network() = default;
  virtual void send(Message m) = 0;
  virtual void record(int node, const char* kind, nlohmann::json data) = 0;
};

// Idealized secure broadcast: the first payload submitted for a
// (stream, seq) is the only one ever delivered, to everyone.
class IdealOracle {
 public:
  explicit IdealOracle(int n) : n_(n) {}
  bool submit(Network& net, const Envelope& env);

 private:
  int n_;
  std::map<std::pair<StreamId, std::uint64_t>, Digest> chosen_;
};

std::size_t quorum_size(int n);

// Per-process broadcast endpoint. Deliveries are released in sequence
// order per stream. In quorum mode a message is delivered once a
// certificate of more than 2n/3 acknowledgments is seen, and every correct
// process relays the certificate once (READY) so that a crashed sender
// cannot leave correct processes split.
class Endpoint {
 public:
  enum class Behavior { Correct, Byzantine, Silent };

  Endpoint(int self, int n, BroadcastMode mode, const Authenticator& auth,
           Network& net, IdealOracle* oracle);

  void set_behavior(Behavior b) { behavior_ = b; }
  Behavior behavior() const { return behavior_; }

  // Next message on this process's own stream; returns its sequence number.
  std::uint64_t broadcast(std::string payload);
  // Account-order message with a certified sequence number.
  void broadcast_account(AccountId a, std::uint64_t seq, std::string payload);
  // Same (stream, seq), payload `a` to the lower half of the processes
  // (and to self), `b` to the rest.
  void equivocate(StreamId stream, std::uint64_t seq, std::string a,
                  std::string b);
  std::uint64_t next_own_seq() const { return own_seq_ + 1; }
  std::uint64_t take_own_seq() { return ++own_seq_; }

  std::vector<Delivery> handle(const Message& m);

  struct Conflict {
    StreamId stream;
    std::uint64_t seq;
    Digest first, second;
  };
  const std::vector<Conflict>& conflicts() const { return conflicts_; }
  // Account streams blocked at a sequence number that saw conflicting
  // messages.
  std::vector<std::pair<StreamId, std::uint64_t>> stalled() const;
  std::uint64_t delivered_upto(StreamId s) const;

 private:
  using Key = std::pair<StreamId, std::uint64_t>;

  Envelope make(StreamId stream, std::uint64_t seq, std::string payload) const;
  void send_all(const Message& proto);
  void start(const Envelope& env, const std::vector<int>& targets);
  bool cert_valid(const Envelope& env, const std::vector<Signature>& cert) const;
  void on_send(const Envelope& env);
  void ack(const Envelope& env);
  void on_ack(const Message& m);
  void on_certified(const Envelope& env, const std::vector<Signature>& cert);
  void accept(const Envelope& env);
  void note_conflict(const Key& k, Digest first, Digest second);
  void release(StreamId s, std::vector<Delivery>& out);

  int self_;
  int n_;
  BroadcastMode mode_;
  const Authenticator& auth_;
  Network& net_;
  IdealOracle* oracle_;
  Behavior behavior_ = Behavior::Correct;
  std::uint64_t own_seq_ = 0;

  struct Outgoing {
    Envelope env;
    std::map<int, Signature> acks;
    bool certified = false;
  };
  std::map<std::pair<Key, Digest>, Outgoing> outgoing_;
  std::map<Key, Digest> acked_;
  std::map<Key, std::vector<Envelope>> waiting_;  // account order: not yet ackable
  std::map<Key, Envelope> accepted_;
  std::map<StreamId, std::uint64_t> next_;  // next seq to deliver
  std::set<std::tuple<StreamId, std::uint64_t, Digest>> conflict_seen_;
  std::vector<Conflict> conflicts_;
};

}  // namespace atx::bcast
