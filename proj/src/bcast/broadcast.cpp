#include "atx/bcast/broadcast.hpp"

namespace atx::bcast {

using nlohmann::json;

std::string to_string(StreamId s) {
  return (s.kind == StreamId::Kind::Sender ? "p" : "a") + std::to_string(s.id);
}

StreamId stream_from_string(const std::string& s) {
  if (s.size() < 2 || (s[0] != 'p' && s[0] != 'a'))
    throw Error(ErrorCode::InvalidArgument, "bad stream id " + s);
  return {s[0] == 'p' ? StreamId::Kind::Sender : StreamId::Kind::Account,
          std::stoi(s.substr(1))};
}

std::string Envelope::signing_bytes() const {
  return "env|" + std::to_string(sender) + "|" + bcast::to_string(stream) + "|" +
         std::to_string(seq) + "|" + std::to_string(digest());
}

std::string ack_bytes(StreamId stream, std::uint64_t seq, Digest d) {
  return "ack|" + to_string(stream) + "|" + std::to_string(seq) + "|" +
         std::to_string(d);
}

const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::Send: return "SEND";
    case MsgType::Ack: return "ACK";
    case MsgType::Cert: return "CERT";
    case MsgType::Ready: return "READY";
    case MsgType::Raw: return "RAW";
    case MsgType::Ideal: return "IDEAL";
    case MsgType::SeqReq: return "SEQ_REQ";
    case MsgType::SeqResp: return "SEQ_RESP";
    case MsgType::ToReq: return "TO_REQ";
    case MsgType::Reject: return "REJECT";
  }
  return "?";
}

std::size_t quorum_size(int n) { return static_cast<std::size_t>(2 * n / 3 + 1); }

bool IdealOracle::submit(Network& net, const Envelope& env) {
  auto [it, fresh] = chosen_.emplace(std::make_pair(env.stream, env.seq), env.digest());
  if (!fresh) return false;
  for (int i = 1; i <= n_; ++i) {
    Message m;
    m.type = MsgType::Ideal;
    m.from = env.sender;
    m.to = i;
    m.env = env;
    net.send(std::move(m));
  }
  return true;
}

Endpoint::Endpoint(int self, int n, BroadcastMode mode, const Authenticator& auth,
                   Network& net, IdealOracle* oracle)
    : self_(self), n_(n), mode_(mode), auth_(auth), net_(net), oracle_(oracle) {
  if (mode == BroadcastMode::Idealized && !oracle)
    throw Error(ErrorCode::InvalidArgument, "idealized mode needs an oracle");
}

Envelope Endpoint::make(StreamId stream, std::uint64_t seq, std::string payload) const {
  Envelope env{self_, stream, seq, std::move(payload), {}};
  env.auth = auth_.sign(self_, env.signing_bytes());
  return env;
}

void Endpoint::send_all(const Message& proto) {
  for (int i = 1; i <= n_; ++i) {
    Message m = proto;
    m.to = i;
    net_.send(std::move(m));
  }
}

void Endpoint::start(const Envelope& env, const std::vector<int>& targets) {
  net_.record(self_, "bcast",
              {{"stream", to_string(env.stream)},
               {"seq", env.seq},
               {"digest", env.digest()},
               {"payload", env.payload}});
  switch (mode_) {
    case BroadcastMode::Idealized:
      oracle_->submit(net_, env);
      return;
    case BroadcastMode::Quorum:
      outgoing_[{{env.stream, env.seq}, env.digest()}].env = env;
      break;
    case BroadcastMode::Raw:
      break;
  }
  for (int to : targets) {
    Message m;
    m.type = mode_ == BroadcastMode::Quorum ? MsgType::Send : MsgType::Raw;
    m.from = self_;
    m.to = to;
    m.env = env;
    net_.send(std::move(m));
  }
}

std::uint64_t Endpoint::broadcast(std::string payload) {
  const std::uint64_t seq = take_own_seq();
  std::vector<int> all;
  for (int i = 1; i <= n_; ++i) all.push_back(i);
  start(make(StreamId::sender(pid(self_)), seq, std::move(payload)), all);
  return seq;
}

void Endpoint::broadcast_account(AccountId a, std::uint64_t seq, std::string payload) {
  std::vector<int> all;
  for (int i = 1; i <= n_; ++i) all.push_back(i);
  start(make(StreamId::of(a), seq, std::move(payload)), all);
}

void Endpoint::equivocate(StreamId stream, std::uint64_t seq, std::string a,
                          std::string b) {
  std::vector<int> ga{self_}, gb;
  int placed = 0;
  for (int i = 1; i <= n_; ++i) {
    if (i == self_) continue;
    (placed++ < (n_ - 1) / 2 ? ga : gb).push_back(i);
  }
  start(make(stream, seq, std::move(a)), ga);
  start(make(stream, seq, std::move(b)), gb);
}

std::vector<Delivery> Endpoint::handle(const Message& m) {
  std::vector<Delivery> out;
  if (behavior_ == Behavior::Silent) return out;
  switch (m.type) {
    case MsgType::Send:
      on_send(m.env);
      break;
    case MsgType::Ack:
      on_ack(m);
      break;
    case MsgType::Cert:
    case MsgType::Ready:
      if (cert_valid(m.env, m.cert)) {
        on_certified(m.env, m.cert);
        release(m.env.stream, out);
      }
      break;
    case MsgType::Raw:
      if (auth_.verify(m.env.auth, m.env.signing_bytes()) &&
          m.env.auth.signer == m.env.sender) {
        accept(m.env);
        release(m.env.stream, out);
      }
      break;
    case MsgType::Ideal:
      accept(m.env);
      release(m.env.stream, out);
      break;
    default:
      break;
  }
  return out;
}

void Endpoint::on_send(const Envelope& env) {
  if (!auth_.verify(env.auth, env.signing_bytes()) || env.auth.signer != env.sender)
    return;
  if (env.stream.kind == StreamId::Kind::Sender && env.stream.id != env.sender)
    return;
  if (behavior_ == Behavior::Byzantine) {
    ack(env);
    return;
  }
  const Key key{env.stream, env.seq};
  if (auto it = acked_.find(key); it != acked_.end()) {
    if (it->second != env.digest()) note_conflict(key, it->second, env.digest());
    return;
  }
  if (env.stream.kind == StreamId::Kind::Account &&
      delivered_upto(env.stream) + 1 != env.seq) {
    auto& w = waiting_[key];
    for (const auto& e : w)
      if (e.digest() == env.digest()) return;
    w.push_back(env);
    return;
  }
  acked_[key] = env.digest();
  ack(env);
}

void Endpoint::ack(const Envelope& env) {
  Message m;
  m.type = MsgType::Ack;
  m.from = self_;
  m.to = env.sender;
  m.env.sender = env.sender;
  m.env.stream = env.stream;
  m.env.seq = env.seq;
  m.digest = env.digest();
  m.sig = auth_.sign(self_, ack_bytes(env.stream, env.seq, m.digest));
  net_.send(std::move(m));
}

void Endpoint::on_ack(const Message& m) {
  auto it = outgoing_.find({{m.env.stream, m.env.seq}, m.digest});
  if (it == outgoing_.end()) return;
  if (m.sig.signer != m.from ||
      !auth_.verify(m.sig, ack_bytes(m.env.stream, m.env.seq, m.digest)))
    return;
  auto& out = it->second;
  out.acks.emplace(m.from, m.sig);
  if (out.certified || out.acks.size() < quorum_size(n_)) return;
  out.certified = true;
  Message c;
  c.type = MsgType::Cert;
  c.from = self_;
  c.env = out.env;
  for (const auto& [_, sig] : out.acks) c.cert.push_back(sig);
  send_all(c);
}

bool Endpoint::cert_valid(const Envelope& env, const std::vector<Signature>& cert) const {
  if (!auth_.verify(env.auth, env.signing_bytes()) || env.auth.signer != env.sender)
    return false;
  const std::string bytes = ack_bytes(env.stream, env.seq, env.digest());
  std::set<int> signers;
  for (const auto& sig : cert)
    if (sig.signer >= 1 && sig.signer <= n_ && auth_.verify(sig, bytes))
      signers.insert(sig.signer);
  return signers.size() >= quorum_size(n_);
}

void Endpoint::on_certified(const Envelope& env, const std::vector<Signature>& cert) {
  const Key key{env.stream, env.seq};
  if (auto it = accepted_.find(key); it != accepted_.end()) {
    if (it->second.digest() != env.digest())
      note_conflict(key, it->second.digest(), env.digest());
    return;
  }
  accepted_.emplace(key, env);
  if (behavior_ != Behavior::Correct) return;
  Message r;
  r.type = MsgType::Ready;
  r.from = self_;
  r.env = env;
  r.cert = cert;
  send_all(r);
}

void Endpoint::accept(const Envelope& env) {
  const Key key{env.stream, env.seq};
  auto [it, fresh] = accepted_.emplace(key, env);
  if (!fresh && it->second.digest() != env.digest())
    note_conflict(key, it->second.digest(), env.digest());
}

void Endpoint::note_conflict(const Key& k, Digest first, Digest second) {
  if (!conflict_seen_.insert({k.first, k.second, second}).second) return;
  conflicts_.push_back({k.first, k.second, first, second});
  net_.record(self_, "conflict",
              {{"stream", to_string(k.first)},
               {"seq", k.second},
               {"digests", {first, second}}});
}

std::uint64_t Endpoint::delivered_upto(StreamId s) const {
  auto it = next_.find(s);
  return it == next_.end() ? 0 : it->second - 1;
}

void Endpoint::release(StreamId s, std::vector<Delivery>& out) {
  auto& next = next_.try_emplace(s, 1).first->second;
  bool moved = false;
  for (auto it = accepted_.find({s, next}); it != accepted_.end();
       it = accepted_.find({s, next})) {
    const Envelope& e = it->second;
    out.push_back({e.sender, e.stream, e.seq, e.payload, e.digest()});
    ++next;
    moved = true;
  }
  if (!moved || s.kind != StreamId::Kind::Account || behavior_ != Behavior::Correct)
    return;
  auto w = waiting_.find({s, next});
  if (w == waiting_.end()) return;
  auto parked = std::move(w->second);
  waiting_.erase(w);
  for (const auto& env : parked) on_send(env);
}

std::vector<std::pair<StreamId, std::uint64_t>> Endpoint::stalled() const {
  std::set<std::pair<StreamId, std::uint64_t>> out;
  for (const auto& c : conflicts_)
    if (c.stream.kind == StreamId::Kind::Account && delivered_upto(c.stream) < c.seq)
      out.insert({c.stream, c.seq});
  return {out.begin(), out.end()};
}

}  // namespace atx::bcast
