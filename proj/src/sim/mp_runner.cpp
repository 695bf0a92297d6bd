#include "atx/sim/mp_runner.hpp"

#include <deque>
#include <memory>
#include <random>

#include "atx/bcast/broadcast.hpp"
#include "atx/mp/byzantine.hpp"
#include "atx/mp/node.hpp"
#include "atx/mp/service.hpp"

namespace atx::sim {

using bcast::Message;
using bcast::MsgType;
using nlohmann::json;

namespace {

class World final : public bcast::Network, public mp::NodeContext {
 public:
  World(const Scenario& s, std::uint64_t seed, Protocol protocol)
      : s_(s),
        protocol_(protocol),
        rng_(seed),
        auth_(s.n, seed ^ 0xa5a5a5a5ull),
        oracle_(s.n),
        procs_(static_cast<std::size_t>(s.n) + 1) {
    s.validate();
    if (protocol == Protocol::Baseline && !s.faults.byzantine.empty())
      throw Error(ErrorCode::ConfigError,
                  "the sequencer baseline runs crash faults only");
    json header = to_json(s);
    header["seed"] = seed;
    header["protocol"] = protocol == Protocol::Broadcast ? "broadcast" : "baseline";
    run_.trace.add(0, "scenario", header);

    mp::NodeConfig cfg{s.q0(), s.mu(), s.deps_count_toward_balance, s.mutations, &auth_};
    eps_.resize(procs_.size());
    nodes_.resize(procs_.size());
    for (int i = 1; i <= s.n; ++i) {
      eps_[static_cast<std::size_t>(i)] = std::make_unique<bcast::Endpoint>(
          i, s.n, s.broadcast.mode, auth_, *this, &oracle_);
      nodes_[static_cast<std::size_t>(i)] =
          std::make_unique<mp::LedgerNode>(pid(i), cfg, *this);
    }
    for (const auto& [p, strategy] : s.faults.byzantine)
      byz_[p] = std::make_unique<mp::ByzantineActor>(
          p, strategy, node(p), ep(p), *this);
    for (const auto& a : s.accounts) {
      if (a.owners.size() < 2) continue;
      auto mode = SequencerMode::Correct;
      if (auto it = s.sequencers.find(a.id); it != s.sequencers.end()) mode = it->second;
      services_[a.id] = std::make_unique<mp::SequenceService>(a.id, a.owners, mode,
                                                              a.balance, auth_);
    }
    order_ = s.q0();
    views_.assign(procs_.size(), s.q0());
  }

  MpRun execute() {
    for (;;) {
      apply_crashes();
      std::vector<int> invokable;
      for (int i = 1; i <= s_.n; ++i) {
        const auto& ps = proc(pid(i));
        if (!ps.crashed && !ps.busy && ps.next < script(pid(i)).size())
          invokable.push_back(i);
      }
      const std::size_t total = invokable.size() + inflight_.size();
      if (total == 0) {
        run_.quiescent = true;
        break;
      }
      if (run_.steps >= s_.step_bound) {
        run_.step_bound_hit = true;
        break;
      }
      ++run_.steps;
      const std::size_t k = std::uniform_int_distribution<std::size_t>(0, total - 1)(rng_);
      if (k < invokable.size()) {
        invoke(pid(invokable[k]));
      } else {
        auto it = inflight_.begin() + static_cast<std::ptrdiff_t>(k - invokable.size());
        Message m = std::move(*it);
        inflight_.erase(it);
        receive(m);
      }
    }
    finish();
    return std::move(run_);
  }

  // Network
  void send(Message m) override {
    const int from = m.from;
    if (from >= 1) {
      auto& ps = proc(pid(m.from));
      if (ps.crashed) return;
      auto lim = s_.faults.crash_after_sends.find(pid(m.from));
      if (lim != s_.faults.crash_after_sends.end() && ps.sends >= lim->second) {
        crash(pid(m.from));
        return;
      }
      ++ps.sends;
    }
    if (m.to >= 1 && proc(pid(m.to)).crashed) return;
    json d{{"to", m.to}, {"type", bcast::to_string(m.type)}};
    if (m.type != MsgType::SeqReq && m.type != MsgType::SeqResp &&
        m.type != MsgType::ToReq && m.type != MsgType::Reject) {
      d["stream"] = bcast::to_string(m.env.stream);
      d["seq"] = m.env.seq;
    }
    run_.trace.add(m.from, "send", std::move(d));
    inflight_.push_back(std::move(m));
    if (from >= 1) {
      auto lim = s_.faults.crash_after_sends.find(pid(from));
      if (lim != s_.faults.crash_after_sends.end() && proc(pid(from)).sends >= lim->second)
        crash(pid(from));
    }
  }

  void record(int node, const char* kind, json data) override {
    run_.trace.add(node, kind, std::move(data));
  }

  // NodeContext
  void broadcast(Pid self, std::string payload) override {
    ep(self).broadcast(std::move(payload));
  }
  void broadcast_account(Pid self, AccountId a, std::uint64_t seq,
                         std::string payload) override {
    ep(self).broadcast_account(a, seq, std::move(payload));
  }
  void request_sequence(Pid self, AccountId a, const TransferRecord& t,
                        const std::set<TransferRecord>& deps) override {
    Message m;
    m.type = MsgType::SeqReq;
    m.from = to_int(self);
    m.to = 0;
    m.body = {{"account", to_int(a)},
              {"record", to_json(t)},
              {"deps", mp::records_to_json(deps)}};
    send(std::move(m));
  }
  void record(Pid self, const char* kind, json data) override {
    record(to_int(self), kind, std::move(data));
  }
  void effect(Pid self, std::uint64_t op_id) override {
    run_.trace.add(to_int(self), "effect", {{"op_id", op_id}});
  }
  void complete(Pid self, std::uint64_t op_id, Response r) override {
    run_.trace.add(to_int(self), "respond",
                   {{"op_id", op_id}, {"response", to_json(r)}, {"t", run_.steps}});
    proc(self).busy = false;
  }

 private:
  struct ProcState {
    std::size_t next = 0;
    bool busy = false;
    bool crashed = false;
    std::uint64_t events = 0;
    std::uint64_t sends = 0;
  };

  ProcState& proc(Pid p) { return procs_.at(static_cast<std::size_t>(to_int(p))); }
  bcast::Endpoint& ep(Pid p) { return *eps_.at(static_cast<std::size_t>(to_int(p))); }
  mp::LedgerNode& node(Pid p) { return *nodes_.at(static_cast<std::size_t>(to_int(p))); }

  const std::vector<ScriptItem>& script(Pid p) const {
    static const std::vector<ScriptItem> kEmpty;
    auto it = s_.scripts.find(p);
    return it == s_.scripts.end() ? kEmpty : it->second;
  }

  void crash(Pid p) {
    auto& ps = proc(p);
    if (ps.crashed) return;
    ps.crashed = true;
    run_.crashed.insert(p);
    run_.trace.add(to_int(p), "crash", {{"t", run_.steps}});
    std::erase_if(inflight_, [&](const Message& m) { return m.to == to_int(p); });
  }

  void apply_crashes() {
    for (int i = 1; i <= s_.n; ++i) {
      const Pid p = pid(i);
      const auto& ps = proc(p);
      if (ps.crashed) continue;
      if (auto it = s_.faults.crashes.find(p);
          it != s_.faults.crashes.end() && run_.steps >= it->second)
        crash(p);
      else if (auto it2 = s_.faults.crash_after_steps.find(p);
               it2 != s_.faults.crash_after_steps.end() && ps.events >= it2->second)
        crash(p);
    }
  }

  void invoke(Pid p) {
    auto& ps = proc(p);
    ++ps.events;
    const ScriptItem& item = script(p).at(ps.next++);
    if (auto it = byz_.find(p); it != byz_.end()) {
      it->second->act(item.op);
      return;
    }
    const std::uint64_t op_id = next_op_++;
    run_.trace.add(to_int(p), "invoke",
                   {{"op_id", op_id}, {"op", to_json(item.op)}, {"t", run_.steps}});
    ps.busy = true;
    if (protocol_ == Protocol::Baseline) {
      baseline_invoke(p, item.op, op_id);
      return;
    }
    if (auto r = node(p).invoke(item.op, op_id)) complete(p, op_id, *r);
  }

  void receive(const Message& m) {
    run_.trace.add(m.to, "recv", {{"from", m.from}, {"type", bcast::to_string(m.type)}});
    if (m.to == 0) {
      serve(m);
      return;
    }
    const Pid to = pid(m.to);
    ++proc(to).events;
    switch (m.type) {
      case MsgType::SeqResp:
        if (auto it = byz_.find(to); it != byz_.end())
          it->second->on_sequence(m.body);
        else
          node(to).on_sequence(m.body);
        return;
      case MsgType::ToReq:
        baseline_order(m);
        return;
      case MsgType::Reject:
        complete(to, m.body.at("op_id").get<std::uint64_t>(), Response::boolean(false));
        return;
      default:
        break;
    }
    for (auto& d : ep(to).handle(m)) {
      run_.trace.add(m.to, "bdeliver",
                     {{"sender", d.sender},
                      {"stream", bcast::to_string(d.stream)},
                      {"seq", d.seq},
                      {"digest", d.digest}});
      if (proc(to).crashed) continue;
      if (protocol_ == Protocol::Baseline)
        baseline_deliver(to, d);
      else
        node(to).on_deliver(d);
    }
  }

  void serve(const Message& m) {
    const AccountId a = account(m.body.at("account").get<int>());
    auto it = services_.find(a);
    if (it == services_.end()) return;
    auto resp = it->second->on_request(pid(m.from), m.body);
    if (!resp) return;
    Message r;
    r.type = MsgType::SeqResp;
    r.from = 0;
    r.to = m.from;
    r.body = std::move(*resp);
    send(std::move(r));
  }

  // Sequencer baseline: process 1 orders every transfer against its own
  // copy of the ledger and broadcasts the ordered ones.
  void baseline_invoke(Pid p, const Operation& op, std::uint64_t op_id) {
    if (op.is_read()) {
      complete(p, op_id, Response::balance(views_[static_cast<std::size_t>(to_int(p))].at(op.source)));
      return;
    }
    Message m;
    m.type = MsgType::ToReq;
    m.from = to_int(p);
    m.to = 1;
    m.body = {{"op_id", op_id}, {"op", to_json(op)}};
    send(std::move(m));
  }

  void baseline_order(const Message& m) {
    const Operation op = operation_from_json(m.body.at("op"));
    const Pid issuer = pid(m.from);
    const Response r = apply_step(order_, issuer, op, s_.mu());
    if (r.ok) {
      json payload{{"issuer", m.from}, {"op_id", m.body.at("op_id")}, {"op", m.body.at("op")}};
      ep(pid(1)).broadcast(payload.dump());
      return;
    }
    Message rej;
    rej.type = MsgType::Reject;
    rej.from = 1;
    rej.to = m.from;
    rej.body = {{"op_id", m.body.at("op_id")}};
    send(std::move(rej));
  }

  void baseline_deliver(Pid to, const bcast::Delivery& d) {
    if (d.stream != bcast::StreamId::sender(pid(1))) return;
    const json payload = json::parse(d.payload);
    const Pid issuer = pid(payload.at("issuer").get<int>());
    const Operation op = operation_from_json(payload.at("op"));
    auto& view = views_[static_cast<std::size_t>(to_int(to))];
    apply_step(view, issuer, op, s_.mu());
    run_.trace.add(to_int(to), "apply",
                   {{"origin", to_int(issuer)},
                    {"record", to_json(TransferRecord{op.source, op.dest, op.amount,
                                                      issuer, d.seq})},
                    {"deps", json::array()}});
    if (issuer == to) {
      const auto id = payload.at("op_id").get<std::uint64_t>();
      effect(to, id);
      complete(to, id, Response::boolean(true));
    }
  }

  void finish() {
    for (int i = 1; i <= s_.n; ++i) {
      const Pid p = pid(i);
      if (proc(p).crashed) continue;
      json stalled = json::array();
      for (const auto& [stream, seq] : ep(p).stalled()) {
        stalled.push_back({bcast::to_string(stream), seq});
        run_.trace.add(i, "stalled", {{"stream", bcast::to_string(stream)}, {"seq", seq}});
      }
      run_.trace.add(i, "audit",
                     {{"to_validate", node(p).to_validate()},
                      {"pending", proc(p).busy},
                      {"stalled", stalled}});
    }
    run_.trace.add(0, "end",
                   {{"steps", run_.steps},
                    {"step_bound_hit", run_.step_bound_hit},
                    {"quiescent", run_.quiescent}});
  }

  const Scenario& s_;
  Protocol protocol_;
  std::mt19937_64 rng_;
  bcast::StubAuthenticator auth_;
  bcast::IdealOracle oracle_;
  std::vector<ProcState> procs_;
  std::vector<std::unique_ptr<bcast::Endpoint>> eps_;
  std::vector<std::unique_ptr<mp::LedgerNode>> nodes_;
  std::map<Pid, std::unique_ptr<mp::ByzantineActor>> byz_;
  std::map<AccountId, std::unique_ptr<mp::SequenceService>> services_;
  std::deque<Message> inflight_;
  LedgerState order_;
  std::vector<LedgerState> views_;
  std::uint64_t next_op_ = 0;
  MpRun run_;
};

}  // namespace

MpRun run_mp(const Scenario& s, std::uint64_t seed, Protocol protocol) {
  World w(s, seed, protocol);
  return w.execute();
}

}  // namespace atx::sim
