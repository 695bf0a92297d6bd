#include "atx/mp/node.hpp"

namespace atx::mp {

using nlohmann::json;

namespace {

const std::set<TransferRecord> kNone;

}  // namespace

LedgerNode::LedgerNode(Pid self, NodeConfig cfg, NodeContext& ctx)
    : self_(self), cfg_(std::move(cfg)), ctx_(ctx) {}

bool LedgerNode::shared(AccountId a) const {
  auto it = cfg_.mu.find(a);
  return it != cfg_.mu.end() && it->second.size() > 1;
}

Amount LedgerNode::balance(AccountId a, const std::set<TransferRecord>& extra) const {
  std::set<TransferRecord> all = hist(a);
  all.insert(extra.begin(), extra.end());
  return balance_of(a, all, cfg_.q0);
}

Amount LedgerNode::read(AccountId a) const {
  require_account(cfg_.q0, a);
  std::set<TransferRecord> mine;
  for (const auto& [_, d] : deps_) mine.insert(d.begin(), d.end());
  return balance(a, mine);
}

std::uint64_t LedgerNode::seq(AccountId a) const {
  auto it = seq_.find(a);
  return it == seq_.end() ? 0 : it->second;
}

std::uint64_t LedgerNode::rec(bcast::StreamId s) const {
  auto it = rec_.find(s);
  return it == rec_.end() ? 0 : it->second;
}

const std::set<TransferRecord>& LedgerNode::hist(AccountId a) const {
  auto it = hist_.find(a);
  return it == hist_.end() ? kNone : it->second;
}

const std::set<TransferRecord>& LedgerNode::deps(AccountId a) const {
  auto it = deps_.find(a);
  return it == deps_.end() ? kNone : it->second;
}

std::optional<Response> LedgerNode::invoke(const Operation& op, std::uint64_t op_id) {
  if (op.is_read()) return Response::balance(read(op.source));
  require_account(cfg_.q0, op.source);
  require_account(cfg_.q0, op.dest);
  if (!owns(cfg_.mu, self_, op.source))
    throw Error(ErrorCode::NotOwner, "process " + std::to_string(to_int(self_)) +
                                         " does not own account " +
                                         std::to_string(to_int(op.source)));
  if (pending_)
    throw Error(ErrorCode::PendingOperation,
                "process " + std::to_string(to_int(self_)) + " has a transfer in flight");

  const AccountId a = op.source;
  if (shared(a)) {
    pending_ = Pending{op_id, op, std::nullopt};
    ctx_.request_sequence(self_, a, {a, op.dest, op.amount, self_, 0}, deps(a));
    return std::nullopt;
  }
  if (balance(a, deps(a)) < op.amount) return Response::boolean(false);
  TransferMsg m;
  m.t = {a, op.dest, op.amount, self_, seq(a) + 1};
  m.deps = deps(a);
  pending_ = Pending{op_id, op, m.t};
  deps_[a].clear();
  ctx_.broadcast(self_, m.encode());
  return std::nullopt;
}

void LedgerNode::on_sequence(const json& resp) {
  if (!pending_ || pending_->record) return;
  if (!resp.value("ok", false)) {
    const auto id = pending_->op_id;
    pending_.reset();
    ctx_.complete(self_, id, Response::boolean(false));
    return;
  }
  TransferMsg m;
  m.t = sim::record_from_json(resp.at("record"));
  m.deps = records_from_json(resp.at("deps"));
  for (const auto& s : resp.at("cert"))
    m.cert.push_back({s.at(0).get<int>(), s.at(1).get<std::uint64_t>()});
  pending_->record = m.t;
  ctx_.broadcast_account(self_, m.t.source, m.t.counter, m.encode());
}

void LedgerNode::on_deliver(const bcast::Delivery& d) {
  auto msg = TransferMsg::decode(d.payload);
  if (!msg) {
    ctx_.record(self_, "drop", {{"origin", d.sender}, {"reason", "malformed"}});
    return;
  }
  auto& r = rec_[d.stream];
  if (cfg_.mutations.skip_seq_check || msg->t.counter == r + 1) {
    ++r;
    to_validate_.push_back({pid(d.sender), d.stream, std::move(*msg)});
    validate();
  } else {
    ctx_.record(self_, "drop",
                {{"origin", d.sender},
                 {"record", sim::to_json(msg->t)},
                 {"reason", "rec"}});
  }
}

LedgerNode::Check LedgerNode::valid(const Entry& e, std::string& why) const {
  const TransferRecord& t = e.msg.t;
  const AccountId c = t.source;
  if (!cfg_.q0.contains(c) || !cfg_.q0.contains(t.dest)) {
    why = "unknown account";
    return Check::Malicious;
  }
  if (!owns(cfg_.mu, e.origin, c) || t.issuer != e.origin) {
    why = "owner";
    return Check::Malicious;
  }
  if (shared(c)) {
    if (e.stream != bcast::StreamId::of(c)) {
      why = "stream";
      return Check::Malicious;
    }
    const std::string bytes = e.msg.cert_bytes();
    const auto& owners = cfg_.mu.at(c);
    std::set<int> signers;
    for (const auto& s : e.msg.cert)
      if (owners.count(pid(s.signer)) && cfg_.auth->verify(s, bytes))
        signers.insert(s.signer);
    if (signers.size() < owner_quorum(owners.size())) {
      why = "cert";
      return Check::Malicious;
    }
  } else if (e.stream != bcast::StreamId::sender(e.origin)) {
    why = "stream";
    return Check::Malicious;
  }
  if (!cfg_.mutations.skip_seq_check && t.counter != seq(c) + 1) return Check::Wait;
  for (const auto& r : e.msg.deps) {
    if (r.dest != c || !hist(r.source).count(r)) return Check::Wait;
  }
  if (!cfg_.mutations.skip_balance_check) {
    const Amount have = cfg_.deps_count_toward_balance ? balance(c, e.msg.deps)
                                                       : balance(c, kNone);
    if (have < t.amount) return Check::Wait;
  }
  return Check::Valid;
}

void LedgerNode::apply(const Entry& e) {
  const TransferRecord& t = e.msg.t;
  auto& h = hist_[t.source];
  h.insert(e.msg.deps.begin(), e.msg.deps.end());
  h.insert(t);
  auto& s = seq_[t.source];
  s = std::max(s, t.counter);
  if (owns(cfg_.mu, self_, t.dest)) deps_[t.dest].insert(t);
  ctx_.record(self_, "apply",
              {{"origin", to_int(e.origin)},
               {"record", sim::to_json(t)},
               {"deps", records_to_json(e.msg.deps)}});
  if (e.origin == self_ && pending_ && pending_->record == t) {
    const auto id = pending_->op_id;
    pending_.reset();
    ctx_.effect(self_, id);
    ctx_.complete(self_, id, Response::boolean(true));
  }
}

void LedgerNode::validate() {
  for (bool progress = true; progress;) {
    progress = false;
    for (auto it = to_validate_.begin(); it != to_validate_.end(); ++it) {
      std::string why;
      const Check c = valid(*it, why);
      if (c == Check::Wait) continue;
      Entry e = std::move(*it);
      to_validate_.erase(it);
      if (c == Check::Valid) {
        apply(e);
      } else {
        ctx_.record(self_, "reject",
                    {{"origin", to_int(e.origin)},
                     {"record", sim::to_json(e.msg.t)},
                     {"reason", why}});
      }
      progress = true;
      break;
    }
  }
}

}  // namespace atx::mp
