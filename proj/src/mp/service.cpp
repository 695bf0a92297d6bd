#include "atx/mp/service.hpp"

namespace atx::mp {

using nlohmann::json;

SequenceService::SequenceService(AccountId a, std::set<Pid> owners,
                                 sim::SequencerMode mode, Amount initial,
                                 const bcast::Authenticator& auth)
    : a_(a), owners_(std::move(owners)), mode_(mode), auth_(auth) {
  q0_.balances[a] = initial;
}

json SequenceService::certify(const TransferRecord& t) const {
  TransferMsg m{t, deps_, {}};
  const std::string bytes = m.cert_bytes();
  json sigs = json::array();
  for (Pid o : owners_) {
    const auto s = auth_.sign(to_int(o), bytes);
    sigs.push_back({s.signer, s.tag});
  }
  return {{"ok", true},
          {"record", sim::to_json(t)},
          {"deps", records_to_json(deps_)},
          {"cert", sigs}};
}

std::optional<json> SequenceService::on_request(Pid from, const json& req) {
  if (mode_ == sim::SequencerMode::Stall || !owners_.count(from)) return std::nullopt;
  TransferRecord t = sim::record_from_json(req.at("record"));
  if (t.source != a_ || t.issuer != from) return std::nullopt;
  for (const auto& d : records_from_json(req.at("deps")))
    if (d.dest == a_) deps_.insert(d);
  ++requests_;

  if (mode_ == sim::SequencerMode::Equivocate) {
    t.counter = (requests_ + 1) / 2;
    next_ = std::max(next_, t.counter);
    return certify(t);
  }

  std::set<TransferRecord> view = deps_;
  view.insert(outputs_.begin(), outputs_.end());
  // Dependencies may credit other accounts' records; only a_ matters here.
  Amount bal = q0_.at(a_);
  for (const auto& r : view) {
    if (r.dest == a_) bal = checked_add(bal, r.amount);
    if (r.source == a_) bal = checked_sub(bal, r.amount);
  }
  if (bal < t.amount) return json{{"ok", false}};
  t.counter = ++next_;
  outputs_.insert(t);
  return certify(t);
}

}  // namespace atx::mp
