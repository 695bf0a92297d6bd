#include "atx/mp/message.hpp"

#include "atx/sim/scenario.hpp"

namespace atx::mp {

using nlohmann::json;

json records_to_json(const std::set<TransferRecord>& rs) {
  json j = json::array();
  for (const auto& r : rs) j.push_back(sim::to_json(r));
  return j;
}

std::set<TransferRecord> records_from_json(const json& j) {
  std::set<TransferRecord> out;
  for (const auto& r : j) out.insert(sim::record_from_json(r));
  return out;
}

namespace {

json body(const TransferMsg& m) {
  return {{"source", to_int(m.t.source)},
          {"dest", to_int(m.t.dest)},
          {"amount", m.t.amount},
          {"issuer", to_int(m.t.issuer)},
          {"seq", m.t.counter},
          {"deps", records_to_json(m.deps)}};
}

}  // namespace

std::string TransferMsg::cert_bytes() const { return "seqcert|" + body(*this).dump(); }

std::string TransferMsg::encode() const {
  json j = body(*this);
  if (!cert.empty()) {
    j["cert"] = json::array();
    for (const auto& s : cert) j["cert"].push_back({s.signer, s.tag});
  }
  return j.dump();
}

std::optional<TransferMsg> TransferMsg::decode(const std::string& bytes) {
  try {
    json j = json::parse(bytes);
    TransferMsg m;
    m.t = {account(j.at("source").get<int>()), account(j.at("dest").get<int>()),
           j.at("amount").get<Amount>(), pid(j.at("issuer").get<int>()),
           j.at("seq").get<std::uint64_t>()};
    if (m.t.amount < 0) return std::nullopt;
    m.deps = records_from_json(j.at("deps"));
    if (j.contains("cert"))
      for (const auto& s : j.at("cert"))
        m.cert.push_back({s.at(0).get<int>(), s.at(1).get<std::uint64_t>()});
    return m;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::size_t owner_quorum(std::size_t owners) { return 2 * owners / 3 + 1; }

}  // namespace atx::mp
