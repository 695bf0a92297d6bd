#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "atx/bcast/auth.hpp"
#include "atx/core.hpp"
#include "json.hpp"

namespace atx::mp {

// [(source, dest, amount, seq), deps] plus, for shared accounts, the
// sequencing certificate. The record's counter is the sequence number.
struct TransferMsg {
  TransferRecord t;
  std::set<TransferRecord> deps;
  std::vector<bcast::Signature> cert;

  std::string encode() const;
  // What the sequencing certificate signs: everything but the certificate.
  std::string cert_bytes() const;
  static std::optional<TransferMsg> decode(const std::string& bytes);
};

nlohmann::json records_to_json(const std::set<TransferRecord>& rs);
std::set<TransferRecord> records_from_json(const nlohmann::json& j);

std::size_t owner_quorum(std::size_t owners);

}  // namespace atx::mp
