#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace atx::sim {

struct TraceRecord {
  std::uint64_t step = 0;
  int node = 0;
  std::string kind;
  nlohmann::json data;
};

// Ordered event log of one run. `step` is the record's position, so steps
// are strictly increasing and double as history timestamps.
class Trace {
 public:
  std::uint64_t add(int node, std::string kind, nlohmann::json data = {});

  const std::vector<TraceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const TraceRecord& operator[](std::size_t i) const { return records_[i]; }

  // The "scenario" header record, if present.
  const nlohmann::json* header() const;

  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;
  void save(const std::filesystem::path& path) const;
  static Trace read_jsonl(std::istream& in);

  nlohmann::json verdicts;  // filled in after checking, not part of the log

 private:
  std::vector<TraceRecord> records_;
};

}  // namespace atx::sim
