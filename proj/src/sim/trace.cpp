#include "atx/sim/trace.hpp"

#include <fstream>
#include <sstream>

#include "atx/core.hpp"

namespace atx::sim {

using nlohmann::json;

std::uint64_t Trace::add(int node, std::string kind, json data) {
  const std::uint64_t step = records_.size();
  records_.push_back({step, node, std::move(kind), std::move(data)});
  return step;
}

const json* Trace::header() const {
  if (records_.empty() || records_.front().kind != "scenario") return nullptr;
  return &records_.front().data;
}

void Trace::write_jsonl(std::ostream& out) const {
  for (const auto& r : records_) {
    json j{{"step", r.step}, {"node", r.node}, {"kind", r.kind}, {"data", r.data}};
    out << j.dump() << '\n';
  }
}

std::string Trace::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

void Trace::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  write_jsonl(out);
}

Trace Trace::read_jsonl(std::istream& in) {
  Trace t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    TraceRecord r{j.at("step").get<std::uint64_t>(), j.at("node").get<int>(),
                  j.at("kind").get<std::string>(), j.value("data", json{})};
    if (r.step != t.records_.size())
      throw Error(ErrorCode::InvalidArgument, "trace steps are not consecutive");
    t.records_.push_back(std::move(r));
  }
  return t;
}

}  // namespace atx::sim
