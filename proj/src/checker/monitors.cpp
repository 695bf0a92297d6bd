#include "atx/checker/monitors.hpp"

#include <map>
#include <set>

#include "atx/checker/trace_view.hpp"

namespace atx::checker {

using nlohmann::json;

namespace {

using Seqd = std::pair<std::uint64_t, std::uint64_t>;  // (seq, digest)

template <class T>
bool is_prefix(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() > b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] == b[i])) return false;
  return true;
}

// Each sequence must be a prefix of the longest one.
template <class T>
std::optional<std::pair<int, int>> prefix_conflict(const std::map<int, std::vector<T>>& seqs) {
  int longest = -1;
  std::size_t len = 0;
  for (const auto& [node, s] : seqs)
    if (longest < 0 || s.size() > len) {
      longest = node;
      len = s.size();
    }
  for (const auto& [node, s] : seqs)
    if (!is_prefix(s, seqs.at(longest))) return std::make_pair(node, longest);
  return std::nullopt;
}

void broadcast_monitors(const sim::Trace& t, const TraceView& v,
                        std::vector<Violation>& out) {
  // stream -> node -> delivered (seq, digest) in order
  std::map<std::string, std::map<int, std::vector<Seqd>>> delivered;
  std::map<std::tuple<int, std::string, std::uint64_t>, int> times;
  std::map<std::pair<std::string, std::uint64_t>, std::set<std::uint64_t>> sent;
  std::map<int, std::vector<std::pair<std::string, std::uint64_t>>> own_bcasts;

  for (const auto& r : t.records()) {
    if (r.kind == "bcast") {
      const std::string stream = r.data.at("stream");
      const auto seq = r.data.at("seq").get<std::uint64_t>();
      sent[{stream, seq}].insert(r.data.at("digest").get<std::uint64_t>());
      own_bcasts[r.node].push_back({stream, seq});
    } else if (r.kind == "bdeliver" && v.benign(pid(r.node))) {
      const std::string stream = r.data.at("stream");
      const auto seq = r.data.at("seq").get<std::uint64_t>();
      const auto dig = r.data.at("digest").get<std::uint64_t>();
      if (++times[{r.node, stream, seq}] == 2)
        out.push_back({"integrity", "process " + std::to_string(r.node) +
                                        " delivered " + stream + "#" +
                                        std::to_string(seq) + " twice"});
      const int sender = r.data.at("sender").get<int>();
      if (v.benign(pid(sender)) && !sent[{stream, seq}].count(dig))
        out.push_back({"integrity", "process " + std::to_string(r.node) +
                                        " delivered " + stream + "#" +
                                        std::to_string(seq) +
                                        " that its benign sender never broadcast"});
      delivered[stream][r.node].push_back({seq, dig});
    }
  }

  for (const auto& [stream, per_node] : delivered)
    if (auto c = prefix_conflict(per_node))
      out.push_back({"source_order", "stream " + stream + ": processes " +
                                         std::to_string(c->first) + " and " +
                                         std::to_string(c->second) +
                                         " delivered diverging sequences"});

  if (!v.quiescent) return;
  const int n = v.scenario.n;
  for (const auto& [stream, per_node] : delivered) {
    std::set<Seqd> any;
    for (const auto& [node, s] : per_node)
      if (v.correct(pid(node))) any.insert(s.begin(), s.end());
    for (int i = 1; i <= n; ++i) {
      if (!v.correct(pid(i))) continue;
      auto it = per_node.find(i);
      std::set<Seqd> mine;
      if (it != per_node.end()) mine.insert(it->second.begin(), it->second.end());
      for (const auto& m : any)
        if (!mine.count(m)) {
          out.push_back({"agreement", "process " + std::to_string(i) + " never delivered " +
                                          stream + "#" + std::to_string(m.first)});
          break;
        }
    }
  }
  for (const auto& [node, list] : own_bcasts) {
    if (!v.correct(pid(node))) continue;
    for (const auto& [stream, seq] : list) {
      // An account stream may block on a conflict the sender did not cause.
      if (stream[0] == 'a') {
        const AccountId a = account(std::stoi(stream.substr(1)));
        auto it = v.scenario.sequencers.find(a);
        if (it != v.scenario.sequencers.end() && it->second != sim::SequencerMode::Correct)
          continue;
      }
      bool got = false;
      if (auto s = delivered.find(stream); s != delivered.end())
        if (auto mine = s->second.find(node); mine != s->second.end())
          for (const auto& d : mine->second) got |= d.first == seq;
      if (!got)
        out.push_back({"validity", "process " + std::to_string(node) +
                                       " never delivered its own " + stream + "#" +
                                       std::to_string(seq)});
    }
  }
}

void transfer_monitors(const sim::Trace& t, const TraceView& v,
                       std::vector<Violation>& out) {
  const LedgerState q0 = v.scenario.q0();
  const Amount total = q0.total();
  std::map<AccountId, std::map<int, std::vector<TransferRecord>>> by_source;
  std::map<int, std::set<TransferRecord>> everything;
  std::set<std::string> reported;
  auto once = [&](const std::string& monitor, const std::string& detail) {
    if (reported.insert(monitor + detail).second) out.push_back({monitor, detail});
  };

  for (const auto& r : t.records()) {
    if (r.kind != "apply" || !v.benign(pid(r.node))) continue;
    const TransferRecord rec = sim::record_from_json(r.data.at("record"));
    auto deps = r.data.contains("deps") ? r.data.at("deps") : json::array();
    auto& seqs = by_source[rec.source][r.node];
    const std::string where = "process " + std::to_string(r.node) + ", account " +
                              std::to_string(to_int(rec.source));
    for (const auto& prev : seqs)
      if (v.protocol != "baseline" && prev.counter == rec.counter)
        once("seq_discipline", where + " applied two records with seq " +
                                   std::to_string(rec.counter));
    if (v.protocol != "baseline" && rec.counter != seqs.size() + 1)
      once("seq_discipline", where + " applied seq " + std::to_string(rec.counter) +
                                 " as its record number " +
                                 std::to_string(seqs.size() + 1));
    seqs.push_back(rec);

    for (const auto& d : deps) everything[r.node].insert(sim::record_from_json(d));
    everything[r.node].insert(rec);
    if (q0.contains(rec.source) && balance_of(rec.source, everything[r.node], q0) < 0)
      once("non_negative", where + " balance negative after applying seq " +
                               std::to_string(rec.counter));
  }

  for (const auto& [src, per_node] : by_source)
    if (auto c = prefix_conflict(per_node))
      out.push_back({"prefix_agreement",
                     "account " + std::to_string(to_int(src)) + ": processes " +
                         std::to_string(c->first) + " and " + std::to_string(c->second) +
                         " applied diverging transfer sequences"});

  for (const auto& [node, recs] : everything) {
    Amount sum = 0;
    for (const auto& [a, _] : q0.balances) sum += balance_of(a, recs, q0);
    if (sum != total)
      out.push_back({"conservation", "process " + std::to_string(node) +
                                         " holds total " + std::to_string(sum) +
                                         ", expected " + std::to_string(total)});
  }
}

void shm_monitors(const sim::Trace& t, std::vector<Violation>& out) {
  for (const auto& r : t.records()) {
    if (r.kind == "kc_stats") {
      const auto k = r.data.at("k").get<std::size_t>();
      const auto m = r.data.at("max_invocations").get<std::size_t>();
      if (m > k)
        out.push_back({"kc_capacity", "a consensus object was invoked " +
                                          std::to_string(m) + " times, k=" +
                                          std::to_string(k)});
      if (!r.data.at("prefix_consistent").get<bool>())
        out.push_back({"kc_prefix", "processes learned diverging decision sequences"});
    } else if (r.kind == "audit" && r.data.contains("negative_snapshots")) {
      const auto m = r.data.at("negative_snapshots").get<std::size_t>();
      if (m > 0)
        out.push_back({"non_negative", std::to_string(m) +
                                           " snapshots showed a negative balance"});
    }
  }
}

}  // namespace

std::vector<Violation> monitors(const sim::Trace& t) {
  const TraceView v = TraceView::of(t);
  std::vector<Violation> out;
  if (v.scenario.model == sim::ModelKind::SharedMemory) {
    shm_monitors(t, out);
    return out;
  }
  broadcast_monitors(t, v, out);
  transfer_monitors(t, v, out);
  return out;
}

}  // namespace atx::checker
