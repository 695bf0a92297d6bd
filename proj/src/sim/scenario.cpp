#include "atx/sim/scenario.hpp"

#include <algorithm>
#include <fstream>

namespace atx::sim {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::ConfigError, msg);
}

template <class E, std::size_t N>
E parse_enum(const std::string& text,
             const std::array<std::pair<const char*, E>, N>& table,
             const char* what) {
  for (const auto& [name, value] : table)
    if (text == name) return value;
  config_error(std::string("unknown ") + what + ": " + text);
}

template <class E, std::size_t N>
const char* enum_name(E v, const std::array<std::pair<const char*, E>, N>& table) {
  for (const auto& [name, value] : table)
    if (v == value) return name;
  return "?";
}

constexpr std::array<std::pair<const char*, Algorithm>, 5> kAlgorithms{{
    {"atomic_ledger", Algorithm::AtomicLedger},
    {"snapshot_ledger", Algorithm::SnapshotLedger},
    {"consensus_ledger", Algorithm::ConsensusLedger},
    {"transfer_consensus", Algorithm::TransferConsensus},
    {"broadcast_ledger", Algorithm::BroadcastLedger},
}};

constexpr std::array<std::pair<const char*, ByzantineStrategy>, 6> kStrategies{{
    {"equivocate", ByzantineStrategy::Equivocate},
    {"double_spend_race", ByzantineStrategy::DoubleSpendRace},
    {"bad_seq", ByzantineStrategy::BadSeq},
    {"forge_owner", ByzantineStrategy::ForgeOwner},
    {"stale_deps", ByzantineStrategy::StaleDeps},
    {"silent", ByzantineStrategy::Silent},
}};

constexpr std::array<std::pair<const char*, BroadcastMode>, 3> kModes{{
    {"idealized", BroadcastMode::Idealized},
    {"quorum", BroadcastMode::Quorum},
    {"raw", BroadcastMode::Raw},
}};

constexpr std::array<std::pair<const char*, Policy>, 3> kPolicies{{
    {"fair_random", Policy::FairRandom},
    {"exhaustive", Policy::Exhaustive},
    {"scripted", Policy::Scripted},
}};

constexpr std::array<std::pair<const char*, SequencerMode>, 3> kSequencers{{
    {"correct", SequencerMode::Correct},
    {"equivocate", SequencerMode::Equivocate},
    {"stall", SequencerMode::Stall},
}};

int parse_key(const std::string& key) {
  try {
    std::size_t used = 0;
    int v = std::stoi(key, &used);
    if (used != key.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    config_error("expected an integer key, got '" + key + "'");
  }
}

std::map<Pid, std::uint64_t> parse_pid_counts(const json& j) {
  std::map<Pid, std::uint64_t> out;
  for (const auto& [k, v] : j.items()) out[pid(parse_key(k))] = v.get<std::uint64_t>();
  return out;
}

json pid_counts_json(const std::map<Pid, std::uint64_t>& m) {
  json j = json::object();
  for (const auto& [p, v] : m) j[std::to_string(to_int(p))] = v;
  return j;
}

}  // namespace

const char* to_string(Algorithm a) { return enum_name(a, kAlgorithms); }
const char* to_string(ByzantineStrategy s) { return enum_name(s, kStrategies); }
const char* to_string(BroadcastMode m) { return enum_name(m, kModes); }
const char* to_string(Policy p) { return enum_name(p, kPolicies); }
const char* to_string(SequencerMode m) { return enum_name(m, kSequencers); }

json to_json(const Operation& op) {
  if (op.is_read()) return {{"read", to_int(op.source)}};
  return {{"transfer", {to_int(op.source), to_int(op.dest), op.amount}}};
}

Operation operation_from_json(const json& j) {
  if (j.contains("read")) return Operation::read(account(j.at("read").get<int>()));
  const auto& t = j.at("transfer");
  return Operation::transfer(account(t.at(0).get<int>()),
                             account(t.at(1).get<int>()), t.at(2).get<Amount>());
}

json to_json(const Response& r) {
  if (r.kind == Response::Kind::Bool) return {{"bool", r.ok}};
  return {{"balance", r.value}};
}

Response response_from_json(const json& j) {
  if (j.contains("bool")) return Response::boolean(j.at("bool").get<bool>());
  return Response::balance(j.at("balance").get<Amount>());
}

json to_json(const TransferRecord& t) {
  return json::array({to_int(t.source), to_int(t.dest), t.amount,
                      to_int(t.issuer), t.counter});
}

TransferRecord record_from_json(const json& j) {
  return TransferRecord{account(j.at(0).get<int>()), account(j.at(1).get<int>()),
                        j.at(2).get<Amount>(), pid(j.at(3).get<int>()),
                        j.at(4).get<std::uint64_t>()};
}

LedgerState Scenario::q0() const {
  LedgerState s;
  for (const auto& a : accounts) s.balances[a.id] = a.balance;
  return s;
}

OwnershipMap Scenario::mu() const {
  OwnershipMap m;
  for (const auto& a : accounts) m[a.id] = a.owners;
  return m;
}

std::size_t Scenario::max_owners() const {
  std::size_t m = 0;
  for (const auto& a : accounts) m = std::max(m, a.owners.size());
  return m;
}

bool Scenario::shared(AccountId a) const {
  for (const auto& acc : accounts)
    if (acc.id == a) return acc.owners.size() > 1;
  return false;
}

void Scenario::validate() const {
  if (n < 1) config_error("n must be >= 1");
  auto in_range = [&](Pid p) { return to_int(p) >= 1 && to_int(p) <= n; };
  std::set<AccountId> ids;
  for (const auto& a : accounts) {
    if (!ids.insert(a.id).second)
      config_error("duplicate account " + std::to_string(to_int(a.id)));
    if (a.balance < 0) config_error("negative initial balance");
    for (Pid p : a.owners)
      if (!in_range(p))
        config_error("owner " + std::to_string(to_int(p)) + " outside 1..n");
  }
  for (const auto& [p, script] : scripts) {
    if (!in_range(p))
      config_error("script for process " + std::to_string(to_int(p)) +
                   " outside 1..n");
    for (const auto& item : script) {
      if (item.kind == ScriptItem::Kind::Propose) {
        if (algorithm != Algorithm::TransferConsensus)
          config_error("propose is only valid for transfer_consensus");
        continue;
      }
      if (algorithm == Algorithm::TransferConsensus)
        config_error("transfer_consensus scripts hold proposals only");
      if (!ids.count(item.op.source) || !ids.count(item.op.dest))
        config_error("script references unknown account in " +
                     describe(item.op));
    }
  }

  for (const auto& [p, _] : faults.byzantine) {
    if (!in_range(p)) config_error("byzantine process outside 1..n");
    if (faults.crashes_at_all(p))
      config_error("process " + std::to_string(to_int(p)) +
                   " is both crashed and byzantine");
  }
  for (const auto* m : {&faults.crashes, &faults.crash_after_steps,
                        &faults.crash_after_sends})
    for (const auto& [p, _] : *m)
      if (!in_range(p)) config_error("crashed process outside 1..n");

  if (scheduler.policy == Policy::Scripted)
    for (int p : scheduler.steps)
      if (p < 1 || p > n) config_error("scripted step names unknown process");

  if (model == ModelKind::SharedMemory) {
    if (algorithm == Algorithm::BroadcastLedger)
      config_error("broadcast_ledger runs in the message_passing model");
    if (!faults.byzantine.empty())
      config_error("byzantine processes exist only in message passing");
    if (algorithm == Algorithm::SnapshotLedger && max_owners() > 1)
      config_error("snapshot_ledger requires single-owner accounts");
    if (algorithm == Algorithm::ConsensusLedger && capacity() < max_owners())
      config_error("k is smaller than the largest owner set");
    if (algorithm == Algorithm::TransferConsensus) {
      if (k < 1) config_error("transfer_consensus needs k >= 1");
      if (static_cast<std::size_t>(n) != k)
        config_error("transfer_consensus runs exactly k processes");
      if (election_ledger != Algorithm::AtomicLedger &&
          election_ledger != Algorithm::ConsensusLedger)
        config_error("election ledger must be atomic_ledger or consensus_ledger");
    }
  } else {
    if (algorithm != Algorithm::BroadcastLedger)
      config_error("message_passing runs broadcast_ledger");
    if (scheduler.policy != Policy::FairRandom)
      config_error("message_passing runs under the fair_random scheduler");
    std::map<Pid, int> sole;
    for (const auto& a : accounts)
      if (a.owners.size() == 1 && ++sole[*a.owners.begin()] > 1)
        config_error("process " + std::to_string(to_int(*a.owners.begin())) +
                     " owns more than one single-owner account");
    if (broadcast.f < 0) config_error("f must be >= 0");
    if (broadcast.mode == BroadcastMode::Quorum) {
      if (n <= 3 * broadcast.f)
        config_error("quorum broadcast requires N > 3f (N=" + std::to_string(n) +
                     ", f=" + std::to_string(broadcast.f) + ")");
      std::set<Pid> faulty;
      for (const auto& [p, _] : faults.byzantine) faulty.insert(p);
      for (const auto* m : {&faults.crashes, &faults.crash_after_steps,
                            &faults.crash_after_sends})
        for (const auto& [p, _] : *m) faulty.insert(p);
      if (faulty.size() > static_cast<std::size_t>(broadcast.f))
        config_error("more faulty processes than f");
    }
    for (const auto& [p, script] : scripts) {
      if (is_byzantine(p)) continue;
      for (const auto& item : script)
        if (item.op.is_transfer() && !owns(mu(), p, item.op.source))
          config_error("process " + std::to_string(to_int(p)) +
                       " transfers from account it does not own: " +
                       describe(item.op));
    }
    for (const auto& [a, _] : sequencers)
      if (!shared(a))
        config_error("sequencer configured for unshared account " +
                     std::to_string(to_int(a)));
  }
}

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.id = j.value("id", std::string("unnamed"));
    s.n = j.at("n").get<int>();
    const std::string model = j.value("model", std::string("shared_memory"));
    if (model == "shared_memory")
      s.model = ModelKind::SharedMemory;
    else if (model == "message_passing")
      s.model = ModelKind::MessagePassing;
    else
      config_error("unknown model: " + model);
    s.algorithm = parse_enum(j.at("algorithm").get<std::string>(), kAlgorithms,
                             "algorithm");

    for (const auto& a : j.at("accounts")) {
      AccountSpec spec;
      spec.id = account(a.at("id").get<int>());
      spec.balance = a.value("balance", Amount{0});
      for (int o : a.value("owners", std::vector<int>{})) spec.owners.insert(pid(o));
      s.accounts.push_back(std::move(spec));
    }
    if (j.contains("scripts")) {
      for (const auto& [k, items] : j.at("scripts").items()) {
        auto& script = s.scripts[pid(parse_key(k))];
        for (const auto& item : items) {
          ScriptItem si;
          if (item.contains("propose")) {
            si.kind = ScriptItem::Kind::Propose;
            si.value = item.at("propose").get<std::int64_t>();
          } else {
            si.op = operation_from_json(item);
            si.kind = si.op.is_read() ? ScriptItem::Kind::Read
                                      : ScriptItem::Kind::Transfer;
          }
          script.push_back(si);
        }
      }
    }
    if (j.contains("faults")) {
      const auto& f = j.at("faults");
      if (f.contains("crashes")) s.faults.crashes = parse_pid_counts(f.at("crashes"));
      if (f.contains("crash_after_steps"))
        s.faults.crash_after_steps = parse_pid_counts(f.at("crash_after_steps"));
      if (f.contains("crash_after_sends"))
        s.faults.crash_after_sends = parse_pid_counts(f.at("crash_after_sends"));
      if (f.contains("byzantine"))
        for (const auto& [k, v] : f.at("byzantine").items())
          s.faults.byzantine[pid(parse_key(k))] =
              parse_enum(v.get<std::string>(), kStrategies, "byzantine strategy");
    }
    if (j.contains("scheduler")) {
      const auto& sc = j.at("scheduler");
      s.scheduler.policy = parse_enum(sc.value("policy", std::string("fair_random")),
                                      kPolicies, "scheduler policy");
      s.scheduler.seed = sc.value("seed", std::uint64_t{1});
      s.scheduler.bound = sc.value("bound", std::size_t{20});
      s.scheduler.steps = sc.value("steps", std::vector<int>{});
    }
    if (j.contains("broadcast")) {
      const auto& b = j.at("broadcast");
      s.broadcast.mode =
          parse_enum(b.value("mode", std::string("idealized")), kModes, "broadcast mode");
      s.broadcast.f = b.value("f", 0);
    }
    if (j.contains("sequencers"))
      for (const auto& [k, v] : j.at("sequencers").items())
        s.sequencers[account(parse_key(k))] =
            parse_enum(v.get<std::string>(), kSequencers, "sequencer mode");
    s.k = j.value("k", std::size_t{0});
    if (j.contains("election_ledger"))
      s.election_ledger = parse_enum(j.at("election_ledger").get<std::string>(),
                                     kAlgorithms, "election ledger");
    s.deps_count_toward_balance = j.value("deps_count_toward_balance", true);
    if (j.contains("mutations")) {
      const auto& m = j.at("mutations");
      s.mutations.skip_balance_check = m.value("skip_balance_check", false);
      s.mutations.skip_seq_check = m.value("skip_seq_check", false);
    }
    s.step_bound = j.value("step_bound", std::uint64_t{200000});
    return s;
  } catch (const json::exception& e) {
    config_error(std::string("malformed scenario: ") + e.what());
  }
}

json to_json(const Scenario& s) {
  json j;
  j["id"] = s.id;
  j["n"] = s.n;
  j["model"] = s.model == ModelKind::SharedMemory ? "shared_memory" : "message_passing";
  j["algorithm"] = to_string(s.algorithm);
  j["accounts"] = json::array();
  for (const auto& a : s.accounts) {
    std::vector<int> owners;
    for (Pid p : a.owners) owners.push_back(to_int(p));
    j["accounts"].push_back({{"id", to_int(a.id)}, {"balance", a.balance}, {"owners", owners}});
  }
  j["scripts"] = json::object();
  for (const auto& [p, script] : s.scripts) {
    json items = json::array();
    for (const auto& item : script) {
      if (item.kind == ScriptItem::Kind::Propose)
        items.push_back({{"propose", item.value}});
      else
        items.push_back(to_json(item.op));
    }
    j["scripts"][std::to_string(to_int(p))] = items;
  }
  json byz = json::object();
  for (const auto& [p, st] : s.faults.byzantine) byz[std::to_string(to_int(p))] = to_string(st);
  j["faults"] = {{"crashes", pid_counts_json(s.faults.crashes)},
                 {"crash_after_steps", pid_counts_json(s.faults.crash_after_steps)},
                 {"crash_after_sends", pid_counts_json(s.faults.crash_after_sends)},
                 {"byzantine", byz}};
  j["scheduler"] = {{"policy", to_string(s.scheduler.policy)},
                    {"seed", s.scheduler.seed},
                    {"bound", s.scheduler.bound},
                    {"steps", s.scheduler.steps}};
  j["broadcast"] = {{"mode", to_string(s.broadcast.mode)}, {"f", s.broadcast.f}};
  json seqs = json::object();
  for (const auto& [a, m] : s.sequencers) seqs[std::to_string(to_int(a))] = to_string(m);
  j["sequencers"] = seqs;
  j["k"] = s.k;
  j["election_ledger"] = to_string(s.election_ledger);
  j["deps_count_toward_balance"] = s.deps_count_toward_balance;
  j["mutations"] = {{"skip_balance_check", s.mutations.skip_balance_check},
                    {"skip_seq_check", s.mutations.skip_seq_check}};
  j["step_bound"] = s.step_bound;
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open scenario file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error("scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace atx::sim
