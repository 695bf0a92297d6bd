#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "atx/core.hpp"

namespace atx::sim {

enum class ModelKind { SharedMemory, MessagePassing };

enum class Algorithm {
  AtomicLedger,       // the type itself as one atomic object
  SnapshotLedger,     // wait-free, atomic snapshot
  ConsensusLedger,    // k-shared, k-consensus objects
  TransferConsensus,  // consensus among k from a k-shared ledger
  BroadcastLedger,    // Byzantine message passing over secure broadcast
};

enum class ByzantineStrategy {
  Equivocate,
  DoubleSpendRace,
  BadSeq,
  ForgeOwner,
  StaleDeps,
  Silent,
};

enum class Policy { FairRandom, Exhaustive, Scripted };

enum class BroadcastMode { Idealized, Quorum, Raw };

enum class SequencerMode { Correct, Equivocate, Stall };

struct AccountSpec {
  AccountId id{};
  Amount balance = 0;
  std::set<Pid> owners;
};

struct ScriptItem {
  enum class Kind { Transfer, Read, Propose };
  Kind kind = Kind::Read;
  Operation op;
  std::int64_t value = 0;  // proposal for Propose
};

struct FaultPlan {
  std::map<Pid, std::uint64_t> crashes;            // at global scheduler step
  std::map<Pid, std::uint64_t> crash_after_steps;  // after own atomic steps
  std::map<Pid, std::uint64_t> crash_after_sends;  // after this many sends
  std::map<Pid, ByzantineStrategy> byzantine;

  bool crashes_at_all(Pid p) const {
    return crashes.count(p) || crash_after_steps.count(p) ||
           crash_after_sends.count(p);
  }
};

struct SchedulerSpec {
  Policy policy = Policy::FairRandom;
  std::uint64_t seed = 1;
  std::size_t bound = 20;  // exhaustive: maximum total atomic steps
  std::vector<int> steps;  // scripted: process to schedule at each step
};

struct BroadcastSpec {
  BroadcastMode mode = BroadcastMode::Idealized;
  int f = 0;
};

// Test-only switches that break the validation rule on purpose so the
// checkers can be shown to catch it.
struct Mutations {
  bool skip_balance_check = false;
  bool skip_seq_check = false;
};

struct Scenario {
  std::string id;
  int n = 0;
  ModelKind model = ModelKind::SharedMemory;
  Algorithm algorithm = Algorithm::SnapshotLedger;
  std::vector<AccountSpec> accounts;
  std::map<Pid, std::vector<ScriptItem>> scripts;
  FaultPlan faults;
  SchedulerSpec scheduler;
  BroadcastSpec broadcast;
  std::map<AccountId, SequencerMode> sequencers;
  std::size_t k = 0;                        // 0: largest owner set
  Algorithm election_ledger = Algorithm::AtomicLedger;
  bool deps_count_toward_balance = true;    // validation balance over hist ∪ h
  Mutations mutations;
  std::uint64_t step_bound = 200000;

  LedgerState q0() const;
  OwnershipMap mu() const;
  std::size_t max_owners() const;
  std::size_t capacity() const { return k ? k : max_owners(); }
  bool is_byzantine(Pid p) const { return faults.byzantine.count(p) != 0; }
  bool shared(AccountId a) const;

  // Throws Error(ConfigError) describing the first violated rule.
  void validate() const;
};

const char* to_string(Algorithm a);
const char* to_string(ByzantineStrategy s);
const char* to_string(BroadcastMode m);
const char* to_string(Policy p);
const char* to_string(SequencerMode m);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const Operation& op);
nlohmann::json to_json(const Response& r);
nlohmann::json to_json(const TransferRecord& t);
Operation operation_from_json(const nlohmann::json& j);
Response response_from_json(const nlohmann::json& j);
TransferRecord record_from_json(const nlohmann::json& j);

}  // namespace atx::sim
