#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include "CLI11.hpp"
#include "json.hpp"

#include "atx/cli/evaluate.hpp"
#include "atx/cli/sweep.hpp"

namespace fs = std::filesystem;
using atx::cli::CheckMode;
using atx::cli::RunOptions;
using nlohmann::json;

namespace {

bool traces_enabled() {
  const char* v = std::getenv("ATSIM_TRACE");
  return !v || std::string(v) != "0";
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw atx::Error(atx::ErrorCode::ConfigError, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
  static const std::regex re(R"((\d+)\.\.(\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, re))
    throw atx::Error(atx::ErrorCode::ConfigError, "seed range must look like a..b");
  const auto a = std::stoull(m[1]), b = std::stoull(m[2]);
  if (a > b) throw atx::Error(atx::ErrorCode::ConfigError, "empty seed range " + text);
  return {a, b};
}

void print_verdicts(const atx::cli::RunResult& r) {
  for (const auto& v : r.verdicts) {
    std::cout << "  " << v.name << ": " << (v.pass ? "pass" : "FAIL");
    if (!v.pass && !v.detail.empty()) std::cout << " (" << v.detail << ")";
    std::cout << "\n";
  }
}

json compare(const atx::sim::Scenario& s, std::uint64_t seed, const RunOptions& opt) {
  RunOptions b = opt;
  b.protocol = atx::sim::Protocol::Baseline;
  const auto ours = atx::cli::evaluate(s, seed, opt);
  const auto base = atx::cli::evaluate(s, seed, b);
  auto side = [](const atx::cli::RunResult& r) {
    json j = atx::cli::to_json(r.metrics);
    j["pass"] = r.pass();
    if (r.metrics.transfers_succeeded)
      j["messages_per_transfer"] = static_cast<double>(r.metrics.total_messages) /
                                   static_cast<double>(r.metrics.transfers_succeeded);
    return j;
  };
  json out{{"scenario", s.id}, {"seed", seed}, {"broadcast", side(ours)}, {"baseline", side(base)}};
  if (ours.metrics.total_messages)
    out["ratio_baseline_over_broadcast"] =
        static_cast<double>(base.metrics.total_messages) /
        static_cast<double>(ours.metrics.total_messages);
  return out;
}

void print_compare(const json& c) {
  std::cout << "scenario " << c["scenario"].get<std::string>() << " seed "
            << c["seed"] << "\n";
  for (const char* side : {"broadcast", "baseline"}) {
    const auto& j = c[side];
    std::cout << "  " << side << ": " << j["total_messages"] << " messages, "
              << j["transfers_succeeded"] << " successful transfers";
    if (j.contains("messages_per_transfer"))
      std::cout << ", " << j["messages_per_transfer"].get<double>() << " per transfer";
    std::cout << "\n";
  }
  if (c.contains("ratio_baseline_over_broadcast"))
    std::cout << "  baseline/broadcast message ratio: "
              << c["ratio_baseline_over_broadcast"].get<double>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asset-transfer simulator and checker"};
  app.require_subcommand(1);

  std::string broadcast, check = "exact";
  app.add_option("--broadcast", broadcast, "Override broadcast mode")
      ->check(CLI::IsMember({"idealized", "quorum", "raw"}));
  app.add_option("--check", check, "Checker strength")
      ->check(CLI::IsMember({"exact", "monitors-only"}));

  std::string scenario_path, out_dir = ".", seeds;
  std::uint64_t seed = 1;
  bool exhaustive = false, with_baseline = false;

  auto* run = app.add_subcommand("run", "Run one seed and check it");
  run->add_option("--scenario", scenario_path)->required();
  run->add_option("--seed", seed);
  run->add_option("--out", out_dir);

  auto* sw = app.add_subcommand("sweep", "Run many seeds or every interleaving");
  sw->add_option("--scenario", scenario_path)->required();
  auto* seeds_opt = sw->add_option("--seeds", seeds, "Seed range a..b");
  auto* ex_opt = sw->add_flag("--exhaustive", exhaustive);
  seeds_opt->excludes(ex_opt);
  sw->add_flag("--baseline", with_baseline, "Also compare against the sequencer baseline");
  sw->add_option("--out", out_dir);

  auto* bl = app.add_subcommand("baseline", "Compare message counts with the sequencer baseline");
  bl->add_option("--scenario", scenario_path)->required();
  bl->add_option("--seed", seed);
  bl->add_option("--out", out_dir);

  for (auto* sub : {run, sw, bl}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunOptions opt;
    opt.check = check == "monitors-only" ? CheckMode::MonitorsOnly : CheckMode::Exact;
    if (broadcast == "idealized") opt.broadcast = atx::sim::BroadcastMode::Idealized;
    if (broadcast == "quorum") opt.broadcast = atx::sim::BroadcastMode::Quorum;
    if (broadcast == "raw") opt.broadcast = atx::sim::BroadcastMode::Raw;

    const auto scenario = atx::sim::load_scenario(scenario_path);
    atx::cli::apply_options(scenario, opt).validate();
    fs::create_directories(out_dir);

    if (*run) {
      auto r = atx::cli::evaluate(scenario, seed, opt);
      const std::string stem = scenario.id + "_" + std::to_string(seed);
      if (traces_enabled()) r.trace.save(fs::path(out_dir) / (stem + ".jsonl"));
      write_json(fs::path(out_dir) / (stem + ".json"), r.to_json());
      std::cout << scenario.id << " seed " << seed << ": "
                << (r.pass() ? "pass" : "FAIL") << "\n";
      print_verdicts(r);
      return r.pass() ? 0 : 1;
    }
    if (*sw) {
      atx::cli::SweepSummary sum;
      if (exhaustive) {
        sum = atx::cli::sweep_exhaustive(scenario, opt);
      } else {
        const auto [a, b] = parse_range(seeds.empty() ? "1..100" : seeds);
        sum = atx::cli::sweep(scenario, a, b, opt);
      }
      json j = sum.to_json();
      std::cout << sum.line() << "\n";
      if (with_baseline && scenario.model == atx::sim::ModelKind::MessagePassing) {
        const auto c = compare(scenario, seed, opt);
        print_compare(c);
        j["baseline_comparison"] = c;
      }
      write_json(fs::path(out_dir) / (scenario.id + "_sweep.json"), j);
      return sum.pass() ? 0 : 1;
    }
    if (scenario.model != atx::sim::ModelKind::MessagePassing)
      throw atx::Error(atx::ErrorCode::ConfigError,
                       "baseline needs a message_passing scenario");
    const auto c = compare(scenario, seed, opt);
    print_compare(c);
    write_json(fs::path(out_dir) / (scenario.id + "_baseline.json"), c);
    return c["broadcast"]["pass"].get<bool>() ? 0 : 1;
  } catch (const atx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == atx::ErrorCode::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
