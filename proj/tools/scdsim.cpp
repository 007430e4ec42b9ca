// scdsim: run a scenario (optionally over a seed range) or check a stored
// trace. Writes trace.jsonl, metrics.json and verdicts.jsonl per run.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "scd/scd.hpp"

namespace fs = std::filesystem;
using namespace scd;

namespace {

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

std::optional<SeedRange> parse_seeds(const std::string& text) {
  static const std::regex range(R"((\d+)\.\.(\d+))");
  static const std::regex single(R"((\d+))");
  std::smatch m;
  if (std::regex_match(text, m, range)) {
    SeedRange r{std::stoull(m[1]), std::stoull(m[2])};
    if (r.last < r.first) return std::nullopt;
    return r;
  }
  if (std::regex_match(text, m, single)) return SeedRange{std::stoull(m[1]), std::stoull(m[1])};
  return std::nullopt;
}

void write_artifacts(const fs::path& dir, const Trace& trace, const std::vector<Verdict>& verdicts) {
  fs::create_directories(dir);
  std::ofstream(dir / "trace.jsonl") << trace_to_string(trace);
  std::ofstream(dir / "metrics.json") << to_ojson(report_metrics(trace)).dump(2) << '\n';
  std::ofstream out(dir / "verdicts.jsonl");
  for (const auto& v : verdicts) out << to_ojson(v).dump() << '\n';
}

bool any_failed(const std::vector<Verdict>& vs) {
  return std::any_of(vs.begin(), vs.end(), [](const Verdict& v) { return v.outcome == Outcome::fail; });
}

std::string summary_line(std::uint64_t seed, const std::vector<Verdict>& vs) {
  std::string status = any_failed(vs) ? "FAIL" : "PASS";
  for (const auto& v : vs) {
    if (v.property == "expected-starvation" && v.passed()) status = "EXPECTED-STARVATION";
  }
  std::size_t unchecked = static_cast<std::size_t>(std::count_if(
      vs.begin(), vs.end(), [](const Verdict& v) { return v.outcome == Outcome::unchecked; }));
  std::string line = "seed " + std::to_string(seed) + ": " + status;
  if (unchecked) line += " (" + std::to_string(unchecked) + " unchecked)";
  for (const auto& v : vs) {
    if (v.outcome == Outcome::fail) line += "\n  " + to_ojson(v).dump();
  }
  return line;
}

/// Checks for a stored trace: SCD properties on every instance that
/// broadcasts, consistency on object histories found in the trace.
std::vector<Verdict> check_stored(const Trace& trace, const std::string& check) {
  std::vector<Verdict> out{validate_trace(trace)};
  auto want = [&](const char* c) { return check == "all" || check == c; };
  std::vector<std::string> scd_instances;
  std::set<std::string> objects;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::invoke || e.kind == EventKind::scd_deliver) {
      bool scd = e.kind == EventKind::scd_deliver || e.label == "scd_broadcast";
      if (scd && std::find(scd_instances.begin(), scd_instances.end(), e.instance) == scd_instances.end()) {
        scd_instances.push_back(e.instance);
      }
      if (!scd) objects.insert(e.instance);
    }
  }
  if (want("scd")) {
    for (std::size_t k = 0; k < scd_instances.size(); ++k) {
      for (auto v : check_scd_properties(trace, scd_instances[k])) {
        if (scd_instances.size() > 1) v.property = scd_instances[k] + "/" + v.property;
        out.push_back(std::move(v));
      }
    }
  }
  for (const auto& obj : objects) {
    auto h = extract_history(trace, obj);
    std::optional<SequentialSpec> spec;
    if (obj == "counter") spec = counter_spec();
    if (obj == "snapshot") {
      int registers = 0;
      nlohmann::json initial = 0;
      for (const auto& op : h.ops) {
        if (op.name == "snapshot" && op.result) registers = static_cast<int>(op.result->size());
        if (op.name == "write") registers = std::max(registers, op.args.at(0).get<int>());
      }
      spec = snapshot_spec(std::max(registers, 1), initial);
    }
    if (spec && want("lin")) out.push_back(check_linearizable(h, *spec));
    if (spec && want("sc")) out.push_back(check_sequentially_consistent(h, *spec));
    if (obj == "lattice" && want("lattice")) {
      for (auto& v : check_lattice_task(extract_lattice<IntSetLattice>(trace, obj), trace.config.correct())) {
        out.push_back(std::move(v));
      }
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and check SCD-broadcast scenarios"};
  std::string scenario_path, trace_path, seeds_text, check = "all", out_dir;
  std::optional<Time> max_time;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  auto* scenario_opt = app.add_option("--scenario", scenario_path, "Scenario file (JSON)");
  auto* trace_opt = app.add_option("--trace", trace_path, "Check a stored trace file instead of simulating");
  scenario_opt->excludes(trace_opt);
  app.add_option("--seeds", seeds_text, "Seed or seed range A..B overriding the scenario seed");
  app.add_option("--check", check, "Checks to run")
      ->check(CLI::IsMember({"all", "scd", "lin", "sc", "lattice"}));
  app.add_option("--out", out_dir, "Artifact directory");
  app.add_option("--max-time", max_time, "Simulation horizon");
  app.add_option("--threads", threads, "Worker threads for seed sweeps")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  if (!trace_path.empty()) {
    std::ifstream in(trace_path);
    if (!in) {
      std::cerr << "cannot open " << trace_path << '\n';
      return 2;
    }
    Trace trace;
    try {
      trace = read_trace(in);
    } catch (const std::exception& ex) {
      std::cerr << ex.what() << '\n';
      return 2;
    }
    auto verdicts = check_stored(trace, check);
    for (const auto& v : verdicts) std::cout << to_ojson(v).dump() << '\n';
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream(fs::path(out_dir) / "metrics.json") << to_ojson(report_metrics(trace)).dump(2) << '\n';
      std::ofstream out(fs::path(out_dir) / "verdicts.jsonl");
      for (const auto& v : verdicts) out << to_ojson(v).dump() << '\n';
    }
    return any_failed(verdicts) ? 1 : 0;
  }

  if (scenario_path.empty()) {
    std::cerr << "one of --scenario or --trace is required\n" << app.help();
    return 2;
  }
  Scenario base;
  try {
    base = load_scenario(scenario_path);
  } catch (const ScenarioError& ex) {
    std::cerr << scenario_path << ": " << ex.what() << '\n';
    return 2;
  }
  if (max_time) base.config.max_time = *max_time;
  if (check != "all" || base.checks.empty()) base.checks = {check};
  if (base.beyond_resilience()) {
    std::cerr << "note: t=" << base.config.t << " with n=" << base.config.n
              << " exceeds the t < n/2 bound of the message-passing construction\n";
  }

  SeedRange range{base.config.seed, base.config.seed};
  if (!seeds_text.empty()) {
    auto r = parse_seeds(seeds_text);
    if (!r) {
      std::cerr << "--seeds: expected N or A..B\n";
      return 2;
    }
    range = *r;
  }
  const std::size_t count = range.last - range.first + 1;
  const bool sweep = count > 1;

  std::vector<std::vector<Verdict>> results(count);
  std::vector<std::string> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      Scenario s = base;
      s.config.seed = range.first + k;
      try {
        auto outcome = run_scenario(s);
        if (!out_dir.empty()) {
          fs::path dir = sweep ? fs::path(out_dir) / ("seed-" + std::to_string(s.config.seed)) : fs::path(out_dir);
          write_artifacts(dir, outcome.trace, outcome.verdicts);
        }
        results[k] = std::move(outcome.verdicts);
      } catch (const std::exception& ex) {
        errors[k] = ex.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < std::min<std::size_t>(threads, count); ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::size_t failures = 0;
  for (std::size_t k = 0; k < count; ++k) {
    if (!errors[k].empty()) {
      ++failures;
      std::cout << "seed " << range.first + k << ": ERROR " << errors[k] << '\n';
      continue;
    }
    if (any_failed(results[k])) ++failures;
    if (!sweep || any_failed(results[k])) std::cout << summary_line(range.first + k, results[k]) << '\n';
  }
  if (sweep) {
    std::cout << base.name << ": " << count << " runs, " << failures << " failing\n";
  }
  return failures ? 1 : 0;
}
