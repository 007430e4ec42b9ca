#pragma once

// Seeded random scenarios for sweeps and property tests.

#include <algorithm>
#include <string>
#include <vector>

#include "scd/scenario.hpp"

namespace scd {

struct SweepParams {
  int n = 3;
  Protocol protocol = Protocol::scd;
  ObjectKind object = ObjectKind::none;
  /// Number of workload items.
  int ops = 10;
  /// Highest number of crashes drawn; -1 means the largest the protocol
  /// tolerates (floor((n-1)/2) for message passing, n-1 for shared memory).
  int max_crashes = -1;
  bool cuts = true;
  /// Bounded delays only (otherwise half the runs use unbounded delays).
  bool bounded_only = false;
  Time delta = 10;
  /// Workload invocation times are drawn from [0, spread].
  Time spread = 100;
  int registers = 0;
  Time max_time = 1'000'000;
};

inline int tolerated_crashes(Protocol p, int n) {
  return p == Protocol::shm_scd || p == Protocol::shm_scd_roundtrip ? n - 1 : (n - 1) / 2;
}

inline Scenario random_scenario(std::uint64_t seed, const SweepParams& params) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
  Scenario s;
  s.name = "random-" + std::to_string(seed);
  s.protocol = params.protocol;
  s.object = params.object;
  s.registers = params.registers;
  auto& c = s.config;
  c.n = params.n;
  c.seed = seed;
  c.max_time = params.max_time;
  c.t = params.max_crashes >= 0 ? params.max_crashes : tolerated_crashes(params.protocol, params.n);
  if (params.bounded_only || rng.chance(0.5)) {
    c.delay = DelayModel::bounded(params.delta);
  } else {
    c.delay = DelayModel::unbounded(params.delta, 100 * params.delta);
  }
  int crashes = static_cast<int>(rng.uniform(0, c.t));
  std::vector<int> procs(static_cast<std::size_t>(c.n));
  for (int i = 0; i < c.n; ++i) procs[static_cast<std::size_t>(i)] = i + 1;
  rng.shuffle(procs);
  for (int k = 0; k < crashes; ++k) {
    CrashSpec spec{ProcessId{procs[static_cast<std::size_t>(k)]}, rng.uniform(0, params.spread + 3 * params.delta),
                   std::nullopt};
    if (params.cuts && rng.chance(0.5)) spec.cut = static_cast<int>(rng.uniform(0, c.n));
    c.crashes.push_back(spec);
  }

  std::vector<bool> proposed(static_cast<std::size_t>(c.n), false);
  for (int k = 0; k < params.ops; ++k) {
    WorkloadItem item;
    item.time = rng.uniform(0, params.spread);
    item.proc = ProcessId{static_cast<int>(rng.uniform(1, c.n))};
    switch (params.object) {
      case ObjectKind::none:
        item.op = "broadcast";
        item.args = "m" + std::to_string(k + 1);
        break;
      case ObjectKind::snapshot:
      case ObjectKind::snapshot_sc:
        if (rng.chance(0.5)) {
          item.op = "write";
          item.args = nlohmann::json::array(
              {rng.uniform(1, s.register_count()), rng.uniform(1, 9)});
        } else {
          item.op = "snapshot";
        }
        break;
      case ObjectKind::counter:
      case ObjectKind::counter_sc: {
        auto pick = rng.uniform(0, 2);
        item.op = pick == 0 ? "inc" : pick == 1 ? "dec" : "read";
        break;
      }
      case ObjectKind::lattice: {
        // One proposal per process; extra items are skipped.
        auto free = std::find(proposed.begin(), proposed.end(), false);
        if (free == proposed.end()) continue;
        auto slot = static_cast<std::size_t>(free - proposed.begin());
        proposed[slot] = true;
        item.proc = ProcessId{static_cast<int>(slot) + 1};
        item.op = "propose";
        item.args = nlohmann::json::array();
        for (int v = 0, len = static_cast<int>(rng.uniform(1, 3)); v < len; ++v) {
          item.args.push_back(rng.uniform(1, 9));
        }
        break;
      }
    }
    s.workload.push_back(std::move(item));
  }
  return s;
}

}  // namespace scd
