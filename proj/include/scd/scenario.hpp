#pragma once

// Scenario files: a JSON document naming the system (n, t, seed, delays,
// crashes), the protocol stack, a per-process workload, and the checks to
// run. run_scenario() builds the stack, drives the workload and returns the
// trace together with the verdicts.

#include <algorithm>
#include <deque>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scd/checkers/consistency.hpp"
#include "scd/checkers/lattice_task.hpp"
#include "scd/checkers/scd_properties.hpp"
#include "scd/checkers/structure.hpp"
#include "scd/objects/counter.hpp"
#include "scd/objects/lattice.hpp"
#include "scd/objects/snapshot.hpp"
#include "scd/scd_mp.hpp"
#include "scd/scd_shm.hpp"
#include "scd/shm.hpp"
#include "scd/trace_io.hpp"

namespace scd {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& what, std::size_t line = 0)
      : std::runtime_error(format(field, what, line)), field_(std::move(field)), line_(line) {}

  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& what, std::size_t line) {
    std::string out = "scenario";
    if (line) out += " line " + std::to_string(line);
    if (!field.empty()) out += " field '" + field + "'";
    return out + ": " + what;
  }

  std::string field_;
  std::size_t line_;
};

enum class Protocol { scd, shm_scd, shm_scd_roundtrip };
enum class ObjectKind { none, snapshot, snapshot_sc, counter, counter_sc, lattice };

inline const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::scd: return "scd";
    case Protocol::shm_scd: return "shm_scd";
    case Protocol::shm_scd_roundtrip: return "shm_scd_roundtrip";
  }
  return "?";
}

inline const char* to_string(ObjectKind o) {
  switch (o) {
    case ObjectKind::none: return "none";
    case ObjectKind::snapshot: return "snapshot";
    case ObjectKind::snapshot_sc: return "snapshot_sc";
    case ObjectKind::counter: return "counter";
    case ObjectKind::counter_sc: return "counter_sc";
    case ObjectKind::lattice: return "lattice";
  }
  return "?";
}

struct WorkloadItem {
  Time time = 0;
  ProcessId proc;
  std::string op;
  nlohmann::json args;
};

struct Scenario {
  std::string name = "unnamed";
  SimConfig config;
  Protocol protocol = Protocol::scd;
  ObjectKind object = ObjectKind::none;
  /// Snapshot register count; 0 means n.
  int registers = 0;
  std::int64_t initial = 0;
  std::vector<WorkloadItem> workload;
  /// Subset of {scd, lin, sc, lattice}, or {all}.
  std::vector<std::string> checks{"all"};
  /// "complete", or "starvation" when a broadcast is expected to stay
  /// pending at the end of the run.
  std::string expect = "complete";

  int register_count() const { return registers > 0 ? registers : config.n; }
  bool expects_starvation() const { return expect == "starvation"; }
  /// The message-passing construction needs t < n/2.
  bool beyond_resilience() const {
    return protocol != Protocol::shm_scd && 2 * config.t >= config.n;
  }
};

inline ojson to_ojson(const Scenario& s) {
  ojson j = to_ojson(s.config);
  j["name"] = s.name;
  j["protocol"] = to_string(s.protocol);
  j["object"] = to_string(s.object);
  if (s.registers) j["registers"] = s.registers;
  if (s.initial) j["initial"] = s.initial;
  ojson w = ojson::array();
  for (const auto& item : s.workload) {
    ojson e{{"time", item.time}, {"proc", item.proc.value}, {"op", item.op}};
    if (!item.args.is_null()) e["args"] = ojson::parse(item.args.dump());
    w.push_back(std::move(e));
  }
  j["workload"] = std::move(w);
  j["checks"] = s.checks;
  j["expect"] = s.expect;
  return j;
}

namespace detail {

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

template <class T>
T field(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ScenarioError(path + key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& ex) {
    throw ScenarioError(path + key, std::string("wrong type (") + ex.what() + ")");
  }
}

template <class T>
T field_or(const nlohmann::json& j, const std::string& key, T fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  return field<T>(j, key, path);
}

inline bool op_allowed(ObjectKind object, const std::string& op) {
  switch (object) {
    case ObjectKind::none: return op == "broadcast";
    case ObjectKind::snapshot:
    case ObjectKind::snapshot_sc: return op == "write" || op == "snapshot";
    case ObjectKind::counter:
    case ObjectKind::counter_sc: return op == "inc" || op == "dec" || op == "read";
    case ObjectKind::lattice: return op == "propose";
  }
  return false;
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ScenarioError("", "top level must be an object");
  Scenario s;
  s.name = detail::field_or<std::string>(j, "name", s.name, "");
  try {
    s.config = sim_config_from(j);
  } catch (const nlohmann::json::exception& ex) {
    throw ScenarioError("config", ex.what());
  } catch (const std::invalid_argument& ex) {
    throw ScenarioError("delay", ex.what());
  }
  try {
    validate(s.config);
  } catch (const ContractViolation& ex) {
    throw ScenarioError("config", ex.what());
  }
  auto protocol = detail::field_or<std::string>(j, "protocol", "scd", "");
  if (protocol == "scd") s.protocol = Protocol::scd;
  else if (protocol == "shm_scd") s.protocol = Protocol::shm_scd;
  else if (protocol == "shm_scd_roundtrip") s.protocol = Protocol::shm_scd_roundtrip;
  else throw ScenarioError("protocol", "unknown protocol '" + protocol + "'");

  auto object = detail::field_or<std::string>(j, "object", "none", "");
  bool found = false;
  for (auto o : {ObjectKind::none, ObjectKind::snapshot, ObjectKind::snapshot_sc, ObjectKind::counter,
                 ObjectKind::counter_sc, ObjectKind::lattice}) {
    if (object == to_string(o)) {
      s.object = o;
      found = true;
    }
  }
  if (!found) throw ScenarioError("object", "unknown object '" + object + "'");
  s.registers = detail::field_or<int>(j, "registers", 0, "");
  if (s.registers < 0) throw ScenarioError("registers", "must be >= 1 (or 0 for n)");
  s.initial = detail::field_or<std::int64_t>(j, "initial", 0, "");
  s.expect = detail::field_or<std::string>(j, "expect", s.expect, "");
  if (s.expect != "complete" && s.expect != "starvation") {
    throw ScenarioError("expect", "must be \"complete\" or \"starvation\"");
  }
  if (j.contains("checks")) {
    s.checks = detail::field<std::vector<std::string>>(j, "checks", "");
    for (const auto& c : s.checks) {
      if (c != "all" && c != "scd" && c != "lin" && c != "sc" && c != "lattice") {
        throw ScenarioError("checks", "unknown check '" + c + "'");
      }
    }
  }

  if (!j.contains("workload")) throw ScenarioError("workload", "missing");
  if (!j.at("workload").is_array()) throw ScenarioError("workload", "must be an array");
  std::set<int> proposers;
  std::size_t k = 0;
  for (const auto& w : j.at("workload")) {
    std::string path = "workload[" + std::to_string(k++) + "].";
    WorkloadItem item;
    item.time = detail::field_or<Time>(w, "time", 0, path);
    if (item.time < 0) throw ScenarioError(path + "time", "must be >= 0");
    item.proc = ProcessId{detail::field<int>(w, "proc", path)};
    if (item.proc.value < 1 || item.proc.value > s.config.n) {
      throw ScenarioError(path + "proc", "must be in 1.." + std::to_string(s.config.n));
    }
    item.op = detail::field<std::string>(w, "op", path);
    if (!detail::op_allowed(s.object, item.op)) {
      throw ScenarioError(path + "op", "'" + item.op + "' not valid for object " + to_string(s.object));
    }
    if (w.contains("args")) item.args = w.at("args");
    if (item.op == "write") {
      if (!item.args.is_array() || item.args.size() != 2 || !item.args[0].is_number_integer() ||
          !item.args[1].is_number_integer()) {
        throw ScenarioError(path + "args", "write expects [register, integer value]");
      }
      int r = item.args[0].get<int>();
      if (r < 1 || r > s.register_count()) {
        throw ScenarioError(path + "args", "register outside 1.." + std::to_string(s.register_count()));
      }
    }
    if (item.op == "propose") {
      if (!item.args.is_array()) throw ScenarioError(path + "args", "propose expects an array of integers");
      for (const auto& v : item.args) {
        if (!v.is_number_integer()) throw ScenarioError(path + "args", "propose expects integers");
      }
      if (!proposers.insert(item.proc.value).second) {
        throw ScenarioError(path + "proc", "process proposes twice");
      }
    }
    if (item.op == "broadcast" && !item.args.is_null() && !item.args.is_string()) {
      throw ScenarioError(path + "args", "broadcast payload must be a string");
    }
    s.workload.push_back(std::move(item));
  }
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ScenarioError("", ex.what(), detail::line_of(text, ex.byte));
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// ---------------------------------------------------------------------------

struct RunOutcome {
  Trace trace;
  std::vector<Verdict> verdicts;
};

namespace detail {

/// The protocol stack of one run.
struct Stack {
  std::unique_ptr<ScdMessagePassing> mp;
  std::unique_ptr<ScdMessagePassing> mp_sent;
  std::unique_ptr<ScdMessagePassing> mp_setseq;
  std::unique_ptr<SnapshotMemory<MessageSet>> sent;
  std::unique_ptr<SnapshotMemory<SetSeq>> setseq;
  std::unique_ptr<ScdSharedMemory> shm;
  ScdService* service = nullptr;

  std::unique_ptr<SnapshotObject<std::int64_t>> snapshot;
  std::unique_ptr<CounterObject> counter;
  std::unique_ptr<LatticeAgreement<IntSetLattice>> lattice;

  /// Every SCD instance in the stack, the top-level one first.
  std::vector<std::string> scd_instances;

  Stack(Simulator& sim, const Scenario& s) {
    switch (s.protocol) {
      case Protocol::scd:
        mp = std::make_unique<ScdMessagePassing>(sim, "scd");
        service = mp.get();
        scd_instances = {"scd"};
        break;
      case Protocol::shm_scd:
        sent = std::make_unique<AtomicSnapshotOracle<MessageSet>>(sim, "SENT");
        setseq = std::make_unique<AtomicSnapshotOracle<SetSeq>>(sim, "SETSEQ");
        shm = std::make_unique<ScdSharedMemory>(sim, *sent, *setseq, "shm");
        service = shm.get();
        scd_instances = {"shm"};
        break;
      case Protocol::shm_scd_roundtrip:
        mp_sent = std::make_unique<ScdMessagePassing>(sim, "scd.sent");
        mp_setseq = std::make_unique<ScdMessagePassing>(sim, "scd.setseq");
        sent = std::make_unique<ReplicatedSnapshotMemory<MessageSet>>(sim, *mp_sent, "SENT");
        setseq = std::make_unique<ReplicatedSnapshotMemory<SetSeq>>(sim, *mp_setseq, "SETSEQ");
        shm = std::make_unique<ScdSharedMemory>(sim, *sent, *setseq, "shm");
        service = shm.get();
        scd_instances = {"shm", "scd.sent", "scd.setseq"};
        break;
    }
    switch (s.object) {
      case ObjectKind::none: break;
      case ObjectKind::snapshot:
      case ObjectKind::snapshot_sc:
        snapshot = std::make_unique<SnapshotObject<std::int64_t>>(
            sim, *service, "snapshot", s.register_count(), s.initial,
            s.object == ObjectKind::snapshot ? Consistency::atomic : Consistency::sequential);
        break;
      case ObjectKind::counter:
      case ObjectKind::counter_sc:
        counter = std::make_unique<CounterObject>(
            sim, *service, "counter",
            s.object == ObjectKind::counter ? Consistency::atomic : Consistency::sequential);
        break;
      case ObjectKind::lattice:
        lattice = std::make_unique<LatticeAgreement<IntSetLattice>>(sim, *service, "lattice");
        break;
    }
  }
};

/// Issues each process's workload items one after the other: an item starts
/// at its scheduled time or when the previous one returns, whichever is later.
class Driver {
 public:
  Driver(Simulator& sim, Stack& stack, const Scenario& s)
      : sim_(sim), stack_(stack), queues_(static_cast<std::size_t>(s.config.n)) {
    std::vector<WorkloadItem> items = s.workload;
    std::stable_sort(items.begin(), items.end(),
                     [](const WorkloadItem& a, const WorkloadItem& b) { return a.time < b.time; });
    std::size_t k = 0;
    for (auto& item : items) {
      if (item.op == "broadcast" && item.args.is_null()) item.args = "m" + std::to_string(++k);
      else if (item.op == "broadcast") ++k;
      queues_[item.proc.slot()].push_back(std::move(item));
    }
    for (int i = 1; i <= s.config.n; ++i) next(ProcessId{i});
  }

 private:
  void next(ProcessId p) {
    auto& q = queues_[p.slot()];
    if (q.empty()) return;
    Time at = std::max(q.front().time, sim_.now());
    sim_.schedule(at, kEnvironment, [this, p] {
      auto& queue = queues_[p.slot()];
      WorkloadItem item = std::move(queue.front());
      queue.pop_front();
      issue(p, item, [this, p] { next(p); });
      if (sim_.crashed(p)) next(p);
    });
  }

  void issue(ProcessId p, const WorkloadItem& item, std::function<void()> done) {
    const auto& op = item.op;
    if (op == "broadcast") {
      stack_.service->broadcast(p, item.args.get<std::string>(), std::move(done));
    } else if (op == "write") {
      stack_.snapshot->write(p, item.args[0].get<int>(), item.args[1].get<std::int64_t>(), std::move(done));
    } else if (op == "snapshot") {
      stack_.snapshot->snapshot(p, [done = std::move(done)](const std::vector<std::int64_t>&) { done(); });
    } else if (op == "inc") {
      stack_.counter->increase(p, std::move(done));
    } else if (op == "dec") {
      stack_.counter->decrease(p, std::move(done));
    } else if (op == "read") {
      stack_.counter->read(p, [done = std::move(done)](std::int64_t) { done(); });
    } else if (op == "propose") {
      stack_.lattice->propose(p, item.args.get<IntSetLattice::value_type>(),
                              [done = std::move(done)](const auto&) { done(); });
    }
  }

  Simulator& sim_;
  Stack& stack_;
  std::vector<std::deque<WorkloadItem>> queues_;
};

inline bool wants(const Scenario& s, const std::string& check) {
  return std::find(s.checks.begin(), s.checks.end(), "all") != s.checks.end() ||
         std::find(s.checks.begin(), s.checks.end(), check) != s.checks.end();
}

/// Broadcast invocations on `instance` with no response by the end of the run.
inline std::vector<std::int64_t> pending_broadcasts(const Trace& trace, std::string_view instance) {
  std::set<std::int64_t> open;
  for (const auto& e : trace.events) {
    if (e.instance != instance || e.label != "scd_broadcast") continue;
    if (e.kind == EventKind::invoke) open.insert(e.op);
    if (e.kind == EventKind::response) open.erase(e.op);
  }
  return {open.begin(), open.end()};
}

}  // namespace detail

/// Runs every requested check on a finished trace of scenario `s`.
inline std::vector<Verdict> check_scenario(const Scenario& s, const Trace& trace,
                                           const std::vector<std::string>& scd_instances) {
  std::vector<Verdict> out;
  out.push_back(validate_trace(trace));
  if (detail::wants(s, "scd")) {
    for (std::size_t k = 0; k < scd_instances.size(); ++k) {
      for (auto v : check_scd_properties(trace, scd_instances[k])) {
        if (k > 0) v.property = scd_instances[k] + "/" + v.property;
        if (s.expects_starvation() && k == 0 &&
            (v.property == "Termination-1" || v.property == "Termination-2") && !v.passed()) {
          v = Verdict::unchecked(v.property, "liveness not expected beyond the resilience bound");
        }
        out.push_back(std::move(v));
      }
    }
    if (s.expects_starvation()) {
      auto open = detail::pending_broadcasts(trace, scd_instances.front());
      if (open.empty()) {
        out.push_back(Verdict::fail("expected-starvation", nlohmann::json{{"pending", 0}},
                                    "every broadcast completed"));
      } else {
        auto v = Verdict::pass("expected-starvation");
        v.note = "EXPECTED-STARVATION: " + std::to_string(open.size()) +
                 " scd-broadcast(s) pending at the horizon";
        v.witness = nlohmann::json{{"pending_ops", open}};
        out.push_back(std::move(v));
      }
    }
  }
  if (s.object == ObjectKind::snapshot || s.object == ObjectKind::snapshot_sc ||
      s.object == ObjectKind::counter || s.object == ObjectKind::counter_sc) {
    bool is_snapshot = s.object == ObjectKind::snapshot || s.object == ObjectKind::snapshot_sc;
    auto spec = is_snapshot ? snapshot_spec(s.register_count(), s.initial) : counter_spec();
    auto h = extract_history(trace, is_snapshot ? "snapshot" : "counter");
    if (detail::wants(s, "lin")) out.push_back(check_linearizable(h, spec));
    if (detail::wants(s, "sc")) out.push_back(check_sequentially_consistent(h, spec));
  }
  if (s.object == ObjectKind::lattice && detail::wants(s, "lattice")) {
    auto run = extract_lattice<IntSetLattice>(trace, "lattice");
    for (auto& v : check_lattice_task(run, trace.config.correct())) out.push_back(std::move(v));
  }
  return out;
}

inline std::vector<std::string> scd_instances_of(Protocol p) {
  switch (p) {
    case Protocol::scd: return {"scd"};
    case Protocol::shm_scd: return {"shm"};
    case Protocol::shm_scd_roundtrip: return {"shm", "scd.sent", "scd.setseq"};
  }
  return {};
}

/// Simulates `s` and checks the trace. Deterministic in `s`.
inline RunOutcome run_scenario(const Scenario& s) {
  Simulator sim(s.config);
  detail::Stack stack(sim, s);
  detail::Driver driver(sim, stack, s);
  sim.run();
  RunOutcome out;
  out.trace = sim.finish();
  out.verdicts = check_scenario(s, out.trace, stack.scd_instances);
  return out;
}

}  // namespace scd
