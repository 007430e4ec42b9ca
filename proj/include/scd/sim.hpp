#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "scd/core.hpp"

namespace scd {

/// Seeded PRNG. Range mapping is done here rather than through
/// <random> distributions, whose output is implementation-defined; traces
/// must replay identically across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  /// Uniform real in (0, 1].
  double unit() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  bool chance(double p) { return unit() <= p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Channel transit time. Bounded: uniform in [1, delta]. Unbounded: Pareto
/// tail (shape 1.5) starting at 1, truncated at `cap` so every message is
/// eventually received.
inline Time sample_delay(Rng& rng, const DelayModel& model) {
  if (model.kind == DelayModel::Kind::bounded) return rng.uniform(1, model.delta);
  double u = rng.unit();
  double tail = static_cast<double>(model.scale) * (std::pow(u, -1.0 / 1.5) - 1.0);
  auto d = static_cast<Time>(std::ceil(tail)) + 1;
  return std::clamp<Time>(d, 1, model.cap);
}

/// Deterministic discrete-event simulator of n crash-prone processes linked
/// by reliable, unordered point-to-point channels (self-channels included,
/// zero transit time unless `instant_self_channel` is off).
///
/// All handlers run to completion at their scheduled instant. Once a process
/// has crashed, anything it would record, send or schedule is discarded, so a
/// crash in the middle of a handler behaves like a crash at that point.
class Simulator {
 public:
  using Handler = std::function<void()>;
  using Receiver = std::function<void(ProcessId to, ProcessId from, const WirePacket&)>;

  explicit Simulator(SimConfig config)
      : config_(std::move(config)),
        rng_(config_.seed),
        crashed_(static_cast<std::size_t>(config_.n), false),
        armed_cut_(static_cast<std::size_t>(config_.n)) {
    validate(config_);
    trace_.config = config_;
    for (const auto& c : config_.crashes) {
      if (c.cut) {
        schedule(c.at, kEnvironment, [this, c] { armed_cut_[c.proc.slot()] = *c.cut; });
      } else {
        schedule(c.at, kEnvironment, [this, c] { crash(c.proc); });
      }
    }
  }

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  const SimConfig& config() const { return config_; }
  int n() const { return config_.n; }
  Time now() const { return now_; }
  Rng& rng() { return rng_; }

  bool crashed(ProcessId p) const { return p.value > 0 && crashed_[p.slot()]; }

  void crash(ProcessId p) {
    if (crashed(p)) return;
    Event e;
    e.proc = p;
    e.kind = EventKind::crash;
    record(std::move(e));
    crashed_[p.slot()] = true;
    armed_cut_[p.slot()].reset();
  }

  /// Runs `fn` at `at` unless `owner` has crashed by then.
  void schedule(Time at, ProcessId owner, Handler fn) {
    if (crashed(owner)) return;
    queue_.push(Pending{std::max(at, now_), order_++, owner, std::move(fn)});
  }

  void post(ProcessId owner, Handler fn) { schedule(now_, owner, std::move(fn)); }

  /// Registers a protocol instance on the network; returns its channel tag.
  int register_instance(std::string name, Receiver receiver) {
    instances_.push_back(Instance{std::move(name), std::move(receiver)});
    return static_cast<int>(instances_.size()) - 1;
  }

  const std::string& instance_name(int tag) const { return instances_.at(tag).name; }

  void send(int tag, ProcessId from, ProcessId to, const WirePacket& packet,
            const std::string& label) {
    if (crashed(from)) return;
    std::uint64_t uid = ++uid_;
    Event e;
    e.proc = from;
    e.kind = EventKind::net_send;
    e.instance = instances_[tag].name;
    e.label = label;
    e.peer = to;
    e.uid = uid;
    e.wire = wire_info(packet);
    e.messages.push_back(packet.body.m);
    record(std::move(e));
    Time at = now_;
    if (to != from || !config_.instant_self_channel) at += sample_delay(rng_, config_.delay);
    schedule(at, to, [this, tag, from, to, packet, label, uid] {
      Event r;
      r.proc = to;
      r.kind = EventKind::net_recv;
      r.instance = instances_[tag].name;
      r.label = label;
      r.peer = from;
      r.uid = uid;
      r.wire = wire_info(packet);
      r.messages.push_back(packet.body.m);
      record(std::move(r));
      instances_[tag].receiver(to, from, packet);
    });
  }

  /// Sends one copy to every process (self included). If `from` has an armed
  /// crash cut, only the first `cut` destinations of a seeded permutation get
  /// a copy and `from` crashes immediately afterwards.
  void send_to_all(int tag, ProcessId from, const WirePacket& packet, const std::string& label) {
    if (crashed(from)) return;
    std::vector<ProcessId> dests;
    dests.reserve(static_cast<std::size_t>(n()));
    for (int j = 1; j <= n(); ++j) dests.emplace_back(j);
    auto& cut = armed_cut_[from.slot()];
    if (cut) {
      rng_.shuffle(dests);
      dests.resize(static_cast<std::size_t>(std::min(*cut, n())));
      for (auto to : dests) send(tag, from, to, packet, label);
      crash(from);
      return;
    }
    for (auto to : dests) send(tag, from, to, packet, label);
  }

  /// Appends `e` with the current time and next sequence number. Returns
  /// false (and drops the record) if `e.proc` has crashed.
  bool record(Event e) {
    if (crashed(e.proc)) return false;
    e.time = now_;
    e.seq = ++seq_;
    trace_.events.push_back(std::move(e));
    return true;
  }

  std::int64_t next_op_id() { return next_op_++; }

  /// Drains the event queue up to max_time.
  void run() {
    while (!queue_.empty()) {
      if (queue_.top().time > config_.max_time) {
        trace_.quiescent = false;
        now_ = config_.max_time;
        break;
      }
      // priority_queue::top is const; the handler is moved out via const_cast
      // because the element is popped immediately afterwards.
      auto& top = const_cast<Pending&>(queue_.top());
      now_ = top.time;
      ProcessId owner = top.owner;
      Handler fn = std::move(top.fn);
      queue_.pop();
      if (crashed(owner)) continue;
      fn();
    }
    // A cut that never found a send-to-all still counts as a crash.
    for (int i = 1; i <= n(); ++i) {
      if (armed_cut_[static_cast<std::size_t>(i - 1)]) crash(ProcessId{i});
    }
    trace_.end_time = now_;
  }

  Trace finish() {
    Trace out = std::move(trace_);
    trace_ = Trace{};
    return out;
  }

  const Trace& trace() const { return trace_; }

 private:
  struct Pending {
    Time time;
    std::uint64_t order;
    ProcessId owner;
    Handler fn;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      return a.time != b.time ? a.time > b.time : a.order > b.order;
    }
  };
  struct Instance {
    std::string name;
    Receiver receiver;
  };

  static WireInfo wire_info(const WirePacket& p) {
    return WireInfo{p.origin, p.origin_sn, p.body.forwarder, p.body.forwarder_sn};
  }

  SimConfig config_;
  Rng rng_;
  Time now_ = 0;
  std::uint64_t order_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t uid_ = 0;
  std::int64_t next_op_ = 0;
  std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
  std::vector<bool> crashed_;
  std::vector<std::optional<int>> armed_cut_;
  std::vector<Instance> instances_;
  Trace trace_;
};

}  // namespace scd
