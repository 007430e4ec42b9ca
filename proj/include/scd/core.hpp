#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scd {

/// Simulated time in integer microticks.
using Time = std::int64_t;

/// Sender-local sequence number.
using SeqNum = std::uint64_t;

/// Thrown when a caller violates an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Thrown when a protocol invariant breaks. Indicates a bug, never user error.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// 1-based process identity. Index 0 is reserved for the environment
/// (workload driver, crash injector) in trace records.
struct ProcessId {
  int value = 0;

  constexpr ProcessId() = default;
  constexpr explicit ProcessId(int v) : value(v) {}

  /// 0-based slot for per-process arrays.
  constexpr std::size_t slot() const { return static_cast<std::size_t>(value - 1); }

  friend constexpr auto operator<=>(ProcessId, ProcessId) = default;
};

inline std::ostream& operator<<(std::ostream& os, ProcessId p) { return os << 'p' << p.value; }

inline constexpr ProcessId kEnvironment{0};

struct MessageId {
  ProcessId sender;
  SeqNum sn = 0;

  friend constexpr auto operator<=>(const MessageId&, const MessageId&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const MessageId& id) {
  return os << '<' << id.sender.value << ',' << id.sn << '>';
}

inline std::string to_string(const MessageId& id) {
  return "<" + std::to_string(id.sender.value) + "," + std::to_string(id.sn) + ">";
}

struct AppMessage {
  MessageId id;
  std::string payload;

  friend bool operator==(const AppMessage& a, const AppMessage& b) { return a.id == b.id; }
};

inline void to_json(nlohmann::json& j, const AppMessage& m) {
  j = nlohmann::json{{"sender", m.id.sender.value}, {"sn", m.id.sn}, {"payload", m.payload}};
}

inline void from_json(const nlohmann::json& j, AppMessage& m) {
  m.id.sender = ProcessId{j.at("sender").get<int>()};
  m.id.sn = j.at("sn").get<SeqNum>();
  m.payload = j.at("payload").get<std::string>();
}

/// Message set kept sorted by id, without duplicate ids.
using MessageSet = std::vector<AppMessage>;

inline void normalize(MessageSet& set) {
  std::sort(set.begin(), set.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  auto last = std::unique(set.begin(), set.end());
  set.erase(last, set.end());
}

inline bool contains(const MessageSet& set, const MessageId& id) {
  auto it = std::lower_bound(set.begin(), set.end(), id,
                             [](const AppMessage& m, const MessageId& k) { return m.id < k; });
  return it != set.end() && it->id == id;
}

inline std::vector<MessageId> ids_of(const MessageSet& set) {
  std::vector<MessageId> out;
  out.reserve(set.size());
  for (const auto& m : set) out.push_back(m.id);
  return out;
}

/// Write stamp of the snapshot construction. `proc == 0` is the initial
/// placeholder and orders below every real process.
struct Timestamp {
  std::uint64_t date = 0;
  int proc = 0;

  friend constexpr bool operator==(const Timestamp&, const Timestamp&) = default;
};

/// Lexicographic order: date first, process id breaks ties.
constexpr bool ts_less(const Timestamp& a, const Timestamp& b) {
  return a.date < b.date || (a.date == b.date && a.proc < b.proc);
}

/// Pointwise extension of ts_less (or equality) to timestamp arrays.
inline bool tsa_leq(std::span<const Timestamp> a, std::span<const Timestamp> b) {
  if (a.size() != b.size()) {
    throw ContractViolation("tsa_leq: arrays of different length");
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k] == b[k] || ts_less(a[k], b[k]))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Protocol message carried by the FIFO layer.

/// FORWARD(m, sd, sn_sd, f, sn_f). `m.id` is (sd, sn_sd).
struct ForwardMsg {
  AppMessage m;
  ProcessId forwarder;
  SeqNum forwarder_sn = 0;

  ProcessId sd() const { return m.id.sender; }
  SeqNum sn_sd() const { return m.id.sn; }
};

/// A FIFO-broadcast unit on a point-to-point channel.
struct WirePacket {
  ProcessId origin;       // fifo-broadcaster
  SeqNum origin_sn = 0;   // per-origin FIFO number
  ForwardMsg body;
};

// ---------------------------------------------------------------------------
// Simulation configuration.

struct CrashSpec {
  ProcessId proc;
  Time at = 0;
  /// If set, the process crashes during its first send-to-all at or after
  /// `at`, reaching only the first `cut` destinations.
  std::optional<int> cut;
};

struct DelayModel {
  enum class Kind { bounded, unbounded };
  Kind kind = Kind::bounded;
  /// Bounded: samples lie in [1, delta].
  Time delta = 10;
  /// Unbounded: heavy-tailed samples of scale `scale`, truncated at `cap`.
  Time scale = 10;
  Time cap = 10'000;

  static DelayModel bounded(Time delta) { return {Kind::bounded, delta, 10, 10'000}; }
  static DelayModel unbounded(Time scale = 10, Time cap = 10'000) {
    return {Kind::unbounded, 10, scale, cap};
  }
};

struct SimConfig {
  int n = 1;
  int t = 0;
  std::vector<CrashSpec> crashes;
  DelayModel delay;
  std::uint64_t seed = 1;
  Time max_time = 1'000'000;
  /// FIFO layer skips its echo when the relaying process has already
  /// fifo-broadcast its own FORWARD for the same application message.
  bool relay_suppression = true;
  /// Self-channel sends arrive at the instant they are sent.
  bool instant_self_channel = true;
  /// Shared-memory construction: background progress task enabled.
  bool background_ticks = true;
  /// Shared-memory construction: gap range between background ticks.
  Time tick_min = 5;
  Time tick_max = 40;
  /// Shared-memory construction: from this time on, a background tick that
  /// delivers nothing stops the task until some process delivers again.
  Time tick_horizon = 0;
  /// Shared-memory construction: max gap before a shared operation takes effect.
  Time shm_gap = 5;

  bool faulty(ProcessId p) const {
    return std::any_of(crashes.begin(), crashes.end(),
                       [p](const CrashSpec& c) { return c.proc == p; });
  }
  std::vector<ProcessId> correct() const {
    std::vector<ProcessId> out;
    for (int i = 1; i <= n; ++i) {
      if (!faulty(ProcessId{i})) out.emplace_back(i);
    }
    return out;
  }
};

inline void validate(const SimConfig& cfg) {
  if (cfg.n < 1) throw ContractViolation("config: n must be >= 1");
  if (cfg.t < 0) throw ContractViolation("config: t must be >= 0");
  if (static_cast<int>(cfg.crashes.size()) > cfg.t) {
    throw ContractViolation("config: more crashes scheduled than t");
  }
  std::set<int> seen;
  for (const auto& c : cfg.crashes) {
    if (c.proc.value < 1 || c.proc.value > cfg.n) {
      throw ContractViolation("config: crash names process outside 1..n");
    }
    if (!seen.insert(c.proc.value).second) {
      throw ContractViolation("config: process crashes twice");
    }
    if (c.cut && (*c.cut < 0 || *c.cut > cfg.n)) {
      throw ContractViolation("config: crash cut outside 0..n");
    }
  }
  if (cfg.delay.kind == DelayModel::Kind::bounded && cfg.delay.delta <= 0) {
    throw ContractViolation("config: bounded delay requires delta > 0");
  }
  if (cfg.delay.kind == DelayModel::Kind::unbounded &&
      (cfg.delay.scale <= 0 || cfg.delay.cap < cfg.delay.scale)) {
    throw ContractViolation("config: unbounded delay requires 0 < scale <= cap");
  }
  if (cfg.tick_min <= 0 || cfg.tick_max < cfg.tick_min || cfg.shm_gap <= 0) {
    throw ContractViolation("config: tick/shm gaps must be positive");
  }
}

// ---------------------------------------------------------------------------
// Trace.

enum class EventKind {
  invoke,
  response,
  scd_deliver,
  net_send,
  net_recv,
  fifo_deliver,
  crash,
  shm_write,
  shm_snapshot,
  dropped,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::invoke: return "invoke";
    case EventKind::response: return "response";
    case EventKind::scd_deliver: return "scd_deliver";
    case EventKind::net_send: return "net_send";
    case EventKind::net_recv: return "net_recv";
    case EventKind::fifo_deliver: return "fifo_deliver";
    case EventKind::crash: return "crash";
    case EventKind::shm_write: return "shm_write";
    case EventKind::shm_snapshot: return "shm_snapshot";
    case EventKind::dropped: return "dropped";
  }
  return "?";
}

inline std::optional<EventKind> event_kind_from(std::string_view s) {
  for (auto k : {EventKind::invoke, EventKind::response, EventKind::scd_deliver, EventKind::net_send,
                 EventKind::net_recv, EventKind::fifo_deliver, EventKind::crash,
                 EventKind::shm_write, EventKind::shm_snapshot, EventKind::dropped}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

/// Wire-level fields of net_send / net_recv / fifo_deliver records.
struct WireInfo {
  ProcessId origin;
  SeqNum origin_sn = 0;
  ProcessId forwarder;
  SeqNum forwarder_sn = 0;

  friend bool operator==(const WireInfo&, const WireInfo&) = default;
};

struct Event {
  Time time = 0;
  std::uint64_t seq = 0;
  ProcessId proc;
  EventKind kind = EventKind::invoke;
  /// Protocol or object instance the record belongs to ("scd", "snapshot", ...).
  std::string instance;
  /// Operation name (invoke/response) or protocol message label (network).
  std::string label;
  std::int64_t op = -1;
  std::int64_t parent = -1;
  /// Channel peer: destination of a send, source of a receive.
  ProcessId peer;
  std::uint64_t uid = 0;
  WireInfo wire;
  /// Delivered set (scd_deliver), or the carried/broadcast message.
  MessageSet messages;
  /// Operation arguments (invoke) or result (response); free-form otherwise.
  nlohmann::json data;
};

struct Trace {
  SimConfig config;
  std::vector<Event> events;
  /// Time at which the run stopped.
  Time end_time = 0;
  /// True if the event queue drained before max_time.
  bool quiescent = true;
};

/// Delivered sets of `proc` on instance `instance`, in delivery order.
inline std::vector<MessageSet> delivered_sets(const Trace& trace, ProcessId proc,
                                              std::string_view instance) {
  std::vector<MessageSet> out;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::scd_deliver && e.proc == proc && e.instance == instance) {
      out.push_back(e.messages);
    }
  }
  return out;
}

/// Union of the first `x` sets scd-delivered by `proc`.
inline std::set<MessageId> delivered_prefix_union(const Trace& trace, ProcessId proc,
                                                  std::size_t x,
                                                  std::string_view instance = "scd") {
  std::set<MessageId> out;
  std::size_t taken = 0;
  for (const auto& e : trace.events) {
    if (taken == x) break;
    if (e.kind == EventKind::scd_deliver && e.proc == proc && e.instance == instance) {
      for (const auto& m : e.messages) out.insert(m.id);
      ++taken;
    }
  }
  if (taken < x) {
    throw ContractViolation("delivered_prefix_union: process delivered only " +
                            std::to_string(taken) + " sets, asked for " + std::to_string(x));
  }
  return out;
}

}  // namespace scd
