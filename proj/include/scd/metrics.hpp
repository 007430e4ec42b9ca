#pragma once

// Cost figures recomputed from a trace: FORWARD sends per application
// message, broadcast latency, and scd-broadcasts issued per object operation.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scd/fifo.hpp"
#include "scd/trace_io.hpp"

namespace scd {

struct BroadcastCost {
  std::string instance;
  MessageId id;
  ProcessId proc;
  std::int64_t op = -1;
  Time invoke_time = 0;
  std::optional<Time> self_delivery;
  std::optional<Time> response;
  std::uint64_t forward_sends = 0;
  std::uint64_t relay_sends = 0;

  std::optional<Time> latency() const {
    if (!self_delivery) return std::nullopt;
    return *self_delivery - invoke_time;
  }
};

struct OperationCost {
  std::string instance;
  std::string name;
  std::int64_t op = -1;
  ProcessId proc;
  Time invoke_time = 0;
  std::optional<Time> response;
  std::uint64_t scd_broadcasts = 0;
};

struct Metrics {
  int n = 0;
  std::vector<BroadcastCost> broadcasts;
  std::vector<OperationCost> operations;
  std::uint64_t raw_sends = 0;
  std::uint64_t forward_sends = 0;
  std::uint64_t relay_sends = 0;
  /// Messages whose FORWARD sends exceed n^2.
  std::vector<MessageId> forward_over_bound;
  /// Completed broadcasts slower than 2 delta (crash-free bounded runs only).
  std::vector<MessageId> latency_over_bound;
};

inline Metrics report_metrics(const Trace& trace) {
  Metrics m;
  m.n = trace.config.n;
  std::map<std::pair<std::string, MessageId>, std::size_t> by_msg;
  std::map<std::int64_t, std::size_t> by_op;

  for (const auto& e : trace.events) {
    switch (e.kind) {
      case EventKind::invoke:
        if (e.label == "scd_broadcast" && !e.messages.empty()) {
          BroadcastCost b;
          b.instance = e.instance;
          b.id = e.messages.front().id;
          b.proc = e.proc;
          b.op = e.op;
          b.invoke_time = e.time;
          by_msg[{e.instance, b.id}] = m.broadcasts.size();
          m.broadcasts.push_back(b);
          if (e.parent >= 0) {
            auto it = by_op.find(e.parent);
            if (it != by_op.end()) ++m.operations[it->second].scd_broadcasts;
          }
        } else {
          OperationCost o;
          o.instance = e.instance;
          o.name = e.label;
          o.op = e.op;
          o.proc = e.proc;
          o.invoke_time = e.time;
          by_op[e.op] = m.operations.size();
          m.operations.push_back(o);
        }
        break;
      case EventKind::response:
        if (e.label == "scd_broadcast" && !e.messages.empty()) {
          auto it = by_msg.find({e.instance, e.messages.front().id});
          if (it != by_msg.end()) m.broadcasts[it->second].response = e.time;
        } else if (auto it = by_op.find(e.op); it != by_op.end()) {
          m.operations[it->second].response = e.time;
        }
        break;
      case EventKind::scd_deliver:
        for (const auto& msg : e.messages) {
          if (msg.id.sender != e.proc) continue;
          auto it = by_msg.find({e.instance, msg.id});
          if (it != by_msg.end() && !m.broadcasts[it->second].self_delivery) {
            m.broadcasts[it->second].self_delivery = e.time;
          }
        }
        break;
      case EventKind::net_send: {
        ++m.raw_sends;
        bool forward = e.label == kForwardLabel;
        bool relay = e.label == kRelayLabel;
        if (forward) ++m.forward_sends;
        if (relay) ++m.relay_sends;
        if (e.messages.empty()) break;
        auto it = by_msg.find({e.instance, e.messages.front().id});
        if (it == by_msg.end()) break;
        if (forward) ++m.broadcasts[it->second].forward_sends;
        if (relay) ++m.broadcasts[it->second].relay_sends;
        break;
      }
      default:
        break;
    }
  }

  const auto bound = static_cast<std::uint64_t>(m.n) * static_cast<std::uint64_t>(m.n);
  const bool timed = trace.config.crashes.empty() &&
                     trace.config.delay.kind == DelayModel::Kind::bounded;
  for (const auto& b : m.broadcasts) {
    if (b.forward_sends > bound) m.forward_over_bound.push_back(b.id);
    auto lat = b.latency();
    if (timed && lat && *lat > 2 * trace.config.delay.delta) m.latency_over_bound.push_back(b.id);
  }
  return m;
}

inline ojson to_ojson(const Metrics& m) {
  auto id_json = [](const MessageId& id) { return ojson{{"sender", id.sender.value}, {"sn", id.sn}}; };
  ojson broadcasts = ojson::array();
  for (const auto& b : m.broadcasts) {
    ojson j{{"instance", b.instance}, {"message", id_json(b.id)}, {"proc", b.proc.value},
            {"op", b.op},             {"invoke", b.invoke_time}};
    j["self_delivery"] = b.self_delivery ? ojson(*b.self_delivery) : ojson();
    j["response"] = b.response ? ojson(*b.response) : ojson();
    j["latency"] = b.latency() ? ojson(*b.latency()) : ojson();
    j["forward_sends"] = b.forward_sends;
    j["relay_sends"] = b.relay_sends;
    broadcasts.push_back(std::move(j));
  }
  ojson ops = ojson::array();
  for (const auto& o : m.operations) {
    ojson j{{"instance", o.instance}, {"name", o.name}, {"op", o.op},
            {"proc", o.proc.value},   {"invoke", o.invoke_time}};
    j["response"] = o.response ? ojson(*o.response) : ojson();
    j["latency"] = o.response ? ojson(*o.response - o.invoke_time) : ojson();
    j["scd_broadcasts"] = o.scd_broadcasts;
    ops.push_back(std::move(j));
  }
  ojson over_fwd = ojson::array();
  for (const auto& id : m.forward_over_bound) over_fwd.push_back(id_json(id));
  ojson over_lat = ojson::array();
  for (const auto& id : m.latency_over_bound) over_lat.push_back(id_json(id));
  return ojson{{"n", m.n},
               {"totals",
                {{"raw_sends", m.raw_sends},
                 {"forward_sends", m.forward_sends},
                 {"relay_sends", m.relay_sends},
                 {"broadcasts", m.broadcasts.size()},
                 {"operations", m.operations.size()}}},
               {"flags", {{"forward_over_n2", over_fwd}, {"latency_over_2delta", over_lat}}},
               {"broadcasts", std::move(broadcasts)},
               {"operations", std::move(ops)}};
}

}  // namespace scd
