#pragma once

// Line-delimited JSON trace format. Line 1 is a header
//   {"format":"scd-trace/1","config":{...},"end_time":T,"quiescent":B}
// and every following line is one event
//   {"time":T,"seq":S,"proc":P,"kind":K,"detail":{...}}
// Field order is fixed; detail keys that hold their default value are omitted.
// docs/trace-format.md lists every detail key.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "scd/core.hpp"

namespace scd {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kTraceFormat = "scd-trace/1";

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline ojson to_ojson(const AppMessage& m) {
  return ojson{{"sender", m.id.sender.value}, {"sn", m.id.sn}, {"payload", m.payload}};
}

inline AppMessage app_message_from(const nlohmann::json& j) {
  return AppMessage{MessageId{ProcessId{j.at("sender").get<int>()}, j.at("sn").get<SeqNum>()},
                    j.at("payload").get<std::string>()};
}

inline ojson to_ojson(const DelayModel& d) {
  if (d.kind == DelayModel::Kind::bounded) return ojson{{"bounded", d.delta}};
  return ojson{{"unbounded", ojson{{"scale", d.scale}, {"cap", d.cap}}}};
}

inline DelayModel delay_model_from(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "unbounded") return DelayModel::unbounded();
  if (!j.is_object()) throw std::invalid_argument("delay: expected object or \"unbounded\"");
  if (j.contains("bounded")) return DelayModel::bounded(j.at("bounded").get<Time>());
  if (j.contains("unbounded")) {
    const auto& u = j.at("unbounded");
    DelayModel d = DelayModel::unbounded();
    if (u.is_object()) {
      d.scale = u.value("scale", d.scale);
      d.cap = u.value("cap", d.cap);
    }
    return d;
  }
  throw std::invalid_argument("delay: expected key \"bounded\" or \"unbounded\"");
}

inline ojson to_ojson(const SimConfig& c) {
  ojson crashes = ojson::array();
  for (const auto& cr : c.crashes) {
    ojson e{{"proc", cr.proc.value}, {"time", cr.at}};
    if (cr.cut) e["cut"] = *cr.cut;
    crashes.push_back(std::move(e));
  }
  return ojson{{"n", c.n},
               {"t", c.t},
               {"seed", c.seed},
               {"delay", to_ojson(c.delay)},
               {"crashes", std::move(crashes)},
               {"max_time", c.max_time},
               {"relay_suppression", c.relay_suppression},
               {"instant_self_channel", c.instant_self_channel},
               {"background_ticks", c.background_ticks},
               {"tick_min", c.tick_min},
               {"tick_max", c.tick_max},
               {"tick_horizon", c.tick_horizon},
               {"shm_gap", c.shm_gap}};
}

inline SimConfig sim_config_from(const nlohmann::json& j) {
  SimConfig c;
  c.n = j.at("n").get<int>();
  c.t = j.at("t").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.delay = delay_model_from(j.at("delay"));
  for (const auto& cr : j.value("crashes", nlohmann::json::array())) {
    CrashSpec spec{ProcessId{cr.at("proc").get<int>()}, cr.at("time").get<Time>(), std::nullopt};
    if (cr.contains("cut")) spec.cut = cr.at("cut").get<int>();
    c.crashes.push_back(spec);
  }
  c.max_time = j.value("max_time", c.max_time);
  c.relay_suppression = j.value("relay_suppression", c.relay_suppression);
  c.instant_self_channel = j.value("instant_self_channel", c.instant_self_channel);
  c.background_ticks = j.value("background_ticks", c.background_ticks);
  c.tick_min = j.value("tick_min", c.tick_min);
  c.tick_max = j.value("tick_max", c.tick_max);
  c.tick_horizon = j.value("tick_horizon", c.tick_horizon);
  c.shm_gap = j.value("shm_gap", c.shm_gap);
  return c;
}

inline ojson to_ojson(const Event& e) {
  ojson detail = ojson::object();
  if (!e.instance.empty()) detail["instance"] = e.instance;
  if (!e.label.empty()) detail["label"] = e.label;
  if (e.op >= 0) detail["op"] = e.op;
  if (e.parent >= 0) detail["parent"] = e.parent;
  if (e.peer.value != 0) detail["peer"] = e.peer.value;
  if (e.uid != 0) detail["uid"] = e.uid;
  if (e.wire != WireInfo{}) {
    detail["wire"] = ojson{{"origin", e.wire.origin.value},
                           {"origin_sn", e.wire.origin_sn},
                           {"forwarder", e.wire.forwarder.value},
                           {"forwarder_sn", e.wire.forwarder_sn}};
  }
  if (!e.messages.empty()) {
    ojson ms = ojson::array();
    for (const auto& m : e.messages) ms.push_back(to_ojson(m));
    detail["messages"] = std::move(ms);
  }
  if (!e.data.is_null()) detail["data"] = ojson::parse(e.data.dump());
  return ojson{{"time", e.time},
               {"seq", e.seq},
               {"proc", e.proc.value},
               {"kind", to_string(e.kind)},
               {"detail", std::move(detail)}};
}

inline Event event_from(const nlohmann::json& j) {
  Event e;
  e.time = j.at("time").get<Time>();
  e.seq = j.at("seq").get<std::uint64_t>();
  e.proc = ProcessId{j.at("proc").get<int>()};
  auto kind = event_kind_from(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown event kind");
  e.kind = *kind;
  const auto& d = j.at("detail");
  e.instance = d.value("instance", std::string{});
  e.label = d.value("label", std::string{});
  e.op = d.value("op", std::int64_t{-1});
  e.parent = d.value("parent", std::int64_t{-1});
  e.peer = ProcessId{d.value("peer", 0)};
  e.uid = d.value("uid", std::uint64_t{0});
  if (d.contains("wire")) {
    const auto& w = d.at("wire");
    e.wire = WireInfo{ProcessId{w.at("origin").get<int>()}, w.at("origin_sn").get<SeqNum>(),
                      ProcessId{w.at("forwarder").get<int>()}, w.at("forwarder_sn").get<SeqNum>()};
  }
  if (d.contains("messages")) {
    for (const auto& m : d.at("messages")) e.messages.push_back(app_message_from(m));
  }
  if (d.contains("data")) e.data = d.at("data");
  return e;
}

inline void write_trace(std::ostream& os, const Trace& trace) {
  ojson header{{"format", kTraceFormat},
               {"config", to_ojson(trace.config)},
               {"end_time", trace.end_time},
               {"quiescent", trace.quiescent}};
  os << header.dump() << '\n';
  for (const auto& e : trace.events) os << to_ojson(e).dump() << '\n';
}

inline std::string trace_to_string(const Trace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

inline Trace read_trace(std::istream& is) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw TraceFormatError(lineno, ex.what());
    }
    try {
      if (!header_seen) {
        if (j.value("format", std::string{}) != kTraceFormat) {
          throw TraceFormatError(lineno, "missing or unknown format header");
        }
        trace.config = sim_config_from(j.at("config"));
        trace.end_time = j.at("end_time").get<Time>();
        trace.quiescent = j.at("quiescent").get<bool>();
        header_seen = true;
        continue;
      }
      trace.events.push_back(event_from(j));
    } catch (const TraceFormatError&) {
      throw;
    } catch (const std::exception& ex) {
      throw TraceFormatError(lineno, ex.what());
    }
  }
  if (!header_seen) throw TraceFormatError(lineno, "empty trace");
  return trace;
}

inline Trace trace_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_trace(is);
}

}  // namespace scd
