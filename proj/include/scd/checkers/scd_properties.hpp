#pragma once

// Exact trace checks of the SCD-broadcast properties: Validity, Integrity,
// MS-Ordering, Termination-1, Termination-2 and Containment.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scd/checkers/verdict.hpp"
#include "scd/core.hpp"

namespace scd {

namespace detail {

inline nlohmann::json message_json(const MessageId& id, const std::map<MessageId, std::string>& names) {
  nlohmann::json j{{"sender", id.sender.value}, {"sn", id.sn}};
  auto it = names.find(id);
  if (it != names.end()) j["payload"] = it->second;
  return j;
}

struct ScdObservations {
  struct Broadcast {
    ProcessId proc;
    std::uint64_t invoke_seq = 0;
    bool returned = false;
  };
  std::map<MessageId, Broadcast> broadcasts;
  std::map<MessageId, std::string> names;
  /// Per process (0-based slot): delivered sets with their record seq.
  std::vector<std::vector<std::pair<std::uint64_t, std::vector<MessageId>>>> sets;
};

inline ScdObservations observe(const Trace& trace, std::string_view instance) {
  ScdObservations obs;
  obs.sets.resize(static_cast<std::size_t>(trace.config.n));
  std::map<std::int64_t, MessageId> op_msg;
  for (const auto& e : trace.events) {
    if (e.instance != instance) continue;
    if (e.kind == EventKind::invoke && e.label == "scd_broadcast" && !e.messages.empty()) {
      const auto& m = e.messages.front();
      obs.broadcasts[m.id] = {e.proc, e.seq, false};
      obs.names[m.id] = m.payload;
      op_msg[e.op] = m.id;
    } else if (e.kind == EventKind::response && e.label == "scd_broadcast") {
      auto it = op_msg.find(e.op);
      if (it != op_msg.end()) obs.broadcasts[it->second].returned = true;
    } else if (e.kind == EventKind::scd_deliver && e.proc.value >= 1) {
      std::vector<MessageId> ids;
      for (const auto& m : e.messages) {
        ids.push_back(m.id);
        obs.names.emplace(m.id, m.payload);
      }
      obs.sets[e.proc.slot()].emplace_back(e.seq, std::move(ids));
    }
  }
  return obs;
}

}  // namespace detail

inline Verdict check_validity(const detail::ScdObservations& obs) {
  for (std::size_t i = 0; i < obs.sets.size(); ++i) {
    for (const auto& [seq, set] : obs.sets[i]) {
      for (const auto& id : set) {
        auto it = obs.broadcasts.find(id);
        if (it == obs.broadcasts.end() || it->second.invoke_seq > seq) {
          return Verdict::fail("Validity",
                               {{"process", i + 1}, {"message", detail::message_json(id, obs.names)}},
                               "delivered message never scd-broadcast before delivery");
        }
      }
    }
  }
  return Verdict::pass("Validity");
}

inline Verdict check_integrity(const detail::ScdObservations& obs) {
  for (std::size_t i = 0; i < obs.sets.size(); ++i) {
    std::set<MessageId> seen;
    for (const auto& [seq, set] : obs.sets[i]) {
      for (const auto& id : set) {
        if (!seen.insert(id).second) {
          return Verdict::fail("Integrity",
                               {{"process", i + 1}, {"message", detail::message_json(id, obs.names)}},
                               "message delivered twice");
        }
      }
    }
  }
  return Verdict::pass("Integrity");
}

/// Fails iff some p_i delivers m in an earlier set than m' while some p_j
/// delivers m' in an earlier set than m.
inline Verdict check_ms_ordering(const detail::ScdObservations& obs) {
  std::vector<std::map<MessageId, std::size_t>> index(obs.sets.size());
  for (std::size_t i = 0; i < obs.sets.size(); ++i) {
    for (std::size_t k = 0; k < obs.sets[i].size(); ++k) {
      for (const auto& id : obs.sets[i][k].second) index[i].emplace(id, k);
    }
  }
  for (std::size_t i = 0; i < index.size(); ++i) {
    for (std::size_t j = i + 1; j < index.size(); ++j) {
      for (const auto& [m, im] : index[i]) {
        auto jm = index[j].find(m);
        if (jm == index[j].end()) continue;
        for (const auto& [m2, im2] : index[i]) {
          if (im >= im2) continue;
          auto jm2 = index[j].find(m2);
          if (jm2 == index[j].end()) continue;
          if (jm2->second < jm->second) {
            return Verdict::fail("MS-Ordering",
                                 {{"process_i", i + 1},
                                  {"process_j", j + 1},
                                  {"m", detail::message_json(m, obs.names)},
                                  {"m_prime", detail::message_json(m2, obs.names)}},
                                 "p_i delivers m before m_prime, p_j delivers m_prime before m");
          }
        }
      }
    }
  }
  return Verdict::pass("MS-Ordering");
}

inline Verdict check_termination1(const detail::ScdObservations& obs, const SimConfig& cfg) {
  for (const auto& [id, b] : obs.broadcasts) {
    if (cfg.faulty(b.proc)) continue;
    bool self_delivered = false;
    for (const auto& [seq, set] : obs.sets[b.proc.slot()]) {
      if (std::find(set.begin(), set.end(), id) != set.end()) self_delivered = true;
    }
    if (!b.returned || !self_delivered) {
      return Verdict::fail("Termination-1",
                           {{"process", b.proc.value},
                            {"message", detail::message_json(id, obs.names)},
                            {"returned", b.returned},
                            {"self_delivered", self_delivered}},
                           "non-faulty broadcaster did not return or did not deliver its message");
    }
  }
  return Verdict::pass("Termination-1");
}

inline Verdict check_termination2(const detail::ScdObservations& obs, const SimConfig& cfg) {
  std::set<MessageId> delivered_somewhere;
  std::vector<std::set<MessageId>> per(obs.sets.size());
  for (std::size_t i = 0; i < obs.sets.size(); ++i) {
    for (const auto& [seq, set] : obs.sets[i]) {
      delivered_somewhere.insert(set.begin(), set.end());
      per[i].insert(set.begin(), set.end());
    }
  }
  for (const auto& id : delivered_somewhere) {
    for (auto p : cfg.correct()) {
      if (!per[p.slot()].count(id)) {
        return Verdict::fail("Termination-2",
                             {{"process", p.value}, {"message", detail::message_json(id, obs.names)}},
                             "message delivered somewhere but not at a non-faulty process");
      }
    }
  }
  return Verdict::pass("Termination-2");
}

/// Prefix unions of any two processes are comparable under inclusion.
inline Verdict check_containment(const detail::ScdObservations& obs) {
  std::vector<std::vector<std::vector<MessageId>>> prefixes(obs.sets.size());
  for (std::size_t i = 0; i < obs.sets.size(); ++i) {
    std::vector<MessageId> acc;
    for (const auto& [seq, set] : obs.sets[i]) {
      acc.insert(acc.end(), set.begin(), set.end());
      std::sort(acc.begin(), acc.end());
      prefixes[i].push_back(acc);
    }
  }
  auto subset = [](const std::vector<MessageId>& a, const std::vector<MessageId>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    for (std::size_t j = i + 1; j < prefixes.size(); ++j) {
      for (std::size_t x = 0; x < prefixes[i].size(); ++x) {
        for (std::size_t y = 0; y < prefixes[j].size(); ++y) {
          const auto& a = prefixes[i][x];
          const auto& b = prefixes[j][y];
          if (!subset(a, b) && !subset(b, a)) {
            return Verdict::fail("Containment",
                                 {{"process_i", i + 1}, {"x", x + 1}, {"process_j", j + 1}, {"y", y + 1}},
                                 "prefix unions are incomparable");
          }
        }
      }
    }
  }
  return Verdict::pass("Containment");
}

/// All six properties on instance `instance`, in a fixed order.
inline std::vector<Verdict> check_scd_properties(const Trace& trace, std::string_view instance = "scd") {
  auto obs = detail::observe(trace, instance);
  return {check_validity(obs),
          check_integrity(obs),
          check_ms_ordering(obs),
          check_termination1(obs, trace.config),
          check_termination2(obs, trace.config),
          check_containment(obs)};
}

/// Builds a crash-free trace in which message `k` (payload "m<k>") is
/// scd-broadcast by process ((k - 1) mod n) + 1 and each process delivers the
/// given sets in order. Used to feed hand-written delivery patterns to the
/// checkers.
inline Trace make_delivery_trace(int n, const std::vector<std::vector<std::vector<int>>>& sets,
                                 std::string instance = "scd") {
  Trace trace;
  trace.config.n = n;
  trace.config.t = 0;
  std::uint64_t seq = 0;
  std::set<int> all;
  for (const auto& proc_sets : sets) {
    for (const auto& s : proc_sets) all.insert(s.begin(), s.end());
  }
  auto msg = [n](int k) {
    return AppMessage{MessageId{ProcessId{(k - 1) % n + 1}, static_cast<SeqNum>(k)},
                      "m" + std::to_string(k)};
  };
  std::map<int, std::int64_t> op_of;
  for (int k : all) {
    Event e;
    e.seq = ++seq;
    e.proc = msg(k).id.sender;
    e.kind = EventKind::invoke;
    e.instance = instance;
    e.label = "scd_broadcast";
    e.op = k;
    e.messages.push_back(msg(k));
    trace.events.push_back(e);
  }
  Time t = 1;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (const auto& s : sets[i]) {
      Event e;
      e.time = t;
      e.seq = ++seq;
      e.proc = ProcessId{static_cast<int>(i) + 1};
      e.kind = EventKind::scd_deliver;
      e.instance = instance;
      for (int k : s) e.messages.push_back(msg(k));
      normalize(e.messages);
      trace.events.push_back(e);
      for (int k : s) {
        if (msg(k).id.sender == e.proc) {
          Event r;
          r.time = t;
          r.seq = ++seq;
          r.proc = e.proc;
          r.kind = EventKind::response;
          r.instance = instance;
          r.label = "scd_broadcast";
          r.op = k;
          r.messages.push_back(msg(k));
          trace.events.push_back(r);
        }
      }
    }
    ++t;
  }
  trace.end_time = t;
  return trace;
}

}  // namespace scd
