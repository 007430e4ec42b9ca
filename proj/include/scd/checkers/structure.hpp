#pragma once

// Structural validation of simulator traces. Every generated trace is
// expected to pass this before property checkers look at it.

#include <map>
#include <set>
#include <string>

#include "scd/checkers/verdict.hpp"
#include "scd/core.hpp"

namespace scd {

inline Verdict validate_trace(const Trace& trace) {
  const std::string prop = "structure";
  auto fail = [&](const Event& e, const std::string& why) {
    return Verdict::fail(prop, nlohmann::json{{"seq", e.seq}, {"reason", why}}, why);
  };
  const int n = trace.config.n;
  std::set<int> crashed;
  std::map<std::uint64_t, const Event*> sends;
  std::set<std::uint64_t> received;
  std::map<std::int64_t, ProcessId> open_ops;
  std::set<std::int64_t> seen_ops;
  const Event* prev = nullptr;

  for (const auto& e : trace.events) {
    if (prev && !(prev->time < e.time || (prev->time == e.time && prev->seq < e.seq))) {
      return fail(e, "(time, seq) not strictly increasing");
    }
    if (prev && e.time < prev->time) return fail(e, "time went backwards");
    prev = &e;
    if (e.proc.value < 0 || e.proc.value > n) return fail(e, "process id outside 0..n");
    if (e.proc.value == 0 && e.kind != EventKind::dropped) {
      return fail(e, "environment record of a process event kind");
    }
    if (crashed.count(e.proc.value)) return fail(e, "event after crash");
    switch (e.kind) {
      case EventKind::crash:
        crashed.insert(e.proc.value);
        break;
      case EventKind::net_send:
        if (e.uid == 0 || !sends.emplace(e.uid, &e).second) return fail(e, "bad or reused send uid");
        break;
      case EventKind::net_recv: {
        auto it = sends.find(e.uid);
        if (it == sends.end()) return fail(e, "receive without matching send");
        if (it->second->peer != e.proc || it->second->proc != e.peer) {
          return fail(e, "receive endpoints differ from send");
        }
        if (!received.insert(e.uid).second) return fail(e, "message received twice");
        break;
      }
      case EventKind::invoke:
        if (e.op < 0 || !seen_ops.insert(e.op).second) return fail(e, "bad or reused op id");
        open_ops.emplace(e.op, e.proc);
        break;
      case EventKind::response: {
        auto it = open_ops.find(e.op);
        if (it == open_ops.end()) return fail(e, "response without open invocation");
        if (it->second != e.proc) return fail(e, "response on another process");
        open_ops.erase(it);
        break;
      }
      case EventKind::scd_deliver:
        if (e.messages.empty()) return fail(e, "empty delivered set");
        break;
      default:
        break;
    }
  }
  if (trace.quiescent) {
    for (const auto& [uid, send] : sends) {
      if (received.count(uid)) continue;
      if (crashed.count(send->peer.value)) continue;
      return fail(*send, "reliable channel lost a message to a live process");
    }
  }
  return Verdict::pass(prop);
}

}  // namespace scd
