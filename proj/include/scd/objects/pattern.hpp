#pragma once

// Shared client/server skeleton of every object and task built on
// SCD-broadcast: an operation runs zero, one or two synchronizing rounds
// (done <- false; scd-broadcast; wait(done)), and the delivery handler sets
// done once the set carries a message issued by the local process.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scd/service.hpp"

namespace scd {

enum class Consistency { atomic, sequential };

/// Object-level message carried as an SCD payload. `from` is the issuing
/// process; `body` holds the type-specific fields.
struct ObjectMsg {
  std::string type;
  int from = 0;
  nlohmann::json body;

  std::string encode() const {
    nlohmann::json j{{"type", type}, {"from", from}};
    if (!body.is_null()) j["body"] = body;
    return j.dump();
  }

  static ObjectMsg decode(const std::string& payload) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(payload);
      return ObjectMsg{j.at("type").get<std::string>(), j.at("from").get<int>(),
                       j.contains("body") ? j.at("body") : nlohmann::json{}};
    } catch (const nlohmann::json::exception& ex) {
      throw ProtocolError(std::string("malformed object message: ") + ex.what());
    }
  }
};

/// Invoke/response records for object operations.
class OpLog {
 public:
  OpLog(Simulator& sim, std::string instance) : sim_(sim), instance_(std::move(instance)) {}

  const std::string& instance() const { return instance_; }

  std::int64_t invoke(ProcessId p, const std::string& op, nlohmann::json args,
                      std::int64_t parent = -1) {
    std::int64_t id = sim_.next_op_id();
    Event e;
    e.proc = p;
    e.kind = EventKind::invoke;
    e.instance = instance_;
    e.label = op;
    e.op = id;
    e.parent = parent;
    e.data = std::move(args);
    sim_.record(std::move(e));
    return id;
  }

  void respond(ProcessId p, const std::string& op, std::int64_t id, nlohmann::json result) {
    Event e;
    e.proc = p;
    e.kind = EventKind::response;
    e.instance = instance_;
    e.label = op;
    e.op = id;
    e.data = std::move(result);
    sim_.record(std::move(e));
  }

 private:
  Simulator& sim_;
  std::string instance_;
};

/// Per-process done flags plus the continuation parked on each.
class PatternRuntime {
 public:
  PatternRuntime(Simulator& sim, ScdService& service)
      : sim_(sim), service_(service), done_(static_cast<std::size_t>(sim.n()), true),
        resume_(static_cast<std::size_t>(sim.n())) {}

  /// done <- false; scd-broadcast msg; wait(done); then `resume`.
  void round(ProcessId p, const ObjectMsg& msg, std::int64_t parent, std::function<void()> resume) {
    if (!done_[p.slot()]) throw ContractViolation("pattern: round started while another is pending");
    done_[p.slot()] = false;
    resume_[p.slot()] = std::move(resume);
    service_.broadcast(p, msg.encode(), {}, parent);
  }

  /// The done rule, evaluated after the object-specific handling of `set`.
  void settle(ProcessId p, const std::vector<ObjectMsg>& set) {
    if (done_[p.slot()]) return;
    for (const auto& m : set) {
      if (m.from == p.value) {
        done_[p.slot()] = true;
        if (auto fn = std::exchange(resume_[p.slot()], {})) sim_.post(p, std::move(fn));
        return;
      }
    }
  }

  bool done(ProcessId p) const { return done_[p.slot()]; }

 private:
  Simulator& sim_;
  ScdService& service_;
  std::vector<bool> done_;
  std::vector<std::function<void()>> resume_;
};

inline std::vector<ObjectMsg> decode_set(const MessageSet& set) {
  std::vector<ObjectMsg> out;
  out.reserve(set.size());
  for (const auto& m : set) {
    auto msg = ObjectMsg::decode(m.payload);
    if (msg.from != m.id.sender.value) {
      throw ProtocolError("object message issuer differs from broadcaster");
    }
    out.push_back(std::move(msg));
  }
  return out;
}

}  // namespace scd
