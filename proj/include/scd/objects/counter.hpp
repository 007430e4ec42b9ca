#pragma once

// Counter over SCD-broadcast.
//
// Atomic: increase/decrease broadcast PLUS/MINUS and wait for their own
// delivery; read runs a SYNC round. Sequentially consistent: increase and
// decrease return at once, counting in lsc the updates not yet applied
// locally, and read waits until lsc = 0.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "scd/objects/pattern.hpp"

namespace scd {

struct CounterReplicaState {
  std::int64_t counter = 0;
  /// Own updates broadcast but not yet delivered locally (sequential variant).
  std::int64_t lsc = 0;
};

class CounterObject {
 public:
  using ReadCallback = std::function<void(std::int64_t)>;
  using UpdateCallback = std::function<void()>;

  CounterObject(Simulator& sim, ScdService& service, std::string name = "counter",
                Consistency consistency = Consistency::atomic)
      : sim_(sim),
        service_(service),
        log_(sim, std::move(name)),
        pattern_(sim, service),
        consistency_(consistency),
        replicas_(static_cast<std::size_t>(sim.n())),
        read_waiters_(static_cast<std::size_t>(sim.n())) {
    service.on_deliver([this](ProcessId p, const MessageSet& set) { on_set(p, set); });
  }

  const std::string& instance() const { return log_.instance(); }
  Consistency consistency() const { return consistency_; }
  const CounterReplicaState& replica(ProcessId p) const { return replicas_[p.slot()]; }

  void increase(ProcessId p, UpdateCallback done, std::int64_t parent = -1) {
    update(p, "inc", "PLUS", std::move(done), parent);
  }
  void decrease(ProcessId p, UpdateCallback done, std::int64_t parent = -1) {
    update(p, "dec", "MINUS", std::move(done), parent);
  }

  void read(ProcessId p, ReadCallback done, std::int64_t parent = -1) {
    if (sim_.crashed(p)) {
      record_dropped(sim_, p, instance(), "read");
      return;
    }
    std::int64_t op = log_.invoke(p, "read", nlohmann::json::array(), parent);
    auto finish = [this, p, op, done = std::move(done)] {
      std::int64_t value = replicas_[p.slot()].counter;
      log_.respond(p, "read", op, value);
      if (done) sim_.post(p, [done, value] { done(value); });
    };
    if (consistency_ == Consistency::atomic) {
      pattern_.round(p, ObjectMsg{"SYNC", p.value, {}}, op, std::move(finish));
      return;
    }
    if (replicas_[p.slot()].lsc == 0) {
      finish();
    } else {
      read_waiters_[p.slot()] = std::move(finish);
    }
  }

 private:
  void update(ProcessId p, const std::string& op_name, const std::string& type,
              UpdateCallback done, std::int64_t parent) {
    if (sim_.crashed(p)) {
      record_dropped(sim_, p, instance(), op_name);
      return;
    }
    std::int64_t op = log_.invoke(p, op_name, nlohmann::json::array(), parent);
    ObjectMsg msg{type, p.value, {}};
    if (consistency_ == Consistency::atomic) {
      pattern_.round(p, msg, op, [this, p, op, op_name, done = std::move(done)] {
        log_.respond(p, op_name, op, nlohmann::json{});
        if (done) sim_.post(p, done);
      });
      return;
    }
    replicas_[p.slot()].lsc += 1;
    service_.broadcast(p, msg.encode(), {}, op);
    log_.respond(p, op_name, op, nlohmann::json{});
    if (done) sim_.post(p, std::move(done));
  }

  void on_set(ProcessId p, const MessageSet& set) {
    auto msgs = decode_set(set);
    std::int64_t plus = 0, minus = 0, own = 0;
    for (const auto& m : msgs) {
      if (m.type == "PLUS") {
        ++plus;
      } else if (m.type == "MINUS") {
        ++minus;
      } else if (m.type != "SYNC") {
        throw ProtocolError("counter: unexpected message " + m.type);
      }
      if ((m.type == "PLUS" || m.type == "MINUS") && m.from == p.value) ++own;
    }
    auto& rep = replicas_[p.slot()];
    rep.counter += plus - minus;
    if (consistency_ == Consistency::sequential) {
      rep.lsc -= own;
      if (rep.lsc < 0) throw ProtocolError("counter: lsc below zero");
      if (rep.lsc == 0) {
        if (auto fn = std::exchange(read_waiters_[p.slot()], {})) sim_.post(p, std::move(fn));
      }
      return;
    }
    pattern_.settle(p, msgs);
  }

  Simulator& sim_;
  ScdService& service_;
  OpLog log_;
  PatternRuntime pattern_;
  Consistency consistency_;
  std::vector<CounterReplicaState> replicas_;
  std::vector<std::function<void()>> read_waiters_;
};

}  // namespace scd
