#pragma once

// MWMR snapshot object over SCD-broadcast.
//
// Atomic variant: snapshot() = SYNC round; write(r, v) = SYNC round, then a
// WRITE round stamped <tsa[r].date + 1, i>. Sequentially consistent variant:
// the SYNC rounds are dropped, so snapshot() is local and write() is a single
// WRITE round.

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scd/objects/pattern.hpp"

namespace scd {

template <class V>
struct SnapshotReplicaState {
  std::vector<V> reg;
  std::vector<Timestamp> tsa;
};

template <class V>
class SnapshotObject {
 public:
  using ReadCallback = std::function<void(const std::vector<V>&)>;
  using WriteCallback = std::function<void()>;

  SnapshotObject(Simulator& sim, ScdService& service, std::string name, int registers, V initial,
                 Consistency consistency = Consistency::atomic)
      : sim_(sim),
        log_(sim, std::move(name)),
        pattern_(sim, service),
        registers_(registers),
        consistency_(consistency),
        replicas_(static_cast<std::size_t>(sim.n())) {
    if (registers < 1) throw ContractViolation("snapshot: need at least one register");
    for (auto& r : replicas_) {
      r.reg.assign(static_cast<std::size_t>(registers), initial);
      r.tsa.assign(static_cast<std::size_t>(registers), Timestamp{0, 0});
    }
    service.on_deliver([this](ProcessId p, const MessageSet& set) { on_set(p, set); });
  }

  int registers() const { return registers_; }
  Consistency consistency() const { return consistency_; }
  const std::string& instance() const { return log_.instance(); }
  const SnapshotReplicaState<V>& replica(ProcessId p) const { return replicas_[p.slot()]; }

  void snapshot(ProcessId p, ReadCallback done, std::int64_t parent = -1) {
    if (sim_.crashed(p)) {
      record_dropped(sim_, p, instance(), "snapshot");
      return;
    }
    std::int64_t op = log_.invoke(p, "snapshot", nlohmann::json::array(), parent);
    auto finish = [this, p, op, done = std::move(done)] {
      auto values = replicas_[p.slot()].reg;
      log_.respond(p, "snapshot", op, nlohmann::json(values));
      if (done) sim_.post(p, [done, values] { done(values); });
    };
    if (consistency_ == Consistency::sequential) {
      finish();
      return;
    }
    pattern_.round(p, sync_msg(p), op, std::move(finish));
  }

  /// `r` is 1-based.
  void write(ProcessId p, int r, V v, WriteCallback done, std::int64_t parent = -1) {
    if (r < 1 || r > registers_) {
      throw ContractViolation("snapshot: register " + std::to_string(r) + " outside 1.." +
                              std::to_string(registers_));
    }
    if (sim_.crashed(p)) {
      record_dropped(sim_, p, instance(), "write");
      return;
    }
    std::int64_t op = log_.invoke(p, "write", nlohmann::json::array({r, v}), parent);
    auto write_round = [this, p, r, v = std::move(v), op, done = std::move(done)]() mutable {
      const auto& rep = replicas_[p.slot()];
      Timestamp ts{rep.tsa[static_cast<std::size_t>(r - 1)].date + 1, p.value};
      ObjectMsg msg{"WRITE", p.value,
                    nlohmann::json{{"reg", r}, {"value", v}, {"ts", {ts.date, ts.proc}}}};
      pattern_.round(p, msg, op, [this, p, op, done = std::move(done)] {
        log_.respond(p, "write", op, nlohmann::json{});
        if (done) sim_.post(p, done);
      });
    };
    if (consistency_ == Consistency::sequential) {
      write_round();
      return;
    }
    pattern_.round(p, sync_msg(p), op, std::move(write_round));
  }

 private:
  static ObjectMsg sync_msg(ProcessId p) { return ObjectMsg{"SYNC", p.value, {}}; }

  void on_set(ProcessId p, const MessageSet& set) {
    auto msgs = decode_set(set);
    // Per register, the WRITE with the greatest timestamp in this set.
    std::map<int, std::pair<Timestamp, const nlohmann::json*>> best;
    for (const auto& m : msgs) {
      if (m.type == "SYNC") continue;
      if (m.type != "WRITE") throw ProtocolError("snapshot: unexpected message " + m.type);
      int r = m.body.at("reg").get<int>();
      if (r < 1 || r > registers_) throw ProtocolError("snapshot: WRITE to unknown register");
      Timestamp ts{m.body.at("ts").at(0).get<std::uint64_t>(), m.body.at("ts").at(1).get<int>()};
      auto it = best.find(r);
      if (it == best.end() || ts_less(it->second.first, ts)) {
        best[r] = {ts, &m.body.at("value")};
      }
    }
    auto& rep = replicas_[p.slot()];
    for (const auto& [r, winner] : best) {
      auto k = static_cast<std::size_t>(r - 1);
      if (ts_less(rep.tsa[k], winner.first)) {
        rep.reg[k] = winner.second->template get<V>();
        rep.tsa[k] = winner.first;
      }
    }
    pattern_.settle(p, msgs);
  }

  Simulator& sim_;
  OpLog log_;
  PatternRuntime pattern_;
  int registers_;
  Consistency consistency_;
  std::vector<SnapshotReplicaState<V>> replicas_;
};

}  // namespace scd
