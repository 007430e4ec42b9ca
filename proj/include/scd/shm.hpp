#pragma once

// Single-writer snapshot memories for the shared-memory construction.
// Operations are asynchronous: a call returns at once and its continuation
// runs when the operation has taken effect.

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scd/objects/snapshot.hpp"
#include "scd/sim.hpp"

namespace scd {

/// Sequence of delivered sets, as kept in SETSEQ entries.
using SetSeq = std::vector<MessageSet>;

/// Messages to attach to a shm_write record: the set itself for SENT
/// entries, the newly appended set for SETSEQ entries.
inline MessageSet shm_summary(const MessageSet& s) { return s; }
inline MessageSet shm_summary(const SetSeq& seq) { return seq.empty() ? MessageSet{} : seq.back(); }

template <class V>
class SnapshotMemory {
 public:
  using WriteDone = std::function<void()>;
  using SnapshotDone = std::function<void(const std::vector<V>&)>;

  virtual ~SnapshotMemory() = default;
  virtual const std::string& name() const = 0;
  /// Writes the caller's own entry.
  virtual void write(ProcessId p, V value, WriteDone done) = 0;
  virtual void snapshot(ProcessId p, SnapshotDone done) = 0;

 protected:
  static void log_write(Simulator& sim, ProcessId p, const std::string& name, const V& value) {
    Event e;
    e.proc = p;
    e.kind = EventKind::shm_write;
    e.instance = name;
    e.messages = shm_summary(value);
    sim.record(std::move(e));
  }
  static void log_snapshot(Simulator& sim, ProcessId p, const std::string& name) {
    Event e;
    e.proc = p;
    e.kind = EventKind::shm_snapshot;
    e.instance = name;
    sim.record(std::move(e));
  }
};

/// Linearizable by construction: every operation is one atomic simulator
/// event, placed a seeded gap in [1, shm_gap] after its invocation.
template <class V>
class AtomicSnapshotOracle final : public SnapshotMemory<V> {
 public:
  using typename SnapshotMemory<V>::WriteDone;
  using typename SnapshotMemory<V>::SnapshotDone;

  AtomicSnapshotOracle(Simulator& sim, std::string name, V initial = V{})
      : sim_(sim), name_(std::move(name)), entries_(static_cast<std::size_t>(sim.n()), initial) {}

  const std::string& name() const override { return name_; }

  void write(ProcessId p, V value, WriteDone done) override {
    sim_.schedule(sim_.now() + gap(), p, [this, p, value = std::move(value), done = std::move(done)] {
      entries_[p.slot()] = value;
      this->log_write(sim_, p, name_, value);
      if (done) done();
    });
  }

  void snapshot(ProcessId p, SnapshotDone done) override {
    sim_.schedule(sim_.now() + gap(), p, [this, p, done = std::move(done)] {
      auto copy = entries_;
      this->log_snapshot(sim_, p, name_);
      if (done) done(copy);
    });
  }

  const std::vector<V>& entries() const { return entries_; }

 private:
  Time gap() { return sim_.rng().uniform(1, sim_.config().shm_gap); }

  Simulator& sim_;
  std::string name_;
  std::vector<V> entries_;
};

/// Snapshot memory backed by the message-passing snapshot construction
/// (one register per process, atomic variant) over an SCD service.
template <class V>
class ReplicatedSnapshotMemory final : public SnapshotMemory<V> {
 public:
  using typename SnapshotMemory<V>::WriteDone;
  using typename SnapshotMemory<V>::SnapshotDone;

  ReplicatedSnapshotMemory(Simulator& sim, ScdService& service, std::string name, V initial = V{})
      : sim_(sim), name_(name), object_(sim, service, std::move(name), sim.n(), std::move(initial)) {}

  const std::string& name() const override { return name_; }

  void write(ProcessId p, V value, WriteDone done) override {
    auto summary = value;
    object_.write(p, p.value, std::move(value),
                  [this, p, summary = std::move(summary), done = std::move(done)] {
                    this->log_write(sim_, p, name_, summary);
                    if (done) done();
                  });
  }

  void snapshot(ProcessId p, SnapshotDone done) override {
    object_.snapshot(p, [this, p, done = std::move(done)](const std::vector<V>& values) {
      this->log_snapshot(sim_, p, name_);
      if (done) done(values);
    });
  }

  const SnapshotObject<V>& object() const { return object_; }

 private:
  Simulator& sim_;
  std::string name_;
  SnapshotObject<V> object_;
};

}  // namespace scd
