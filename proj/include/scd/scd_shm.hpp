#pragma once

// SCD-broadcast on top of two single-writer snapshot objects:
//   SENT[i]   messages scd-broadcast by p_i
//   SETSEQ[i] sequence of message sets scd-delivered by p_i
// Each process runs its application calls and a background progress task
// under a local FIFO mutex; shared operations of different processes
// interleave freely.

#include <deque>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scd/service.hpp"
#include "scd/shm.hpp"

namespace scd {

struct ShmProcState {
  /// Local copy of SENT (refreshed by snapshot) and of SETSEQ.
  std::vector<MessageSet> sent;
  std::vector<SetSeq> setseq;
  /// members(setseq[i]).
  std::set<MessageId> members;
  MessageSet own_sent;
  SeqNum next_sn = 1;
};

class ScdSharedMemory final : public ScdService {
 public:
  ScdSharedMemory(Simulator& sim, SnapshotMemory<MessageSet>& sent, SnapshotMemory<SetSeq>& setseq,
                  std::string instance = "shm")
      : sim_(sim),
        sent_mem_(sent),
        setseq_mem_(setseq),
        instance_(std::move(instance)),
        procs_(static_cast<std::size_t>(sim.n())),
        tasks_(static_cast<std::size_t>(sim.n())) {
    for (auto& st : procs_) {
      st.sent.assign(static_cast<std::size_t>(sim.n()), MessageSet{});
      st.setseq.assign(static_cast<std::size_t>(sim.n()), SetSeq{});
    }
    if (sim_.config().background_ticks) {
      for (int i = 1; i <= sim.n(); ++i) schedule_tick(ProcessId{i});
    }
  }

  const std::string& instance() const override { return instance_; }

  std::optional<MessageId> broadcast(ProcessId p, std::string payload, Completion on_return,
                                     std::int64_t parent = -1) override {
    if (sim_.crashed(p)) {
      record_dropped(sim_, p, instance_, "scd_broadcast");
      return std::nullopt;
    }
    auto& st = procs_[p.slot()];
    AppMessage m{MessageId{p, st.next_sn++}, std::move(payload)};
    std::int64_t op = sim_.next_op_id();
    Event e;
    e.proc = p;
    e.kind = EventKind::invoke;
    e.instance = instance_;
    e.label = "scd_broadcast";
    e.op = op;
    e.parent = parent;
    e.messages.push_back(m);
    sim_.record(std::move(e));
    tasks_[p.slot()].queue.push_back(Job{Job::Kind::broadcast, m, op, std::move(on_return)});
    pump(p);
    return m.id;
  }

  /// One mutex-guarded progress() for `p`, queued behind any running job.
  void background_tick(ProcessId p) {
    if (sim_.crashed(p)) return;
    tasks_[p.slot()].queue.push_back(Job{Job::Kind::tick, {}, -1, {}});
    pump(p);
  }

  const ShmProcState& state(ProcessId p) const { return procs_[p.slot()]; }

 private:
  struct Job {
    enum class Kind { broadcast, tick };
    Kind kind;
    AppMessage msg;
    std::int64_t op;
    Completion on_return;
  };
  struct Tasks {
    std::deque<Job> queue;
    bool busy = false;
    /// The running tick delivered something.
    bool fresh = false;
    /// Background task stopped after an idle tick; restarted by the next delivery.
    bool parked = false;
  };

  void unpark_all() {
    for (int i = 1; i <= sim_.n(); ++i) {
      auto& t = tasks_[static_cast<std::size_t>(i - 1)];
      if (!t.parked || sim_.crashed(ProcessId{i})) continue;
      t.parked = false;
      schedule_tick(ProcessId{i});
    }
  }

  void schedule_tick(ProcessId p) {
    Time gap = sim_.rng().uniform(sim_.config().tick_min, sim_.config().tick_max);
    sim_.schedule(sim_.now() + gap, p, [this, p] { background_tick(p); });
  }

  void pump(ProcessId p) {
    auto& tasks = tasks_[p.slot()];
    if (tasks.busy || tasks.queue.empty()) return;
    tasks.busy = true;
    Job job = std::move(tasks.queue.front());
    tasks.queue.pop_front();
    auto release = [this, p] {
      tasks_[p.slot()].busy = false;
      pump(p);
    };
    if (job.kind == Job::Kind::tick) {
      tasks.fresh = false;
      progress(p, [this, p, release] {
        auto& t = tasks_[p.slot()];
        if (!t.fresh && sim_.now() >= sim_.config().tick_horizon) {
          t.parked = true;
        } else {
          schedule_tick(p);
        }
        release();
      });
      return;
    }
    auto& st = procs_[p.slot()];
    st.own_sent.push_back(job.msg);
    normalize(st.own_sent);
    sent_mem_.write(p, st.own_sent, [this, p, job = std::move(job), release]() mutable {
      progress(p, [this, p, job = std::move(job), release]() mutable {
        Event e;
        e.proc = p;
        e.kind = EventKind::response;
        e.instance = instance_;
        e.label = "scd_broadcast";
        e.op = job.op;
        e.messages.push_back(job.msg);
        sim_.record(std::move(e));
        if (job.on_return) sim_.post(p, std::move(job.on_return));
        release();
      });
    });
  }

  void progress(ProcessId p, std::function<void()> k) {
    catchup(p, [this, p, k = std::move(k)]() mutable {
      sent_mem_.snapshot(p, [this, p, k = std::move(k)](const std::vector<MessageSet>& sent) mutable {
        auto& st = procs_[p.slot()];
        st.sent = sent;
        MessageSet fresh;
        for (const auto& entry : st.sent) {
          for (const auto& m : entry) {
            if (!st.members.count(m.id)) fresh.push_back(m);
          }
        }
        normalize(fresh);
        if (fresh.empty()) {
          k();
          return;
        }
        append_and_deliver(p, std::move(fresh), std::move(k));
      });
    });
  }

  void catchup(ProcessId p, std::function<void()> k) {
    setseq_mem_.snapshot(p, [this, p, k = std::move(k)](const std::vector<SetSeq>& seqs) mutable {
      auto& st = procs_[p.slot()];
      if (seqs[p.slot()].size() != st.setseq[p.slot()].size()) {
        throw ProtocolError("shm: own SETSEQ entry diverged from local copy");
      }
      st.setseq = seqs;
      catchup_step(p, std::move(k));
    });
  }

  void catchup_step(ProcessId p, std::function<void()> k) {
    auto& st = procs_[p.slot()];
    for (const auto& seq : st.setseq) {
      for (const auto& set : seq) {
        MessageSet missing;
        for (const auto& m : set) {
          if (!st.members.count(m.id)) missing.push_back(m);
        }
        if (missing.empty()) continue;
        // `set` is the first set of this entry not covered yet.
        append_and_deliver(p, std::move(missing),
                           [this, p, k = std::move(k)]() mutable { catchup_step(p, std::move(k)); });
        return;
      }
    }
    k();
  }

  /// setseq[i] <- setseq[i] (+) set; SETSEQ.write(setseq[i]); scd-deliver(set).
  void append_and_deliver(ProcessId p, MessageSet set, std::function<void()> k) {
    if (set.empty()) throw ProtocolError("shm: empty set appended to SETSEQ");
    auto& st = procs_[p.slot()];
    for (const auto& m : set) st.members.insert(m.id);
    st.setseq[p.slot()].push_back(set);
    setseq_mem_.write(p, st.setseq[p.slot()], [this, p, set = std::move(set), k = std::move(k)] {
      Event e;
      e.proc = p;
      e.kind = EventKind::scd_deliver;
      e.instance = instance_;
      e.messages = set;
      sim_.record(std::move(e));
      tasks_[p.slot()].fresh = true;
      unpark_all();
      if (deliver_) deliver_(p, set);
      k();
    });
  }

  Simulator& sim_;
  SnapshotMemory<MessageSet>& sent_mem_;
  SnapshotMemory<SetSeq>& setseq_mem_;
  std::string instance_;
  std::vector<ShmProcState> procs_;
  std::vector<Tasks> tasks_;
};

}  // namespace scd
