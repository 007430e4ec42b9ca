#pragma once

// SCD-broadcast in the crash-prone asynchronous message-passing model with a
// majority of correct processes, layered on uniform FIFO broadcast.

#include <algorithm>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scd/fifo.hpp"
#include "scd/service.hpp"

namespace scd {

/// Stands for "not yet forwarded"; strictly greater than every SeqNum.
inline constexpr SeqNum kInfinity = std::numeric_limits<SeqNum>::max();

/// `count > n/2` in integer arithmetic.
constexpr bool strict_majority(std::size_t count, int n) {
  return 2 * count > static_cast<std::size_t>(n);
}

/// Per-message bookkeeping: the message, its identity, and for each process
/// the local date at which that process forwarded it (kInfinity if unknown).
struct Quadruplet {
  AppMessage msg;
  ProcessId sd;
  SeqNum sn = 0;
  std::vector<SeqNum> cl;

  std::size_t forwarded_count() const {
    return static_cast<std::size_t>(
        std::count_if(cl.begin(), cl.end(), [](SeqNum x) { return x != kInfinity; }));
  }
  MessageId id() const { return MessageId{sd, sn}; }
};

/// True if `q` may not be delivered before `other`: at most n/2 processes
/// forwarded q strictly earlier than other.
inline bool must_wait_for(const Quadruplet& q, const Quadruplet& other, int n) {
  std::size_t earlier = 0;
  for (std::size_t f = 0; f < q.cl.size(); ++f) {
    if (q.cl[f] < other.cl[f]) ++earlier;
  }
  return !strict_majority(earlier, n);
}

/// Removes from `candidates` every quadruplet that must wait for some
/// buffered quadruplet outside the candidate set, until nothing changes.
/// The result is the largest stable subset, hence independent of the order
/// in which removals are applied.
inline std::vector<Quadruplet> fixpoint_purge(std::vector<Quadruplet> candidates,
                                              std::span<const Quadruplet> buffer, int n) {
  auto in_candidates = [&](const MessageId& id) {
    return std::any_of(candidates.begin(), candidates.end(),
                       [&](const Quadruplet& c) { return c.id() == id; });
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = candidates.begin(); it != candidates.end(); ++it) {
      bool blocked = std::any_of(buffer.begin(), buffer.end(), [&](const Quadruplet& other) {
        return !in_candidates(other.id()) && must_wait_for(*it, other, n);
      });
      if (blocked) {
        candidates.erase(it);
        changed = true;
        break;
      }
    }
  }
  return candidates;
}

struct ScdProcessState {
  std::map<MessageId, Quadruplet> buffer;
  /// Local logical clock. Starts at 1 so that the first message a process
  /// broadcasts passes the `sn_sd > clock[sd]` freshness guard.
  SeqNum sn = 1;
  /// clock[j]: greatest sn of a message from p_j already delivered here.
  std::vector<SeqNum> clock;

  struct PendingBroadcast {
    std::int64_t op;
    AppMessage msg;
    ScdService::Completion on_return;
  };
  std::vector<PendingBroadcast> pending;

  bool holds_own(ProcessId self) const {
    return std::any_of(buffer.begin(), buffer.end(),
                       [self](const auto& kv) { return kv.second.sd == self; });
  }
};

class ScdMessagePassing final : public ScdService {
 public:
  explicit ScdMessagePassing(Simulator& sim, std::string instance = "scd")
      : sim_(sim),
        n_(sim.n()),
        fifo_(
            sim, std::move(instance),
            [this](ProcessId at, const ForwardMsg& fm) { on_forward(at, fm); },
            [this](ProcessId at, const MessageId& id) { return has_forwarded(at, id); }),
        procs_(static_cast<std::size_t>(n_)) {
    for (auto& st : procs_) st.clock.assign(static_cast<std::size_t>(n_), 0);
  }

  const std::string& instance() const override { return fifo_.instance(); }

  std::optional<MessageId> broadcast(ProcessId p, std::string payload, Completion on_return,
                                     std::int64_t parent = -1) override {
    if (sim_.crashed(p)) {
      record_dropped(sim_, p, instance(), "scd_broadcast");
      return std::nullopt;
    }
    auto& st = procs_[p.slot()];
    AppMessage m{MessageId{p, st.sn}, std::move(payload)};
    std::int64_t op = sim_.next_op_id();
    Event e;
    e.proc = p;
    e.kind = EventKind::invoke;
    e.instance = instance();
    e.label = "scd_broadcast";
    e.op = op;
    e.parent = parent;
    e.messages.push_back(m);
    sim_.record(std::move(e));
    st.pending.push_back({op, m, std::move(on_return)});
    // The FORWARD addressed to itself is handled on the spot: the return
    // condition below must already see the new quadruplet.
    on_forward(p, ForwardMsg{m, p, st.sn});
    return m.id;
  }

  /// Handler for a fifo-delivered FORWARD(m, sd, sn_sd, f, sn_f).
  void on_forward(ProcessId p, const ForwardMsg& fm) {
    forward(p, fm);
    if (sim_.crashed(p)) return;
    try_deliver(p);
    complete_returns(p);
  }

  const ScdProcessState& state(ProcessId p) const { return procs_[p.slot()]; }
  int n() const { return n_; }

 private:
  void forward(ProcessId p, const ForwardMsg& fm) {
    auto& st = procs_[p.slot()];
    const MessageId id = fm.m.id;
    if (id.sn <= st.clock[id.sender.slot()]) return;
    auto found = st.buffer.find(id);
    if (found != st.buffer.end()) {
      auto& slot = found->second.cl[fm.forwarder.slot()];
      if (slot != kInfinity && slot != fm.forwarder_sn) {
        throw ProtocolError("scd: forwarder date changed for " + to_string(id));
      }
      slot = fm.forwarder_sn;
      return;
    }
    Quadruplet q{fm.m, id.sender, id.sn, std::vector<SeqNum>(static_cast<std::size_t>(n_), kInfinity)};
    q.cl[fm.forwarder.slot()] = fm.forwarder_sn;
    st.buffer.emplace(id, std::move(q));
    fifo_.broadcast(p, ForwardMsg{fm.m, p, st.sn});
    st.sn += 1;
  }

  void try_deliver(ProcessId p) {
    auto& st = procs_[p.slot()];
    if (st.buffer.empty()) return;
    std::vector<Quadruplet> buffer;
    buffer.reserve(st.buffer.size());
    std::vector<Quadruplet> candidates;
    for (const auto& [id, q] : st.buffer) {
      buffer.push_back(q);
      if (strict_majority(q.forwarded_count(), n_)) candidates.push_back(q);
    }
    if (candidates.empty()) return;
    auto to_deliver = fixpoint_purge(std::move(candidates), buffer, n_);
    if (to_deliver.empty()) return;
    MessageSet ms;
    ms.reserve(to_deliver.size());
    for (const auto& q : to_deliver) {
      auto& c = st.clock[q.sd.slot()];
      c = std::max(c, q.sn);
      st.buffer.erase(q.id());
      ms.push_back(q.msg);
    }
    normalize(ms);
    Event e;
    e.proc = p;
    e.kind = EventKind::scd_deliver;
    e.instance = instance();
    e.messages = ms;
    sim_.record(std::move(e));
    if (deliver_) deliver_(p, ms);
  }

  /// Returns every pending broadcast of `p` once no quadruplet of its own is
  /// left in the buffer.
  void complete_returns(ProcessId p) {
    auto& st = procs_[p.slot()];
    if (st.pending.empty() || st.holds_own(p)) return;
    auto done = std::move(st.pending);
    st.pending.clear();
    for (auto& b : done) {
      Event e;
      e.proc = p;
      e.kind = EventKind::response;
      e.instance = instance();
      e.label = "scd_broadcast";
      e.op = b.op;
      e.messages.push_back(b.msg);
      sim_.record(std::move(e));
      if (b.on_return) sim_.post(p, std::move(b.on_return));
    }
  }

  bool has_forwarded(ProcessId p, const MessageId& id) const {
    const auto& st = procs_[p.slot()];
    return st.buffer.count(id) > 0 || id.sn <= st.clock[id.sender.slot()];
  }

  Simulator& sim_;
  int n_;
  FifoBroadcast fifo_;
  std::vector<ScdProcessState> procs_;
};

}  // namespace scd
