#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scd/sim.hpp"

namespace scd {

inline constexpr const char* kForwardLabel = "FORWARD";
inline constexpr const char* kRelayLabel = "RELAY";

/// Uniform FIFO broadcast over the simulator's unordered channels.
///
/// Echo-relay: the first copy of (origin, sn) a process receives is re-sent
/// to everyone before it is queued for delivery, so a delivery anywhere
/// implies every correct process eventually receives the packet. Delivery
/// from each origin follows that origin's send order.
///
/// With relay suppression on, a process skips the echo when the upper layer
/// reports it has already fifo-broadcast its own FORWARD for the carried
/// application message. Per-origin FIFO order is unaffected; uniformity then
/// rests on the upper layer's own forwarding.
class FifoBroadcast {
 public:
  using DeliverFn = std::function<void(ProcessId at, const ForwardMsg&)>;
  using ForwardedFn = std::function<bool(ProcessId at, const MessageId&)>;

  FifoBroadcast(Simulator& sim, std::string instance, DeliverFn deliver,
                ForwardedFn already_forwarded = {})
      : sim_(sim),
        deliver_(std::move(deliver)),
        already_forwarded_(std::move(already_forwarded)),
        procs_(static_cast<std::size_t>(sim.n()), PerProcess(sim.n())) {
    instance_ = sim_.register_instance(
        std::move(instance),
        [this](ProcessId to, ProcessId from, const WirePacket& p) { on_receive(to, from, p); });
  }

  FifoBroadcast(const FifoBroadcast&) = delete;
  FifoBroadcast& operator=(const FifoBroadcast&) = delete;

  const std::string& instance() const { return sim_.instance_name(instance_); }

  void broadcast(ProcessId from, const ForwardMsg& body) {
    if (sim_.crashed(from)) return;
    auto& st = procs_[from.slot()];
    WirePacket packet{from, st.next_send++, body};
    sim_.send_to_all(instance_, from, packet, kForwardLabel);
  }

  /// Number of packets from `origin` that `at` has fifo-delivered.
  SeqNum delivered_from(ProcessId at, ProcessId origin) const {
    return procs_[at.slot()].next_deliver[origin.slot()];
  }

 private:
  struct PerProcess {
    explicit PerProcess(int n)
        : next_deliver(static_cast<std::size_t>(n), 0), pending(static_cast<std::size_t>(n)) {}
    SeqNum next_send = 0;
    std::vector<SeqNum> next_deliver;
    std::vector<std::map<SeqNum, WirePacket>> pending;
    std::set<std::pair<int, SeqNum>> received;
  };

  void on_receive(ProcessId to, ProcessId /*from*/, const WirePacket& packet) {
    auto& st = procs_[to.slot()];
    if (!st.received.emplace(packet.origin.value, packet.origin_sn).second) return;
    if (packet.origin != to) {
      bool skip = sim_.config().relay_suppression && already_forwarded_ &&
                  already_forwarded_(to, packet.body.m.id);
      if (!skip) sim_.send_to_all(instance_, to, packet, kRelayLabel);
      if (sim_.crashed(to)) return;
    }
    auto& expected = st.next_deliver[packet.origin.slot()];
    if (packet.origin_sn < expected) {
      throw ProtocolError("fifo: packet below delivery horizon received as new");
    }
    st.pending[packet.origin.slot()].emplace(packet.origin_sn, packet);
    auto& queue = st.pending[packet.origin.slot()];
    while (!queue.empty() && queue.begin()->first == expected) {
      WirePacket next = std::move(queue.begin()->second);
      queue.erase(queue.begin());
      ++expected;
      Event e;
      e.proc = to;
      e.kind = EventKind::fifo_deliver;
      e.instance = instance();
      e.wire = WireInfo{next.origin, next.origin_sn, next.body.forwarder, next.body.forwarder_sn};
      e.messages.push_back(next.body.m);
      if (!sim_.record(std::move(e))) return;
      deliver_(to, next.body);
      if (sim_.crashed(to)) return;
    }
  }

  Simulator& sim_;
  int instance_ = -1;
  DeliverFn deliver_;
  ForwardedFn already_forwarded_;
  std::vector<PerProcess> procs_;
};

}  // namespace scd
