#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "scd/sim.hpp"

namespace scd {

/// The SCD-broadcast abstraction as seen by the objects built on top of it.
/// Both the message-passing construction and the shared-memory construction
/// implement it, so any object can run over either.
class ScdService {
 public:
  using DeliverFn = std::function<void(ProcessId, const MessageSet&)>;
  using Completion = std::function<void()>;

  virtual ~ScdService() = default;

  virtual const std::string& instance() const = 0;

  /// scdbroadcast(payload) at `p`. Returns the assigned message id, or
  /// nullopt if `p` has crashed (a `dropped` record is logged). `on_return`
  /// runs as its own event once the operation returns; callers that do not
  /// wait for the return (fast operations) may pass an empty function.
  virtual std::optional<MessageId> broadcast(ProcessId p, std::string payload,
                                             Completion on_return, std::int64_t parent = -1) = 0;

  /// Installs the scd-deliver upcall. Called synchronously from inside the
  /// delivering handler; the upcall must not start new broadcasts inline.
  void on_deliver(DeliverFn fn) { deliver_ = std::move(fn); }

 protected:
  DeliverFn deliver_;
};

/// Logs an operation invoked on a crashed process.
inline void record_dropped(Simulator& sim, ProcessId p, const std::string& instance,
                           const std::string& op) {
  Event e;
  e.proc = kEnvironment;
  e.kind = EventKind::dropped;
  e.instance = instance;
  e.label = op;
  e.peer = p;
  sim.record(std::move(e));
}

}  // namespace scd
