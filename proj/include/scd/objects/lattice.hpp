#pragma once

// Lattice agreement over SCD-broadcast: one MSG(i, in_i) round; the decision
// joins the input with every value delivered up to and including the set
// that carries the process's own MSG.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scd/objects/pattern.hpp"

namespace scd {

template <class L>
concept JoinSemilattice = requires(const typename L::value_type& a,
                                   const typename L::value_type& b) {
  { L::bottom() } -> std::convertible_to<typename L::value_type>;
  { L::join(a, b) } -> std::convertible_to<typename L::value_type>;
  { L::leq(a, b) } -> std::convertible_to<bool>;
};

/// Finite sets of integers under union.
struct IntSetLattice {
  using value_type = std::set<std::int64_t>;

  static value_type bottom() { return {}; }
  static value_type join(const value_type& a, const value_type& b) {
    value_type out = a;
    out.insert(b.begin(), b.end());
    return out;
  }
  static bool leq(const value_type& a, const value_type& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  }
};

template <JoinSemilattice L>
class LatticeAgreement {
 public:
  using Value = typename L::value_type;
  using DecideCallback = std::function<void(const Value&)>;

  LatticeAgreement(Simulator& sim, ScdService& service, std::string name = "lattice")
      : sim_(sim),
        log_(sim, std::move(name)),
        pattern_(sim, service),
        procs_(static_cast<std::size_t>(sim.n())) {
    service.on_deliver([this](ProcessId p, const MessageSet& set) { on_set(p, set); });
  }

  const std::string& instance() const { return log_.instance(); }

  /// Each process proposes at most once.
  void propose(ProcessId p, const Value& in, DecideCallback done, std::int64_t parent = -1) {
    auto& st = procs_[p.slot()];
    if (st.proposed) throw ContractViolation("lattice: process proposed twice");
    if (sim_.crashed(p)) {
      record_dropped(sim_, p, instance(), "propose");
      return;
    }
    st.proposed = true;
    std::int64_t op = log_.invoke(p, "propose", nlohmann::json::array({in}), parent);
    // out also covers values delivered before the proposal.
    st.out = L::join(in, st.seen);
    ObjectMsg msg{"MSG", p.value, nlohmann::json{{"value", in}}};
    pattern_.round(p, msg, op, [this, p, op, done = std::move(done)] {
      auto& s = procs_[p.slot()];
      log_.respond(p, "propose", op, nlohmann::json(*s.decided));
      if (done) sim_.post(p, [done, v = *s.decided] { done(v); });
    });
  }

  std::optional<Value> decision(ProcessId p) const { return procs_[p.slot()].decided; }

 private:
  struct PerProcess {
    bool proposed = false;
    Value seen = L::bottom();
    Value out = L::bottom();
    std::optional<Value> decided;
  };

  void on_set(ProcessId p, const MessageSet& set) {
    auto msgs = decode_set(set);
    auto& st = procs_[p.slot()];
    for (const auto& m : msgs) {
      if (m.type != "MSG") throw ProtocolError("lattice: unexpected message " + m.type);
      auto v = m.body.at("value").template get<Value>();
      st.seen = L::join(st.seen, v);
      if (st.proposed && !st.decided) st.out = L::join(st.out, v);
    }
    if (st.proposed && !st.decided &&
        std::any_of(msgs.begin(), msgs.end(), [p](const ObjectMsg& m) { return m.from == p.value; })) {
      st.decided = st.out;
    }
    pattern_.settle(p, msgs);
  }

  Simulator& sim_;
  OpLog log_;
  PatternRuntime pattern_;
  std::vector<PerProcess> procs_;
};

}  // namespace scd
