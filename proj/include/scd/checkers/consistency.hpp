#pragma once

// Exhaustive linearizability and sequential-consistency checks over small
// histories, against a sequential specification.
//
// The main search is a depth-first construction of the serialization with
// memoization on (set of placed operations, object state). A second,
// deliberately naive checker enumerates permutations; tests compare both.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scd/checkers/history.hpp"
#include "scd/checkers/verdict.hpp"

namespace scd {

/// A sequential specification over JSON-encoded states.
struct SequentialSpec {
  std::string name;
  nlohmann::json initial;
  /// State after `op`, or nullopt if `op`'s recorded result is impossible
  /// from `state`. Pending operations have no result to match.
  std::function<std::optional<nlohmann::json>(const nlohmann::json& state, const Operation& op)>
      apply;
};

/// Array of `registers` registers; write(args=[r, v]) and snapshot() -> array.
inline SequentialSpec snapshot_spec(int registers, nlohmann::json initial_value) {
  SequentialSpec spec;
  spec.name = "snapshot";
  spec.initial = nlohmann::json::array();
  for (int r = 0; r < registers; ++r) spec.initial.push_back(initial_value);
  spec.apply = [registers](const nlohmann::json& state,
                           const Operation& op) -> std::optional<nlohmann::json> {
    if (op.name == "write") {
      int r = op.args.at(0).get<int>();
      if (r < 1 || r > registers) return std::nullopt;
      auto next = state;
      next[static_cast<std::size_t>(r - 1)] = op.args.at(1);
      return next;
    }
    if (op.name == "snapshot") {
      if (op.result && *op.result != state) return std::nullopt;
      return std::optional<nlohmann::json>(std::in_place, state);
    }
    return std::nullopt;
  };
  return spec;
}

/// Integer counter; inc, dec, read() -> value.
inline SequentialSpec counter_spec() {
  SequentialSpec spec;
  spec.name = "counter";
  spec.initial = 0;
  spec.apply = [](const nlohmann::json& state, const Operation& op) -> std::optional<nlohmann::json> {
    auto v = state.get<std::int64_t>();
    if (op.name == "inc") return v + 1;
    if (op.name == "dec") return v - 1;
    if (op.name == "read") {
      if (op.result && *op.result != state) return std::nullopt;
      return std::optional<nlohmann::json>(std::in_place, state);
    }
    return std::nullopt;
  };
  return spec;
}

enum class OrderKind { real_time, program };

inline constexpr std::size_t kDefaultOpBound = 8;

namespace detail {

/// must_precede[b] has bit a set if a has to be serialized before b.
inline std::vector<std::uint64_t> precedence(const History& h, OrderKind kind) {
  std::vector<std::uint64_t> before(h.size(), 0);
  for (std::size_t a = 0; a < h.size(); ++a) {
    for (std::size_t b = 0; b < h.size(); ++b) {
      if (a == b) continue;
      const auto& x = h.ops[a];
      const auto& y = h.ops[b];
      bool edge = false;
      if (kind == OrderKind::real_time) {
        edge = x.response_seq && *x.response_seq < y.invoke_seq;
      } else {
        edge = x.proc == y.proc && x.invoke_seq < y.invoke_seq;
      }
      if (edge) before[b] |= std::uint64_t{1} << a;
    }
  }
  return before;
}

inline std::uint64_t completed_mask(const History& h) {
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!h.ops[i].pending()) mask |= std::uint64_t{1} << i;
  }
  return mask;
}

class Search {
 public:
  Search(const History& h, const SequentialSpec& spec, OrderKind kind)
      : h_(h), spec_(spec), before_(precedence(h, kind)), required_(completed_mask(h)) {}

  bool run() { return dfs(0, spec_.initial); }

 private:
  bool dfs(std::uint64_t placed, const nlohmann::json& state) {
    if ((placed & required_) == required_) return true;
    auto key = std::make_pair(placed, state.dump());
    if (failed_.count(key)) return false;
    for (std::size_t i = 0; i < h_.size(); ++i) {
      std::uint64_t bit = std::uint64_t{1} << i;
      if (placed & bit) continue;
      if ((before_[i] & ~placed) != 0) continue;
      auto next = spec_.apply(state, h_.ops[i]);
      if (!next) continue;
      if (dfs(placed | bit, *next)) return true;
    }
    failed_.insert(std::move(key));
    return false;
  }

  const History& h_;
  const SequentialSpec& spec_;
  std::vector<std::uint64_t> before_;
  std::uint64_t required_;
  std::set<std::pair<std::uint64_t, std::string>> failed_;
};

inline bool serializable(const History& h, const SequentialSpec& spec, OrderKind kind) {
  return Search(h, spec, kind).run();
}

inline const char* property_name(OrderKind kind) {
  return kind == OrderKind::real_time ? "linearizability" : "sequential-consistency";
}

/// Drops operations one at a time while the history stays unserializable.
inline History shrink(const History& h, const SequentialSpec& spec, OrderKind kind) {
  History cur = h;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      History smaller = cur;
      smaller.ops.erase(smaller.ops.begin() + static_cast<std::ptrdiff_t>(i));
      if (!serializable(smaller, spec, kind)) {
        cur = std::move(smaller);
        changed = true;
        break;
      }
    }
  }
  return cur;
}

inline Verdict check_order(const History& h, const SequentialSpec& spec, OrderKind kind,
                           std::size_t bound) {
  const std::string prop = property_name(kind);
  if (bound > 63) throw ContractViolation("consistency check: op bound above 63");
  if (h.size() > bound) {
    return Verdict::unchecked(prop, "history has " + std::to_string(h.size()) +
                                        " operations, above the exhaustive bound of " +
                                        std::to_string(bound));
  }
  if (serializable(h, spec, kind)) return Verdict::pass(prop);
  auto core = shrink(h, spec, kind);
  return Verdict::fail(prop, nlohmann::json{{"object", spec.name}, {"ops", to_json_ops(core)}},
                       "no legal serialization of this sub-history");
}

}  // namespace detail

/// Real-time order respected; pending operations may be placed or left out.
inline Verdict check_linearizable(const History& h, const SequentialSpec& spec,
                                  std::size_t bound = kDefaultOpBound) {
  return detail::check_order(h, spec, OrderKind::real_time, bound);
}

/// Only each process's program order respected.
inline Verdict check_sequentially_consistent(const History& h, const SequentialSpec& spec,
                                             std::size_t bound = kDefaultOpBound) {
  return detail::check_order(h, spec, OrderKind::program, bound);
}

/// Reference implementation: tries every subset of pending operations and
/// every permutation of the chosen operations. Exponential; for
/// cross-checking on small histories only.
inline bool naive_serializable(const History& h, const SequentialSpec& spec, OrderKind kind) {
  auto before = detail::precedence(h, kind);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h.ops[i].pending()) pending.push_back(i);
  }
  for (std::uint64_t pick = 0; pick < (std::uint64_t{1} << pending.size()); ++pick) {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (!h.ops[i].pending()) chosen.push_back(i);
    }
    for (std::size_t k = 0; k < pending.size(); ++k) {
      if (pick & (std::uint64_t{1} << k)) chosen.push_back(pending[k]);
    }
    std::sort(chosen.begin(), chosen.end());
    do {
      std::uint64_t placed = 0;
      nlohmann::json state = spec.initial;
      bool ok = true;
      for (auto i : chosen) {
        // Every required predecessor that is part of this attempt must be placed.
        std::uint64_t need = before[i];
        for (std::size_t j = 0; j < h.size(); ++j) {
          if ((need >> j & 1) && !(placed >> j & 1)) {
            bool in_attempt = std::find(chosen.begin(), chosen.end(), j) != chosen.end();
            if (in_attempt || !h.ops[j].pending()) ok = false;
          }
        }
        if (!ok) break;
        auto next = spec.apply(state, h.ops[i]);
        if (!next) {
          ok = false;
          break;
        }
        state = std::move(*next);
        placed |= std::uint64_t{1} << i;
      }
      if (ok) return true;
    } while (std::next_permutation(chosen.begin(), chosen.end()));
  }
  return false;
}

}  // namespace scd
