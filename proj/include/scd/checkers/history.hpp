#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scd/core.hpp"

namespace scd {

/// One object operation as seen from outside: invocation, and response if
/// the operation completed.
struct Operation {
  std::int64_t id = -1;
  ProcessId proc;
  std::string name;
  nlohmann::json args;
  std::optional<nlohmann::json> result;
  std::uint64_t invoke_seq = 0;
  std::optional<std::uint64_t> response_seq;
  Time invoke_time = 0;
  std::optional<Time> response_time;

  bool pending() const { return !response_seq.has_value(); }
};

/// Operations ordered by invocation.
struct History {
  std::vector<Operation> ops;

  std::size_t size() const { return ops.size(); }
  bool empty() const { return ops.empty(); }
};

inline History extract_history(const Trace& trace, std::string_view instance) {
  History h;
  std::map<std::int64_t, std::size_t> index;
  for (const auto& e : trace.events) {
    if (e.instance != instance) continue;
    if (e.kind == EventKind::invoke) {
      Operation op;
      op.id = e.op;
      op.proc = e.proc;
      op.name = e.label;
      op.args = e.data;
      op.invoke_seq = e.seq;
      op.invoke_time = e.time;
      index[e.op] = h.ops.size();
      h.ops.push_back(std::move(op));
    } else if (e.kind == EventKind::response) {
      auto it = index.find(e.op);
      if (it == index.end()) continue;
      auto& op = h.ops[it->second];
      op.result = e.data;
      op.response_seq = e.seq;
      op.response_time = e.time;
    }
  }
  return h;
}

/// Sub-history keeping the operations whose positions are listed.
inline History select(const History& h, const std::vector<std::size_t>& keep) {
  History out;
  for (auto k : keep) out.ops.push_back(h.ops.at(k));
  std::sort(out.ops.begin(), out.ops.end(),
            [](const Operation& a, const Operation& b) { return a.invoke_seq < b.invoke_seq; });
  return out;
}

inline nlohmann::json to_json_ops(const History& h) {
  auto arr = nlohmann::json::array();
  for (const auto& op : h.ops) {
    nlohmann::json j{{"op", op.id}, {"proc", op.proc.value}, {"name", op.name}, {"args", op.args}};
    if (op.result) j["result"] = *op.result;
    else j["pending"] = true;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace scd
