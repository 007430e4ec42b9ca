#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scd {

enum class Outcome { pass, fail, unchecked };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::unchecked: return "unchecked";
  }
  return "?";
}

struct Verdict {
  std::string property;
  Outcome outcome = Outcome::pass;
  /// On failure: minimal evidence, in terms of trace ids, that re-checks
  /// against the trace.
  nlohmann::json witness;
  std::string note;

  bool passed() const { return outcome == Outcome::pass; }

  static Verdict pass(std::string property) { return Verdict{std::move(property), Outcome::pass, {}, {}}; }
  static Verdict fail(std::string property, nlohmann::json witness, std::string note = {}) {
    return Verdict{std::move(property), Outcome::fail, std::move(witness), std::move(note)};
  }
  static Verdict unchecked(std::string property, std::string note) {
    return Verdict{std::move(property), Outcome::unchecked, {}, std::move(note)};
  }
};

inline nlohmann::ordered_json to_ojson(const Verdict& v) {
  nlohmann::ordered_json j{{"property", v.property}, {"outcome", to_string(v.outcome)}};
  if (!v.witness.is_null()) j["witness"] = nlohmann::ordered_json::parse(v.witness.dump());
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

inline bool all_passed(const std::vector<Verdict>& vs) {
  for (const auto& v : vs) {
    if (!v.passed()) return false;
  }
  return true;
}

inline const Verdict* find_verdict(const std::vector<Verdict>& vs, const std::string& property) {
  for (const auto& v : vs) {
    if (v.property == property) return &v;
  }
  return nullptr;
}

}  // namespace scd
