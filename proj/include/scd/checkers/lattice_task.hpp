#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scd/checkers/verdict.hpp"
#include "scd/core.hpp"
#include "scd/objects/lattice.hpp"

namespace scd {

template <JoinSemilattice L>
struct LatticeOutcome {
  std::map<int, typename L::value_type> inputs;
  std::map<int, typename L::value_type> outputs;
};

/// Proposals and decisions recorded on `instance`.
template <JoinSemilattice L>
LatticeOutcome<L> extract_lattice(const Trace& trace, std::string_view instance) {
  LatticeOutcome<L> out;
  std::map<std::int64_t, int> proposer;
  for (const auto& e : trace.events) {
    if (e.instance != instance || e.label != "propose") continue;
    if (e.kind == EventKind::invoke) {
      out.inputs[e.proc.value] = e.data.at(0).template get<typename L::value_type>();
      proposer[e.op] = e.proc.value;
    } else if (e.kind == EventKind::response && proposer.count(e.op)) {
      out.outputs[e.proc.value] = e.data.template get<typename L::value_type>();
    }
  }
  return out;
}

/// Validity: in_i <= out_i <= lub of all inputs. Containment: decisions are
/// pairwise comparable. Termination: each process in `correct` that
/// proposed has decided.
template <JoinSemilattice L>
std::vector<Verdict> check_lattice_task(const LatticeOutcome<L>& run,
                                        const std::vector<ProcessId>& correct) {
  std::vector<Verdict> out;
  auto lub = L::bottom();
  for (const auto& [p, in] : run.inputs) lub = L::join(lub, in);

  Verdict validity = Verdict::pass("lattice-validity");
  for (const auto& [p, o] : run.outputs) {
    auto in = run.inputs.find(p);
    if (in == run.inputs.end() || !L::leq(in->second, o) || !L::leq(o, lub)) {
      validity = Verdict::fail("lattice-validity",
                               nlohmann::json{{"process", p}, {"output", o}, {"lub", lub}},
                               "output not between own input and the join of all inputs");
      break;
    }
  }
  out.push_back(validity);

  Verdict containment = Verdict::pass("lattice-containment");
  for (auto i = run.outputs.begin(); i != run.outputs.end() && containment.passed(); ++i) {
    for (auto j = std::next(i); j != run.outputs.end(); ++j) {
      if (!L::leq(i->second, j->second) && !L::leq(j->second, i->second)) {
        containment = Verdict::fail("lattice-containment",
                                    nlohmann::json{{"process_i", i->first},
                                                   {"output_i", i->second},
                                                   {"process_j", j->first},
                                                   {"output_j", j->second}},
                                    "incomparable decisions");
        break;
      }
    }
  }
  out.push_back(containment);

  Verdict termination = Verdict::pass("lattice-termination");
  for (auto p : correct) {
    if (run.inputs.count(p.value) && !run.outputs.count(p.value)) {
      termination = Verdict::fail("lattice-termination", nlohmann::json{{"process", p.value}},
                                  "non-faulty proposer did not decide");
      break;
    }
  }
  out.push_back(termination);
  return out;
}

}  // namespace scd
