#pragma once

#include <json.hpp>

#include "softlogic/inference.hpp"
#include "softlogic/logics.hpp"
#include "softlogic/parser.hpp"
#include "softlogic/semantics.hpp"
#include "softlogic/transform.hpp"

namespace softlogic {

inline void to_json(nlohmann::json& j, const Interpretation& i) {
  j = nlohmann::json::object();
  for (const auto& [atom, v] : i.entries()) j[atom.name] = v;
}

inline void to_json(nlohmann::json& j, const DensityReport::Entry& e) {
  j = {{"index", e.index}, {"distance", e.distance}, {"penalty", e.penalty}};
}

inline void to_json(nlohmann::json& j, const DensityReport& r) {
  j = {{"per_formula", r.per_formula},
       {"log_unnormalized", r.log_unnormalized},
       {"unnormalized", r.unnormalized}};
  if (r.normalized) j["normalized"] = *r.normalized;
  if (r.normalized_stderr) j["normalized_stderr"] = *r.normalized_stderr;
}

inline void to_json(nlohmann::json& j, const NormalizeResult& r) {
  j = {{"z", r.z}, {"monte_carlo", r.monte_carlo}};
  if (r.monte_carlo) {
    j["stderr"] = r.stderr_estimate;
    j["samples"] = r.samples;
  } else {
    j["grid_step"] = r.grid_step;
  }
}

inline void to_json(nlohmann::json& j, const MapResult& r) {
  j = {{"argmax", r.argmax},
       {"objective", r.objective},
       {"method", to_string(r.method)},
       {"starts", r.starts},
       {"converged", r.converged}};
}

inline void to_json(nlohmann::json& j, const BridgeReport& b) {
  j = {{"alpha", b.alpha},
       {"rounding_band", b.rounding_band},
       {"max_boolean_gap", b.max_boolean_gap},
       {"rounded_all", b.rounded_all},
       {"agrees", b.agrees}};
}

inline void to_json(nlohmann::json& j, const CrispifyMapResult& r) {
  j = {{"continuous", r.continuous},
       {"boolean_oracle", r.boolean_oracle},
       {"rounded", r.rounded},
       {"bridge", r.bridge}};
}

inline void to_json(nlohmann::json& j, const Theorem2Report& r) {
  j = {{"max_residual", r.max_residual},
       {"interpretations", r.interpretations},
       {"failures", r.failures},
       {"tolerance", r.tolerance},
       {"passed", r.passed}};
}

inline void to_json(nlohmann::json& j, const MarginalEstimate& e) {
  j = {{"lower", e.lower},
       {"upper", e.upper},
       {"naive_fraction", e.naive_fraction},
       {"weighted_estimate", e.weighted_estimate},
       {"stderr", e.stderr_estimate},
       {"hits", e.hits},
       {"samples", e.samples},
       {"seed", e.seed}};
}

inline void to_json(nlohmann::json& j, const EquivalenceResult& r) {
  j = {{"equivalent", r.equivalent}};
  if (r.witness) {
    j["witness"] = *r.witness;
    j["value_lhs"] = r.value_lhs;
    j["value_rhs"] = r.value_rhs;
  }
}

inline void to_json(nlohmann::json& j, const RewriteSet& s) {
  j = {{"source", print_formula(s.source)},
       {"clause", print_formula(s.clause)}};
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < s.variants.size(); ++i) {
    const char* relation =
        s.relations[i] == RewriteRelation::EquivalentByLemma ? "equivalent-by-lemma"
        : s.relations[i] == RewriteRelation::CheckedEquivalent ? "checked-equivalent"
                                                               : "not-equivalent";
    arr.push_back({{"formula", print_formula(s.variants[i])},
                   {"relation", relation}});
  }
  j["variants"] = arr;
}

} // namespace softlogic
