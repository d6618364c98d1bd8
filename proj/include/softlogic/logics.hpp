#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "softlogic/formula.hpp"
#include "softlogic/semantics.hpp"

namespace softlogic {

enum class Flavor { MLN, PSL, GPSL };

inline const char* to_string(Flavor f) {
  switch (f) {
    case Flavor::MLN: return "mln";
    case Flavor::PSL: return "psl";
    case Flavor::GPSL: return "gpsl";
  }
  return "?";
}

/// A weighted formula <w : F ^ k>, k in {1,2}.
struct WeightedFormula {
  double weight = 0.0;
  Formula formula;
  int exponent = 1;

  WeightedFormula(double w, Formula f, int k = 1)
      : weight(w), formula(std::move(f)), exponent(k) {
    if (k != 1 && k != 2) throw std::invalid_argument("exponent must be 1 or 2");
  }
};

/// A flavored set of weighted formulas over a declared signature.
struct Program {
  Flavor flavor = Flavor::GPSL;
  std::vector<WeightedFormula> formulas;
  std::set<Atom> signature;
};

/// Builds a program, inferring the signature from the formulas and
/// validating the flavor constraints.
inline Program make_program(Flavor flavor, std::vector<WeightedFormula> formulas,
                            std::set<Atom> declared = {}) {
  Program p{flavor, std::move(formulas), std::move(declared)};
  for (const auto& wf : p.formulas) {
    collect_atoms(wf.formula, p.signature);
    if (flavor == Flavor::PSL) {
      if (wf.weight < 0.0)
        throw std::invalid_argument("psl flavor requires nonnegative weights");
      if (!is_psl_rule(wf.formula))
        throw std::invalid_argument("psl flavor requires rule-form formulas");
    }
  }
  return p;
}

/// log of the MLN unnormalized weight: sum of weights of satisfied formulas.
inline double mln_log_weight(const Program& program, const Interpretation& i) {
  if (program.flavor != Flavor::MLN)
    throw std::invalid_argument("mln_weight requires an mln-flavored program");
  if (!is_boolean(i))
    throw std::invalid_argument("mln_weight requires a Boolean interpretation");
  double sum = 0.0;
  for (const auto& wf : program.formulas)
    if (satisfies(wf.formula, i)) sum += wf.weight;
  return sum;
}

inline double mln_weight(const Program& program, const Interpretation& i) {
  return std::exp(mln_log_weight(program, i));
}

/// Normalized weight by full enumeration over Boolean possible worlds.
inline double mln_probability(const Program& program, const Interpretation& i) {
  const double log_w = mln_log_weight(program, i);
  double total = 0.0;
  for_each_boolean(program.signature, [&](const Interpretation& j) {
    total += std::exp(mln_log_weight(program, j) - log_w);
  });
  return 1.0 / total;
}

namespace detail {

inline double fold_lukasiewicz_conj(const std::vector<Literal>& lits,
                                    const Interpretation& i) {
  double v = 1.0;
  for (const auto& l : lits) {
    double x = i.value(l.atom);
    if (l.negated) x = 1.0 - x;
    v = apply_operator(OperatorKind::ConjLukasiewicz, v, x);
  }
  return v;
}

inline double fold_lukasiewicz_disj(const std::vector<Literal>& lits,
                                    const Interpretation& i) {
  double v = 0.0;
  for (const auto& l : lits) {
    double x = i.value(l.atom);
    if (l.negated) x = 1.0 - x;
    v = apply_operator(OperatorKind::DisjLukasiewicz, v, x);
  }
  return v;
}

} // namespace detail

/// PSL distance to satisfaction: max{0, v(body) - v(head)}.
inline double psl_distance(const Formula& rule, const Interpretation& i) {
  auto decomposed = is_psl_rule(rule);
  if (!decomposed) throw std::invalid_argument("formula is not a PSL rule");
  const double body = detail::fold_lukasiewicz_conj(decomposed->body, i);
  const double head = detail::fold_lukasiewicz_disj(decomposed->head, i);
  return std::max(0.0, body - head);
}

/// Generalized distance to satisfaction: 1 - v_I(F).
inline double gpsl_distance(const Formula& f, const Interpretation& i) {
  return 1.0 - evaluate(f, i);
}

struct DensityReport {
  struct Entry {
    std::size_t index = 0;
    double distance = 0.0;
    double penalty = 0.0; // weight * distance^k
  };
  std::vector<Entry> per_formula;
  double log_unnormalized = 0.0;
  double unnormalized = 1.0;
  std::optional<double> normalized;
  std::optional<double> normalized_stderr; // set when Z was estimated
};

/// Unnormalized density of an interpretation under a PSL or GPSL program.
inline DensityReport density(const Program& program, const Interpretation& i) {
  if (program.flavor == Flavor::MLN)
    throw std::invalid_argument("density requires a psl- or gpsl-flavored program");
  DensityReport report;
  double penalty_sum = 0.0;
  for (std::size_t idx = 0; idx < program.formulas.size(); ++idx) {
    const auto& wf = program.formulas[idx];
    double d;
    if (program.flavor == Flavor::PSL) {
      d = psl_distance(wf.formula, i);
      assert(std::abs(d - gpsl_distance(wf.formula, i)) <= 1e-12);
    } else {
      d = gpsl_distance(wf.formula, i);
    }
    const double penalty =
        wf.weight * (wf.exponent == 2 ? d * d : d);
    report.per_formula.push_back({idx, d, penalty});
    penalty_sum += penalty;
  }
  report.log_unnormalized = -penalty_sum;
  report.unnormalized = std::exp(report.log_unnormalized);
  return report;
}

inline double log_density(const Program& program, const Interpretation& i) {
  return density(program, i).log_unnormalized;
}

/// TW: exp of the sum of all weights.
inline double log_total_weight(const Program& program) {
  double sum = 0.0;
  for (const auto& wf : program.formulas) sum += wf.weight;
  return sum;
}

inline double total_weight(const Program& program) {
  return std::exp(log_total_weight(program));
}

inline constexpr std::size_t kMaxQuadratureAtoms = 3;

struct NormalizeOptions {
  std::optional<double> grid_step; // default depends on dimension
  std::uint64_t mc_samples = 100000;
  std::uint64_t seed = 20160620;
};

struct NormalizeResult {
  double z = 1.0;
  bool monte_carlo = false;
  double stderr_estimate = 0.0; // standard error of z when monte_carlo
  double grid_step = 0.0;       // step actually used (quadrature only)
  std::uint64_t samples = 0;    // Monte Carlo sample count
};

/// Normalization factor Z: integral of the unnormalized density over the
/// unit box, by midpoint quadrature for up to 3 atoms, uniform Monte Carlo
/// above that.
inline NormalizeResult normalize(const Program& program,
                                 const NormalizeOptions& opts = {}) {
  if (program.flavor == Flavor::MLN)
    throw std::invalid_argument("normalize requires a psl- or gpsl-flavored program");
  const std::vector<Atom> sig(program.signature.begin(), program.signature.end());
  const std::size_t n = sig.size();
  NormalizeResult result;
  if (n == 0) {
    // Zero-dimensional box: Z is just the density value itself.
    result.z = density(program, Interpretation()).unnormalized;
    return result;
  }
  if (n <= kMaxQuadratureAtoms) {
    const double default_h = n == 1 ? 1e-3 : n == 2 ? 1e-2 : 5e-2;
    const double h = opts.grid_step.value_or(default_h);
    if (!(h > 0.0 && h <= 1.0))
      throw std::invalid_argument("grid step must be in (0,1]");
    const std::uint64_t cells = static_cast<std::uint64_t>(std::llround(1.0 / h));
    result.grid_step = 1.0 / static_cast<double>(cells);
    std::vector<std::uint64_t> index(n, 0);
    std::vector<double> point(n, 0.0);
    double sum = 0.0;
    const double cell_volume = std::pow(result.grid_step, static_cast<double>(n));
    while (true) {
      for (std::size_t j = 0; j < n; ++j)
        point[j] = (static_cast<double>(index[j]) + 0.5) * result.grid_step;
      sum += density(program, Interpretation(sig, point)).unnormalized;
      std::size_t j = 0;
      for (; j < n; ++j) {
        if (++index[j] < cells) break;
        index[j] = 0;
      }
      if (j == n) break;
    }
    result.z = sum * cell_volume;
    return result;
  }
  // Monte Carlo fallback: mean of the density over uniform draws, volume 1.
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> point(n, 0.0);
  double sum = 0.0, sum_sq = 0.0;
  const std::uint64_t N = opts.mc_samples;
  for (std::uint64_t s = 0; s < N; ++s) {
    for (std::size_t j = 0; j < n; ++j) point[j] = unit(rng);
    const double v = density(program, Interpretation(sig, point)).unnormalized;
    sum += v;
    sum_sq += v * v;
  }
  result.monte_carlo = true;
  result.samples = N;
  result.z = sum / static_cast<double>(N);
  const double var =
      std::max(0.0, sum_sq / static_cast<double>(N) - result.z * result.z);
  result.stderr_estimate = std::sqrt(var / static_cast<double>(N));
  return result;
}

/// Fills the normalized fields of a density report given a Z estimate.
inline void apply_normalization(DensityReport& report, const NormalizeResult& z) {
  report.normalized = report.unnormalized / z.z;
  if (z.monte_carlo && z.z > 0.0)
    report.normalized_stderr =
        *report.normalized * (z.stderr_estimate / z.z);
}

} // namespace softlogic
