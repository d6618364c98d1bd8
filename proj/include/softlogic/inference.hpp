#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "softlogic/formula.hpp"
#include "softlogic/logics.hpp"
#include "softlogic/semantics.hpp"
#include "softlogic/transform.hpp"

namespace softlogic {

namespace detail {

inline unsigned worker_count() {
  if (const char* env = std::getenv("SOFTLOGIC_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// The penalty objective over the unit box, with atoms bound to indices.
class BoxObjective {
 public:
  explicit BoxObjective(const Program& program) : program_(program) {
    atoms_.assign(program.signature.begin(), program.signature.end());
    for (std::size_t i = 0; i < atoms_.size(); ++i) index_[atoms_[i]] = i;
  }

  std::size_t dimension() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }

  double penalty(const std::vector<double>& x) const {
    double sum = 0.0;
    for (const auto& wf : program_.formulas) {
      const double d = 1.0 - eval(wf.formula, x);
      sum += wf.weight * (wf.exponent == 2 ? d * d : d);
    }
    return sum;
  }

  /// Subgradient of the penalty; flat sides of hinge kinks contribute 0.
  std::vector<double> subgradient(const std::vector<double>& x) const {
    std::vector<double> g(atoms_.size(), 0.0);
    std::vector<double> gv(atoms_.size(), 0.0);
    for (const auto& wf : program_.formulas) {
      std::fill(gv.begin(), gv.end(), 0.0);
      const double v = eval_grad(wf.formula, x, 1.0, gv);
      const double d = 1.0 - v;
      const double scale =
          wf.exponent == 2 ? 2.0 * wf.weight * d : wf.weight;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= scale * gv[i];
    }
    return g;
  }

  double eval(const Formula& f, const std::vector<double>& x) const {
    using FN = FormulaNode;
    return std::visit(
        [&](const auto& node) -> double {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, FN::AtomNode>) {
            return x[index_.at(node.atom)];
          } else if constexpr (std::is_same_v<T, FN::ConstNode>) {
            return node.value;
          } else if constexpr (std::is_same_v<T, FN::NegNode>) {
            return apply_operator(node.op, eval(node.arg, x));
          } else {
            return apply_operator(node.op, eval(node.lhs, x),
                                  eval(node.rhs, x));
          }
        },
        f.node().v);
  }

 private:
  // Evaluates and accumulates scale * (d value / d atom) into `out`.
  double eval_grad(const Formula& f, const std::vector<double>& x, double scale,
                   std::vector<double>& out) const {
    using FN = FormulaNode;
    return std::visit(
        [&](const auto& node) -> double {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, FN::AtomNode>) {
            out[index_.at(node.atom)] += scale;
            return x[index_.at(node.atom)];
          } else if constexpr (std::is_same_v<T, FN::ConstNode>) {
            return node.value;
          } else if constexpr (std::is_same_v<T, FN::NegNode>) {
            if (node.op == OperatorKind::NegStandard)
              return 1.0 - eval_grad(node.arg, x, -scale, out);
            // Godel negation: derivative 0 almost everywhere.
            return apply_operator(node.op, eval(node.arg, x));
          } else {
            return bin_grad(node, x, scale, out);
          }
        },
        f.node().v);
  }

  double bin_grad(const FormulaNode::BinNode& node, const std::vector<double>& x,
                  double scale, std::vector<double>& out) const {
    switch (node.op) {
      case OperatorKind::ConjLukasiewicz: {
        const double a = eval(node.lhs, x), b = eval(node.rhs, x);
        if (a + b - 1.0 > 0.0) {
          eval_grad(node.lhs, x, scale, out);
          eval_grad(node.rhs, x, scale, out);
          return a + b - 1.0;
        }
        return 0.0;
      }
      case OperatorKind::DisjLukasiewicz: {
        const double a = eval(node.lhs, x), b = eval(node.rhs, x);
        if (a + b < 1.0) {
          eval_grad(node.lhs, x, scale, out);
          eval_grad(node.rhs, x, scale, out);
          return a + b;
        }
        return 1.0;
      }
      case OperatorKind::ImplLukasiewicz: {
        const double a = eval(node.lhs, x), b = eval(node.rhs, x);
        if (1.0 - a + b < 1.0) {
          eval_grad(node.lhs, x, -scale, out);
          eval_grad(node.rhs, x, scale, out);
          return 1.0 - a + b;
        }
        return 1.0;
      }
      case OperatorKind::ConjGodel: {
        const double a = eval(node.lhs, x), b = eval(node.rhs, x);
        return a <= b ? eval_grad(node.lhs, x, scale, out)
                      : eval_grad(node.rhs, x, scale, out);
      }
      case OperatorKind::DisjGodel: {
        const double a = eval(node.lhs, x), b = eval(node.rhs, x);
        return a >= b ? eval_grad(node.lhs, x, scale, out)
                      : eval_grad(node.rhs, x, scale, out);
      }
      case OperatorKind::ConjProduct: {
        const double a = eval(node.lhs, x), b = eval(node.rhs, x);
        eval_grad(node.lhs, x, scale * b, out);
        eval_grad(node.rhs, x, scale * a, out);
        return a * b;
      }
      case OperatorKind::DisjProduct: {
        const double a = eval(node.lhs, x), b = eval(node.rhs, x);
        eval_grad(node.lhs, x, scale * (1.0 - b), out);
        eval_grad(node.rhs, x, scale * (1.0 - a), out);
        return a + b - a * b;
      }
      case OperatorKind::ImplResidualGodel: {
        const double a = eval(node.lhs, x), b = eval(node.rhs, x);
        if (a <= b) return 1.0;
        return eval_grad(node.rhs, x, scale, out);
      }
      case OperatorKind::ImplSGodel: {
        const double a = eval(node.lhs, x), b = eval(node.rhs, x);
        if (1.0 - a >= b) return 1.0 - eval_grad(node.lhs, x, -scale, out);
        return eval_grad(node.rhs, x, scale, out);
      }
      default:
        throw std::invalid_argument("unknown binary operator");
    }
  }

  const Program& program_;
  std::vector<Atom> atoms_;
  std::map<Atom, std::size_t> index_;
};

} // namespace detail

enum class MapMethod { BooleanEnumeration, GridOracle, MultistartDescent };

inline const char* to_string(MapMethod m) {
  switch (m) {
    case MapMethod::BooleanEnumeration: return "boolean-enumeration";
    case MapMethod::GridOracle: return "grid-oracle";
    case MapMethod::MultistartDescent: return "multistart-descent";
  }
  return "?";
}

struct MapResult {
  std::vector<Interpretation> argmax; // ties, deterministic order
  double objective = 0.0;             // log unnormalized density / log weight
  MapMethod method = MapMethod::MultistartDescent;
  int starts = 0;
  bool converged = true;
};

/// MAP over Boolean possible worlds by full enumeration; ties (within
/// 1e-9 of the best log weight) are reported in enumeration order.
inline MapResult map_boolean(const Program& program) {
  if (program.flavor != Flavor::MLN)
    throw std::invalid_argument("map_boolean requires an mln-flavored program");
  MapResult result;
  result.method = MapMethod::BooleanEnumeration;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<Interpretation, double>> all;
  for_each_boolean(program.signature, [&](const Interpretation& i) {
    const double w = mln_log_weight(program, i);
    all.emplace_back(i, w);
    best = std::max(best, w);
  });
  for (auto& [i, w] : all)
    if (w >= best - 1e-9) result.argmax.push_back(std::move(i));
  result.objective = best;
  return result;
}

struct MapConfig {
  int starts = 16;          // all-0, all-1, uniform-random remainder
  double grid_step = 0.05;  // seeding grid for up to 4 atoms
  int max_iterations = 2000;
  double step_scale = 1.0;  // diminishing subgradient steps c/sqrt(t)
  std::uint64_t seed = 20160620;
  double tie_tolerance = 1e-9;
};

namespace detail {

inline void clamp_unit(std::vector<double>& x) {
  for (double& v : x) v = std::min(1.0, std::max(0.0, v));
}

// Compass directions {-1,0,1}^n \ {0} for small n, axis steps otherwise.
inline std::vector<std::vector<double>> pattern_directions(std::size_t n) {
  std::vector<std::vector<double>> dirs;
  if (n <= 6) {
    std::vector<double> d(n, 0.0);
    std::vector<int> idx(n, 0);
    for (;;) {
      bool nonzero = false;
      for (std::size_t j = 0; j < n; ++j) {
        d[j] = static_cast<double>(idx[j] - 1);
        if (idx[j] != 1) nonzero = true;
      }
      if (nonzero) dirs.push_back(d);
      std::size_t j = 0;
      for (; j < n; ++j) {
        if (++idx[j] < 3) break;
        idx[j] = 0;
      }
      if (j == n) break;
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> d(n, 0.0);
      d[j] = 1.0;
      dirs.push_back(d);
      d[j] = -1.0;
      dirs.push_back(d);
    }
  }
  return dirs;
}

// Local minimization: a short diminishing-step subgradient phase followed
// by pattern search with shrinking mesh. Returns the refined point.
inline std::pair<std::vector<double>, double> descend(
    const BoxObjective& objective, std::vector<double> x, const MapConfig& cfg,
    const std::vector<std::vector<double>>& dirs) {
  const std::size_t n = x.size();
  double fx = objective.penalty(x);
  // Subgradient phase to leave bad basins quickly.
  std::vector<double> best_x = x;
  double best_f = fx;
  for (int t = 1; t <= cfg.max_iterations / 4; ++t) {
    std::vector<double> g = objective.subgradient(x);
    double norm = 0.0;
    for (double v : g) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-15) break;
    const double step = cfg.step_scale / (norm * std::sqrt(static_cast<double>(t)));
    for (std::size_t j = 0; j < n; ++j) x[j] -= step * g[j];
    clamp_unit(x);
    const double f = objective.penalty(x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  x = best_x;
  fx = best_f;
  // Pattern search polish.
  double mesh = 0.25;
  std::vector<double> trial(n);
  while (mesh > 1e-10) {
    bool improved = false;
    for (const auto& d : dirs) {
      trial = x;
      for (std::size_t j = 0; j < n; ++j) trial[j] += mesh * d[j];
      clamp_unit(trial);
      double f = objective.penalty(trial);
      if (f < fx - 1e-15) {
        // Expand along the improving direction while it keeps helping.
        x = trial;
        fx = f;
        for (;;) {
          trial = x;
          for (std::size_t j = 0; j < n; ++j) trial[j] += mesh * d[j];
          clamp_unit(trial);
          f = objective.penalty(trial);
          if (f < fx - 1e-15) {
            x = trial;
            fx = f;
          } else {
            break;
          }
        }
        improved = true;
      }
    }
    if (!improved) mesh *= 0.5;
  }
  return {std::move(x), fx};
}

} // namespace detail

/// Continuous MAP: minimizes the weighted-penalty objective over the unit
/// box by multi-start projected descent. For PSL programs the objective is
/// convex, so the best local optimum found is reported as global.
inline MapResult map_continuous(const Program& program, const MapConfig& cfg = {}) {
  if (program.flavor == Flavor::MLN)
    throw std::invalid_argument("map_continuous requires a psl- or gpsl-flavored program");
  for (const auto& wf : program.formulas)
    if (!std::isfinite(wf.weight))
      throw std::invalid_argument("non-finite weight");

  const detail::BoxObjective objective(program);
  const std::size_t n = objective.dimension();
  MapResult result;
  result.method = MapMethod::MultistartDescent;

  if (n == 0) {
    result.argmax.push_back(Interpretation());
    result.objective = -objective.penalty({});
    result.starts = 0;
    return result;
  }

  // Assemble start points: all-0, all-1, grid-search seed for small
  // signatures, uniform-random remainder.
  std::vector<std::vector<double>> starts;
  starts.emplace_back(n, 0.0);
  starts.emplace_back(n, 1.0);
  if (n <= 4) {
    const std::uint64_t steps =
        static_cast<std::uint64_t>(std::llround(1.0 / cfg.grid_step));
    std::vector<std::uint64_t> index(n, 0);
    std::vector<double> point(n, 0.0), best_point(n, 0.0);
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
      for (std::size_t j = 0; j < n; ++j)
        point[j] = static_cast<double>(index[j]) / static_cast<double>(steps);
      const double f = objective.penalty(point);
      if (f < best) {
        best = f;
        best_point = point;
      }
      std::size_t j = 0;
      for (; j < n; ++j) {
        if (++index[j] <= steps) break;
        index[j] = 0;
      }
      if (j == n) break;
    }
    starts.push_back(best_point);
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (starts.size() < static_cast<std::size_t>(std::max(cfg.starts, 2))) {
    std::vector<double> x(n);
    for (double& v : x) v = unit(rng);
    starts.push_back(std::move(x));
  }
  result.starts = static_cast<int>(starts.size());

  const auto dirs = detail::pattern_directions(n);
  std::vector<std::pair<std::vector<double>, double>> outcomes(starts.size());
  const unsigned workers =
      std::min<unsigned>(detail::worker_count(), static_cast<unsigned>(starts.size()));
  if (workers <= 1) {
    for (std::size_t s = 0; s < starts.size(); ++s)
      outcomes[s] = detail::descend(objective, starts[s], cfg, dirs);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t s = next.fetch_add(1); s < starts.size();
             s = next.fetch_add(1))
          outcomes[s] = detail::descend(objective, starts[s], cfg, dirs);
      });
    }
    for (auto& t : pool) t.join();
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& [x, f] : outcomes) best = std::min(best, f);

  // Collect distinct tie points, sorted by coordinates for determinism.
  std::vector<std::vector<double>> ties;
  for (const auto& [x, f] : outcomes) {
    if (f > best + cfg.tie_tolerance) continue;
    bool duplicate = false;
    for (const auto& y : ties) {
      double dist = 0.0;
      for (std::size_t j = 0; j < n; ++j) dist = std::max(dist, std::abs(x[j] - y[j]));
      if (dist <= 1e-6) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) ties.push_back(x);
  }
  std::sort(ties.begin(), ties.end());
  for (const auto& x : ties)
    result.argmax.emplace_back(objective.atoms(), x);
  result.objective = -best;
  return result;
}

/// Theorem 2 verification: log W = log TW + log f-hat at every Boolean
/// interpretation of the translated program.
struct Theorem2Report {
  double max_residual = 0.0;
  std::size_t interpretations = 0;
  std::size_t failures = 0; // residual over tolerance
  double tolerance = 1e-9;
  bool passed = true;
};

inline Theorem2Report theorem2_check(const Program& mln, int k = 1) {
  if (mln.flavor != Flavor::MLN)
    throw std::invalid_argument("theorem2_check requires an mln-flavored program");
  if (mln.signature.size() > 16)
    throw std::invalid_argument("signature too large for theorem2_check");
  const Program gpsl = mln_to_gpsl(mln, k);
  const double log_tw = log_total_weight(gpsl);
  Theorem2Report report;
  for_each_boolean(mln.signature, [&](const Interpretation& i) {
    const double lhs = mln_log_weight(mln, i);
    const double rhs = log_tw + log_density(gpsl, i);
    const double residual = std::abs(lhs - rhs);
    report.max_residual = std::max(report.max_residual, residual);
    if (residual > report.tolerance) ++report.failures;
    ++report.interpretations;
  });
  report.passed = report.failures == 0;
  return report;
}

/// Crispification bridge between continuous MAP and Boolean MAP.
struct BridgeReport {
  double alpha = 0.0;
  double rounding_band = 0.0;       // 10 / alpha
  double max_boolean_gap = 0.0;     // max-norm distance of the continuous
                                    // argmax from the nearest Boolean point
  bool rounded_all = true;          // every coordinate fell in the band
  bool agrees = false;              // rounded argmax set == Boolean MAP set
};

struct CrispifyMapResult {
  Program translated;       // Pi_L with the CR rules appended
  MapResult continuous;
  MapResult boolean_oracle; // map_boolean on the MLN
  std::vector<Interpretation> rounded;
  BridgeReport bridge;
};

inline CrispifyMapResult map_via_crispification(const Program& mln, double alpha,
                                                int k = 1,
                                                const MapConfig& cfg = {}) {
  if (mln.flavor != Flavor::MLN)
    throw std::invalid_argument("map_via_crispification requires an mln-flavored program");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");
  Program translated = mln_to_gpsl(mln, k);
  if (alpha > 0.0)
    for (auto& r : crispify(mln.signature, alpha))
      translated.formulas.push_back(std::move(r));

  CrispifyMapResult result{std::move(translated), {}, {}, {}, {}};
  result.continuous = map_continuous(result.translated, cfg);
  result.boolean_oracle = map_boolean(mln);
  result.bridge.alpha = alpha;
  result.bridge.rounding_band =
      alpha > 0.0 ? 10.0 / alpha : 0.0;

  std::set<std::vector<double>> rounded_set;
  const std::vector<Atom> sig(mln.signature.begin(), mln.signature.end());
  for (const auto& i : result.continuous.argmax) {
    std::vector<double> rounded;
    bool ok = true;
    for (const auto& [atom, v] : i.entries()) {
      result.bridge.max_boolean_gap =
          std::max(result.bridge.max_boolean_gap, std::min(v, 1.0 - v));
      if (v <= result.bridge.rounding_band)
        rounded.push_back(0.0);
      else if (v >= 1.0 - result.bridge.rounding_band)
        rounded.push_back(1.0);
      else
        ok = false;
    }
    if (ok)
      rounded_set.insert(std::move(rounded));
    else
      result.bridge.rounded_all = false;
  }
  for (const auto& values : rounded_set)
    result.rounded.emplace_back(sig, values);

  std::set<std::vector<double>> oracle_set;
  for (const auto& i : result.boolean_oracle.argmax) {
    std::vector<double> values;
    for (const auto& [atom, v] : i.entries()) values.push_back(v);
    oracle_set.insert(std::move(values));
  }
  result.bridge.agrees =
      result.bridge.rounded_all && rounded_set == oracle_set;
  return result;
}

/// Monte Carlo estimate of P(l <= F <= u).
struct MarginalEstimate {
  double lower = 0.0, upper = 1.0;
  double naive_fraction = 0.0;    // X / N over uniform draws
  double weighted_estimate = 0.0; // self-normalized importance estimate
  double stderr_estimate = 0.0;   // of the weighted estimate
  std::uint64_t hits = 0;         // X
  std::uint64_t samples = 0;      // N
  std::uint64_t seed = 0;
};

inline MarginalEstimate estimate_marginal(const Program& program,
                                          const Formula& f, double lower,
                                          double upper, std::uint64_t samples,
                                          std::uint64_t seed = 20160620) {
  if (!(0.0 <= lower && lower <= upper && upper <= 1.0))
    throw std::invalid_argument("bounds must satisfy 0 <= l <= u <= 1");
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  if (program.flavor == Flavor::MLN)
    throw std::invalid_argument("estimate_marginal requires a psl- or gpsl-flavored program");

  std::set<Atom> sig_set = program.signature;
  collect_atoms(f, sig_set);
  const std::vector<Atom> sig(sig_set.begin(), sig_set.end());
  const std::size_t n = sig.size();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> point(n, 0.0);
  std::vector<double> log_weights;
  std::vector<bool> in_range;
  log_weights.reserve(samples);
  in_range.reserve(samples);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (std::size_t j = 0; j < n; ++j) point[j] = unit(rng);
    Interpretation i(sig, point);
    const double v = evaluate(f, i);
    const bool hit = lower <= v && v <= upper;
    hits += hit;
    in_range.push_back(hit);
    log_weights.push_back(log_density(program, i));
  }

  MarginalEstimate est;
  est.lower = lower;
  est.upper = upper;
  est.hits = hits;
  est.samples = samples;
  est.seed = seed;
  est.naive_fraction = static_cast<double>(hits) / static_cast<double>(samples);

  const double max_log = *std::max_element(log_weights.begin(), log_weights.end());
  double total = 0.0, total_hit = 0.0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double w = std::exp(log_weights[s] - max_log);
    total += w;
    if (in_range[s]) total_hit += w;
  }
  est.weighted_estimate = total_hit / total;
  double var = 0.0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double w = std::exp(log_weights[s] - max_log);
    const double z = (in_range[s] ? 1.0 : 0.0) - est.weighted_estimate;
    var += w * w * z * z;
  }
  est.stderr_estimate = std::sqrt(var) / total;
  return est;
}

} // namespace softlogic
