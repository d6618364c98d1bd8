#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "softlogic/formula.hpp"
#include "softlogic/logics.hpp"
#include "softlogic/semantics.hpp"

namespace softlogic {

/// Per-connective operator choice used when fuzzifying classical formulas.
struct FamilySelection {
  OperatorKind negation = OperatorKind::NegStandard;
  OperatorKind conjunction = OperatorKind::ConjLukasiewicz;
  OperatorKind disjunction = OperatorKind::DisjLukasiewicz;
  OperatorKind implication = OperatorKind::ImplLukasiewicz;
};

namespace detail {

inline OperatorKind select_family(OperatorKind op, const FamilySelection& sel) {
  if (is_negation(op)) return sel.negation;
  if (is_conjunction(op)) return sel.conjunction;
  if (is_disjunction(op)) return sel.disjunction;
  return sel.implication;
}

inline Formula retag(const Formula& f, const FamilySelection& sel,
                     bool require_crisp_constants) {
  using FN = FormulaNode;
  return std::visit(
      [&](const auto& x) -> Formula {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, FN::AtomNode>) {
          return f;
        } else if constexpr (std::is_same_v<T, FN::ConstNode>) {
          if (require_crisp_constants && x.value != 0.0 && x.value != 1.0)
            throw std::invalid_argument(
                "constant other than 0/1 in classical formula");
          return f;
        } else if constexpr (std::is_same_v<T, FN::NegNode>) {
          return Formula::neg(select_family(x.op, sel),
                              retag(x.arg, sel, require_crisp_constants));
        } else {
          return Formula::bin(select_family(x.op, sel),
                              retag(x.lhs, sel, require_crisp_constants),
                              retag(x.rhs, sel, require_crisp_constants));
        }
      },
      f.node().v);
}

} // namespace detail

/// F^fuzzy: structure-preserving replacement of classical connectives by
/// the selected fuzzy operators. Constants must be 0 or 1.
inline Formula fuzzify(const Formula& f, const FamilySelection& sel = {}) {
  return detail::retag(f, sel, /*require_crisp_constants=*/true);
}

/// Erases operator-family tags back to the Boolean counterparts (stored as
/// the default Lukasiewicz/standard tags). defuzzify(fuzzify(f)) == f for
/// classical f.
inline Formula defuzzify(const Formula& f) {
  return detail::retag(f, FamilySelection{}, /*require_crisp_constants=*/true);
}

/// Pi_L: the GPSL program with each MLN formula fuzzified at exponent k.
inline Program mln_to_gpsl(const Program& mln, int k = 1,
                           const FamilySelection& sel = {}) {
  if (mln.flavor != Flavor::MLN)
    throw std::invalid_argument("mln_to_gpsl requires an mln-flavored program");
  if (k != 1 && k != 2) throw std::invalid_argument("k must be 1 or 2");
  std::vector<WeightedFormula> formulas;
  formulas.reserve(mln.formulas.size());
  for (const auto& wf : mln.formulas)
    formulas.emplace_back(wf.weight, fuzzify(wf.formula, sel), k);
  return make_program(Flavor::GPSL, std::move(formulas), mln.signature);
}

/// CRSP(p) = p (+)_l p ->_l p, satisfied exactly when p is Boolean.
inline Formula crsp(const Atom& p) {
  Formula a = Formula::atom(p);
  return Formula::bin(OperatorKind::ImplLukasiewicz,
                      Formula::bin(OperatorKind::DisjLukasiewicz, a, a), a);
}

/// The CR program: one crispifying rule per atom at weight alpha.
inline std::vector<WeightedFormula> crispify(const std::set<Atom>& signature,
                                             double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  std::vector<WeightedFormula> rules;
  rules.reserve(signature.size());
  for (const auto& p : signature) rules.emplace_back(alpha, crsp(p), 1);
  return rules;
}

/// Appends the CR rules for the program's signature.
inline Program with_crispification(const Program& program, double alpha) {
  Program out = program;
  out.flavor = Flavor::GPSL; // CRSP is not expressible in PSL rule form
  for (auto& r : crispify(program.signature, alpha))
    out.formulas.push_back(std::move(r));
  return out;
}

struct EquivalenceBudget {
  std::optional<double> grid_step; // default 0.1, refined to 0.05 for
                                   // purely Lukasiewicz formulas
  std::uint64_t samples = 10000;
  std::uint64_t seed = 20160620;
  double tolerance = 1e-9;
};

struct EquivalenceResult {
  bool equivalent = true; // up to budget
  std::optional<Interpretation> witness;
  double value_lhs = 0.0, value_rhs = 0.0; // at the witness
};

inline constexpr std::size_t kMaxGridAtoms = 5;

namespace detail {

inline bool purely_lukasiewicz(const Formula& f) {
  using FN = FormulaNode;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, FN::NegNode>) {
          return x.op == OperatorKind::NegStandard && purely_lukasiewicz(x.arg);
        } else if constexpr (std::is_same_v<T, FN::BinNode>) {
          return (x.op == OperatorKind::ConjLukasiewicz ||
                  x.op == OperatorKind::DisjLukasiewicz ||
                  x.op == OperatorKind::ImplLukasiewicz) &&
                 purely_lukasiewicz(x.lhs) && purely_lukasiewicz(x.rhs);
        } else {
          return true;
        }
      },
      f.node().v);
}

} // namespace detail

/// Bounded equivalence check: full grid over shared atoms (up to 5) plus
/// uniform random samples. Sound for non-equivalence (returns a witness),
/// heuristic for equivalence ("up to budget").
inline EquivalenceResult check_equivalence(const Formula& f, const Formula& g,
                                           const EquivalenceBudget& budget = {}) {
  std::set<Atom> shared = atoms(f);
  collect_atoms(g, shared);
  const std::vector<Atom> sig(shared.begin(), shared.end());
  const std::size_t n = sig.size();

  EquivalenceResult result;
  auto probe = [&](const Interpretation& i) -> bool {
    const double vf = evaluate(f, i);
    const double vg = evaluate(g, i);
    if (std::abs(vf - vg) > budget.tolerance) {
      result.equivalent = false;
      result.witness = i;
      result.value_lhs = vf;
      result.value_rhs = vg;
      return true;
    }
    return false;
  };

  if (n > kMaxGridAtoms && budget.grid_step)
    throw std::invalid_argument("grid mode requires at most 5 shared atoms");

  if (n <= kMaxGridAtoms) {
    double h = budget.grid_step.value_or(
        detail::purely_lukasiewicz(f) && detail::purely_lukasiewicz(g) ? 0.05
                                                                       : 0.1);
    if (!(h > 0.0 && h <= 1.0))
      throw std::invalid_argument("grid step must be in (0,1]");
    const std::uint64_t steps = static_cast<std::uint64_t>(std::llround(1.0 / h));
    std::vector<std::uint64_t> index(n, 0);
    std::vector<double> point(n, 0.0);
    for (;;) {
      for (std::size_t j = 0; j < n; ++j)
        point[j] = static_cast<double>(index[j]) / static_cast<double>(steps);
      if (probe(Interpretation(sig, point))) return result;
      std::size_t j = 0;
      for (; j < n; ++j) {
        if (++index[j] <= steps) break;
        index[j] = 0;
      }
      if (j == n) break;
      if (n == 0) break;
    }
    if (n == 0) return result; // constants: the single grid point decides
  }

  std::mt19937_64 rng(budget.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> point(n, 0.0);
  for (std::uint64_t s = 0; s < budget.samples; ++s) {
    for (std::size_t j = 0; j < n; ++j) point[j] = unit(rng);
    if (probe(Interpretation(sig, point))) return result;
  }
  return result;
}

enum class RewriteRelation { EquivalentByLemma, CheckedEquivalent, NotEquivalent };

struct RewriteSet {
  Formula source;
  Formula clause; // the t-conorm clausal form of the rule
  std::vector<Formula> variants;
  std::vector<RewriteRelation> relations; // aligned with variants
};

namespace detail {

inline Formula fold_disj(const std::vector<Literal>& lits) {
  if (lits.empty()) return Formula::constant(0.0);
  Formula f = to_formula(lits.front());
  for (std::size_t i = 1; i < lits.size(); ++i)
    f = Formula::bin(OperatorKind::DisjLukasiewicz, std::move(f),
                     to_formula(lits[i]));
  return f;
}

inline Formula fold_conj(const std::vector<Literal>& lits) {
  if (lits.empty()) return Formula::constant(1.0);
  Formula f = to_formula(lits.front());
  for (std::size_t i = 1; i < lits.size(); ++i)
    f = Formula::bin(OperatorKind::ConjLukasiewicz, std::move(f),
                     to_formula(lits[i]));
  return f;
}

} // namespace detail

/// Builds the rule form whose body holds the complements of the clause
/// literals selected by `body_mask` (bit i selects clause literal i).
inline Formula rewrite_variant(const std::vector<Literal>& clause_literals,
                               std::uint64_t body_mask) {
  std::vector<Literal> body, head;
  for (std::size_t i = 0; i < clause_literals.size(); ++i) {
    if (body_mask >> i & 1)
      body.push_back(complement(clause_literals[i]));
    else
      head.push_back(clause_literals[i]);
  }
  if (body.empty()) return detail::fold_disj(head);
  return Formula::bin(OperatorKind::ImplLukasiewicz, detail::fold_conj(body),
                      detail::fold_disj(head));
}

/// All equivalent rewritings of a PSL rule: the clausal form plus one rule
/// form per partition of the clause literals into body and head. Every
/// variant is cross-checked with the equivalence checker.
inline RewriteSet rewrite_rule(const Formula& rule,
                               const EquivalenceBudget& budget = {}) {
  auto decomposed = is_psl_rule(rule);
  if (!decomposed) throw std::invalid_argument("formula is not a PSL rule");

  std::vector<Literal> clause = decomposed->head;
  for (const auto& l : decomposed->body) clause.push_back(complement(l));

  RewriteSet set{rule, detail::fold_disj(clause), {}, {}};
  const std::uint64_t forms = std::uint64_t{1} << clause.size();
  for (std::uint64_t mask = 0; mask < forms; ++mask) {
    Formula variant = rewrite_variant(clause, mask);
    auto check = check_equivalence(rule, variant, budget);
    set.variants.push_back(std::move(variant));
    set.relations.push_back(check.equivalent ? RewriteRelation::EquivalentByLemma
                                             : RewriteRelation::NotEquivalent);
  }
  return set;
}

} // namespace softlogic
