#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace softlogic {

/// A propositional fuzzy atom. The name may carry a parenthesized
/// ground-argument suffix (e.g. "Trust(a,b,0)") which is treated as an
/// opaque part of the name; equality is plain string equality.
struct Atom {
  std::string name;

  friend bool operator==(const Atom&, const Atom&) = default;
  friend auto operator<=>(const Atom&, const Atom&) = default;
};

/// The fuzzy operator families: Lukasiewicz, Godel (min/max), product,
/// the standard negator, the Godel negation, and the three implicators.
enum class OperatorKind {
  NegStandard,       // 1 - x
  NegGodel,          // 1 if x = 0, else 0
  ConjLukasiewicz,   // max(x + y - 1, 0)
  ConjGodel,         // min(x, y)
  ConjProduct,       // x * y
  DisjLukasiewicz,   // min(x + y, 1)
  DisjGodel,         // max(x, y)
  DisjProduct,       // x + y - x * y
  ImplLukasiewicz,   // min(1 - x + y, 1)
  ImplResidualGodel, // 1 if x <= y, else y
  ImplSGodel,        // max(1 - x, y)
};

constexpr bool is_negation(OperatorKind op) {
  return op == OperatorKind::NegStandard || op == OperatorKind::NegGodel;
}

constexpr bool is_conjunction(OperatorKind op) {
  return op == OperatorKind::ConjLukasiewicz || op == OperatorKind::ConjGodel ||
         op == OperatorKind::ConjProduct;
}

constexpr bool is_disjunction(OperatorKind op) {
  return op == OperatorKind::DisjLukasiewicz || op == OperatorKind::DisjGodel ||
         op == OperatorKind::DisjProduct;
}

constexpr bool is_implication(OperatorKind op) {
  return op == OperatorKind::ImplLukasiewicz ||
         op == OperatorKind::ImplResidualGodel || op == OperatorKind::ImplSGodel;
}

constexpr int arity(OperatorKind op) { return is_negation(op) ? 1 : 2; }

namespace detail {
inline void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::domain_error(std::string(what) + " outside [0,1]");
}
} // namespace detail

/// Applies a unary operator to a truth value.
inline double apply_operator(OperatorKind op, double x) {
  if (arity(op) != 1) throw std::invalid_argument("operator is not unary");
  detail::check_unit(x, "truth value");
  switch (op) {
    case OperatorKind::NegStandard: return 1.0 - x;
    case OperatorKind::NegGodel: return x == 0.0 ? 1.0 : 0.0;
    default: break;
  }
  throw std::invalid_argument("unknown unary operator");
}

/// Applies a binary operator to a pair of truth values.
inline double apply_operator(OperatorKind op, double x, double y) {
  if (arity(op) != 2) throw std::invalid_argument("operator is not binary");
  detail::check_unit(x, "truth value");
  detail::check_unit(y, "truth value");
  switch (op) {
    case OperatorKind::ConjLukasiewicz: return std::max(x + y - 1.0, 0.0);
    case OperatorKind::ConjGodel: return std::min(x, y);
    case OperatorKind::ConjProduct: return x * y;
    case OperatorKind::DisjLukasiewicz: return std::min(x + y, 1.0);
    case OperatorKind::DisjGodel: return std::max(x, y);
    case OperatorKind::DisjProduct: return x + y - x * y;
    case OperatorKind::ImplLukasiewicz: return std::min(1.0 - x + y, 1.0);
    case OperatorKind::ImplResidualGodel: return x <= y ? 1.0 : y;
    case OperatorKind::ImplSGodel: return std::max(1.0 - x, y);
    default: break;
  }
  throw std::invalid_argument("unknown binary operator");
}

struct FormulaNode;

/// Immutable fuzzy propositional formula. Cheap to copy (shared subtrees);
/// safe to share between threads.
class Formula {
 public:
  static Formula atom(Atom a);
  static Formula atom(std::string name) { return atom(Atom{std::move(name)}); }
  static Formula constant(double c);
  static Formula neg(OperatorKind op, Formula arg);
  static Formula bin(OperatorKind op, Formula lhs, Formula rhs);

  const FormulaNode& node() const { return *node_; }

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const FormulaNode> node_;
};

struct FormulaNode {
  struct AtomNode { Atom atom; };
  struct ConstNode { double value; };
  struct NegNode { OperatorKind op; Formula arg; };
  struct BinNode { OperatorKind op; Formula lhs; Formula rhs; };

  std::variant<AtomNode, ConstNode, NegNode, BinNode> v;
};

inline Formula Formula::atom(Atom a) {
  if (a.name.empty()) throw std::invalid_argument("empty atom name");
  return Formula(std::make_shared<const FormulaNode>(
      FormulaNode{FormulaNode::AtomNode{std::move(a)}}));
}

inline Formula Formula::constant(double c) {
  detail::check_unit(c, "constant");
  return Formula(std::make_shared<const FormulaNode>(
      FormulaNode{FormulaNode::ConstNode{c}}));
}

inline Formula Formula::neg(OperatorKind op, Formula arg) {
  if (!is_negation(op))
    throw std::invalid_argument("Neg node requires a negation operator");
  return Formula(std::make_shared<const FormulaNode>(
      FormulaNode{FormulaNode::NegNode{op, std::move(arg)}}));
}

inline Formula Formula::bin(OperatorKind op, Formula lhs, Formula rhs) {
  if (is_negation(op))
    throw std::invalid_argument("Bin node requires a binary operator");
  return Formula(std::make_shared<const FormulaNode>(
      FormulaNode{FormulaNode::BinNode{op, std::move(lhs), std::move(rhs)}}));
}

inline bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const auto& na = a.node();
  const auto& nb = b.node();
  if (na.v.index() != nb.v.index()) return false;
  using FN = FormulaNode;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(nb.v);
        if constexpr (std::is_same_v<T, FN::AtomNode>) {
          return x.atom == y.atom;
        } else if constexpr (std::is_same_v<T, FN::ConstNode>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, FN::NegNode>) {
          return x.op == y.op && x.arg == y.arg;
        } else {
          return x.op == y.op && x.lhs == y.lhs && x.rhs == y.rhs;
        }
      },
      na.v);
}

/// Collects the atoms occurring in a formula.
inline void collect_atoms(const Formula& f, std::set<Atom>& out) {
  using FN = FormulaNode;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, FN::AtomNode>) {
          out.insert(x.atom);
        } else if constexpr (std::is_same_v<T, FN::NegNode>) {
          collect_atoms(x.arg, out);
        } else if constexpr (std::is_same_v<T, FN::BinNode>) {
          collect_atoms(x.lhs, out);
          collect_atoms(x.rhs, out);
        }
      },
      f.node().v);
}

inline std::set<Atom> atoms(const Formula& f) {
  std::set<Atom> out;
  collect_atoms(f, out);
  return out;
}

/// An atom, possibly under the standard negator.
struct Literal {
  Atom atom;
  bool negated = false;

  friend bool operator==(const Literal&, const Literal&) = default;
};

inline Literal complement(Literal lit) {
  lit.negated = !lit.negated;
  return lit;
}

inline Formula to_formula(const Literal& lit) {
  Formula a = Formula::atom(lit.atom);
  return lit.negated ? Formula::neg(OperatorKind::NegStandard, std::move(a)) : a;
}

/// Matches an atom or a standard-negated atom.
inline std::optional<Literal> as_literal(const Formula& f) {
  using FN = FormulaNode;
  if (const auto* a = std::get_if<FN::AtomNode>(&f.node().v))
    return Literal{a->atom, false};
  if (const auto* n = std::get_if<FN::NegNode>(&f.node().v)) {
    if (n->op != OperatorKind::NegStandard) return std::nullopt;
    if (const auto* a = std::get_if<FN::AtomNode>(&n->arg.node().v))
      return Literal{a->atom, true};
  }
  return std::nullopt;
}

/// Decomposition of a PSL rule: body literals (Lukasiewicz t-norm chain,
/// empty = constant 1) and head literals (Lukasiewicz t-conorm chain,
/// empty = constant 0).
struct PslRule {
  std::vector<Literal> head;
  std::vector<Literal> body;
};

namespace detail {

// Flattens a chain of `op` nodes into literals; accepts any nesting.
inline bool collect_literal_chain(const Formula& f, OperatorKind op,
                                  std::vector<Literal>& out) {
  if (auto lit = as_literal(f)) {
    out.push_back(*lit);
    return true;
  }
  const auto* b = std::get_if<FormulaNode::BinNode>(&f.node().v);
  if (!b || b->op != op) return false;
  return collect_literal_chain(b->lhs, op, out) &&
         collect_literal_chain(b->rhs, op, out);
}

inline std::optional<double> as_constant(const Formula& f) {
  if (const auto* c = std::get_if<FormulaNode::ConstNode>(&f.node().v))
    return c->value;
  return std::nullopt;
}

// Clause side of a rule: constant 0, a literal, or a Lukasiewicz
// t-conorm chain of literals.
inline std::optional<std::vector<Literal>> match_rule_head(const Formula& f) {
  std::vector<Literal> lits;
  if (auto c = as_constant(f))
    return *c == 0.0 ? std::optional(lits) : std::nullopt;
  if (collect_literal_chain(f, OperatorKind::DisjLukasiewicz, lits)) return lits;
  return std::nullopt;
}

inline std::optional<std::vector<Literal>> match_rule_body(const Formula& f) {
  std::vector<Literal> lits;
  if (auto c = as_constant(f))
    return *c == 1.0 ? std::optional(lits) : std::nullopt;
  if (collect_literal_chain(f, OperatorKind::ConjLukasiewicz, lits)) return lits;
  return std::nullopt;
}

} // namespace detail

/// Recognizes the PSL rule form: a Lukasiewicz implication from a t-norm
/// chain of literals to a literal, t-conorm chain, or constant 0. A bare
/// clause (literal or t-conorm chain) counts as a rule with empty body.
inline std::optional<PslRule> is_psl_rule(const Formula& f) {
  if (const auto* b = std::get_if<FormulaNode::BinNode>(&f.node().v);
      b && b->op == OperatorKind::ImplLukasiewicz) {
    auto body = detail::match_rule_body(b->lhs);
    auto head = detail::match_rule_head(b->rhs);
    if (body && head) return PslRule{std::move(*head), std::move(*body)};
  }
  if (auto head = detail::match_rule_head(f))
    return PslRule{std::move(*head), {}};
  return std::nullopt;
}

} // namespace softlogic
