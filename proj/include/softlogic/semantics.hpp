#pragma once

#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "softlogic/formula.hpp"

namespace softlogic {

/// Total assignment of truth values to a fixed signature. Immutable.
class Interpretation {
 public:
  Interpretation() = default;

  explicit Interpretation(std::map<Atom, double> assignment)
      : values_(assignment.begin(), assignment.end()) {
    for (const auto& [atom, v] : values_) detail::check_unit(v, atom.name.c_str());
  }

  /// From atoms sorted ascending and values aligned with them.
  Interpretation(const std::vector<Atom>& sorted_atoms,
                 const std::vector<double>& values) {
    if (sorted_atoms.size() != values.size())
      throw std::invalid_argument("atom/value count mismatch");
    values_.reserve(sorted_atoms.size());
    for (std::size_t i = 0; i < sorted_atoms.size(); ++i) {
      detail::check_unit(values[i], sorted_atoms[i].name.c_str());
      values_.emplace_back(sorted_atoms[i], values[i]);
    }
  }

  double value(const Atom& a) const {
    auto it = std::lower_bound(
        values_.begin(), values_.end(), a,
        [](const auto& p, const Atom& x) { return p.first < x; });
    if (it == values_.end() || it->first != a)
      throw std::out_of_range("unknown atom: " + a.name);
    return it->second;
  }

  bool contains(const Atom& a) const {
    auto it = std::lower_bound(
        values_.begin(), values_.end(), a,
        [](const auto& p, const Atom& x) { return p.first < x; });
    return it != values_.end() && it->first == a;
  }

  std::set<Atom> signature() const {
    std::set<Atom> s;
    for (const auto& [a, v] : values_) s.insert(a);
    return s;
  }

  const std::vector<std::pair<Atom, double>>& entries() const { return values_; }

  std::size_t size() const { return values_.size(); }

  friend bool operator==(const Interpretation&, const Interpretation&) = default;

 private:
  std::vector<std::pair<Atom, double>> values_; // sorted by atom
};

/// Truth value of a formula under an interpretation.
inline double evaluate(const Formula& f, const Interpretation& i) {
  using FN = FormulaNode;
  return std::visit(
      [&](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, FN::AtomNode>) {
          return i.value(x.atom);
        } else if constexpr (std::is_same_v<T, FN::ConstNode>) {
          return x.value;
        } else if constexpr (std::is_same_v<T, FN::NegNode>) {
          return apply_operator(x.op, evaluate(x.arg, i));
        } else {
          return apply_operator(x.op, evaluate(x.lhs, i), evaluate(x.rhs, i));
        }
      },
      f.node().v);
}

/// Crisp satisfaction: the truth value is exactly 1.
inline bool satisfies(const Formula& f, const Interpretation& i) {
  return evaluate(f, i) == 1.0;
}

/// Tolerant variant for product-family formulas, whose values round.
inline bool satisfies_within(const Formula& f, const Interpretation& i,
                             double eps) {
  return evaluate(f, i) >= 1.0 - eps;
}

inline bool is_boolean(const Interpretation& i) {
  for (const auto& [a, v] : i.entries())
    if (v != 0.0 && v != 1.0) return false;
  return true;
}

inline constexpr std::size_t kMaxEnumerationAtoms = 24;

/// Visits all 2^n Boolean interpretations of the signature. Atoms are
/// ordered lexicographically; the last atom is the least significant bit,
/// so for {p,q} the order is {}, {q}, {p}, {p,q}.
inline void for_each_boolean(const std::set<Atom>& signature,
                             const std::function<void(const Interpretation&)>& fn) {
  if (signature.size() > kMaxEnumerationAtoms)
    throw std::invalid_argument("signature too large for Boolean enumeration");
  std::vector<Atom> atoms(signature.begin(), signature.end());
  const std::size_t n = atoms.size();
  std::vector<double> values(n, 0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t j = 0; j < n; ++j)
      values[j] = (mask >> (n - 1 - j)) & 1 ? 1.0 : 0.0;
    fn(Interpretation(atoms, values));
  }
}

inline std::vector<Interpretation> enumerate_boolean(const std::set<Atom>& signature) {
  std::vector<Interpretation> out;
  for_each_boolean(signature, [&](const Interpretation& i) { out.push_back(i); });
  return out;
}

/// Parses the interpretation literal syntax "{p=0.6, q=0.4}".
inline Interpretation parse_interpretation(const std::string& text) {
  std::map<Atom, double> assignment;
  std::size_t pos = 0;
  auto skip_ws = [&] { while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos; };
  auto fail = [&](const std::string& msg) -> void {
    throw std::invalid_argument("interpretation literal: " + msg);
  };
  skip_ws();
  if (pos >= text.size() || text[pos] != '{') fail("expected '{'");
  ++pos;
  skip_ws();
  bool first = true;
  while (true) {
    skip_ws();
    if (pos < text.size() && text[pos] == '}') { ++pos; break; }
    if (!first) {
      if (pos >= text.size() || text[pos] != ',') fail("expected ',' or '}'");
      ++pos;
      skip_ws();
    }
    first = false;
    std::size_t start = pos;
    auto is_name_char = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    if (pos >= text.size() ||
        !(std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      fail("expected atom name");
    while (pos < text.size() && is_name_char(text[pos])) ++pos;
    if (pos < text.size() && text[pos] == '(') { // opaque ground-argument suffix
      while (pos < text.size() && text[pos] != ')') ++pos;
      if (pos >= text.size()) fail("unterminated '(' in atom name");
      ++pos;
    }
    Atom atom{text.substr(start, pos - start)};
    skip_ws();
    if (pos >= text.size() || text[pos] != '=') fail("expected '='");
    ++pos;
    skip_ws();
    std::size_t consumed = 0;
    double v = 0;
    try {
      v = std::stod(text.substr(pos), &consumed);
    } catch (const std::exception&) {
      fail("expected numeric truth value");
    }
    pos += consumed;
    detail::check_unit(v, atom.name.c_str());
    if (!assignment.emplace(atom, v).second) fail("duplicate atom " + atom.name);
  }
  skip_ws();
  if (pos != text.size()) fail("trailing characters");
  return Interpretation(std::move(assignment));
}

} // namespace softlogic
