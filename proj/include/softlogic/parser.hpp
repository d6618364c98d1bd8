#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "softlogic/formula.hpp"
#include "softlogic/logics.hpp"

namespace softlogic {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

namespace detail {

enum class TokenKind {
  Ident,
  Number,
  LParen,
  RParen,
  Colon,
  Caret,
  Neg,      // !s !m, plain !
  Conj,     // &l &m &p, plain &
  Disj,     // |l |m |p, plain |
  Impl,     // ->l ->r ->s, plain ->
  RevImpl,  // <-l <-r <-s, plain <-
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  double number = 0.0;
  OperatorKind op = OperatorKind::NegStandard;
  bool explicit_family = false; // carried a family suffix letter
  std::size_t line = 0, column = 0;
};

inline std::optional<OperatorKind> family_op(TokenKind kind, char suffix) {
  switch (kind) {
    case TokenKind::Neg:
      if (suffix == 's') return OperatorKind::NegStandard;
      if (suffix == 'm') return OperatorKind::NegGodel;
      return std::nullopt;
    case TokenKind::Conj:
      if (suffix == 'l') return OperatorKind::ConjLukasiewicz;
      if (suffix == 'm') return OperatorKind::ConjGodel;
      if (suffix == 'p') return OperatorKind::ConjProduct;
      return std::nullopt;
    case TokenKind::Disj:
      if (suffix == 'l') return OperatorKind::DisjLukasiewicz;
      if (suffix == 'm') return OperatorKind::DisjGodel;
      if (suffix == 'p') return OperatorKind::DisjProduct;
      return std::nullopt;
    case TokenKind::Impl:
    case TokenKind::RevImpl:
      if (suffix == 'l') return OperatorKind::ImplLukasiewicz;
      if (suffix == 'r') return OperatorKind::ImplResidualGodel;
      if (suffix == 's') return OperatorKind::ImplSGodel;
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

// Default families for plain connective spellings.
inline OperatorKind default_op(TokenKind kind) {
  switch (kind) {
    case TokenKind::Neg: return OperatorKind::NegStandard;
    case TokenKind::Conj: return OperatorKind::ConjLukasiewicz;
    case TokenKind::Disj: return OperatorKind::DisjLukasiewicz;
    default: return OperatorKind::ImplLukasiewicz;
  }
}

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  std::vector<Token> tokens() {
    std::vector<Token> out;
    for (;;) {
      Token t = next();
      out.push_back(t);
      if (t.kind == TokenKind::End) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line_, pos_ + 1, msg);
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  Token make(TokenKind kind, std::size_t start) {
    Token t;
    t.kind = kind;
    t.line = line_;
    t.column = start + 1;
    t.text = std::string(text_.substr(start, pos_ - start));
    return t;
  }

  Token op_token(TokenKind kind, std::size_t start) {
    Token t;
    t.kind = kind;
    t.line = line_;
    t.column = start + 1;
    if (auto fam = family_op(kind, peek())) {
      t.op = *fam;
      t.explicit_family = true;
      ++pos_;
    } else {
      t.op = default_op(kind);
    }
    t.text = std::string(text_.substr(start, pos_ - start));
    return t;
  }

  Token next() {
    while (std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    const std::size_t start = pos_;
    const char c = peek();
    if (c == '\0' || c == '#') {
      pos_ = text_.size();
      return make(TokenKind::End, start);
    }
    if (c == '(') { ++pos_; return make(TokenKind::LParen, start); }
    if (c == ')') { ++pos_; return make(TokenKind::RParen, start); }
    if (c == ':') { ++pos_; return make(TokenKind::Colon, start); }
    if (c == '^') { ++pos_; return make(TokenKind::Caret, start); }
    if (c == '!') { ++pos_; return op_token(TokenKind::Neg, start); }
    if (c == '&') { ++pos_; return op_token(TokenKind::Conj, start); }
    if (c == '|') { ++pos_; return op_token(TokenKind::Disj, start); }
    if (c == '-' && peek(1) == '>') { pos_ += 2; return op_token(TokenKind::Impl, start); }
    if (c == '<' && peek(1) == '-') { pos_ += 2; return op_token(TokenKind::RevImpl, start); }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      if (c == '-') ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      if (peek() == '.') {
        ++pos_;
        if (!std::isdigit(static_cast<unsigned char>(peek())))
          fail("expected digits after decimal point");
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      }
      Token t = make(TokenKind::Number, start);
      t.number = std::stod(t.text);
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      ++pos_;
      auto is_name = [](char x) {
        return std::isalnum(static_cast<unsigned char>(x)) || x == '_';
      };
      while (is_name(peek())) ++pos_;
      // A '(' immediately adjacent starts an opaque ground-argument suffix.
      if (peek() == '(') {
        ++pos_;
        while (peek() != ')' && peek() != '\0') ++pos_;
        if (peek() != ')') fail("unterminated '(' in atom name");
        ++pos_;
      }
      return make(TokenKind::Ident, start);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

// Recursive-descent parser over one line's tokens. Precedence:
// negation > conjunction > disjunction > implication; implication is
// right-associative and `<-` swaps its arguments (left side is the head).
class FormulaParser {
 public:
  FormulaParser(const std::vector<Token>& tokens, bool allow_family_suffixes)
      : tokens_(tokens), allow_suffixes_(allow_family_suffixes) {}

  Formula parse_formula() {
    Formula f = implication();
    return f;
  }

  const Token& current() const { return tokens_[pos_]; }

  void expect_end() {
    if (current().kind != TokenKind::End)
      fail("unexpected token '" + current().text + "'");
  }

  bool at_end() const { return current().kind == TokenKind::End; }

  void advance() { if (pos_ + 1 < tokens_.size()) ++pos_; }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(current().line, current().column, msg);
  }

  void check_family(const Token& t) const {
    if (!allow_suffixes_ && t.explicit_family)
      fail("operator-family suffix '" + t.text +
           "' is not allowed in mln flavor");
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (current().kind == TokenKind::Impl) {
      Token t = current();
      check_family(t);
      advance();
      Formula rhs = implication();
      return Formula::bin(t.op, std::move(lhs), std::move(rhs));
    }
    if (current().kind == TokenKind::RevImpl) {
      Token t = current();
      check_family(t);
      advance();
      Formula rhs = implication();
      return Formula::bin(t.op, std::move(rhs), std::move(lhs));
    }
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (current().kind == TokenKind::Disj) {
      Token t = current();
      check_family(t);
      advance();
      f = Formula::bin(t.op, std::move(f), conjunction());
    }
    return f;
  }

  Formula conjunction() {
    Formula f = negation();
    while (current().kind == TokenKind::Conj) {
      Token t = current();
      check_family(t);
      advance();
      f = Formula::bin(t.op, std::move(f), negation());
    }
    return f;
  }

  Formula negation() {
    if (current().kind == TokenKind::Neg) {
      Token t = current();
      check_family(t);
      advance();
      return Formula::neg(t.op, negation());
    }
    return primary();
  }

  Formula primary() {
    const Token& t = current();
    switch (t.kind) {
      case TokenKind::Ident: {
        advance();
        return Formula::atom(t.text);
      }
      case TokenKind::Number: {
        if (t.number < 0.0 || t.number > 1.0)
          fail("constant " + t.text + " outside [0,1]");
        advance();
        return Formula::constant(t.number);
      }
      case TokenKind::LParen: {
        advance();
        Formula f = implication();
        if (current().kind != TokenKind::RParen) fail("expected ')'");
        advance();
        return f;
      }
      default:
        fail("expected atom, constant, or '('");
    }
  }

  const std::vector<Token>& tokens_;
  bool allow_suffixes_;
  std::size_t pos_ = 0;
};

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

} // namespace detail

/// Parses a standalone formula expression (GPSL token set).
inline Formula parse_formula(const std::string& text) {
  detail::Lexer lexer(text, 1);
  auto tokens = lexer.tokens();
  detail::FormulaParser parser(tokens, /*allow_family_suffixes=*/true);
  Formula f = parser.parse_formula();
  parser.expect_end();
  return f;
}

/// Parses a `.wfl` program: a `flavor` header, an optional `atoms`
/// declaration, and weighted-formula lines `W : F [^ k]`.
inline Program parse_program(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::string current;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(current);
        current.clear();
      } else if (c != '\r') {
        current.push_back(c);
      }
    }
    lines.push_back(current);
  }

  std::optional<Flavor> flavor;
  std::set<Atom> declared;
  std::vector<WeightedFormula> formulas;

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    detail::Lexer lexer(lines[li], line_no);
    auto tokens = lexer.tokens();
    if (tokens.front().kind == detail::TokenKind::End) continue;

    const auto& first = tokens.front();
    if (first.kind == detail::TokenKind::Ident && first.text == "flavor") {
      if (flavor) throw ParseError(line_no, first.column, "duplicate flavor line");
      if (tokens.size() != 3 || tokens[1].kind != detail::TokenKind::Ident)
        throw ParseError(line_no, first.column, "expected: flavor mln|psl|gpsl");
      const std::string& name = tokens[1].text;
      if (name == "mln") flavor = Flavor::MLN;
      else if (name == "psl") flavor = Flavor::PSL;
      else if (name == "gpsl") flavor = Flavor::GPSL;
      else throw ParseError(line_no, tokens[1].column, "unknown flavor '" + name + "'");
      continue;
    }
    if (!flavor)
      throw ParseError(line_no, first.column, "expected 'flavor mln|psl|gpsl' first");
    if (first.kind == detail::TokenKind::Ident && first.text == "atoms") {
      for (std::size_t t = 1; t + 1 < tokens.size(); ++t) {
        if (tokens[t].kind != detail::TokenKind::Ident)
          throw ParseError(line_no, tokens[t].column, "expected atom name");
        declared.insert(Atom{tokens[t].text});
      }
      continue;
    }

    // Weighted-formula line.
    if (first.kind != detail::TokenKind::Number)
      throw ParseError(line_no, first.column, "expected a weight");
    const double weight = first.number;
    if (tokens.size() < 2 || tokens[1].kind != detail::TokenKind::Colon)
      throw ParseError(line_no, first.column, "expected ':' after weight");

    std::vector<detail::Token> body(tokens.begin() + 2, tokens.end());
    detail::FormulaParser parser(body, *flavor != Flavor::MLN);
    Formula f = parser.parse_formula();
    int exponent = 1;
    if (parser.current().kind == detail::TokenKind::Caret) {
      parser.advance();
      const auto& k = parser.current();
      if (k.kind != detail::TokenKind::Number || (k.number != 1.0 && k.number != 2.0))
        throw ParseError(line_no, k.column, "exponent must be 1 or 2");
      exponent = static_cast<int>(k.number);
      parser.advance();
    }
    parser.expect_end();

    if (*flavor == Flavor::PSL) {
      if (weight < 0.0)
        throw ParseError(line_no, first.column, "psl flavor requires nonnegative weights");
      if (!is_psl_rule(f))
        throw ParseError(line_no, first.column, "psl flavor requires rule-form formulas");
    }
    formulas.emplace_back(weight, std::move(f), exponent);
  }

  if (!flavor) {
    // Only comments/blank lines: still an error, a program needs a flavor.
    throw ParseError(1, 1, "expected 'flavor mln|psl|gpsl'");
  }
  return make_program(*flavor, std::move(formulas), std::move(declared));
}

enum class PrintStyle { Fuzzy, Classical };

namespace detail {

inline std::string op_token(OperatorKind op, PrintStyle style) {
  if (style == PrintStyle::Classical) {
    if (is_negation(op)) return "!";
    if (is_conjunction(op)) return "&";
    if (is_disjunction(op)) return "|";
    return "->";
  }
  switch (op) {
    case OperatorKind::NegStandard: return "!s";
    case OperatorKind::NegGodel: return "!m";
    case OperatorKind::ConjLukasiewicz: return "&l";
    case OperatorKind::ConjGodel: return "&m";
    case OperatorKind::ConjProduct: return "&p";
    case OperatorKind::DisjLukasiewicz: return "|l";
    case OperatorKind::DisjGodel: return "|m";
    case OperatorKind::DisjProduct: return "|p";
    case OperatorKind::ImplLukasiewicz: return "->l";
    case OperatorKind::ImplResidualGodel: return "->r";
    case OperatorKind::ImplSGodel: return "->s";
  }
  return "?";
}

} // namespace detail

/// Canonical fully-parenthesized text; parse_formula round-trips it.
inline std::string print_formula(const Formula& f,
                                 PrintStyle style = PrintStyle::Fuzzy) {
  using FN = FormulaNode;
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, FN::AtomNode>) {
          return x.atom.name;
        } else if constexpr (std::is_same_v<T, FN::ConstNode>) {
          return detail::format_double(x.value);
        } else if constexpr (std::is_same_v<T, FN::NegNode>) {
          return detail::op_token(x.op, style) + " " + print_formula(x.arg, style);
        } else {
          return "(" + print_formula(x.lhs, style) + " " +
                 detail::op_token(x.op, style) + " " +
                 print_formula(x.rhs, style) + ")";
        }
      },
      f.node().v);
}

/// Prints a program in the `.wfl` syntax; parse_program round-trips it.
inline std::string print_program(const Program& program) {
  std::ostringstream out;
  out << "flavor " << to_string(program.flavor) << "\n";
  if (!program.signature.empty()) {
    out << "atoms";
    for (const auto& a : program.signature) out << " " << a.name;
    out << "\n";
  }
  const PrintStyle style =
      program.flavor == Flavor::MLN ? PrintStyle::Classical : PrintStyle::Fuzzy;
  for (const auto& wf : program.formulas) {
    out << detail::format_double(wf.weight) << " : "
        << print_formula(wf.formula, style) << " ^ " << wf.exponent << "\n";
  }
  return out.str();
}

} // namespace softlogic
