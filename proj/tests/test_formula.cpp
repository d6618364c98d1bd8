#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "generators.hpp"
#include "softlogic/formula.hpp"

using namespace softlogic;

namespace {

const OperatorKind kBinaryOps[] = {
    OperatorKind::ConjLukasiewicz, OperatorKind::ConjGodel,
    OperatorKind::ConjProduct,     OperatorKind::DisjLukasiewicz,
    OperatorKind::DisjGodel,       OperatorKind::DisjProduct,
    OperatorKind::ImplLukasiewicz, OperatorKind::ImplResidualGodel,
    OperatorKind::ImplSGodel};

const OperatorKind kUnaryOps[] = {OperatorKind::NegStandard,
                                  OperatorKind::NegGodel};

} // namespace

TEST_CASE("apply_operator matches the operator table") {
  CHECK(apply_operator(OperatorKind::ConjLukasiewicz, 0.6, 0.4) == 0.0);
  CHECK(apply_operator(OperatorKind::ImplResidualGodel, 0.6, 0.4) == 0.4);
  CHECK(apply_operator(OperatorKind::ImplLukasiewicz, 0.3, 0.9) == 1.0);
  CHECK(apply_operator(OperatorKind::ConjGodel, 0.3, 0.7) == 0.3);
  CHECK(apply_operator(OperatorKind::ConjProduct, 0.5, 0.5) == 0.25);
  CHECK(apply_operator(OperatorKind::DisjProduct, 0.5, 0.5) == 0.75);
  CHECK(apply_operator(OperatorKind::ImplSGodel, 0.6, 0.4) == 0.4);
  CHECK(apply_operator(OperatorKind::NegStandard, 0.3) == 0.7);
  CHECK(apply_operator(OperatorKind::NegGodel, 0.0) == 1.0);
  CHECK(apply_operator(OperatorKind::NegGodel, 0.3) == 0.0);

  // t-norm identity element.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double x = unit(rng);
    CHECK(apply_operator(OperatorKind::ConjGodel, 1.0, x) == x);
    CHECK_THAT(apply_operator(OperatorKind::ConjLukasiewicz, 1.0, x),
               Catch::Matchers::WithinAbs(x, 1e-15));
    CHECK(apply_operator(OperatorKind::DisjLukasiewicz, 0.0, x) == x);
  }
}

TEST_CASE("apply_operator rejects bad arity and out-of-range values") {
  CHECK_THROWS_AS(apply_operator(OperatorKind::NegStandard, 0.5, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_operator(OperatorKind::ConjGodel, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_operator(OperatorKind::ConjGodel, -0.1, 0.5),
                  std::domain_error);
  CHECK_THROWS_AS(apply_operator(OperatorKind::NegStandard, 1.5),
                  std::domain_error);
}

TEST_CASE("operator results stay inside the unit interval") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (OperatorKind op : kBinaryOps) {
    for (int i = 0; i < 100000; ++i) {
      const double v = apply_operator(op, unit(rng), unit(rng));
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }
  for (OperatorKind op : kUnaryOps) {
    for (int i = 0; i < 100000; ++i) {
      const double v = apply_operator(op, unit(rng));
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }
}

TEST_CASE("binary operators generalize the Boolean connectives") {
  for (OperatorKind op : kBinaryOps) {
    for (double x : {0.0, 1.0}) {
      for (double y : {0.0, 1.0}) {
        const bool l = x != 0.0, r = y != 0.0;
        bool expected;
        if (is_conjunction(op)) expected = l && r;
        else if (is_disjunction(op)) expected = l || r;
        else expected = !l || r;
        CHECK(apply_operator(op, x, y) == (expected ? 1.0 : 0.0));
      }
    }
  }
  for (OperatorKind op : kUnaryOps)
    for (double x : {0.0, 1.0})
      CHECK(apply_operator(op, x) == (x == 0.0 ? 1.0 : 0.0));
}

TEST_CASE("Lukasiewicz De Morgan holds on a 0.01 grid up to rounding") {
  for (int xi = 0; xi <= 100; ++xi) {
    for (int yi = 0; yi <= 100; ++yi) {
      const double x = xi / 100.0, y = yi / 100.0;
      const double lhs =
          1.0 - apply_operator(OperatorKind::ConjLukasiewicz, x, y);
      const double rhs =
          apply_operator(OperatorKind::DisjLukasiewicz, 1.0 - x, 1.0 - y);
      REQUIRE_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-15));
    }
  }
}

TEST_CASE("literal complement is an involution") {
  const Literal p{Atom{"p"}, false};
  const Literal not_q{Atom{"q"}, true};
  CHECK(complement(p) == Literal{Atom{"p"}, true});
  CHECK(complement(Literal{Atom{"p"}, true}) == p);
  CHECK(complement(complement(p)) == p);
  CHECK(complement(complement(not_q)) == not_q);
}

TEST_CASE("formula construction validates tags and constants") {
  CHECK_THROWS_AS(Formula::constant(1.5), std::domain_error);
  CHECK_THROWS_AS(Formula::neg(OperatorKind::ConjGodel, Formula::atom("p")),
                  std::invalid_argument);
  CHECK_THROWS_AS(Formula::bin(OperatorKind::NegStandard, Formula::atom("p"),
                               Formula::atom("q")),
                  std::invalid_argument);
  CHECK_THROWS_AS(Formula::atom(""), std::invalid_argument);
}

TEST_CASE("is_psl_rule decomposes rule-form formulas") {
  // p <-l q &l !s r
  Formula rule = Formula::bin(
      OperatorKind::ImplLukasiewicz,
      Formula::bin(OperatorKind::ConjLukasiewicz, Formula::atom("q"),
                   Formula::neg(OperatorKind::NegStandard, Formula::atom("r"))),
      Formula::atom("p"));
  auto d = is_psl_rule(rule);
  REQUIRE(d.has_value());
  REQUIRE(d->head.size() == 1);
  CHECK(d->head[0] == Literal{Atom{"p"}, false});
  REQUIRE(d->body.size() == 2);
  CHECK(d->body[0] == Literal{Atom{"q"}, false});
  CHECK(d->body[1] == Literal{Atom{"r"}, true});
}

TEST_CASE("is_psl_rule accepts the constraint form 0 <-l ...") {
  Formula rule = Formula::bin(
      OperatorKind::ImplLukasiewicz,
      Formula::bin(
          OperatorKind::ConjLukasiewicz,
          Formula::bin(OperatorKind::ConjLukasiewicz,
                       Formula::neg(OperatorKind::NegStandard, Formula::atom("a")),
                       Formula::atom("b")),
          Formula::atom("c")),
      Formula::constant(0.0));
  auto d = is_psl_rule(rule);
  REQUIRE(d.has_value());
  CHECK(d->head.empty());
  CHECK(d->body.size() == 3);
}

TEST_CASE("is_psl_rule rejects non-Lukasiewicz rules") {
  Formula godel_rule = Formula::bin(OperatorKind::ImplResidualGodel,
                                    Formula::atom("p"), Formula::atom("q"));
  CHECK_FALSE(is_psl_rule(godel_rule).has_value());

  Formula godel_body = Formula::bin(
      OperatorKind::ImplLukasiewicz,
      Formula::bin(OperatorKind::ConjGodel, Formula::atom("q"), Formula::atom("r")),
      Formula::atom("p"));
  CHECK_FALSE(is_psl_rule(godel_body).has_value());
}

TEST_CASE("is_psl_rule accepts bare clauses as empty-body rules") {
  Formula clause = Formula::bin(
      OperatorKind::DisjLukasiewicz, Formula::atom("a"),
      Formula::neg(OperatorKind::NegStandard, Formula::atom("b")));
  auto d = is_psl_rule(clause);
  REQUIRE(d.has_value());
  CHECK(d->body.empty());
  CHECK(d->head.size() == 2);
}
