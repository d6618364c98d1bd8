#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "softlogic/inference.hpp"
#include "softlogic/parser.hpp"

using namespace softlogic;

namespace {

double value_of(const Interpretation& i, const char* name) {
  return i.value(Atom{name});
}

// Exhaustive grid minimum of the weighted penalty, used as the oracle for
// the continuous solver on small signatures.
double grid_min_penalty(const Program& p, double h) {
  const std::vector<Atom> sig(p.signature.begin(), p.signature.end());
  const std::size_t n = sig.size();
  const std::uint64_t steps = static_cast<std::uint64_t>(std::llround(1.0 / h));
  std::vector<std::uint64_t> index(n, 0);
  std::vector<double> point(n, 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    for (std::size_t j = 0; j < n; ++j)
      point[j] = static_cast<double>(index[j]) / static_cast<double>(steps);
    Interpretation i(sig, point);
    double penalty = 0.0;
    for (const auto& wf : p.formulas) {
      const double d = 1.0 - evaluate(wf.formula, i);
      penalty += wf.weight * (wf.exponent == 2 ? d * d : d);
    }
    best = std::min(best, penalty);
    std::size_t j = 0;
    for (; j < n; ++j) {
      if (++index[j] <= steps) break;
      index[j] = 0;
    }
    if (j == n || n == 0) break;
  }
  return best;
}

} // namespace

TEST_CASE("map_boolean reports ties in enumeration order") {
  Program mln = parse_program("flavor mln\n1 : p <- ! p\n1 : ! p\n");
  MapResult r = map_boolean(mln);
  CHECK(r.method == MapMethod::BooleanEnumeration);
  REQUIRE(r.argmax.size() == 2);
  CHECK(value_of(r.argmax[0], "p") == 0.0);
  CHECK(value_of(r.argmax[1], "p") == 1.0);
  CHECK_THAT(r.objective, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("map_boolean on the two-rule program") {
  Program mln = parse_program("flavor mln\n1 : p <- q\n2 : q <- p\n");
  MapResult r = map_boolean(mln);
  REQUIRE(r.argmax.size() == 2);
  CHECK((value_of(r.argmax[0], "p") == 0.0 && value_of(r.argmax[0], "q") == 0.0));
  CHECK((value_of(r.argmax[1], "p") == 1.0 && value_of(r.argmax[1], "q") == 1.0));
  CHECK(r.objective == 3.0);

  Program empty = parse_program("flavor mln\n");
  MapResult e = map_boolean(empty);
  REQUIRE(e.argmax.size() == 1);
  CHECK(e.objective == 0.0);

  CHECK_THROWS_AS(map_boolean(parse_program("flavor psl\n1 : p <-l q ^ 1\n")),
                  std::invalid_argument);
}

TEST_CASE("map_boolean ties out with a direct recomputation") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    Program mln = testgen::random_mln(rng, 3, 4);
    MapResult r = map_boolean(mln);
    REQUIRE_FALSE(r.argmax.empty());
    for (const auto& i : r.argmax)
      REQUIRE_THAT(mln_log_weight(mln, i),
                   Catch::Matchers::WithinAbs(r.objective, 1e-9));
    for_each_boolean(mln.signature, [&](const Interpretation& i) {
      REQUIRE(mln_log_weight(mln, i) <= r.objective + 1e-9);
    });
  }
}

TEST_CASE("continuous MAP settles at p = 0.5 for the self-defeating program") {
  Program ex5 = parse_program("flavor psl\n1 : p <-l !s p ^ 1\n1 : !s p ^ 1\n");
  MapResult r = map_continuous(ex5);
  CHECK(r.method == MapMethod::MultistartDescent);
  REQUIRE(r.argmax.size() == 1);
  CHECK_THAT(value_of(r.argmax[0], "p"), Catch::Matchers::WithinAbs(0.5, 1e-3));
  CHECK_THAT(r.objective, Catch::Matchers::WithinAbs(-0.5, 1e-3));
}

TEST_CASE("continuous MAP finds a zero-penalty point for the two-rule program") {
  Program psl = parse_program("flavor psl\n1 : p <-l q ^ 1\n2 : q <-l p ^ 1\n");
  MapResult r = map_continuous(psl);
  CHECK_THAT(r.objective, Catch::Matchers::WithinAbs(0.0, 1e-6));
  REQUIRE_FALSE(r.argmax.empty());
  for (const auto& i : r.argmax)
    REQUIRE_THAT(value_of(i, "p"), Catch::Matchers::WithinAbs(value_of(i, "q"), 2e-3));
}

TEST_CASE("a heavy crispifying rule pushes the optimum to the endpoints") {
  Program ex6 = parse_program(
      "flavor gpsl\n1 : p <-l !s p ^ 1\n1 : !s p ^ 1\n1000 : p <-l p |l p ^ 1\n");
  MapResult r = map_continuous(ex6);
  REQUIRE_FALSE(r.argmax.empty());
  for (const auto& i : r.argmax) {
    const double v = value_of(i, "p");
    REQUIRE(std::min(v, 1.0 - v) <= 0.01);
  }
  CHECK_THAT(r.objective, Catch::Matchers::WithinAbs(-1.0, 1e-3));
}

TEST_CASE("map_continuous handles empty signatures and rejects mln input") {
  Program constant = parse_program("flavor gpsl\n2 : 0.75 ^ 1\n");
  MapResult r = map_continuous(constant);
  REQUIRE(r.argmax.size() == 1);
  CHECK(r.argmax[0].size() == 0);
  CHECK_THAT(r.objective, Catch::Matchers::WithinAbs(-0.5, 1e-12));
  CHECK_THROWS_AS(map_continuous(parse_program("flavor mln\n1 : p\n")),
                  std::invalid_argument);
}

TEST_CASE("multistart descent matches a fine grid oracle on convex programs") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    Program p = testgen::random_psl_program(rng, 3, 4, 2);
    MapResult r = map_continuous(p);
    const double solver = -r.objective;
    const double oracle = grid_min_penalty(p, 0.01);
    // The solver can only do better than the grid; the grid can only be
    // a hair above the true optimum.
    REQUIRE(solver <= oracle + 1e-6);
    REQUIRE(oracle - solver <= 0.5);

    // Convexity: an independent restart schedule lands on the same value.
    MapConfig alt;
    alt.starts = 5;
    alt.seed = 987654321;
    MapResult r2 = map_continuous(p, alt);
    REQUIRE(std::abs(r.objective - r2.objective) <= 1e-6);
  }
}

TEST_CASE("theorem2_check validates the translation") {
  Program mln = parse_program("flavor mln\n1 : p <- q\n2 : q <- p\n");
  Theorem2Report r = theorem2_check(mln);
  CHECK(r.passed);
  CHECK(r.interpretations == 4);
  CHECK(r.failures == 0);
  CHECK(r.max_residual <= 1e-9);

  Theorem2Report empty = theorem2_check(parse_program("flavor mln\n"));
  CHECK(empty.passed);
  CHECK(empty.interpretations == 1);

  CHECK_THROWS_AS(theorem2_check(parse_program("flavor psl\n1 : p <-l q ^ 1\n")),
                  std::invalid_argument);
}

TEST_CASE("theorem2_check passes on random programs at both exponents") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    Program mln = testgen::random_mln(rng, 4, 5);
    REQUIRE(theorem2_check(mln, 1).passed);
    REQUIRE(theorem2_check(mln, 2).passed);
  }
}

TEST_CASE("crispification closes the gap to Boolean MAP") {
  Program mln = parse_program("flavor mln\n1 : p <- ! p\n1 : ! p\n");

  CrispifyMapResult strong = map_via_crispification(mln, 1000.0);
  CHECK(strong.bridge.alpha == 1000.0);
  CHECK(strong.bridge.rounding_band == 0.01);
  CHECK(strong.bridge.rounded_all);
  CHECK(strong.bridge.agrees);
  REQUIRE(strong.rounded.size() == 2);
  CHECK(value_of(strong.rounded[0], "p") == 0.0);
  CHECK(value_of(strong.rounded[1], "p") == 1.0);

  // Without the crispifying rules the optimum sits at p = 0.5 and no
  // rounding is possible.
  CrispifyMapResult none = map_via_crispification(mln, 0.0);
  REQUIRE(none.continuous.argmax.size() == 1);
  CHECK_THAT(value_of(none.continuous.argmax[0], "p"),
             Catch::Matchers::WithinAbs(0.5, 1e-3));
  CHECK_FALSE(none.bridge.rounded_all);
  CHECK_FALSE(none.bridge.agrees);
  CHECK(none.rounded.empty());

  CHECK_THROWS_AS(map_via_crispification(mln, -1.0), std::invalid_argument);
}

TEST_CASE("the Boolean gap shrinks as the crispification weight grows") {
  Program mln = parse_program("flavor mln\n1 : p <- ! p\n1 : ! p\n");
  double previous = std::numeric_limits<double>::infinity();
  for (double alpha : {1.0, 10.0, 100.0, 1000.0}) {
    CrispifyMapResult r = map_via_crispification(mln, alpha);
    REQUIRE(r.bridge.max_boolean_gap <= previous + 1e-9);
    previous = r.bridge.max_boolean_gap;
  }
  CHECK(previous <= 0.01);
}

TEST_CASE("marginal estimation brackets the closed-form answer") {
  // For {1 : p ^ 1} the density is proportional to e^{x-1}, so
  // P(p <= 0.5) = (e^{-1/2} - e^{-1}) / (1 - e^{-1}).
  Program p = parse_program("flavor gpsl\n1 : p ^ 1\n");
  MarginalEstimate est =
      estimate_marginal(p, Formula::atom("p"), 0.0, 0.5, 100000);
  const double expected =
      (std::exp(-0.5) - std::exp(-1.0)) / (1.0 - std::exp(-1.0));
  CHECK(est.samples == 100000);
  CHECK(est.hits > 0);
  CHECK(est.stderr_estimate > 0.0);
  CHECK(std::abs(est.weighted_estimate - expected) <= 3.0 * est.stderr_estimate);
  // The proposal is uniform, so the naive fraction tracks the volume of
  // the event, not its probability.
  CHECK_THAT(est.naive_fraction, Catch::Matchers::WithinAbs(0.5, 0.01));
}

TEST_CASE("marginal estimates are deterministic and complementary") {
  Program p = parse_program("flavor gpsl\n1 : p &l q ^ 2\n");
  Formula f = parse_formula("p |l q");
  MarginalEstimate a = estimate_marginal(p, f, 0.0, 0.3, 20000, 5);
  MarginalEstimate b = estimate_marginal(p, f, 0.0, 0.3, 20000, 5);
  CHECK(a.weighted_estimate == b.weighted_estimate);
  CHECK(a.hits == b.hits);

  // [0, u] and (u, 1] partition the range; the unions of hits cover all
  // samples, so the two weighted estimates sum to one.
  MarginalEstimate low = estimate_marginal(p, f, 0.0, 0.3, 20000, 5);
  MarginalEstimate high = estimate_marginal(p, f, 0.3, 1.0, 20000, 5);
  const double overlap_mass = high.weighted_estimate + low.weighted_estimate;
  CHECK(overlap_mass >= 1.0 - 1e-12); // boundary points counted twice
  CHECK(overlap_mass <= 1.0 + 0.05);

  CHECK_THROWS_AS(estimate_marginal(p, f, 0.6, 0.4, 100), std::invalid_argument);
  CHECK_THROWS_AS(estimate_marginal(p, f, 0.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(
      estimate_marginal(parse_program("flavor mln\n1 : p\n"), f, 0.0, 1.0, 100),
      std::invalid_argument);
}

TEST_CASE("marginal signature includes query-only atoms") {
  Program p = parse_program("flavor gpsl\n1 : p ^ 1\n");
  MarginalEstimate est =
      estimate_marginal(p, Formula::atom("q"), 0.0, 0.5, 50000);
  // q is uniform and independent of the density over p.
  CHECK(std::abs(est.weighted_estimate - 0.5) <= 3.0 * est.stderr_estimate + 0.01);
}
