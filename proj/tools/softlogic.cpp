// softlogic: weighted fuzzy logic engine CLI.
//
// Exit codes: 0 success, 1 usage error, 2 semantic/validation error,
// 3 failed check (equiv found a witness, theorem2 residual over tolerance,
// crispification bridge disagreement).

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "softlogic/formula.hpp"
#include "softlogic/inference.hpp"
#include "softlogic/logics.hpp"
#include "softlogic/parser.hpp"
#include "softlogic/semantics.hpp"
#include "softlogic/serialize.hpp"
#include "softlogic/transform.hpp"

namespace {

using namespace softlogic;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Program load_program(const std::string& path) {
  return parse_program(read_file(path));
}

/// Completes a partial interpretation over the given signature. Missing
/// atoms default to 0 only when `default_zero` is set.
Interpretation complete(const std::set<Atom>& signature,
                        const Interpretation& given, bool default_zero) {
  std::map<Atom, double> values;
  for (const auto& [atom, v] : given.entries()) {
    if (!signature.count(atom))
      throw std::invalid_argument("atom " + atom.name + " not in the signature");
    values[atom] = v;
  }
  for (const auto& atom : signature) {
    if (values.count(atom)) continue;
    if (!default_zero)
      throw std::invalid_argument("atom " + atom.name +
                                  " missing from the interpretation (use "
                                  "--default-zero to default it to 0)");
    values[atom] = 0.0;
  }
  return Interpretation(std::move(values));
}

void emit(bool as_json, const json& j, const std::string& text) {
  if (as_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

struct CommonFlags {
  bool as_json = false;
  bool default_zero = false;
};

int run(int argc, char** argv) {
  CLI::App app{"softlogic: weighted fuzzy logic (MLN / PSL / GPSL) engine"};
  app.require_subcommand(1);

  CommonFlags flags;

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a formula at an interpretation");
  std::string eval_formula, eval_at;
  eval_cmd->add_option("--formula", eval_formula, "Formula expression")->required();
  eval_cmd->add_option("--at", eval_at, "Interpretation literal, e.g. \"{p=0.6, q=0.4}\"")->required();
  eval_cmd->add_flag("--json", flags.as_json, "JSON output");
  eval_cmd->add_flag("--default-zero", flags.default_zero, "Default omitted atoms to 0");

  // density
  auto* density_cmd = app.add_subcommand("density", "Density of an interpretation under a PSL/GPSL program");
  std::string density_file, density_at;
  bool density_normalize = false;
  std::optional<double> density_grid;
  density_cmd->add_option("file", density_file, "Program file (.wfl)")->required();
  density_cmd->add_option("--at", density_at, "Interpretation literal")->required();
  density_cmd->add_flag("--normalize", density_normalize, "Also compute Z and the normalized density");
  density_cmd->add_option("--grid", density_grid, "Quadrature step for Z");
  density_cmd->add_flag("--json", flags.as_json, "JSON output");
  density_cmd->add_flag("--default-zero", flags.default_zero, "Default omitted atoms to 0");

  // weight
  auto* weight_cmd = app.add_subcommand("weight", "MLN weight of a Boolean interpretation");
  std::string weight_file, weight_at;
  bool weight_probability = false;
  weight_cmd->add_option("file", weight_file, "Program file (.wfl)")->required();
  weight_cmd->add_option("--at", weight_at, "Interpretation literal")->required();
  weight_cmd->add_flag("--probability", weight_probability, "Also compute the normalized weight");
  weight_cmd->add_flag("--json", flags.as_json, "JSON output");
  weight_cmd->add_flag("--default-zero", flags.default_zero, "Default omitted atoms to 0");

  // map
  auto* map_cmd = app.add_subcommand("map", "MAP inference");
  std::string map_file;
  bool map_via_crisp = false;
  double map_alpha = 1000.0;
  int map_k = 1, map_starts = 16;
  double map_grid = 0.05;
  std::uint64_t map_seed = 20160620;
  map_cmd->add_option("file", map_file, "Program file (.wfl)")->required();
  map_cmd->add_flag("--via-crispify", map_via_crisp, "MLN MAP via crispified GPSL translation");
  map_cmd->add_option("--alpha", map_alpha, "Crispification weight (default 1000)");
  map_cmd->add_option("--k", map_k, "Translation exponent, 1 or 2")->check(CLI::IsMember({1, 2}));
  map_cmd->add_option("--starts", map_starts, "Descent starts")->check(CLI::PositiveNumber);
  map_cmd->add_option("--grid", map_grid, "Seeding grid step");
  map_cmd->add_option("--seed", map_seed, "RNG seed");
  map_cmd->add_flag("--json", flags.as_json, "JSON output");

  // marginal
  auto* marginal_cmd = app.add_subcommand("marginal", "Monte Carlo estimate of P(l <= F <= u)");
  std::string marginal_file, marginal_formula;
  double marginal_lower = 0.0, marginal_upper = 1.0;
  std::uint64_t marginal_samples = 100000, marginal_seed = 20160620;
  marginal_cmd->add_option("file", marginal_file, "Program file (.wfl)")->required();
  marginal_cmd->add_option("--formula", marginal_formula, "Formula expression")->required();
  marginal_cmd->add_option("--lower", marginal_lower, "Lower bound l")->required();
  marginal_cmd->add_option("--upper", marginal_upper, "Upper bound u")->required();
  marginal_cmd->add_option("--samples", marginal_samples, "Sample count N");
  marginal_cmd->add_option("--seed", marginal_seed, "RNG seed");
  marginal_cmd->add_flag("--json", flags.as_json, "JSON output");

  // translate
  auto* translate_cmd = app.add_subcommand("translate", "Translate an MLN to a GPSL program");
  std::string translate_file, translate_to = "gpsl";
  int translate_k = 1;
  std::optional<double> translate_alpha;
  translate_cmd->add_option("file", translate_file, "Program file (.wfl)")->required();
  translate_cmd->add_option("--to", translate_to, "Target flavor (gpsl)")->check(CLI::IsMember({"gpsl"}));
  translate_cmd->add_option("--k", translate_k, "Exponent, 1 or 2")->check(CLI::IsMember({1, 2}));
  translate_cmd->add_option("--crispify", translate_alpha, "Append CR rules at this alpha");

  // rewrite
  auto* rewrite_cmd = app.add_subcommand("rewrite", "Equivalent rewritings of a PSL rule");
  std::string rewrite_rule_text;
  rewrite_cmd->add_option("rule", rewrite_rule_text, "Rule expression")->required();
  rewrite_cmd->add_flag("--json", flags.as_json, "JSON output");

  // equiv
  auto* equiv_cmd = app.add_subcommand("equiv", "Bounded equivalence check of two formulas");
  std::string equiv_lhs, equiv_rhs;
  std::optional<double> equiv_grid;
  std::uint64_t equiv_samples = 10000, equiv_seed = 20160620;
  equiv_cmd->add_option("lhs", equiv_lhs, "First formula")->required();
  equiv_cmd->add_option("rhs", equiv_rhs, "Second formula")->required();
  equiv_cmd->add_option("--grid", equiv_grid, "Grid step (at most 5 shared atoms)");
  equiv_cmd->add_option("--samples", equiv_samples, "Random sample count");
  equiv_cmd->add_option("--seed", equiv_seed, "RNG seed");
  equiv_cmd->add_flag("--json", flags.as_json, "JSON output");

  // check
  auto* check_cmd = app.add_subcommand("check", "Property checks on a program");
  std::string check_file;
  bool check_theorem2 = false;
  int check_k = 1;
  check_cmd->add_option("file", check_file, "Program file (.wfl)")->required();
  check_cmd->add_flag("--theorem2", check_theorem2, "Verify log W = log TW + log density on all Boolean worlds");
  check_cmd->add_option("--k", check_k, "Translation exponent")->check(CLI::IsMember({1, 2}));
  check_cmd->add_flag("--json", flags.as_json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (eval_cmd->parsed()) {
    Formula f = parse_formula(eval_formula);
    Interpretation given = parse_interpretation(eval_at);
    std::set<Atom> sig = atoms(f);
    for (const auto& [a, v] : given.entries()) sig.insert(a);
    Interpretation i = complete(sig, given, flags.default_zero);
    const double v = evaluate(f, i);
    emit(flags.as_json, json{{"value", v}, {"satisfied", v == 1.0}},
         detail::format_double(v) + "\n");
    return 0;
  }

  if (density_cmd->parsed()) {
    Program program = load_program(density_file);
    Interpretation i = complete(program.signature, parse_interpretation(density_at),
                                flags.default_zero);
    DensityReport report = density(program, i);
    if (density_normalize) {
      NormalizeOptions opts;
      opts.grid_step = density_grid;
      apply_normalization(report, normalize(program, opts));
    }
    std::ostringstream text;
    text << "log_unnormalized " << detail::format_double(report.log_unnormalized)
         << "\nunnormalized " << detail::format_double(report.unnormalized) << "\n";
    if (report.normalized)
      text << "normalized " << detail::format_double(*report.normalized) << "\n";
    emit(flags.as_json, report, text.str());
    return 0;
  }

  if (weight_cmd->parsed()) {
    Program program = load_program(weight_file);
    Interpretation i = complete(program.signature, parse_interpretation(weight_at),
                                flags.default_zero);
    const double log_w = mln_log_weight(program, i);
    json j{{"log_weight", log_w}, {"weight", std::exp(log_w)}};
    std::ostringstream text;
    text << "log_weight " << detail::format_double(log_w) << "\nweight "
         << detail::format_double(std::exp(log_w)) << "\n";
    if (weight_probability) {
      const double p = mln_probability(program, i);
      j["probability"] = p;
      text << "probability " << detail::format_double(p) << "\n";
    }
    emit(flags.as_json, j, text.str());
    return 0;
  }

  if (map_cmd->parsed()) {
    Program program = load_program(map_file);
    MapConfig cfg;
    cfg.starts = map_starts;
    cfg.grid_step = map_grid;
    cfg.seed = map_seed;
    if (map_via_crisp) {
      CrispifyMapResult result = map_via_crispification(program, map_alpha, map_k, cfg);
      std::ostringstream text;
      text << "objective " << detail::format_double(result.continuous.objective) << "\n";
      for (const auto& i : result.rounded) {
        text << "argmax";
        for (const auto& [a, v] : i.entries())
          text << " " << a.name << "=" << detail::format_double(v);
        text << "\n";
      }
      text << "agrees " << (result.bridge.agrees ? "yes" : "no") << "\n";
      emit(flags.as_json, result, text.str());
      return result.bridge.agrees ? 0 : 3;
    }
    MapResult result = program.flavor == Flavor::MLN ? map_boolean(program)
                                                     : map_continuous(program, cfg);
    std::ostringstream text;
    text << "objective " << detail::format_double(result.objective) << "\n";
    for (const auto& i : result.argmax) {
      text << "argmax";
      for (const auto& [a, v] : i.entries())
        text << " " << a.name << "=" << detail::format_double(v);
      text << "\n";
    }
    emit(flags.as_json, result, text.str());
    return 0;
  }

  if (marginal_cmd->parsed()) {
    Program program = load_program(marginal_file);
    Formula f = parse_formula(marginal_formula);
    MarginalEstimate est = estimate_marginal(program, f, marginal_lower,
                                             marginal_upper, marginal_samples,
                                             marginal_seed);
    std::ostringstream text;
    text << "naive_fraction " << detail::format_double(est.naive_fraction)
         << "\nweighted_estimate " << detail::format_double(est.weighted_estimate)
         << "\nstderr " << detail::format_double(est.stderr_estimate) << "\n";
    emit(flags.as_json, est, text.str());
    return 0;
  }

  if (translate_cmd->parsed()) {
    Program program = load_program(translate_file);
    Program out = program.flavor == Flavor::MLN
                      ? mln_to_gpsl(program, translate_k)
                      : program;
    if (program.flavor != Flavor::MLN) out.flavor = Flavor::GPSL;
    if (translate_alpha) out = with_crispification(out, *translate_alpha);
    std::cout << print_program(out);
    return 0;
  }

  if (rewrite_cmd->parsed()) {
    Formula rule = parse_formula(rewrite_rule_text);
    RewriteSet set = rewrite_rule(rule);
    std::ostringstream text;
    text << "clause " << print_formula(set.clause) << "\n";
    for (const auto& v : set.variants) text << print_formula(v) << "\n";
    emit(flags.as_json, set, text.str());
    return 0;
  }

  if (equiv_cmd->parsed()) {
    Formula lhs = parse_formula(equiv_lhs);
    Formula rhs = parse_formula(equiv_rhs);
    EquivalenceBudget budget;
    budget.grid_step = equiv_grid;
    budget.samples = equiv_samples;
    budget.seed = equiv_seed;
    EquivalenceResult result = check_equivalence(lhs, rhs, budget);
    std::ostringstream text;
    if (result.equivalent) {
      text << "equivalent-up-to-budget\n";
    } else {
      text << "not-equivalent at {";
      bool first = true;
      for (const auto& [a, v] : result.witness->entries()) {
        if (!first) text << ", ";
        first = false;
        text << a.name << "=" << detail::format_double(v);
      }
      text << "}: " << detail::format_double(result.value_lhs) << " vs "
           << detail::format_double(result.value_rhs) << "\n";
    }
    emit(flags.as_json, result, text.str());
    return result.equivalent ? 0 : 3;
  }

  if (check_cmd->parsed()) {
    if (!check_theorem2) throw std::invalid_argument("check: specify --theorem2");
    Program program = load_program(check_file);
    Theorem2Report report = theorem2_check(program, check_k);
    std::ostringstream text;
    text << "max_residual " << detail::format_double(report.max_residual) << "\n"
         << (report.passed ? "passed" : "failed") << "\n";
    emit(flags.as_json, report, text.str());
    return report.passed ? 0 : 3;
  }

  return 1;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const softlogic::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
