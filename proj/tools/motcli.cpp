// motcli: check, solve and certify martingale transport instances.
//
// Exit codes: 0 ok, 1 input error, 2 infeasible instance or failed check,
// 3 resource cap exceeded.

#include "mot/cascade.hpp"
#include "mot/dual_optimizer.hpp"
#include "mot/envelope.hpp"
#include "mot/errors.hpp"
#include "mot/instance_io.hpp"
#include "mot/measures.hpp"
#include "mot/primal.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kInputError = 1, kInfeasible = 2, kCapExceeded = 3 };

struct Globals {
  bool json = false;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::optional<std::string> variant;
};

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json shape_json(const mot::MarginalSequence& ms) {
  json s = json::array();
  for (auto d : ms.shape()) s.push_back(d);
  return s;
}

std::string_view failure_name(mot::OrderFailure f) {
  switch (f) {
    case mot::OrderFailure::none: return "none";
    case mot::OrderFailure::mean_mismatch: return "mean_mismatch";
    case mot::OrderFailure::potential_violation: return "potential_violation";
  }
  return "unknown";
}

json sequence_json(const mot::SequenceReport& report) {
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    json entry = {{"pair", {p.first + 1, p.first + 2}},
                  {"ordered", p.order.ordered},
                  {"failure", failure_name(p.order.failure)},
                  {"mean_gap", p.order.mean_gap},
                  {"hull_nested", p.hull_nested}};
    if (p.order.witness_k) {
      entry["witness_k"] = *p.order.witness_k;
      entry["excess"] = p.order.excess;
    }
    pairs.push_back(entry);
  }
  return {{"ok", report.ok()}, {"common_mean", report.common_mean}, {"pairs", pairs}};
}

json lp_json(const mot::LpStats& s) {
  return {{"rows", s.rows}, {"cols", s.cols}, {"pivots", s.pivots},
          {"redundant_rows", s.redundant_rows}};
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

struct Context {
  mot::InstanceFile instance;
  mot::AscentConfig config;
  mot::PrimalOptions lp;
};

Context make_context(const std::string& path, const Globals& g) {
  Context ctx{mot::load_instance(path), {}, {}};
  const auto& o = ctx.instance.options;
  if (o.variant) ctx.config.variant = *o.variant;
  if (o.tol) ctx.config.target_gap = *o.tol;
  if (o.max_iters) ctx.config.max_iters = *o.max_iters;
  if (o.max_variables) ctx.lp.max_variables = *o.max_variables;
  if (o.max_tableau_entries) ctx.lp.max_tableau_entries = *o.max_tableau_entries;
  if (g.variant) {
    const auto v = mot::variant_from_string(*g.variant);
    if (!v || mot::is_upper(*v)) throw mot::InvalidArgument("--variant must be proposition or remark_b");
    ctx.config.variant = *v;
  }
  if (g.tol) ctx.config.target_gap = *g.tol;
  if (g.max_iters) ctx.config.max_iters = *g.max_iters;
  ctx.config.seed = g.seed;
  if (mot::is_upper(ctx.config.variant)) {
    throw mot::InvalidArgument("options.variant must be proposition or remark_b");
  }
  return ctx;
}

std::filesystem::path out_path(const Globals& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return std::filesystem::path(g.out_dir) / name;
}

// Reports an infeasible sequence; returns the exit code.
int report_infeasible(const mot::SequenceReport& seq, const Globals& g) {
  if (g.json) {
    print_json({{"feasible", false}, {"sequence", sequence_json(seq)}});
  } else {
    std::cout << "infeasible: marginals are not increasing in convex order\n";
    for (const auto& p : seq.pairs) {
      if (p.ok()) continue;
      std::printf("  pair (%zu,%zu): %s", p.first + 1, p.first + 2,
                  std::string(failure_name(p.order.failure)).c_str());
      if (p.order.witness_k) std::printf(" at k = %.10g (excess %.3g)", *p.order.witness_k, p.order.excess);
      if (!p.hull_nested) std::printf(" supports not nested");
      std::printf("\n");
    }
  }
  return kInfeasible;
}

int cmd_check(const std::string& path, const Globals& g) {
  const auto instance = mot::load_instance(path);
  const auto seq = mot::validate_sequence(instance.marginals);
  if (g.json) {
    json j = sequence_json(seq);
    j["n"] = instance.marginals.size();
    j["shape"] = shape_json(instance.marginals);
    j["cost"] = mot::to_string(instance.cost.form());
    print_json(j);
  } else {
    std::printf("marginals: %zu, shape", instance.marginals.size());
    for (auto d : instance.marginals.shape()) std::printf(" %ld", static_cast<long>(d));
    std::printf("\n%-8s %-8s %-20s %-12s %-12s %s\n", "pair", "ordered", "failure", "mean_gap",
                "witness_k", "nested");
    for (const auto& p : seq.pairs) {
      std::printf("(%zu,%zu)    %-8s %-20s %-12.3g %-12s %s\n", p.first + 1, p.first + 2,
                  p.order.ordered ? "yes" : "no", std::string(failure_name(p.order.failure)).c_str(),
                  p.order.mean_gap,
                  p.order.witness_k ? std::to_string(*p.order.witness_k).c_str() : "-",
                  p.hull_nested ? "yes" : "no");
    }
    std::printf("%s\n", seq.ok() ? "ok" : "FAILED");
  }
  return seq.ok() ? kOk : kInfeasible;
}

int cmd_solve(const std::string& path, const std::string& side, const std::string& method,
              const Globals& g) {
  Context ctx = make_context(path, g);
  const auto& ms = ctx.instance.marginals;
  const auto seq = mot::validate_sequence(ms);
  if (!seq.ok()) return report_infeasible(seq, g);

  const bool upper = side == "upper";
  const bool want_primal = method != "dual";
  const bool want_dual = method != "primal";
  const Eigen::VectorXd cost = ctx.instance.cost.tabulate(ms);

  json report = {{"side", side}, {"method", method}, {"shape", shape_json(ms)}};
  std::optional<mot::PrimalSolution> primal;
  if (want_primal) {
    primal = upper ? mot::solve_primal_max(cost, ms, ctx.lp) : mot::solve_primal(cost, ms, ctx.lp);
    report["primal"] = {{"status", mot::to_string(primal->status)}, {"lp", lp_json(primal->stats)}};
    if (primal->status != mot::LpStatus::optimal) {
      if (g.json) {
        print_json(report);
      } else {
        std::printf("primal LP: %s\n", std::string(mot::to_string(primal->status)).c_str());
      }
      return kInfeasible;
    }
    report["primal"]["value"] = primal->value;
    ctx.config.primal_value = primal->value;
  }

  std::optional<mot::AscentResult> dual;
  if (want_dual) {
    dual = upper ? mot::descend_upper(cost, ms, ctx.config) : mot::ascend(cost, ms, ctx.config);
    report["dual"] = {{"variant", mot::to_string(dual->certificate.variant)},
                      {"value", dual->certificate.dual_value},
                      {"iterations", dual->trace.rows.size()},
                      {"status", mot::to_string(dual->trace.status)}};
  }
  if (primal && dual) report["gap"] = mot::relative_gap(primal->value, dual->certificate.dual_value);

  if (!g.out_dir.empty()) {
    if (primal) mot::write_text_file(out_path(g, "coupling.csv"), mot::coupling_to_csv(primal->coupling, ms));
    if (dual) {
      mot::write_text_file(out_path(g, "certificate.json"), mot::certificate_to_json(dual->certificate));
      mot::write_text_file(out_path(g, "trace.csv"), mot::trace_to_csv(dual->trace));
    }
  }

  if (g.json) {
    print_json(report);
  } else {
    std::printf("side: %s\n", side.c_str());
    if (primal) {
      std::printf("primal  %.12g  (LP %ldx%ld, %ld pivots)\n", primal->value,
                  static_cast<long>(primal->stats.rows), static_cast<long>(primal->stats.cols),
                  static_cast<long>(primal->stats.pivots));
    }
    if (dual) {
      std::printf("dual    %.12g  (%s, %zu iterations, %s)\n", dual->certificate.dual_value,
                  std::string(mot::to_string(dual->certificate.variant)).c_str(),
                  dual->trace.rows.size(), std::string(mot::to_string(dual->trace.status)).c_str());
    }
    if (primal && dual) std::printf("gap     %.3e\n", report["gap"].get<double>());
  }
  return kOk;
}

json run_json(const mot::CertifyRun& r) {
  return {{"value", r.value}, {"gap", r.gap}, {"status", mot::to_string(r.status)},
          {"iterations", r.iterations}, {"weak_duality", r.weak_duality}};
}

json hedge_json(const mot::SubhedgeReport& r) {
  return {{"ok", r.ok}, {"min_slack", r.min_slack}};
}

int cmd_certify(const std::string& path, const Globals& g) {
  Context ctx = make_context(path, g);
  const auto& ms = ctx.instance.marginals;
  const auto seq = mot::validate_sequence(ms);
  if (!seq.ok()) return report_infeasible(seq, g);

  const auto report = mot::certify(ctx.instance.cost, ms, ctx.config, ctx.lp);
  if (!report.feasible) {
    if (g.json) {
      print_json({{"feasible", false}, {"reason", report.infeasibility}});
    } else {
      std::printf("infeasible: %s\n", report.infeasibility.c_str());
    }
    return kInfeasible;
  }

  if (!g.out_dir.empty()) {
    mot::write_text_file(out_path(g, "certificate_proposition.json"),
                         mot::certificate_to_json(*report.proposition_certificate));
    mot::write_text_file(out_path(g, "certificate_remark_b.json"),
                         mot::certificate_to_json(*report.remark_b_certificate));
    mot::write_text_file(out_path(g, "certificate_remark_a.json"),
                         mot::certificate_to_json(*report.upper_certificate));
    mot::write_text_file(out_path(g, "coupling_min.csv"), mot::coupling_to_csv(*report.min_coupling, ms));
    mot::write_text_file(out_path(g, "coupling_max.csv"), mot::coupling_to_csv(*report.max_coupling, ms));
  }

  if (g.json) {
    print_json({{"feasible", true},
                {"pass", report.pass()},
                {"target_gap", report.target_gap},
                {"primal_min", report.primal_min},
                {"primal_max", report.primal_max},
                {"lp_min", lp_json(report.lp_min)},
                {"lp_max", lp_json(report.lp_max)},
                {"proposition", run_json(report.proposition)},
                {"remark_b", run_json(report.remark_b)},
                {"remark_a", run_json(report.upper)},
                {"subhedge_optimized", hedge_json(report.subhedge_optimized)},
                {"subhedge_zero", hedge_json(report.subhedge_zero)},
                {"subhedge_remark_b", hedge_json(report.subhedge_remark_b)},
                {"superhedge_remark_a", hedge_json(report.superhedge_upper)}});
  } else {
    std::printf("%-14s %-18s %-10s %-16s %s\n", "run", "value", "gap", "status", "iterations");
    std::printf("%-14s %-18.12g\n", "primal min", report.primal_min);
    std::printf("%-14s %-18.12g\n", "primal max", report.primal_max);
    for (const auto* r : {&report.proposition, &report.remark_b, &report.upper}) {
      std::printf("%-14s %-18.12g %-10.3e %-16s %d\n", r->label.c_str(), r->value, r->gap,
                  std::string(mot::to_string(r->status)).c_str(), r->iterations);
    }
    std::printf("sub-hedge slack: optimized %.3g, u=0 %.3g, remark_b %.3g; super-hedge %.3g\n",
                report.subhedge_optimized.min_slack, report.subhedge_zero.min_slack,
                report.subhedge_remark_b.min_slack, report.superhedge_upper.min_slack);
    std::printf("%s\n", report.pass() ? "certified" : "NOT certified");
  }
  return report.pass() ? kOk : kInfeasible;
}

int cmd_envelope(const std::string& path, std::optional<double> at, bool concave, const Globals& g) {
  const auto f = mot::envelope_input_from_csv(mot::read_text_file(path));
  const auto env = concave ? mot::concave_envelope(f) : mot::convex_envelope(f);
  std::optional<double> value;
  if (at) value = mot::eval_envelope(env, *at);
  if (!g.out_dir.empty()) mot::write_text_file(out_path(g, "envelope.csv"), mot::envelope_to_csv(env));
  if (g.json) {
    json j = {{"orientation", concave ? "concave" : "convex"},
              {"hull_grid", to_std(env.hull_grid)},
              {"hull_values", to_std(env.hull_values)}};
    if (value) j["value"] = *value;
    print_json(j);
  } else if (value) {
    std::printf("%.17g\n", *value);
  } else {
    std::cout << mot::envelope_to_csv(env);
  }
  return kOk;
}

int cmd_quantize(double location, double scale, int m, const Globals& g) {
  const auto mu = mot::quantize_lognormal(location, scale, m);
  if (!g.out_dir.empty()) mot::write_text_file(out_path(g, "marginal.csv"), mot::measure_to_csv(mu));
  if (g.json) {
    print_json({{"atoms", to_std(mu.atoms())}, {"weights", to_std(mu.weights())}, {"mean", mu.mean()}});
  } else {
    std::cout << mot::measure_to_csv(mu);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Martingale optimal transport bounds on finite grids"};
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "Print reports as JSON");
  app.add_option("--out", g.out_dir, "Directory for certificates, couplings and traces");
  app.add_option("--seed", g.seed, "Seed recorded with the optimizer configuration");
  app.add_option("--tol", g.tol, "Target relative gap")->check(CLI::PositiveNumber);
  app.add_option("--max-iters", g.max_iters, "Ascent iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--variant", g.variant, "Lower cascade: proposition or remark_b")
      ->check(CLI::IsMember({"proposition", "remark_b"}));

  std::string instance;
  auto* check = app.add_subcommand("check", "Validate the convex order of the marginals");
  check->add_option("instance", instance, "Instance JSON")->required();

  std::string side = "lower", method = "both";
  auto* solve = app.add_subcommand("solve", "Solve the primal LP, the dual ascent, or both");
  solve->add_option("instance", instance, "Instance JSON")->required();
  solve->add_option("--side", side, "lower (inf) or upper (sup)")->check(CLI::IsMember({"lower", "upper"}));
  solve->add_option("--method", method, "primal, dual or both")
      ->check(CLI::IsMember({"primal", "dual", "both"}));

  auto* certify = app.add_subcommand("certify", "Full primal/dual certification");
  certify->add_option("instance", instance, "Instance JSON")->required();

  std::string csv;
  std::optional<double> at;
  bool concave = false;
  auto* envelope = app.add_subcommand("envelope", "Convex envelope of a tabulated function");
  envelope->add_option("csv", csv, "Two-column x,f CSV")->required();
  envelope->add_option("--at", at, "Evaluate the envelope at t");
  envelope->add_flag("--concave", concave, "Concave envelope instead");

  double location = 0.0, scale = 0.0;
  int m = 0;
  auto* quantize = app.add_subcommand("quantize", "Quantize a lognormal law");
  quantize->add_option("--location", location, "Location of log X")->required();
  quantize->add_option("--scale", scale, "Scale of log X")->required();
  quantize->add_option("--m", m, "Number of atoms")->required();

  // subcommand options may also carry the global flags
  for (auto* sub : {check, solve, certify, envelope, quantize}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*check) return cmd_check(instance, g);
    if (*solve) return cmd_solve(instance, side, method, g);
    if (*certify) return cmd_certify(instance, g);
    if (*envelope) return cmd_envelope(csv, at, concave, g);
    if (*quantize) return cmd_quantize(location, scale, m, g);
  } catch (const mot::CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return kCapExceeded;
  } catch (const mot::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
