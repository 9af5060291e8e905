#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bergman/experiments.hpp"

// Command-line front end for the experiment drivers.  Every subcommand
// resolves one ExperimentConfig (defaults, then --config, then --out/--seed
// overrides), runs, emits the deterministic report artifacts, prints one
// line per check, and exits 0 exactly when every check passed.

namespace {

using bergman::ExperimentConfig;
using bergman::FactoredSymbol;
using bergman::Report;
using nlohmann::ordered_json;

ordered_json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ordered_json::parse(in);
}

void print_checks(const Report& r) {
  for (const auto& c : r.checks)
    std::printf("[%s] %-32s margin=%-13.6g %s\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.margin, c.detail.c_str());
  std::printf("experiment=%s checks=%zu truncated=%s all_pass=%s\n",
              r.experiment.c_str(), r.checks.size(),
              r.truncated ? "true" : "false",
              r.all_pass() ? "true" : "false");
}

int emit_and_score(const Report& r, const ExperimentConfig& cfg) {
  bergman::emit_report(r, cfg.out_json, cfg.out_csv);
  print_checks(r);
  if (!cfg.out_json.empty()) std::printf("wrote %s\n", cfg.out_json.c_str());
  if (!cfg.out_csv.empty()) std::printf("wrote %s\n", cfg.out_csv.c_str());
  return r.all_pass() ? 0 : 1;
}

Report run_named(const std::string& id, const ExperimentConfig& cfg) {
  if (id == "geometry") return bergman::run_geometry_suite(cfg);
  if (id == "reverse-cs") return bergman::run_reverse_cs(cfg);
  if (id == "chain") return bergman::run_discretization_chain(cfg);
  if (id == "cutoff") return bergman::run_cutoff_divergence(cfg);
  if (id == "ratio") return bergman::run_main_theorem_ratio(cfg);
  throw std::invalid_argument("unknown verification id: " + id);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "weighted Bergman-ball toolkit: trees, mean oscillation, commutator "
      "spectra, and the cutoff experiments"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "experiment config file (json)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_path,
                 "output path (report json, or node list for tree build)");
  auto* seed_opt =
      app.add_option("--seed", seed, "override the config random seed");

  // Resolve the effective config after parsing: file, then flag overrides.
  auto cfg_now = [&]() {
    ExperimentConfig cfg;
    if (!config_path.empty())
      cfg = bergman::config_from_json(parse_json_file(config_path));
    if (!out_path.empty()) cfg.out_json = out_path;
    if (!seed_opt->empty()) {
      cfg.seed = seed;
      cfg.quadrature.seed = seed;
    }
    return cfg;
  };

  std::function<int()> run;

  auto* tree = app.add_subcommand("tree", "Bergman tree construction");
  tree->require_subcommand(1);
  auto* tree_build =
      tree->add_subcommand("build", "build the tree and export one node "
                                    "per line (anchor, center, links)");
  tree_build->callback([&] {
    run = [&]() {
      const ExperimentConfig cfg = cfg_now();
      const bergman::BergmanTree t =
          bergman::build_tree_guarded(cfg.tree_config());
      if (cfg.out_json.empty()) {
        bergman::export_jsonl(t, std::cout);
      } else {
        std::ofstream os(cfg.out_json);
        if (!os) throw std::runtime_error("cannot write " + cfg.out_json);
        bergman::export_jsonl(t, os);
        std::printf("wrote %s\n", cfg.out_json.c_str());
      }
      std::printf("nodes=%d depth=%d lambda=%g mode=%s\n", t.node_count(),
                  cfg.depth, cfg.lambda, cfg.mode.c_str());
      return 0;
    };
  });
  auto* tree_check = tree->add_subcommand(
      "check", "measured re-verification of the tree/geometry invariants");
  tree_check->callback([&] {
    run = [&]() {
      const ExperimentConfig cfg = cfg_now();
      return emit_and_score(bergman::run_geometry_suite(cfg), cfg);
    };
  });

  auto* mo = app.add_subcommand("mo", "mean oscillation of the config symbol");
  mo->require_subcommand(1);
  auto* mo_eval = mo->add_subcommand(
      "eval", "evaluate MO_gamma(f)^2 at radial points |z|^2 = t");
  std::vector<double> ts;
  mo_eval->add_option("--t", ts, "evaluation points t = |z|^2 in [0, 1)")
      ->required()
      ->expected(-1);
  mo_eval->callback([&] {
    run = [&]() {
      const ExperimentConfig cfg = cfg_now();
      const FactoredSymbol f = cfg.make_symbol();
      Report r;
      r.experiment = "mean-oscillation";
      r.inputs = bergman::config_to_json(cfg);
      ordered_json rows = ordered_json::array();
      bool ok = true;
      for (double t : ts) {
        const double mo2 = bergman::mo_sq_factored(f, cfg.gamma, t);
        const bergman::complexd b = bergman::berezin_factored(f, cfg.gamma, t);
        std::printf("t=%-10.6g MO^2=%-14.8g MO=%-14.8g B(f)=%.8g%+.8gi\n", t,
                    mo2, std::sqrt(mo2), b.real(), b.imag());
        ordered_json row;
        row["t"] = t;
        row["mo_sq"] = mo2;
        row["berezin_re"] = b.real();
        row["berezin_im"] = b.imag();
        rows.push_back(std::move(row));
        ok = ok && std::isfinite(mo2) && mo2 >= 0.0;
      }
      r.tables["points"] = std::move(rows);
      r.add_check("mo-finite-nonnegative", ok, ok ? 1.0 : -1.0,
                  "MO^2 finite and >= 0 at every requested point");
      return emit_and_score(r, cfg);
    };
  });

  auto* op = app.add_subcommand("op", "commutator operator model");
  op->require_subcommand(1);
  auto* op_spec = op->add_subcommand(
      "spectrum", "Hankel column singular values and Schatten power sums");
  int top = 10;
  op_spec->add_option("--top", top, "how many singular values to print")
      ->check(CLI::PositiveNumber);
  op_spec->callback([&] {
    run = [&]() {
      const ExperimentConfig cfg = cfg_now();
      const FactoredSymbol f = cfg.make_symbol();
      const int D = cfg.degree_cap;
      std::vector<double> s =
          bergman::hankel_column_singular_values(f, cfg.gamma, D);
      std::sort(s.begin(), s.end(), std::greater<double>());
      Report r;
      r.experiment = "operator-spectrum";
      r.inputs = bergman::config_to_json(cfg);
      ordered_json rows = ordered_json::array();
      for (int i = 0; i < int(s.size()) && i < top; ++i) {
        std::printf("s[%d] = %.12g\n", i, s[size_t(i)]);
        ordered_json row;
        row["i"] = i;
        row["s"] = s[size_t(i)];
        rows.push_back(std::move(row));
      }
      ordered_json sums = ordered_json::array();
      bool ok = !s.empty() && std::isfinite(s.front());
      for (double p : cfg.p_list) {
        const double sp =
            bergman::commutator_schatten_power_p(f, cfg.gamma, p, D);
        std::printf("sum s^p (both families, D=%d, p=%g) = %.12g\n", D, p, sp);
        ordered_json row;
        row["p"] = p;
        row["sum"] = sp;
        sums.push_back(std::move(row));
        ok = ok && std::isfinite(sp) && sp >= 0.0;
      }
      r.tables["singular_values"] = std::move(rows);
      r.tables["schatten"] = std::move(sums);
      r.add_check("spectrum-finite", ok, ok ? 1.0 : -1.0,
                  "singular values and Schatten sums finite and >= 0");
      return emit_and_score(r, cfg);
    };
  });

  auto* verify = app.add_subcommand(
      "verify", "run one verification driver and assert its checks");
  std::string verify_id;
  verify
      ->add_option("id", verify_id,
                   "geometry | reverse-cs | chain | cutoff | ratio")
      ->required()
      ->check(CLI::IsMember(
          {"geometry", "reverse-cs", "chain", "cutoff", "ratio"}));
  verify->callback([&] {
    run = [&]() {
      const ExperimentConfig cfg = cfg_now();
      return emit_and_score(run_named(verify_id, cfg), cfg);
    };
  });

  auto* theorem = app.add_subcommand(
      "theorem", "Schatten sum vs discrete oscillation sum");
  theorem->require_subcommand(1);
  auto* theorem_ratio = theorem->add_subcommand(
      "ratio", "sweep S(D) against V(rho): plateau above the cutoff, "
               "divergence at or below it");
  theorem_ratio->callback([&] {
    run = [&]() {
      const ExperimentConfig cfg = cfg_now();
      return emit_and_score(bergman::run_main_theorem_ratio(cfg), cfg);
    };
  });

  auto* cutoff = app.add_subcommand(
      "cutoff", "truncation ladders for the MO^p invariant integrals");
  cutoff->callback([&] {
    run = [&]() {
      const ExperimentConfig cfg = cfg_now();
      return emit_and_score(bergman::run_cutoff_divergence(cfg), cfg);
    };
  });

  auto* report = app.add_subcommand(
      "report", "reload a report: print checks, re-emit csv, validate the "
                "round trip");
  std::string report_path;
  report->add_option("file", report_path, "report json produced by a driver")
      ->required()
      ->check(CLI::ExistingFile);
  report->callback([&] {
    run = [&]() {
      const ordered_json j = parse_json_file(report_path);
      const Report r = bergman::report_from_json(j);
      print_checks(r);
      const ordered_json again = bergman::report_to_json(r);
      const bool stable = again == j;
      std::printf("round-trip %s\n", stable ? "stable" : "MISMATCH");
      if (!out_path.empty()) {
        bergman::emit_report(r, "", out_path);
        std::printf("wrote %s\n", out_path.c_str());
      }
      return (r.all_pass() && stable) ? 0 : 1;
    };
  });

  // let --config/--out/--seed appear after the subcommand name too
  for (CLI::App* sub : app.get_subcommands({})) {
    sub->fallthrough();
    for (CLI::App* nested : sub->get_subcommands({})) nested->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return run();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
