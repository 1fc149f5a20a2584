/**
 * @file sniftle_cli.cpp
 * @brief Command-line front end: point, scan, validate, bound-study.
 *
 * Exit codes: 0 success, 2 config error, 3 numeric failure, 4 I/O error.
 */
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sniftle/config.hpp"
#include "sniftle/covariance.hpp"
#include "sniftle/errors.hpp"
#include "sniftle/fieldscan.hpp"
#include "sniftle/io.hpp"
#include "sniftle/measures.hpp"
#include "sniftle/montecarlo.hpp"
#include "sniftle/version.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
  std::string config_path;
  std::string output_path;
  std::size_t workers = 0;  // 0 = resolve from env / hardware
  std::uint64_t seed = 0;
  bool seed_set = false;
};

std::size_t resolve_workers(const CommonOpts& opts) {
  if (opts.workers > 0) return opts.workers;
  if (const char* env = std::getenv("SNIFTLE_WORKERS")) {
    const long v = std::atol(env);
    if (v > 0) return std::size_t(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void print_matrix(const char* label, const sniftle::Mat& m) {
  std::printf("%s\n", label);
  for (std::size_t i = 0; i < m.dim(); ++i) {
    std::printf(" ");
    for (std::size_t j = 0; j < m.dim(); ++j)
      std::printf(" %s", sniftle::format_double(m(i, j)).c_str());
    std::printf("\n");
  }
}

int cmd_point(const CommonOpts& opts, const std::vector<double>& xi0, double t) {
  const auto cfg = sniftle::RunConfig::parse_file(opts.config_path);
  const auto model = cfg.make_model();
  if (xi0.size() != model.n) {
    std::fprintf(stderr, "error: --xi0 needs %zu coordinates\n", model.n);
    return kExitConfig;
  }
  const auto xi_cov = cfg.xi_cov(model.n);
  const auto scales = cfg.scales(model.n);
  const auto icfg = cfg.integrator();

  const auto sol = sniftle::solve_flow(model, xi0, t, icfg);
  const auto rec = sniftle::measures_from_solution(sol, xi_cov);
  const auto dec = sniftle::covariance(sol, scales);

  std::printf("# sniftle %s\n# config_hash %s\n", sniftle::kVersion,
              cfg.hash_hex().c_str());
  std::printf("xi0 =");
  for (double x : rec.xi0) std::printf(" %s", sniftle::format_double(x).c_str());
  std::printf("\nt = %s\n", sniftle::format_double(rec.t).c_str());
  std::printf("ftle = %s\n", sniftle::format_double(rec.ftle).c_str());
  std::printf("sniftle = %s\n", sniftle::format_double(rec.sniftle).c_str());
  std::printf("s2 = %s\n", sniftle::format_double(rec.s2).c_str());
  std::printf("q2 = %s\n", sniftle::format_double(rec.q2).c_str());
  std::printf("position =");
  for (double x : sol.position) std::printf(" %s", sniftle::format_double(x).c_str());
  std::printf("\nconsistency_defect = %s\n",
              sniftle::format_double(sol.consistency_defect).c_str());
  print_matrix("covariance_ic_term =", dec.ic_term);
  print_matrix("covariance_noise_term =", dec.noise_term);
  print_matrix("covariance_total =", dec.total);
  return 0;
}

int cmd_scan(const CommonOpts& opts) {
  const auto cfg = sniftle::RunConfig::parse_file(opts.config_path);
  const auto model = cfg.make_model();
  const auto spec = cfg.scan_spec(model);
  const auto result = sniftle::run_scan(model, spec, resolve_workers(opts));

  sniftle::Provenance prov{cfg.hash_hex(),
                           opts.seed_set ? opts.seed : cfg.get_u64_or("run", "seed", 0)};
  const std::string out_path =
      !opts.output_path.empty() ? opts.output_path
                                : cfg.get_string_or("output", "path", "scan_output.txt");
  const std::string format = cfg.get_string_or("output", "format", "text");
  {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::fprintf(stderr, "error: cannot open output path '%s'\n", out_path.c_str());
      return kExitIo;
    }
    if (format == "binary")
      sniftle::write_field_binary(out, spec, result, prov);
    else if (format == "text")
      sniftle::write_field_text(out, spec, result, prov);
    else
      throw sniftle::ConfigError("output.format must be text or binary");
    if (!out) {
      std::fprintf(stderr, "error: write failed for '%s'\n", out_path.c_str());
      return kExitIo;
    }
  }

  auto summary = [&](const char* name, auto getter) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < result.records.size(); ++i) {
      if (result.status[i] != sniftle::RecordStatus::kOk) continue;
      const double v = getter(result.records[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    std::printf("%s min %s max %s\n", name, sniftle::format_double(lo).c_str(),
                sniftle::format_double(hi).c_str());
  };
  std::printf("wrote %zu records to %s\n", result.records.size(), out_path.c_str());
  summary("ftle", [](const sniftle::MeasureRecord& r) { return r.ftle; });
  summary("sniftle", [](const sniftle::MeasureRecord& r) { return r.sniftle; });
  summary("s2", [](const sniftle::MeasureRecord& r) { return r.s2; });
  summary("q2", [](const sniftle::MeasureRecord& r) { return r.q2; });
  std::printf("failures %zu\n", result.failure_count());
  return 0;
}

int cmd_validate(const CommonOpts& opts, const std::vector<double>& xi0, double t) {
  const auto cfg = sniftle::RunConfig::parse_file(opts.config_path);
  const auto model = cfg.make_model();
  if (xi0.size() != model.n) {
    std::fprintf(stderr, "error: --xi0 needs %zu coordinates\n", model.n);
    return kExitConfig;
  }
  auto mc = cfg.mc_config(model.n, opts.seed, opts.seed_set);
  mc.workers = resolve_workers(opts);
  const auto icfg = cfg.integrator();
  const double cov_tol = cfg.get_double_or("validate", "cov_rel_tol", 0.1);
  const double proj_tol = cfg.get_double_or("validate", "proj_sup_tol", 0.1);

  const auto report = sniftle::gaussian_validation(model, xi0, t, mc, icfg);

  // projection-variance supremum of the ε-scaled deviation vs analytic S²
  sniftle::McConfig mc_s2 = mc;
  const double eps_probe = mc.scales.eps > 0.0 ? mc.scales.eps : 1e-3;
  mc_s2.scales = sniftle::UncertaintyScales(eps_probe, 0.0, mc.scales.xi_cov);
  const auto [ex, el] = sniftle::simulate_pair(model, xi0, t, mc_s2);
  const auto sol = sniftle::solve_flow(model, xi0, t, icfg);
  const double proj_sup = sniftle::projection_variance_sup(ex, sol.position, eps_probe);
  const double s2_analytic = sniftle::s2(sol);
  const double proj_rel = std::abs(proj_sup - s2_analytic) / s2_analytic;

  std::printf("# sniftle %s\n# config_hash %s\n# seed %llu\n", sniftle::kVersion,
              cfg.hash_hex().c_str(), static_cast<unsigned long long>(mc.seed));
  std::printf("cov_rel_error = %s (tol %s) %s\n",
              sniftle::format_double(report.cov_rel_error).c_str(),
              sniftle::format_double(cov_tol).c_str(),
              report.cov_rel_error <= cov_tol ? "PASS" : "FAIL");
  std::printf("mean_abs_error = %s\n",
              sniftle::format_double(report.mean_abs_error).c_str());
  std::printf("projection_sup = %s s2 = %s rel_error = %s (tol %s) %s\n",
              sniftle::format_double(proj_sup).c_str(),
              sniftle::format_double(s2_analytic).c_str(),
              sniftle::format_double(proj_rel).c_str(),
              sniftle::format_double(proj_tol).c_str(),
              proj_rel <= proj_tol ? "PASS" : "FAIL");
  if (report.skipped_fraction > 0.0)
    std::printf("skipped_fraction = %s\n",
                sniftle::format_double(report.skipped_fraction).c_str());
  return (report.cov_rel_error <= cov_tol && proj_rel <= proj_tol) ? 0 : kExitNumeric;
}

int cmd_bound_study(const CommonOpts& opts, const std::vector<double>& xi0, double t) {
  const auto cfg = sniftle::RunConfig::parse_file(opts.config_path);
  const auto model = cfg.make_model();
  if (xi0.size() != model.n) {
    std::fprintf(stderr, "error: --xi0 needs %zu coordinates\n", model.n);
    return kExitConfig;
  }
  const auto levels = cfg.get_doubles("study", "levels");
  if (levels.size() < 4) {
    std::fprintf(stderr, "error: insufficient levels (need >= 4, got %zu)\n",
                 levels.size());
    return kExitConfig;
  }
  std::vector<int> r_orders;
  for (double r : cfg.get_doubles("study", "r_orders")) r_orders.push_back(int(r));
  const std::string axis_name = cfg.get_string("study", "axis");
  sniftle::ScalingAxis axis;
  if (axis_name == "eps_only")
    axis = sniftle::ScalingAxis::kEpsOnly;
  else if (axis_name == "delta_only")
    axis = sniftle::ScalingAxis::kDeltaOnly;
  else
    throw sniftle::ConfigError("study.axis must be eps_only or delta_only");

  auto mc = cfg.mc_config(model.n, opts.seed, opts.seed_set);
  mc.workers = resolve_workers(opts);
  const auto study = sniftle::bound_scaling_study(model, xi0, t, axis, levels, r_orders, mc);

  sniftle::Provenance prov{cfg.hash_hex(), mc.seed};
  const std::string out_path =
      !opts.output_path.empty() ? opts.output_path
                                : cfg.get_string_or("output", "path", "study_output.txt");
  std::ofstream out(out_path);
  if (!out) {
    std::fprintf(stderr, "error: cannot open output path '%s'\n", out_path.c_str());
    return kExitIo;
  }
  sniftle::write_study_text(out, study, prov);
  for (const auto& [r, fit] : study.slopes) {
    if (study.degenerate)
      std::printf("r=%d degenerate-zero (moments at integrator tolerance)\n", r);
    else
      std::printf("r=%d slope %s residual %s%s\n", r,
                  sniftle::format_double(fit.slope).c_str(),
                  sniftle::format_double(fit.residual).c_str(),
                  fit.monotone ? "" : " [inconclusive]");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unified finite-time uncertainty measures (FTLE, SNIFTLE, S2, Q2)"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::vector<double> xi0;
  double t = 1.0;

  auto add_common = [&](CLI::App* sub, bool needs_point) {
    sub->add_option("--config", opts.config_path, "config file")->required();
    sub->add_option("--output", opts.output_path, "output path override");
    sub->add_option("--workers", opts.workers, "worker thread count");
    sub->add_option("--seed", opts.seed, "RNG seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
    if (needs_point) {
      sub->add_option("--xi0", xi0, "initial condition coordinates")->required();
      sub->add_option("--t", t, "horizon time")->required();
    }
  };

  auto* point = app.add_subcommand("point", "evaluate one (xi0, t) record");
  auto* scan = app.add_subcommand("scan", "run a grid scan and write the field");
  auto* validate = app.add_subcommand("validate", "Monte Carlo Gaussian validation");
  auto* study = app.add_subcommand("bound-study", "(eps, delta) moment-scaling study");
  add_common(point, true);
  add_common(scan, false);
  add_common(validate, true);
  add_common(study, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (point->parsed()) return cmd_point(opts, xi0, t);
    if (scan->parsed()) return cmd_scan(opts);
    if (validate->parsed()) return cmd_validate(opts, xi0, t);
    if (study->parsed()) return cmd_bound_study(opts, xi0, t);
  } catch (const sniftle::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const sniftle::Error& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return 0;
}
