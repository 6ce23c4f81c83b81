// resolvent-lab: command line front end.
//
// Exit codes: 0 success, 2 validation error, 3 check failure.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "resolvent_lab/calculus.hpp"
#include "resolvent_lab/classify.hpp"
#include "resolvent_lab/error.hpp"
#include "resolvent_lab/quadrature.hpp"
#include "resolvent_lab/scaling.hpp"
#include "resolvent_lab/serialize.hpp"
#include "resolvent_lab/verify.hpp"

using namespace rlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCheckFailed = 3;

struct Common {
  std::string model = "nn3";
  std::string out;
  std::uint64_t seed = 1;
  int workers = 0;
  bool no_timing = false;
};

struct McFlags {
  std::uint64_t samples = 1000000;
  int strata = 2;
  double importance = 0.5;
  int groups = 15;
};

McConfig make_config(const Common& c, const McFlags& m) {
  McConfig cfg;
  cfg.samples = m.samples;
  cfg.strata_per_axis = m.strata;
  cfg.importance_weight = m.importance;
  cfg.groups = m.groups;
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  cfg.record_time = !c.no_timing;
  validate(cfg);
  return cfg;
}

void add_common(CLI::App* sub, Common& c, bool with_model = true) {
  if (with_model) sub->add_option("--model", c.model, "builtin name or DSL file")->capture_default_str();
  sub->add_option("--out", c.out, "JSON output path (CSV written next to it for tabular results); stdout if omitted");
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--workers", c.workers, "worker threads (0: RESOLVENT_LAB_WORKERS or logical cores)")
      ->check(CLI::NonNegativeNumber);
  sub->add_flag("--no-timing", c.no_timing, "write wall_time = 0 so artifacts are byte-identical");
}

void add_mc(CLI::App* sub, McFlags& m) {
  sub->add_option("--samples", m.samples, "Monte Carlo samples")->capture_default_str();
  sub->add_option("--strata", m.strata, "strata per axis")->capture_default_str();
  sub->add_option("--importance", m.importance, "mixture weight of the level-set proposal")->capture_default_str();
  sub->add_option("--groups", m.groups, "median-of-means groups (odd)")->capture_default_str();
}

Vec to_vec(const std::vector<double>& v, int dim, const char* what) {
  if (int(v.size()) != dim)
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs " + std::to_string(dim) + " components, got " +
                                                std::to_string(v.size()));
  Vec x(dim);
  for (int i = 0; i < dim; ++i) x[i] = v[i];
  return x;
}

std::string csv_path(const std::string& json_path) {
  auto dot = json_path.find_last_of('.');
  auto slash = json_path.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return json_path.substr(0, dot) + ".csv";
  return json_path + ".csv";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  f << text;
}

// JSON to --out with a summary on stdout, or JSON alone on stdout
void emit(const Common& c, const Json& j, const std::string& summary, const std::string& csv = {}) {
  if (c.out.empty()) {
    std::cout << dump(j);
    return;
  }
  write_file(c.out, dump(j));
  std::cout << summary;
  std::cout << "wrote " << c.out << "\n";
  if (!csv.empty()) {
    write_file(csv_path(c.out), csv);
    std::cout << "wrote " << csv_path(c.out) << "\n";
  }
}

std::string g(double x, int p = 6) {
  std::ostringstream s;
  s.precision(p);
  s << x;
  return s.str();
}

std::string csv_num(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------- commands

int cmd_classify(const Common& c, const McFlags& m, bool no_f_omega, int n_max) {
  auto model = resolve_model(c.model);
  ClassifyOptions opt;
  opt.fit_f_omega = !no_f_omega;
  opt.f_omega_config = make_config(c, m);
  opt.probe.n_max = n_max;
  opt.probe.workers = c.workers;
  opt.hyperplanes.seed = c.seed;
  auto r = classify(model, opt);
  std::ostringstream s;
  s << "model " << model.name() << " (d = " << model.dim() << ", " << to_string(model.kind()) << ")\n";
  s << "verdict: " << to_string(r.verdict) << "\n  " << r.reason << "\n";
  s << "hyperplane certificates: " << r.certificates.size() << "\n";
  for (const auto& h : r.certificates) {
    s << "  w = (";
    for (Eigen::Index i = 0; i < h.w.size(); ++i) s << (i ? ", " : "") << h.w[i];
    s << ")" << (h.all_offsets ? " all offsets" : ", r0 = " + g(h.r0)) << ", value " << g(h.value) << "\n";
  }
  s << "critical points: " << r.critical_points.points.size() << (r.critical_points.is_morse ? " (Morse)" : "") << "\n";
  if (r.probe) s << "probe: n0 = " << r.probe->n0_hat << ", eps0 = " << g(r.probe->eps0_hat) << "\n";
  if (r.f_omega) s << "f_omega fit: slope " << g(r.f_omega->slope) << ", R^2 " << g(r.f_omega->r2) << "\n";
  emit(c, artifact("classification", to_json(r)), s.str());
  return kExitOk;
}

int cmd_integrate(const Common& c, const McFlags& m, const std::vector<double>& alpha, double beta,
                  const std::vector<double>& k0) {
  auto model = resolve_model(c.model);
  if (alpha.size() != 3) throw Error(ErrorCode::InvalidArgument, "--alpha needs three comma-separated values");
  ResolventQuery q;
  q.alpha = {alpha[0], alpha[1], alpha[2]};
  q.beta = beta;
  q.k0 = k0.empty() ? Vec(Vec::Zero(model.dim())) : to_vec(k0, model.dim(), "--k0");
  validate(q, model.dim());
  auto e = crossing_integral(model, q, make_config(c, m));
  std::ostringstream s;
  s << "I_scr = " << g(e.value, 10) << " +- " << g(e.standard_error, 3) << "  (median of means " << g(e.median_of_means, 10)
    << ", " << e.samples << " samples)\n";
  s << "beta I_scr = " << g(beta * e.value, 10) << "\n";
  emit(c, artifact("integrate", Json{{"model", model.name()}, {"query", to_json(q)}, {"estimate", to_json(e)}}), s.str());
  return kExitOk;
}

int cmd_sweep(const Common& c, const McFlags& m, const std::vector<double>& betas, int alpha_points, int k0_per_axis,
              int top_k, std::uint64_t final_samples, const std::vector<double>& alpha, const std::vector<double>& k0) {
  auto model = resolve_model(c.model);
  ScanGrid grid;
  if (!alpha.empty()) {
    if (alpha.size() != 3) throw Error(ErrorCode::InvalidArgument, "--alpha needs three comma-separated values");
    ResolventQuery q;
    q.alpha = {alpha[0], alpha[1], alpha[2]};
    q.k0 = k0.empty() ? Vec(Vec::Zero(model.dim())) : to_vec(k0, model.dim(), "--k0");
    grid = single_cell_grid(q);
  } else {
    grid = default_scan_grid(model, alpha_points, k0_per_axis);
  }
  ScanOptions so;
  so.config = make_config(c, m);
  so.top_k = top_k;
  so.final_samples = final_samples;
  auto r = beta_sweep(model, betas.empty() ? default_beta_grid() : betas, grid, so);

  std::ostringstream s, csv;
  csv << "beta,value,standard_error,beta_value,alpha1,alpha2,alpha3";
  for (int i = 0; i < model.dim(); ++i) csv << ",k0_" << i + 1;
  csv << "\n";
  s << "model " << model.name() << ", " << grid.size() << " scan cells per beta\n";
  for (const auto& p : r.points) {
    csv << csv_num(p.beta) << "," << csv_num(p.estimate.value) << "," << csv_num(p.estimate.standard_error) << ","
        << csv_num(p.beta * p.estimate.value);
    for (double a : p.best.alpha) csv << "," << csv_num(a);
    for (Eigen::Index i = 0; i < p.best.k0.size(); ++i) csv << "," << csv_num(p.best.k0[i]);
    csv << "\n";
    s << "  beta " << g(p.beta) << ": I = " << g(p.estimate.value) << " +- " << g(p.estimate.standard_error, 3)
      << ", beta I = " << g(p.beta * p.estimate.value) << "\n";
  }
  if (r.fit)
    s << "fit: rho = " << g(r.fit->rho) << " +- " << g(r.fit->rho_se, 3) << ", q = " << g(r.fit->q) << ", R^2 "
      << g(r.fit->r2) << "\n";
  else
    s << "fit: needs at least 4 beta values\n";
  emit(c, artifact("sweep", Json{{"model", model.name()}, {"sweep", to_json(r)}}), s.str(), csv.str());
  return kExitOk;
}

int cmd_trace(const Common& c, const std::vector<double>& x0v, const std::vector<double>& vv, double lambda,
              double t_extent, int points, int n_max) {
  auto model = resolve_model(c.model);
  const int d = model.dim();
  Vec x0 = to_vec(x0v, d, "--x0");
  Vec v = to_vec(vv, d, "--v");
  if (lambda <= 0) lambda = max_chart_radius(model, x0);
  auto chart = build_level_chart(model, x0, lambda);
  // v is projected onto the tangent plane and normalised
  v -= v.dot(chart.u0()) * chart.u0();
  if (v.norm() < 1e-12) throw Error(ErrorCode::InvalidArgument, "--v is parallel to grad omega(x0)");
  v /= v.norm();
  const double T = (t_extent > 0 ? t_extent : 1.5) * lambda;
  auto curve = trace_level_curve(chart, Vec::Zero(d), v, linspace(-T, T, points));
  Json j{{"model", model.name()}, {"x0", to_json(x0)}, {"v", to_json(v)}, {"lambda", lambda}, {"curve", to_json(curve)}};
  std::ostringstream s, csv;
  if (model.is_trig()) {
    auto seq = gtilde_sequence(model, x0, v, n_max);
    j["gtilde"] = to_json(seq);
    s << "g~_n:";
    for (int n = 2; n <= n_max + 1; ++n) s << " " << g(seq.at(n));
    s << "\n";
  }
  double drift = 0.0;
  for (double w : curve.omega) drift = std::max(drift, std::abs(w - curve.omega[curve.omega.size() / 2]));
  s << "traced " << points << " points over |t| <= " << g(T) << " (lambda = " << g(lambda) << "), omega drift "
    << g(drift, 3) << "\n";
  csv << "t,omega";
  for (int i = 0; i < d; ++i) csv << ",x" << i + 1;
  csv << "\n";
  for (std::size_t k = 0; k < curve.t.size(); ++k) {
    csv << csv_num(curve.t[k]) << "," << csv_num(curve.omega[k]);
    for (int i = 0; i < d; ++i) csv << "," << csv_num(curve.gamma[k][i]);
    csv << "\n";
  }
  emit(c, artifact("trace", j), s.str(), csv.str());
  return kExitOk;
}

int cmd_probe(const Common& c, int n_max, int grid) {
  auto model = resolve_model(c.model);
  ProbeOptions po;
  po.n_max = n_max;
  po.grid_per_axis = grid;
  po.workers = c.workers;
  auto p = curvature_probe(model, po);
  Json j{{"model", model.name()}, {"probe", to_json(p)}};
  std::ostringstream s;
  s << "model " << model.name() << ": n0 = " << p.n0_hat << ", eps0 = " << g(p.eps0_hat) << "\n";
  for (int n = 2; n < int(p.min_by_order.size()); ++n) s << "  orders 2.." << n << ": min " << g(p.min_by_order[n]) << "\n";
  if (p.eps0_hat > 1e-6) {
    auto k = suppression_constants(model, std::max(2, p.n0_hat), std::min(0.5, p.eps0_hat));
    j["constants"] = to_json(k);
    s << "gamma = 1/" << k.gamma_den << ", mu = " << g(k.mu) << ", ln beta0 = " << g(k.log_beta0) << "\n";
  }
  emit(c, artifact("probe", j), s.str());
  return kExitOk;
}

int cmd_verify(const Common& c, const std::string& profile) {
  VerifyOptions o;
  o.profile = parse_profile(profile);
  o.seed = c.seed;
  o.workers = c.workers;
  o.record_time = !c.no_timing;
  const bool to_file = !c.out.empty();
  if (to_file)
    o.on_record = [](const CheckRecord& r) {
      std::cout << (r.status == CheckStatus::Pass ? "PASS " : "FAIL ") << r.id << "  (" << r.draws << " draws, "
                << r.violations << " violations)\n"
                << std::flush;
    };
  auto rep = run_all(o);
  std::ostringstream s;
  std::size_t pass = 0;
  for (const auto& r : rep.records) pass += r.status == CheckStatus::Pass;
  s << pass << "/" << rep.records.size() << " checks passed (" << to_string(rep.profile) << " profile)\n";
  emit(c, to_json(rep), s.str());
  return rep.all_pass() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resolvent-lab: crossing integrals of lattice dispersion relations"};
  app.set_config("--config", "", "TOML/INI file with option defaults; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "resolvent-lab 0.1.0");

  // one set of shared flags per subcommand, so defaults can differ
  Common c_classify, c_integrate, c_sweep, c_trace, c_probe, c_verify;
  McFlags m_classify, m_integrate, m_sweep;
  c_verify.seed = 20240601;

  auto* classify_cmd = app.add_subcommand("classify", "hyperplane certificates, critical points, curvature probe, verdict");
  bool no_f_omega = false;
  int n_max = 4;
  add_common(classify_cmd, c_classify);
  add_mc(classify_cmd, m_classify);
  classify_cmd->add_flag("--no-f-omega", no_f_omega, "skip the f_omega growth fit");
  classify_cmd->add_option("--n-max", n_max, "highest derivative order probed")->capture_default_str();

  auto* integrate_cmd = app.add_subcommand("integrate", "crossing integral at one (alpha, beta, k0)");
  std::vector<double> alpha, k0;
  double beta = 0.1;
  add_common(integrate_cmd, c_integrate);
  add_mc(integrate_cmd, m_integrate);
  integrate_cmd->add_option("--alpha", alpha, "alpha1,alpha2,alpha3")->delimiter(',')->required();
  integrate_cmd->add_option("--beta", beta, "beta > 0")->required();
  integrate_cmd->add_option("--k0", k0, "k0 components (default 0)")->delimiter(',');

  auto* sweep_cmd = app.add_subcommand("sweep", "sup-scan over (alpha, k0) for each beta, with a power-log fit");
  std::vector<double> betas;
  int alpha_points = 5, k0_per_axis = 2, top_k = 8;
  std::uint64_t final_samples = 0;
  add_common(sweep_cmd, c_sweep);
  add_mc(sweep_cmd, m_sweep);
  sweep_cmd->add_option("--betas", betas, "strictly decreasing beta values")->delimiter(',');
  sweep_cmd->add_option("--alpha-points", alpha_points, "alpha grid points per axis")->capture_default_str();
  sweep_cmd->add_option("--k0-per-axis", k0_per_axis, "k0 grid points per axis")->capture_default_str();
  sweep_cmd->add_option("--top-k", top_k, "cells refined at full budget")->capture_default_str();
  sweep_cmd->add_option("--final-samples", final_samples, "re-estimate the maximiser with this budget");
  sweep_cmd->add_option("--alpha", alpha, "fix alpha instead of scanning")->delimiter(',');
  sweep_cmd->add_option("--k0", k0, "fix k0 (with --alpha)")->delimiter(',');

  auto* trace_cmd = app.add_subcommand("trace", "level curve through x0 in direction v, with curvature coefficients");
  std::vector<double> x0, v;
  double lambda = 0.0, extent = 1.5;
  int points = 31, trace_n = 4;
  add_common(trace_cmd, c_trace);
  trace_cmd->add_option("--x0", x0, "base point")->delimiter(',')->required();
  trace_cmd->add_option("--v", v, "direction (projected onto the tangent plane)")->delimiter(',')->required();
  trace_cmd->add_option("--lambda", lambda, "chart radius (default: largest admissible)");
  trace_cmd->add_option("--extent", extent, "trace |t| <= extent * lambda, extent < 2")->capture_default_str();
  trace_cmd->add_option("--points", points, "output points")->capture_default_str()->check(CLI::Range(2, 100000));
  trace_cmd->add_option("--n-max", trace_n, "curvature coefficients up to N + 1")->capture_default_str()->check(CLI::Range(2, 10));

  auto* probe_cmd = app.add_subcommand("probe", "curvature probe estimating n0 and eps0");
  int probe_grid = 0, probe_n = 4;
  add_common(probe_cmd, c_probe);
  probe_cmd->add_option("--n-max", probe_n, "highest derivative order")->capture_default_str();
  probe_cmd->add_option("--grid", probe_grid, "k grid points per axis (0: default)");

  auto* verify_cmd = app.add_subcommand("verify", "run every property check and write the report");
  std::string profile = "smoke";
  add_common(verify_cmd, c_verify, false);
  verify_cmd->add_option("--profile", profile, "smoke, desk or deep")
      ->check(CLI::IsMember({"smoke", "desk", "deep"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }
  try {
    if (classify_cmd->parsed()) return cmd_classify(c_classify, m_classify, no_f_omega, n_max);
    if (integrate_cmd->parsed()) return cmd_integrate(c_integrate, m_integrate, alpha, beta, k0);
    if (sweep_cmd->parsed())
      return cmd_sweep(c_sweep, m_sweep, betas, alpha_points, k0_per_axis, top_k, final_samples, alpha, k0);
    if (trace_cmd->parsed()) return cmd_trace(c_trace, x0, v, lambda, extent, points, trace_n);
    if (probe_cmd->parsed()) return cmd_probe(c_probe, probe_n, probe_grid);
    if (verify_cmd->parsed()) return cmd_verify(c_verify, profile);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
