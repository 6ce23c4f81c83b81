#include "resolvent_lab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "resolvent_lab/calculus.hpp"
#include "resolvent_lab/classify.hpp"
#include "resolvent_lab/error.hpp"
#include "resolvent_lab/oracle.hpp"
#include "resolvent_lab/parallel.hpp"
#include "resolvent_lab/rng.hpp"
#include "resolvent_lab/scaling.hpp"

namespace rlab {

std::string_view to_string(Profile p) {
  switch (p) {
    case Profile::Smoke: return "smoke";
    case Profile::Desk: return "desk";
    case Profile::Deep: return "deep";
  }
  return "?";
}

Profile parse_profile(std::string_view s) {
  if (s == "smoke") return Profile::Smoke;
  if (s == "desk") return Profile::Desk;
  if (s == "deep") return Profile::Deep;
  throw Error(ErrorCode::InvalidArgument, "unknown profile '" + std::string(s) + "' (smoke, desk, deep)");
}

std::uint64_t profile_samples(Profile p) {
  switch (p) {
    case Profile::Smoke: return 100000;
    case Profile::Desk: return 10000000;
    case Profile::Deep: return 100000000;
  }
  return 100000;
}

std::string_view to_string(CheckStatus s) { return s == CheckStatus::Pass ? "Pass" : "Fail"; }

CheckRecord make_record(std::string id, std::string anchor, std::uint64_t draws, std::uint64_t violations,
                        double worst_margin, std::uint64_t seed, std::string detail) {
  CheckRecord r;
  r.id = std::move(id);
  r.anchor = std::move(anchor);
  r.draws = draws;
  r.violations = violations;
  r.worst_margin = worst_margin;
  r.seed = seed;
  r.detail = std::move(detail);
  r.status = (violations == 0 && worst_margin >= -kMarginTolerance) ? CheckStatus::Pass : CheckStatus::Fail;
  return r;
}

CheckRecord record_from_suite(const SuiteResult& s, std::string anchor) {
  return make_record(s.id, std::move(anchor), s.draws, s.violations, s.worst_margin, s.seed, s.detail);
}

CheckRecord aggregate(std::string id, std::string anchor, const std::vector<CheckRecord>& parts, std::uint64_t seed) {
  std::uint64_t draws = 0, viol = 0;
  double margin = std::numeric_limits<double>::infinity();
  std::string detail;
  for (const auto& p : parts) {
    draws += p.draws;
    viol += p.violations + (p.status == CheckStatus::Fail && p.violations == 0 ? 1 : 0);
    margin = std::min(margin, std::isnan(p.worst_margin) ? -1.0 : p.worst_margin);
    if (!detail.empty()) detail += ", ";
    detail += p.id;
    if (p.status == CheckStatus::Fail) detail += " (Fail)";
  }
  auto r = make_record(std::move(id), std::move(anchor), draws, viol, margin, seed, detail);
  for (const auto& p : parts) r.wall_time += p.wall_time;
  return r;
}

bool VerifyReport::all_pass() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.status == CheckStatus::Pass; });
}

const CheckRecord* VerifyReport::find(std::string_view id) const {
  for (const auto& r : records)
    if (r.id == id) return &r;
  return nullptr;
}

std::vector<std::pair<std::string, std::string>> criteria_map() {
  return {
      {"AC1", "sweep.non_suppression.ce_morse_d3"},
      {"AC2", "sweep.suppression_trend.nn3"},
      {"AC3", "bounds.one_dimensional"},
      {"AC4", "geometry.suite"},
      {"AC5", "classification.goldens"},
      {"AC6", "f_omega.log_growth"},
      {"AC7", "lemmas.suite"},
      {"AC8", "mc.oracle_equivalence"},
      {"AC9", "determinism.worker_invariance"},
  };
}

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
CheckRecord timed(const CheckContext& ctx, Fn&& fn) {
  auto t0 = Clock::now();
  CheckRecord r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r = make_record(r.id, r.anchor, 0, 1, -1.0, 0, std::string("exception: ") + e.what());
  }
  r.wall_time = ctx.record_time ? std::chrono::duration<double>(Clock::now() - t0).count() : 0.0;
  return r;
}

CheckRecord suite_record(const CheckContext& ctx, std::string anchor, const std::function<SuiteResult()>& fn) {
  return timed(ctx, [&] { return record_from_suite(fn(), anchor); });
}

// a failing check must still carry its id, so exceptions are caught per check
CheckRecord guarded(const CheckContext& ctx, std::string id, std::string anchor, std::uint64_t seed,
                    const std::function<CheckRecord()>& fn) {
  CheckRecord r = timed(ctx, fn);
  if (r.id.empty()) {
    r.id = std::move(id);
    r.anchor = std::move(anchor);
    r.seed = seed;
  }
  return r;
}

McConfig mc_config(const CheckContext& ctx, std::uint64_t samples, std::uint64_t seed) {
  McConfig c;
  c.samples = samples;
  c.seed = seed;
  c.workers = ctx.workers;
  c.record_time = ctx.record_time;
  return c;
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

// counts one assertion; margin is a relative slack (negative on failure)
struct Counter {
  std::uint64_t draws = 0, violations = 0;
  double margin = std::numeric_limits<double>::infinity();
  std::string detail;

  void check(bool ok, double m, const std::string& what) {
    ++draws;
    if (std::isnan(m)) m = -1.0;
    if (!ok) {
      ++violations;
      m = std::min(m, -0.0);
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
    margin = std::min(margin, m);
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

CheckRecord level_curve_golden(const CheckContext& ctx) {
  const std::uint64_t seed = mix_seed(ctx.seed, 40);
  return guarded(ctx, "geometry.level_curve_golden.nn3", "level curve through (1/4, 0, 0) in direction e2", seed, [&] {
    auto m = builtin_model("nn3");
    Vec x0(3);
    x0 << 0.25, 0.0, 0.0;
    const double lambda = max_chart_radius(m, x0);
    auto chart = build_level_chart(m, x0, lambda);
    Vec v(3);
    v << 0.0, 1.0, 0.0;
    auto times = linspace(-1.5 * lambda, 1.5 * lambda, 7);
    auto c = trace_level_curve(chart, Vec::Zero(3), v, times);
    // on omega = 1 the curve is x1 = acos(1 - cos 2 pi t) / 2 pi, x2 = t, x3 = 0
    double err = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      Vec e(3);
      e << std::acos(1.0 - std::cos(kTwoPi * times[k])) / kTwoPi, times[k], 0.0;
      err = std::max(err, (c.gamma[k] - e).norm());
    }
    Counter cnt;
    cnt.check(err < 1e-7, (1e-7 - err) / 1e-7, "endpoint error " + fmt(err));
    cnt.note("max deviation from closed form " + fmt(err));
    return make_record("geometry.level_curve_golden.nn3", "level curve through (1/4, 0, 0) in direction e2", cnt.draws,
                       cnt.violations, cnt.margin, seed, cnt.detail);
  });
}

}  // namespace

// ================================================================ suites

CheckRecord check_bounds_1d(const CheckContext& ctx, std::vector<CheckRecord>* parts) {
  const std::uint64_t s = mix_seed(ctx.seed, 3);
  std::vector<CheckRecord> p;
  p.push_back(suite_record(ctx, "polynomial resolvent bound on the whole line, degree >= 2",
                           [&] { return suite_poly_whole_line(mix_seed(s, 1)); }));
  p.push_back(suite_record(ctx, "linear resolvent bound on a window",
                           [&] { return suite_linear_window(mix_seed(s, 2)); }));
  p.push_back(suite_record(ctx, "resolvent bound for |f'| >= eps0",
                           [&] { return suite_monotone_interval(mix_seed(s, 3)); }));
  p.push_back(suite_record(ctx, "resolvent bound for |f^(n0)| >= n0! eps0, n0 >= 2",
                           [&] { return suite_higher_order_interval(mix_seed(s, 4)); }));
  auto agg = aggregate("bounds.one_dimensional", "one-dimensional resolvent bounds", p, s);
  if (parts) parts->insert(parts->end(), p.begin(), p.end());
  return agg;
}

CheckRecord check_geometry(const CheckContext& ctx, std::vector<CheckRecord>* parts) {
  const std::uint64_t s = mix_seed(ctx.seed, 4);
  std::vector<CheckRecord> p;
  p.push_back(suite_record(ctx, "periodicity and exact derivatives of the dispersion relation",
                           [&] { return suite_dispersion_properties(mix_seed(s, 1)); }));
  p.push_back(suite_record(ctx, "composite derivative of omega along a curve",
                           [&] { return suite_composite_derivative(mix_seed(s, 2)); }));
  std::uint64_t salt = 10;
  for (const char* name : {"nn3", "ce_morse_d3"}) {
    auto m = builtin_model(name);
    p.push_back(suite_record(ctx, "level chart pullback, Jacobian and containment",
                             [&] { return suite_chart(m, mix_seed(s, salt)); }));
    p.push_back(suite_record(ctx, "level curve stays on its level set",
                             [&] { return suite_level_curve(m, mix_seed(s, salt + 1)); }));
    p.push_back(suite_record(ctx, "curvature coefficients against curve derivatives",
                             [&] { return suite_gtilde(m, mix_seed(s, salt + 2)); }));
    p.push_back(suite_record(ctx, "drift of g_n along the level curve, N = 2",
                             [&] { return suite_curvature_drift(m, mix_seed(s, salt + 3)); }));
    salt += 10;
  }
  p.push_back(level_curve_golden(ctx));
  auto agg = aggregate("geometry.suite", "chart, level curve, composite derivative and curvature coefficients", p, s);
  if (parts) parts->insert(parts->end(), p.begin(), p.end());
  return agg;
}

CheckRecord check_lemmas(const CheckContext& ctx, std::vector<CheckRecord>* parts) {
  const std::uint64_t s = mix_seed(ctx.seed, 7);
  std::vector<CheckRecord> p;
  p.push_back(suite_record(ctx, "Japanese bracket properties", [&] { return suite_bracket(mix_seed(s, 1)); }));
  p.push_back(suite_record(ctx, "resolvent under a shift |h| <= 2 mu beta", [&] { return suite_delbeta(mix_seed(s, 2)); }));
  p.push_back(suite_record(ctx, "integral of <ln s>^p / s", [&] { return suite_lnsint(mix_seed(s, 3)); }));
  p.push_back(suite_record(ctx, "argument shift of gradient indicators", [&] { return suite_idshift(mix_seed(s, 4)); }));
  p.push_back(suite_record(ctx, "gradient difference in a small ball", [&] { return suite_nablaomdiff(mix_seed(s, 5)); }));
  p.push_back(suite_record(ctx, "selection of nu with |nu|, |1 - nu| <= 2", [&] { return suite_select_nu(mix_seed(s, 6)); }));
  auto agg = aggregate("lemmas.suite", "basic estimate lemmas and bracket properties", p, s);
  if (parts) parts->insert(parts->end(), p.begin(), p.end());
  return agg;
}

// ================================================================ classification

CheckRecord check_classification(const CheckContext& ctx) {
  const std::uint64_t seed = mix_seed(ctx.seed, 5);
  const std::string id = "classification.goldens", anchor = "hyperplane certificates and critical points";
  return guarded(ctx, id, anchor, seed, [&] {
    Counter c;
    ClassifyOptions opt;
    opt.fit_f_omega = false;
    opt.probe.workers = ctx.workers;
    opt.hyperplanes.seed = seed;

    auto ce = classify(builtin_model("ce_morse_d3"), opt);
    for (double r0 : {0.25, -0.25}) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& cert : ce.certificates) {
        if (cert.w.size() != 3 || std::abs(cert.w[0]) != 1 || cert.w[1] != 0 || cert.w[2] != 0) continue;
        // (u, r0) and (-u, -r0) name the same hyperplane
        double off = cert.w[0] > 0 ? cert.r0 : -cert.r0;
        best = std::min(best, std::max(std::abs(off - r0), std::abs(cert.value - 5.0)));
      }
      c.check(best < 1e-9, (1e-9 - best) / 1e-9, "ce_morse_d3 certificate e1 at r0 = " + fmt(r0));
    }
    std::size_t ncrit = ce.critical_points.points.size();
    c.check(ncrit == 8, ncrit == 8 ? 1.0 : -1.0, "ce_morse_d3 has " + std::to_string(ncrit) + " critical points");
    c.check(ce.verdict == Verdict::DoesNotSuppress, 1.0 - 2.0 * (ce.verdict != Verdict::DoesNotSuppress),
            "ce_morse_d3 verdict " + std::string(to_string(ce.verdict)));

    auto sq = classify(builtin_model("nn2d_squared"), opt);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cert : sq.certificates) {
      if (cert.w.size() != 2 || std::abs(cert.w[0]) != 1 || cert.w[1] != cert.w[0]) continue;
      // x1 + x2 = 1/2 is x.w = 1/2 with w = (1, 1), offset r0 |w| on u
      double off = (cert.w[0] > 0 ? cert.r0 : -cert.r0) * std::sqrt(2.0);
      double d = std::abs(off - 0.5);
      d = std::min(d, std::abs(std::abs(off - 0.5) - 1.0));  // offsets are defined mod 1 on w
      best = std::min(best, std::max(d, std::abs(cert.value - 2.0)));
    }
    c.check(best < 1e-9, (1e-9 - best) / 1e-9, "nn2d_squared certificate x1 + x2 = 1/2");

    auto n3 = classify(builtin_model("nn3"), opt);
    c.check(n3.certificates.empty(), n3.certificates.empty() ? 1.0 : -1.0, "nn3 has a certificate");
    c.check(n3.critical_points.is_morse, n3.critical_points.is_morse ? 1.0 : -1.0, "nn3 not Morse");
    c.note("ce_morse_d3: " + std::to_string(ce.certificates.size()) + " certificates, " + std::to_string(ncrit) +
           " critical points; nn3: " + std::to_string(n3.critical_points.points.size()) + " critical points, verdict " +
           std::string(to_string(n3.verdict)));
    return make_record(id, anchor, c.draws, c.violations, c.margin, seed, c.detail);
  });
}

CheckRecord check_f_omega(const CheckContext& ctx, std::uint64_t samples) {
  const std::uint64_t seed = mix_seed(ctx.seed, 6);
  const std::string id = "f_omega.log_growth", anchor = "logarithmic growth of the gradient singularity integral";
  return guarded(ctx, id, anchor, seed, [&] {
    Counter c;
    for (const char* name : {"nn3", "ce_morse_d3"}) {
      auto fit = fit_f_omega(builtin_model(name), default_f_omega_grid(), mc_config(ctx, samples, seed));
      c.check(fit.r2 >= kFOmegaFitR2, (fit.r2 - kFOmegaFitR2) / kFOmegaFitR2, std::string(name) + " R^2 " + fmt(fit.r2));
      c.note(std::string(name) + ": slope " + fmt(fit.slope) + ", R^2 " + fmt(fit.r2, 8));
    }
    return make_record(id, anchor, c.draws, c.violations, c.margin, seed, c.detail);
  });
}

// ================================================================ Monte Carlo oracles

CheckRecord check_mc_oracles(const CheckContext& ctx, std::uint64_t samples, int seeds) {
  const std::uint64_t seed = mix_seed(ctx.seed, 8);
  const std::string id = "mc.oracle_equivalence", anchor = "crossing integral against dense-grid and closed forms";
  return guarded(ctx, id, anchor, seed, [&] {
    Counter c;
    auto nn1 = builtin_model("nn1");
    auto om = [&](double k) {
      Vec x(1);
      x[0] = k;
      return nn1.eval(x);
    };
    struct Case {
      double a1, a2, a3, beta, k0;
    };
    const int need = int(std::ceil(0.95 * seeds));
    int ci = 0;
    for (Case cs : {Case{1.0, 1.0, 1.0, 0.1, 0.1}, Case{0.5, 1.5, 2.5, 0.2, 0.3}, Case{2.0, 0.3, 1.0, 0.05, 0.0}}) {
      const double ref = oracle::trapezoid_crossing_1d(om, cs.a1, cs.a2, cs.a3, cs.k0, cs.beta, 2048);
      ResolventQuery q;
      q.alpha = {cs.a1, cs.a2, cs.a3};
      q.beta = cs.beta;
      q.k0 = Vec::Constant(1, cs.k0);
      int hits = 0;
      for (int s = 0; s < seeds; ++s) {
        auto cfg = mc_config(ctx, samples, mix_seed(seed, std::uint64_t(1000 * ci + s)));
        TubeCache local(nn1, cs.beta, cfg.seed);
        auto e = crossing_integral(nn1, q, cfg, &local);
        hits += std::abs(e.value - ref) <= 3.0 * e.standard_error;
      }
      c.check(hits >= need, double(hits - need) / need,
              "case " + std::to_string(ci) + ": " + std::to_string(hits) + " of " + std::to_string(seeds));
      c.note("case " + std::to_string(ci) + " reference " + fmt(ref, 12) + ", within 3 se in " + std::to_string(hits) +
             "/" + std::to_string(seeds));
      ++ci;
    }
    // single resolvent on T^1
    {
      const double alpha = 1.3, beta = 0.05;
      const double ref = oracle::trapezoid_resolvent_1d(om, alpha, beta, 4096);
      int hits = 0;
      for (int s = 0; s < seeds; ++s) {
        auto e = resolvent_torus(nn1, alpha, beta, 0.0, 0.0, mc_config(ctx, samples, mix_seed(seed, 5000 + s)));
        hits += std::abs(e.value - ref) <= 3.0 * e.standard_error;
      }
      c.check(hits >= need, double(hits - need) / need, "single resolvent: " + std::to_string(hits));
      c.note("single resolvent within 3 se in " + std::to_string(hits) + "/" + std::to_string(seeds));
    }
    // omega = 0: the integrand is constant
    for (int d = 1; d <= 3; ++d) {
      auto z = zero_model(d);
      ResolventQuery q;
      q.alpha = {0.5, -1.0, 2.0};
      q.beta = 0.3;
      q.k0 = Vec::Zero(d);
      auto e = crossing_integral(z, q, mc_config(ctx, 10000, mix_seed(seed, 9000 + d)));
      double exact = 1.0;
      for (double a : q.alpha) exact /= std::hypot(a, q.beta);
      double err = std::abs(e.value - exact);
      // summation over the strata and groups rounds at the level of tens of ulps
      double allow = 3.0 * e.standard_error + 64.0 * std::numeric_limits<double>::epsilon() * exact;
      c.check(err <= allow, allow > 0 ? (allow - err) / allow : 0.0,
              "zero model d = " + std::to_string(d) + " error " + fmt(err));
    }
    return make_record(id, anchor, c.draws, c.violations, c.margin, seed, c.detail);
  });
}

CheckRecord check_worker_invariance(const CheckContext& ctx, std::uint64_t samples) {
  const std::uint64_t seed = mix_seed(ctx.seed, 9);
  const std::string id = "determinism.worker_invariance", anchor = "results independent of the worker count";
  return guarded(ctx, id, anchor, seed, [&] {
    Counter c;
    auto nn3 = builtin_model("nn3");
    ResolventQuery q;
    q.alpha = {3.0, 3.0, 3.0};
    q.beta = 0.1;
    q.k0 = Vec::Zero(3);
    auto same = [](const QuadratureEstimate& a, const QuadratureEstimate& b) {
      return a.value == b.value && a.standard_error == b.standard_error && a.median_of_means == b.median_of_means;
    };
    std::vector<QuadratureEstimate> ci, fo;
    for (int w : {1, 8}) {
      McConfig cfg = mc_config(ctx, samples, seed);
      cfg.workers = w;
      ci.push_back(crossing_integral(nn3, q, cfg));
      fo.push_back(f_omega(nn3, 0.25, cfg));
    }
    c.check(same(ci[0], ci[1]), same(ci[0], ci[1]) ? 1.0 : -1.0, "crossing integral differs across workers");
    c.check(same(fo[0], fo[1]), same(fo[0], fo[1]) ? 1.0 : -1.0, "f_omega differs across workers");
    ProbeOptions po;
    po.workers = 1;
    auto p1 = curvature_probe(builtin_model("nn2"), po);
    po.workers = 8;
    auto p8 = curvature_probe(builtin_model("nn2"), po);
    bool ps = p1.min_by_order == p8.min_by_order && p1.eps0_hat == p8.eps0_hat;
    c.check(ps, ps ? 1.0 : -1.0, "curvature probe differs across workers");
    c.note("worker counts 1 and 8 compared bitwise");
    return make_record(id, anchor, c.draws, c.violations, c.margin, seed, c.detail);
  });
}

// ================================================================ sweeps

CheckRecord check_non_suppression(const CheckContext& ctx, std::uint64_t samples) {
  const std::uint64_t seed = mix_seed(ctx.seed, 1);
  const std::string id = "sweep.non_suppression.ce_morse_d3", anchor = "slab lower bound beta I >= c for a flat level set";
  return guarded(ctx, id, anchor, seed, [&] {
    Counter c;
    auto ce = builtin_model("ce_morse_d3");
    HyperplaneOptions ho;
    ho.seed = seed;
    auto certs = find_hyperplanes(ce, ho);
    const HyperplaneCertificate* cert = nullptr;
    for (const auto& h : certs)
      if (h.w.size() == 3 && h.w[0] == 1 && h.w[1] == 0 && h.w[2] == 0 && std::abs(h.r0 - 0.25) < 1e-9) cert = &h;
    if (!cert) throw Error(ErrorCode::PreconditionViolated, "no certificate at u = e1, r0 = 1/4");
    const std::vector<double> betas{0.3, 0.1, 0.03, 0.01};
    auto bound = slab_lower_bound(ce, *cert, betas, mc_config(ctx, std::min<std::uint64_t>(samples, 1000000), seed));
    c.note("c = " + fmt(bound.c) + " (C = " + fmt(bound.C) + ", C' = " + fmt(bound.c_prime) + ")");
    ResolventQuery q;
    q.alpha = {5.0, 5.0, 5.0};
    q.k0 = Vec(3);
    q.k0 << 0.25, 0.0, 0.0;
    double prev = 0.0, prev_se = 0.0;
    for (std::size_t i = 0; i < betas.size(); ++i) {
      q.beta = betas[i];
      auto e = crossing_integral(ce, q, mc_config(ctx, samples, mix_seed(seed, 10 + i)));
      const double v = betas[i] * e.value, se = betas[i] * e.standard_error;
      c.check(v - 3.0 * se >= bound.c, (v - 3.0 * se - bound.c) / bound.c, "beta I below c at beta = " + fmt(betas[i]));
      if (i > 0) {
        double slack = 3.0 * std::hypot(se, prev_se);
        c.check(v >= prev - slack, (v - prev + slack) / prev, "beta I decreases at beta = " + fmt(betas[i]));
      }
      auto sc = slab_check(ce, bound, betas[i], mc_config(ctx, std::max<std::uint64_t>(samples / 10, 10000), mix_seed(seed, 20 + i)));
      c.check(sc.pass, (sc.scaled + 3.0 * sc.scaled_se - bound.c) / bound.c,
              "slab-restricted beta I below c at beta = " + fmt(betas[i]));
      c.note("beta " + fmt(betas[i]) + ": beta I = " + fmt(v) + " +- " + fmt(se) + ", slab part " + fmt(sc.scaled));
      prev = v;
      prev_se = se;
    }
    return make_record(id, anchor, c.draws, c.violations, c.margin, seed, c.detail);
  });
}

CheckRecord check_suppression_trend(const CheckContext& ctx, std::uint64_t samples, std::uint64_t scan_samples) {
  const std::uint64_t seed = mix_seed(ctx.seed, 2);
  const std::string id = "sweep.suppression_trend.nn3", anchor = "decay of beta sup I for a suppressing relation";
  return guarded(ctx, id, anchor, seed, [&] {
    Counter c;
    auto nn3 = builtin_model("nn3");
    auto grid = default_scan_grid(nn3);
    ScanOptions so;
    so.config = mc_config(ctx, std::min(scan_samples, samples), seed);
    so.final_samples = samples;
    double v[2], se[2];
    int i = 0;
    for (double beta : {0.3, 0.01}) {
      auto r = sup_scan(nn3, beta, grid, so);
      v[i] = beta * r.estimate.value;
      se[i] = beta * r.estimate.standard_error;
      c.note("beta " + fmt(beta) + ": beta I = " + fmt(v[i]) + " +- " + fmt(se[i]) + " at alpha = (" +
             fmt(r.best.alpha[0]) + ", " + fmt(r.best.alpha[1]) + ", " + fmt(r.best.alpha[2]) + ")");
      ++i;
    }
    const double ratio = v[0] / v[1];
    c.check(ratio >= 1.5, (ratio - 1.5) / 1.5, "decay factor " + fmt(ratio));
    c.note("decay factor " + fmt(ratio));
    return make_record(id, anchor, c.draws, c.violations, c.margin, seed, c.detail);
  });
}

// ================================================================ orchestration

VerifyReport run_all(const VerifyOptions& opt) {
  VerifyReport rep;
  rep.profile = opt.profile;
  rep.seed = opt.seed;
  rep.criteria = criteria_map();
  CheckContext ctx{opt.seed, opt.workers, opt.record_time};
  auto emit = [&](CheckRecord r) {
    if (opt.on_record) opt.on_record(r);
    rep.records.push_back(std::move(r));
  };

  // the three property groups are independent and cheap; run them side by side
  std::vector<CheckRecord> parts[3];
  CheckRecord aggs[3];
  parallel_for(3, opt.workers, [&](std::size_t k) {
    if (k == 0) aggs[0] = check_geometry(ctx, &parts[0]);
    if (k == 1) aggs[1] = check_bounds_1d(ctx, &parts[1]);
    if (k == 2) aggs[2] = check_lemmas(ctx, &parts[2]);
  });
  for (int k = 0; k < 3; ++k) {
    for (auto& p : parts[k]) emit(p);
    emit(aggs[k]);
  }

  const std::uint64_t n = profile_samples(opt.profile);
  emit(check_classification(ctx));
  emit(check_f_omega(ctx, std::min<std::uint64_t>(n, 1000000)));
  emit(check_mc_oracles(ctx, 20000));
  emit(check_worker_invariance(ctx, 100000));
  if (opt.profile != Profile::Smoke) {
    emit(check_non_suppression(ctx, n));
    emit(check_suppression_trend(ctx, n, 1000000));
  }
  return rep;
}

}  // namespace rlab
