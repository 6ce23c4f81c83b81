#include "resolvent_lab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "resolvent_lab/calculus.hpp"
#include "resolvent_lab/error.hpp"
#include "resolvent_lab/oracle.hpp"
#include "resolvent_lab/quadrature.hpp"
#include "resolvent_lab/rng.hpp"

namespace rlab {

namespace {

// Accumulates one suite. A draw may carry several checks; it counts as one
// violation if any of them fails.
class Tally {
 public:
  Tally(std::string id, std::uint64_t seed) {
    r_.id = std::move(id);
    r_.seed = seed;
  }

  // lhs <= rhs up to a relative rounding slack
  void le(double lhs, double rhs, double slack = kRoundingSlack) {
    double scale = std::max(std::abs(lhs), std::abs(rhs));
    double denom = std::abs(rhs) > 0 ? std::abs(rhs) : (scale > 0 ? scale : 1.0);
    margin((rhs - lhs) / denom);
    if (!(lhs <= rhs + slack * scale)) failed_ = true;
  }

  // err < tol
  void below(double err, double tol) {
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    r_.max_error = std::max(r_.max_error, err);
    margin((tol - err) / tol);
    if (!(err < tol)) failed_ = true;
  }

  void fail() {
    margin(-std::numeric_limits<double>::infinity());
    failed_ = true;
  }

  void end_draw() {
    ++r_.draws;
    if (failed_) ++r_.violations;
    failed_ = false;
  }

  SuiteResult finish(std::string detail = {}) {
    r_.detail = std::move(detail);
    if (r_.draws == 0) r_.worst_margin = 0.0;
    return r_;
  }

 private:
  void margin(double m) {
    if (std::isnan(m)) m = -std::numeric_limits<double>::infinity();
    r_.worst_margin = std::min(r_.worst_margin, m);
  }

  SuiteResult r_;
  bool failed_ = false;
};

double log_uniform(CounterRng& rng, double lo, double hi) { return std::exp(rng.uniform(std::log(lo), std::log(hi))); }
double random_sign(CounterRng& rng) { return rng.uniform() < 0.5 ? -1.0 : 1.0; }

Vec random_point(CounterRng& rng, int d) {
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.uniform(-0.5, 0.5);
  return x;
}

Vec random_unit(CounterRng& rng, int d) {
  Vec v(d);
  do {
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
  } while (v.norm() < 1e-6);
  return v / v.norm();
}

Vec random_unit_orthogonal(CounterRng& rng, const Vec& u) {
  for (;;) {
    Vec v = random_unit(rng, int(u.size()));
    v -= v.dot(u) * u;
    if (v.norm() > 1e-3) return v / v.norm();
  }
}

Resolvent1dOptions quad_options(double tol) {
  Resolvent1dOptions o;
  o.abs_tolerance = tol;
  o.rel_tolerance = tol;
  o.max_panels = 1000000;
  return o;
}

// base point with a gradient large enough for a usable chart
Vec well_conditioned_point(const DispersionModel& model, CounterRng& rng, double min_grad) {
  for (int tries = 0; tries < 100000; ++tries) {
    Vec x = random_point(rng, model.dim());
    if (model.gradient(x).norm() >= min_grad) return x;
  }
  throw Error(ErrorCode::ZeroGradient, "no point with a large enough gradient");
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

}  // namespace

TrigPoly random_trig_poly(CounterRng& rng, int dim, int terms, int max_freq) {
  std::vector<TrigTerm> t;
  while (int(t.size()) < terms) {
    TrigTerm term;
    term.m = IVec(dim);
    bool nonzero = false;
    for (int i = 0; i < dim; ++i) {
      term.m[i] = int(std::floor(rng.uniform() * (2 * max_freq + 1))) - max_freq;
      nonzero |= term.m[i] != 0;
    }
    if (!nonzero) continue;
    term.cos_coeff = rng.uniform(-1.0, 1.0);
    term.sin_coeff = rng.uniform(-1.0, 1.0);
    t.push_back(term);
  }
  return TrigPoly(dim, rng.uniform(-1.0, 1.0), std::move(t));
}

// ================================================================ 1D bounds

SuiteResult suite_poly_whole_line(std::uint64_t seed, int draws, double tol) {
  Tally t("bound.poly_whole_line", seed);
  auto opt = quad_options(tol);
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 101, std::uint64_t(i));
    const int n = 2 + int(rng.uniform() * 4.0);
    std::vector<double> c(n + 1);
    for (int k = 0; k < n; ++k) c[k] = rng.uniform(-3.0, 3.0);
    c[n] = random_sign(rng) * rng.uniform(0.2, 3.0);
    const double beta = log_uniform(rng, 1e-4, 1.0);
    auto r = resolvent_1d_polynomial(c, 0.0, beta, opt);
    double rhs = 2.0 * (n + 2) * std::pow(std::abs(c[n]), -1.0 / n) * std::pow(beta, 1.0 / n - 1.0);
    t.le(r.value, rhs);
    t.end_draw();
  }
  return t.finish();
}

SuiteResult suite_linear_window(std::uint64_t seed, int draws, double tol) {
  Tally t("bound.linear_window", seed);
  auto opt = quad_options(tol);
  double worst_cross = 0.0;
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 102, std::uint64_t(i));
    const double a1 = random_sign(rng) * log_uniform(rng, 0.05, 20.0);
    const double a0 = rng.uniform(-5.0, 5.0);
    const double x0 = rng.uniform(-5.0, 5.0);
    const double lambda = log_uniform(rng, 1e-3, 1e2);
    const double beta = log_uniform(rng, 1e-6, 1.0);
    auto f = [&](double x) { return a0 + a1 * x; };
    auto r = resolvent_1d(f, 0.0, beta, x0 - lambda, x0 + lambda, opt);
    // exact value through y = a0 + a1 x
    double ya = f(x0 - lambda), yb = f(x0 + lambda);
    double exact = oracle::linear_resolvent_closed_form(std::min(ya, yb), std::max(ya, yb), 0.0, beta) / std::abs(a1);
    double cross = std::abs(r.value - exact);
    worst_cross = std::max(worst_cross, cross / std::max(tol, tol * exact));
    t.below(cross, 10.0 * std::max(tol, tol * exact));
    double rhs = 6.0 * sabs(std::log(sabs(lambda * a1))) / std::abs(a1) * sabs(std::log(beta));
    t.le(exact, rhs);
    t.le(r.value, rhs);
    t.end_draw();
  }
  return t.finish("max |quadrature - closed form| / tol = " + fmt(worst_cross));
}

SuiteResult suite_monotone_interval(std::uint64_t seed, int draws, double tol) {
  Tally t("bound.monotone_interval", seed);
  auto opt = quad_options(tol);
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 103, std::uint64_t(i));
    const double c = rng.uniform(0.1, 5.0);
    const double w = rng.uniform(0.5, 10.0);
    const double A = rng.uniform(0.0, 0.9) * c / w;
    const double ph = rng.uniform(0.0, kTwoPi);
    const double sg = random_sign(rng);
    const double a = rng.uniform(-5.0, 4.9);
    const double b = rng.uniform(a + 0.1, 5.0);
    auto f = [&](double x) { return sg * (c * x + A * std::sin(w * x + ph)); };
    const double eps0 = c - A * w;
    const double m0 = std::max(std::abs(f(a)), std::abs(f(b)));
    const double alpha = rng.uniform(-m0 - 1.0, m0 + 1.0);
    const double beta = log_uniform(rng, 1e-6, 1.0);
    auto r = resolvent_1d(f, alpha, beta, a, b, opt);
    double rhs = 6.0 * sabs(std::log(sabs(m0))) / eps0 * sabs(std::log(beta));
    t.le(r.value, rhs);
    t.end_draw();
  }
  return t.finish();
}

SuiteResult suite_higher_order_interval(std::uint64_t seed, int draws, double tol) {
  Tally t("bound.higher_order_interval", seed);
  auto opt = quad_options(tol);
  int rejected = 0;
  std::uint64_t index = 0;
  for (int i = 0; i < draws;) {
    CounterRng rng(seed, 104, index++);
    const int n0 = rng.uniform() < 0.5 ? 2 : 3;
    std::vector<double> p(n0 + 2);
    for (int k = 0; k < n0; ++k) p[k] = rng.uniform(-3.0, 3.0);
    p[n0] = random_sign(rng) * rng.uniform(0.5, 5.0);
    p[n0 + 1] = random_sign(rng) * rng.uniform(0.1, 2.0);
    const double a = rng.uniform(-2.0, 1.9);
    const double b = rng.uniform(a + 0.1, 2.0);
    // f^(n0)(x) / n0! = p[n0] + (n0 + 1) p[n0+1] x is affine, so its extremes are at a, b
    auto dn = [&](double x) { return p[n0] + (n0 + 1) * p[n0 + 1] * x; };
    if (dn(a) * dn(b) <= 0.0) {
      ++rejected;
      continue;
    }
    const double eps0 = std::min(std::abs(dn(a)), std::abs(dn(b)));
    const double m0 = std::abs(p[n0 + 1]);
    const double M = std::max(m0, 1.0);
    const double Cn = std::pow(2.0, n0 + 1) * std::pow(n0 + 1.0, n0);
    const double eps_p = eps0 / (M * Cn);
    const double beta = std::pow(eps_p, n0 + 1) * log_uniform(rng, 1e-2, 1.0);
    // put a near-root of order n0 inside the interval
    const double xr = rng.uniform(a, b);
    p[0] -= polynomial_value(p, xr);
    auto f = [&](double x) { return polynomial_value(p, x); };
    auto r = resolvent_1d(f, 0.0, beta, a, b, opt);
    double rhs = Cn * ((b - a) / eps0 * std::pow(beta, 1.0 / (n0 + 1) - 1.0) +
                       M * std::pow(eps0, -1.0 / n0) * std::pow(beta, 1.0 / n0 - 1.0));
    t.le(r.value, rhs);
    t.end_draw();
    ++i;
  }
  return t.finish("rejected draws with a sign change of f^(n0): " + std::to_string(rejected));
}

// ================================================================ lemmas

SuiteResult suite_delbeta(std::uint64_t seed, int draws) {
  Tally t("lemma.delbeta", seed);
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 201, std::uint64_t(i));
    const double beta = log_uniform(rng, 1e-6, 1e2);
    const double mu = log_uniform(rng, 1e-4, 1e4);
    double h = rng.uniform() < 0.1 ? random_sign(rng) * 2.0 * mu * beta : rng.uniform(-1.0, 1.0) * 2.0 * mu * beta;
    double x;
    double pick = rng.uniform();
    if (pick < 0.4) {
      x = -h * rng.uniform(0.5, 1.5);  // near the pole of the left side
    } else if (pick < 0.7) {
      x = random_sign(rng) * beta * log_uniform(rng, 1e-3, 1e3);
    } else {
      x = rng.uniform(-1.0, 1.0) * 4.0 * mu * beta;
    }
    const double lhs = 1.0 / std::hypot(x + h, beta);
    const double rhs = (mu + sabs(mu)) / std::hypot(x, beta);
    t.le(lhs, rhs);
    t.end_draw();
  }
  return t.finish();
}

SuiteResult suite_lnsint(std::uint64_t seed, int draws) {
  Tally t("lemma.lnsint", seed);
  std::vector<double> gx, gw;
  oracle::gauss_legendre(16, 0.0, 1.0, gx, gw);
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 202, std::uint64_t(i));
    const double p = rng.uniform() < 0.1 ? 0.0 : rng.uniform(0.0, 6.0);
    const double beta = rng.uniform() < 0.05 ? 1.0 : log_uniform(rng, 1e-12, 1.0);
    // s = e^{-y}: int_0^L <y>^p dy, composite Gauss-Legendre on unit panels
    const double L = -std::log(beta);
    const int panels = std::max(1, int(std::ceil(L)));
    const double hp = L / panels;
    double integral = 0.0;
    for (int k = 0; k < panels; ++k)
      for (std::size_t j = 0; j < gx.size(); ++j) integral += hp * gw[j] * std::pow(sabs((k + gx[j]) * hp), p);
    t.le(integral, std::pow(sabs(std::log(beta)), p + 1.0));
    t.end_draw();
  }
  return t.finish();
}

SuiteResult suite_idshift(std::uint64_t seed, int draws) {
  Tally t("lemma.idshift", seed);
  int active = 0;
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 203, std::uint64_t(i));
    const int d = 1 + int(rng.uniform() * 4.0);
    TrigPoly w = random_trig_poly(rng, d, 3, 2);
    const double M2 = w.derivative_bound(2);
    const double a = rng.uniform(0.01, 0.99);
    const double p = rng.uniform(0.1, 4.0);
    const Vec y = random_point(rng, d);
    const double gy = w.gradient(y).norm();
    const double s = gy * rng.uniform(0.05, 1.2);
    if (!(s > 0)) {
      t.end_draw();
      continue;
    }
    const double lambda = rng.uniform(0.01, 1.0) * a * s / M2;
    const Vec x = y + random_unit(rng, d) * lambda * rng.uniform(0.0, 1.2);
    const double gx = w.gradient(x).norm();
    const bool near = (x - y).norm() < lambda;
    const double lhs = (near && gy >= s) ? std::pow(gy, -p) : 0.0;
    const double rhs = (near && gx >= (1.0 - a) * s) ? std::pow(1.0 + a, p) * std::pow(gx, -p) : 0.0;
    active += lhs > 0;
    t.le(lhs, rhs);
    t.end_draw();
  }
  return t.finish("draws with both indicators on: " + std::to_string(active));
}

SuiteResult suite_nablaomdiff(std::uint64_t seed, int draws) {
  Tally t("lemma.nablaomdiff", seed);
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 204, std::uint64_t(i));
    const int d = 1 + int(rng.uniform() * 4.0);
    TrigPoly w = random_trig_poly(rng, d, 3, 2);
    const double M2 = w.derivative_bound(2);
    const double a = log_uniform(rng, 1e-3, 10.0);
    const Vec x0 = random_point(rng, d);
    const Vec g0 = w.gradient(x0);
    const Vec x = x0 + random_unit(rng, d) * (a / M2 * g0.norm() * rng.uniform());
    t.le((w.gradient(x) - g0).norm(), a * g0.norm());
    t.end_draw();
  }
  return t.finish();
}

SuiteResult suite_bracket(std::uint64_t seed, int draws) {
  Tally t("lemma.bracket", seed);
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 205, std::uint64_t(i));
    auto draw = [&] { return rng.uniform() < 0.05 ? 0.0 : random_sign(rng) * log_uniform(rng, 1e-6, 1e6); };
    double x = draw(), y = draw();
    t.le(std::abs(x), sabs(x));
    double sx = std::abs(x) <= std::abs(y) ? x : y, sy = std::abs(x) <= std::abs(y) ? y : x;
    t.le(sabs(sx), sabs(sy));
    t.le(sabs(std::log(sabs(sx))), sabs(std::log(sabs(sy))));
    t.le(sabs(x + y), sabs(x) + sabs(y));
    t.le(sabs(x) + sabs(y), 2.0 * sabs(x) * sabs(y));
    t.le(sabs(x * y), sabs(x) * sabs(y));
    if (std::abs(x) >= 1.0) t.le(sabs(x * y), std::abs(x) * sabs(y));
    t.end_draw();
  }
  return t.finish();
}

SuiteResult suite_select_nu(std::uint64_t seed, int draws) {
  Tally t("lemma.select_nu", seed);
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 206, std::uint64_t(i));
    const int n = 2 + int(rng.uniform() * 7.0);
    const double eps = log_uniform(rng, 1e-6, 1e2);
    const double c = random_sign(rng) * eps * (rng.uniform() < 0.2 ? 1.0 : log_uniform(rng, 1.0, 1e3));
    // a, b on the scale of c, with a fraction chosen to nearly cancel c at nu = 1 or 0
    double a = random_sign(rng) * std::abs(c) * log_uniform(rng, 1e-3, 1e3);
    double b = random_sign(rng) * std::abs(c) * log_uniform(rng, 1e-3, 1e3);
    double pick = rng.uniform();
    if (pick < 0.25) a = -c + rng.uniform(-1.0, 1.0) * eps;
    else if (pick < 0.5) b = -c + rng.uniform(-1.0, 1.0) * eps;
    try {
      const double nu = select_nu(n, a, b, c, eps);
      const double val = std::pow(nu, n) * a + std::pow(1.0 - nu, n) * b + c;
      t.le(std::max(std::abs(nu), std::abs(1.0 - nu)), 2.0, 0.0);
      t.le(0.5 * eps, std::abs(val));
    } catch (const Error&) {
      t.fail();
    }
    t.end_draw();
  }
  return t.finish();
}

// ================================================================ geometry

SuiteResult suite_dispersion_properties(std::uint64_t seed, int draws) {
  Tally t("geometry.dispersion", seed);
  std::vector<DispersionModel> models;
  for (const auto& name : builtin_names()) models.push_back(builtin_model(name));
  double worst_grad = 0.0;
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 301, std::uint64_t(i));
    const auto& m = models[std::size_t(i) % models.size()];
    const int d = m.dim();
    Vec x = random_point(rng, d);
    if (!m.is_trig() && m.in_cusp_exclusion(x)) {
      t.end_draw();
      continue;
    }
    const double w = m.eval(x);
    Vec shift(d);
    for (int k = 0; k < d; ++k) shift[k] = double(int(std::floor(rng.uniform() * 7.0)) - 3);
    t.below(std::abs(m.eval(x + shift) - w), 1e-12 * (1.0 + std::abs(w)));
    const Vec g = m.gradient(x);
    const Vec v = random_unit(rng, d);
    const double h = 1e-3;
    const double fd = oracle::fd_derivative([&](double s) { return m.eval(x + s * v); }, 0.0, 1, h);
    const double err = std::abs(fd - g.dot(v)) / (1.0 + g.norm());
    worst_grad = std::max(worst_grad, err);
    t.below(err, 1e-6);
    Mat H = m.hessian(x);
    t.below((H - H.transpose()).norm(), 1e-12 * (1.0 + H.norm()));
    t.end_draw();
  }
  return t.finish("max gradient vs finite difference = " + fmt(worst_grad));
}

SuiteResult suite_composite_derivative(std::uint64_t seed, int draws, double tol) {
  Tally t("geometry.composite_derivative", seed);
  int skipped = 0;
  std::uint64_t index = 0;
  for (int i = 0; i < draws;) {
    CounterRng rng(seed, 302, index++);
    const int d = 2 + int(rng.uniform() * 2.0);
    const int n = 1 + int(rng.uniform() * 5.0);
    TrigPoly w = random_trig_poly(rng, d, 3, 1);
    const Vec xb = random_point(rng, d);
    // Gamma(t) = xb + sum_m c_m t^m, so Gamma^(m)(0) = m! c_m
    std::vector<Vec> cm, curve;
    double fact = 1.0;
    for (int m = 1; m <= n; ++m) {
      fact *= m;
      Vec c(d);
      for (int k = 0; k < d; ++k) c[k] = rng.normal() * 0.3 / m;
      cm.push_back(c);
      curve.push_back(c * fact);
    }
    // the reference evaluates omega(Gamma(t)) directly in extended precision
    auto along = [&](long double s) {
      long double x[kMaxDim];
      for (int k = 0; k < d; ++k) x[k] = xb[k];
      long double p = 1.0L;
      for (const auto& c : cm) {
        p *= s;
        for (int k = 0; k < d; ++k) x[k] += c[k] * p;
      }
      long double val = w.constant();
      for (const auto& term : w.terms()) {
        long double ph = 0.0L;
        for (int k = 0; k < d; ++k) ph += term.m[k] * x[k];
        ph *= 2.0L * 3.141592653589793238462643383279502884L;
        val += term.cos_coeff * std::cos(ph) + term.sin_coeff * std::sin(ph);
      }
      return val;
    };
    MixedDerivative md = [&](std::span<const Vec> dirs) { return w.mixed(xb, dirs); };
    const double value = composite_derivative(md, curve, n);
    const double ref = double(oracle::fd_derivative_wide(along, 0.0L, n, 0.025L) / fact);
    // relative error is undefined near a zero of the derivative
    double scale = 0.0;
    for (const auto& term : w.terms()) scale += std::hypot(term.cos_coeff, term.sin_coeff);
    if (std::abs(ref) < 1e-3 * scale) {
      ++skipped;
      continue;
    }
    t.below(std::abs(value - ref) / std::abs(ref), tol);
    t.end_draw();
    ++i;
  }
  return t.finish("draws redrawn for |reference| < 1e-3 scale: " + std::to_string(skipped));
}

SuiteResult suite_chart(const DispersionModel& model, std::uint64_t seed, int base_points, int draws) {
  Tally t("geometry.chart." + model.name(), seed);
  double worst_pull = 0.0, det_lo = 1e300, det_hi = 0.0;
  const int d = model.dim();
  for (int b = 0; b < base_points; ++b) {
    CounterRng rng(seed, 303, std::uint64_t(b));
    const Vec x0 = well_conditioned_point(model, rng, 1.0);
    const double lambda = max_chart_radius(model, x0);
    LevelChart chart = build_level_chart(model, x0, lambda);
    const double gn = chart.grad_norm();
    for (int i = 0; i < draws / base_points; ++i) {
      CounterRng r2(seed, 304 + std::uint32_t(b), std::uint64_t(i));
      Vec y = random_unit(r2, d) * (2.0 * lambda * std::pow(r2.uniform(), 1.0 / d));
      try {
        Vec x = chart.psi(y);
        double pull = std::abs(model.eval(x) - chart.omega0() - gn * y[0]);
        worst_pull = std::max(worst_pull, pull);
        t.below(pull, 1e-10);
        t.below((chart.phi(x) - y).norm(), 1e-10);
        double det = chart.dpsi(y).determinant();
        det_lo = std::min(det_lo, det);
        det_hi = std::max(det_hi, det);
        t.le(2.0 / 3.0, det, 0.0);
        t.le(det, 2.0, 0.0);
        t.le((x - x0).norm(), 4.0 * lambda);
        t.le((model.gradient(x) - chart.grad0()).norm(), 0.5 * gn);
      } catch (const Error&) {
        t.fail();
      }
      t.end_draw();
    }
  }
  return t.finish("max pullback residual " + fmt(worst_pull) + ", det range [" + fmt(det_lo) + ", " + fmt(det_hi) + "]");
}

SuiteResult suite_level_curve(const DispersionModel& model, std::uint64_t seed, int draws) {
  Tally t("geometry.level_curve." + model.name(), seed);
  double worst = 0.0;
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 305, std::uint64_t(i));
    const Vec x0 = well_conditioned_point(model, rng, 1.0);
    const double lambda = max_chart_radius(model, x0);
    LevelChart chart = build_level_chart(model, x0, lambda);
    const Vec v = random_unit_orthogonal(rng, chart.u0());
    Vec y = Vec::Zero(model.dim());
    auto times = linspace(-1.5 * lambda, 1.5 * lambda, 31);
    try {
      auto c = trace_level_curve(chart, y, v, times);
      double w0 = model.eval(chart.psi(y));
      double drift = 0.0;
      for (double w : c.omega) drift = std::max(drift, std::abs(w - w0));
      worst = std::max(worst, drift);
      t.below(drift, 1e-8);
      // the curve stays in the slice x0 + t v + s u0, which is the chart path psi(t A^T v)
      double dev = 0.0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        Vec p = chart.psi(y + times[k] * (chart.A().transpose() * v));
        dev = std::max(dev, (p - c.gamma[k]).norm());
      }
      t.below(dev, 1e-8);
    } catch (const Error&) {
      t.fail();
    }
    t.end_draw();
  }
  return t.finish("max omega drift " + fmt(worst));
}

SuiteResult suite_gtilde(const DispersionModel& model, std::uint64_t seed, int draws, double tol) {
  Tally t("geometry.gtilde." + model.name(), seed);
  double worst = 0.0;
  int skipped = 0;
  std::uint64_t index = 0;
  for (int i = 0; i < draws;) {
    CounterRng rng(seed, 306, index++);
    const Vec x0 = well_conditioned_point(model, rng, 1.0);
    const double lambda = max_chart_radius(model, x0);
    LevelChart chart = build_level_chart(model, x0, lambda);
    const Vec u0 = chart.u0();
    const Vec v = random_unit_orthogonal(rng, u0);
    const Vec dir = chart.A().transpose() * v;
    auto seq = gtilde_sequence(model, x0, v, 4);
    auto g_path = [&](double s) { return level_slope(model, chart.psi(s * dir), v, u0); };
    double scale = std::abs(seq.at(2));
    bool any_small = false;
    std::vector<double> errs;
    double fact = 1.0;
    for (int n = 2; n <= 4; ++n) {
      fact *= n;
      double ref = oracle::fd_derivative(g_path, 0.0, n - 1, 0.5 * lambda) / fact;
      if (std::abs(ref) < 1e-6 * std::max(1.0, scale)) {
        any_small = true;
        break;
      }
      errs.push_back(std::abs(seq.at(n) - ref) / std::abs(ref));
    }
    if (any_small) {
      ++skipped;
      continue;
    }
    for (double e : errs) {
      worst = std::max(worst, e);
      t.below(e, tol);
    }
    t.end_draw();
    ++i;
  }
  return t.finish("max relative error " + fmt(worst) + ", redrawn near-zero references: " + std::to_string(skipped));
}

SuiteResult suite_curvature_drift(const DispersionModel& model, std::uint64_t seed, int draws) {
  Tally t("geometry.curvature_drift." + model.name(), seed);
  constexpr int N = 2;
  auto norms = model.smooth_norms(N + 1);
  const double M2 = norms.cumulative(2), M3 = norms.cumulative(3);
  const double a0 = std::max(1.0, 8.0 * M2);
  const double b = 1.0 + std::pow(2.0, N) + M3 * std::pow(2.0, 2 * N + 1);
  const double C = 1.0 + M2 / 2.0;
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(seed, 307, std::uint64_t(i));
    const Vec x0 = well_conditioned_point(model, rng, 0.5);
    const double gn = model.gradient(x0).norm();
    const double r0 = std::min(1.0, gn);
    const double lambda = r0 / a0;
    LevelChart chart = build_level_chart(model, x0, lambda);
    const Vec u0 = chart.u0();
    const Vec v = random_unit_orthogonal(rng, u0);
    const Vec dir = chart.A().transpose() * v;
    auto seq = gtilde_sequence(model, x0, v, N);
    auto g_path = [&](double s) { return level_slope(model, chart.psi(s * dir), v, u0); };
    const double tt = rng.uniform(-1.6, 1.6) * lambda;
    const double h = 0.05 * lambda;
    try {
      // g_n(t) = (1/n!) d^{n-1}/dt^{n-1} g(gamma(t))
      double g1 = g_path(tt);
      double g2 = oracle::fd_derivative(g_path, tt, 1, h) / 2.0;
      double g3 = oracle::fd_derivative(g_path, tt, 2, h) / 6.0;
      t.le(std::abs(g1 - 0.0), a0 * lambda / r0);
      t.le(std::abs(g2 - seq.at(2)), a0 * b * lambda / (r0 * r0));
      t.le(std::abs(g3 - seq.at(3)), 5.0 * C * a0 * b * b * lambda * std::pow(r0, -N - 2));
    } catch (const Error&) {
      t.fail();
    }
    t.end_draw();
  }
  return t.finish("N = 2, b = " + fmt(b) + ", a0 = " + fmt(a0));
}

}  // namespace rlab
