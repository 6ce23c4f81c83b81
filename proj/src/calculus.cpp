#include "resolvent_lab/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "resolvent_lab/error.hpp"

namespace rlab {

double composition_weight(std::span<const int> parts) {
  double w = 1.0;
  int tail = std::accumulate(parts.begin(), parts.end(), 0);
  for (std::size_t j = 0; j + 1 < parts.size(); ++j) {
    w *= double(parts[j]) / tail;
    tail -= parts[j];
  }
  return w;
}

namespace {

void compositions_rec(int remaining, int slots, std::vector<int>& cur, std::vector<Composition>& out) {
  if (slots == 1) {
    cur.push_back(remaining);
    out.push_back({cur, composition_weight(cur)});
    cur.pop_back();
    return;
  }
  for (int m = 1; m <= remaining - (slots - 1); ++m) {
    cur.push_back(m);
    compositions_rec(remaining - m, slots - 1, cur, out);
    cur.pop_back();
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<Composition> enumerate_compositions(int n, int k) {
  if (k < 1 || n < k || n > kMaxDerivativeOrder)
    throw Error(ErrorCode::InvalidArgument, "compositions need 1 <= k <= n <= 12");
  std::vector<Composition> out;
  std::vector<int> cur;
  compositions_rec(n, k, cur, out);
  return out;
}

double composite_derivative(const MixedDerivative& f, std::span<const Vec> curve, int n) {
  if (n < 1 || n > kMaxDerivativeOrder) throw Error(ErrorCode::InvalidArgument, "order must lie in 1..12");
  if (int(curve.size()) < n) throw Error(ErrorCode::InvalidArgument, "need curve derivatives up to order n");
  std::vector<Vec> scaled(n);
  for (int m = 1; m <= n; ++m) scaled[m - 1] = curve[m - 1] / factorial(m);
  double total = 0.0;
  std::vector<Vec> dirs;
  for (int k = 1; k <= n; ++k) {
    for (const auto& c : enumerate_compositions(n, k)) {
      dirs.clear();
      for (int m : c.parts) dirs.push_back(scaled[m - 1]);
      total += c.weight * f(dirs);
    }
  }
  return total;
}

Mat rotation_to_e1(const Vec& u) {
  const int d = int(u.size());
  Vec un = u / u.norm();
  Mat O(d, d);
  if (d == 1) {
    O(0, 0) = un[0] >= 0 ? 1.0 : -1.0;
    return O;
  }
  Vec e1 = Vec::Zero(d);
  e1[0] = 1.0;
  Vec w;
  double sign;
  if (un[0] <= 0) {
    w = un - e1;  // H un = e1
    sign = 1.0;
  } else {
    w = un + e1;  // H un = -e1
    sign = -1.0;
  }
  Mat H = Mat::Identity(d, d) - 2.0 * w * w.transpose() / w.squaredNorm();
  O = sign * H;
  if (O.determinant() < 0) O.row(1) *= -1.0;
  return O;
}

double max_chart_radius(const DispersionModel& model, const Vec& x0) {
  if (!model.is_trig()) throw Error(ErrorCode::UnsupportedModel, "level charts need a TrigPoly model");
  double m2 = model.smooth_norms(2).cumulative(2);
  return model.gradient(x0).norm() / (8.0 * m2);
}

LevelChart::LevelChart(DispersionModel model, Vec x0, double lambda, double newton_tolerance)
    : model_(std::move(model)), x0_(std::move(x0)), lambda_(lambda), tol_(newton_tolerance) {
  omega0_ = model_.value_and_gradient(x0_, grad0_);
  grad_norm_ = grad0_.norm();
  if (!(grad_norm_ > 0.0)) throw Error(ErrorCode::ZeroGradient, "grad omega(x0) = 0");
  u0_ = grad0_ / grad_norm_;
  O_ = rotation_to_e1(u0_);
  A_ = O_.transpose();
}

Vec LevelChart::phi(const Vec& x) const {
  Vec dx = x - x0_;
  Vec q = dx - u0_ * u0_.dot(dx);
  Vec out = O_ * q;
  out[0] += (model_.eval(x) - omega0_) / grad_norm_;
  return out;
}

Mat LevelChart::dphi(const Vec& x) const {
  Vec f = (model_.gradient(x) - grad0_) / grad_norm_;
  Mat J = O_;
  J.row(0) += f.transpose();
  return J;
}

Vec LevelChart::psi(const Vec& y) const { return psi(y, nullptr, nullptr); }

Vec LevelChart::psi(const Vec& y, int* iterations, double* residual) const {
  if (y.size() != x0_.size()) throw Error(ErrorCode::InvalidArgument, "chart coordinate has wrong dimension");
  constexpr double eps = std::numeric_limits<double>::epsilon();
  Vec x = x0_ + A_ * y;
  double floor = 16 * eps * ((std::abs(omega0_) + 1.0) / grad_norm_ + x.lpNorm<Eigen::Infinity>());
  double tol = std::max(tol_, floor);
  Vec r = phi(x) - y;
  double res = r.norm();
  int it = 0;
  for (; it < 50 && res >= tol; ++it) {
    Vec step = dphi(x).partialPivLu().solve(r);
    double t = 1.0;
    bool moved = false;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      Vec xn = x - t * step;
      Vec rn = phi(xn) - y;
      double resn = rn.norm();
      if (resn < res) {
        x = xn;
        r = rn;
        res = resn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (res >= tol)
    throw Error(ErrorCode::NewtonDivergence, "chart inverse did not converge (residual " + std::to_string(res) + ")");
  // one more step to squeeze out the last digits
  Vec xn = x - dphi(x).partialPivLu().solve(r);
  Vec rn = phi(xn) - y;
  if (rn.norm() < res) {
    x = xn;
    res = rn.norm();
  }
  if (iterations) *iterations = it;
  if (residual) *residual = res;
  return x;
}

Mat LevelChart::dpsi(const Vec& y) const { return dphi(psi(y)).inverse(); }

LevelChart build_level_chart(const DispersionModel& model, const Vec& x0, double lambda, double newton_tolerance) {
  if (!model.is_trig()) throw Error(ErrorCode::UnsupportedModel, "level charts need a TrigPoly model");
  if (x0.size() != model.dim()) throw Error(ErrorCode::InvalidArgument, "base point has wrong dimension");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "chart radius must be positive");
  Vec g = model.gradient(x0);
  if (g.norm() == 0.0) throw Error(ErrorCode::ZeroGradient, "grad omega(x0) = 0");
  double lmax = max_chart_radius(model, x0);
  if (lambda > lmax * (1.0 + 1e-12))
    throw Error(ErrorCode::RadiusTooLarge,
                "lambda " + std::to_string(lambda) + " exceeds |grad omega(x0)|/(8 M2) = " + std::to_string(lmax));
  return LevelChart(model, x0, lambda, newton_tolerance);
}

std::vector<double> linspace(double t0, double t1, int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "linspace needs n >= 2");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = t0 + (t1 - t0) * i / (n - 1);
  out.back() = t1;
  return out;
}

double level_slope(const DispersionModel& model, const Vec& x, const Vec& v, const Vec& u0) {
  Vec g = model.gradient(x);
  return v.dot(g) / u0.dot(g);
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

struct Integrator {
  const DispersionModel& model;
  const Vec& v;
  const Vec& u0;
  double tol;
  int steps = 0;
  int rejected = 0;

  Vec rhs(const Vec& x) const {
    Vec g = model.gradient(x);
    double den = u0.dot(g);
    if (!(den > 0.0)) throw Error(ErrorCode::LeftChart, "level curve reached a point with u0.grad omega <= 0");
    return v - (v.dot(g) / den) * u0;
  }

  // advances x from t to t_end, h carries the step size between calls
  void advance(Vec& x, double t, double t_end, double& h) {
    const double dir = t_end >= t ? 1.0 : -1.0;
    Vec k1 = rhs(x);
    while (dir * (t_end - t) > 0) {
      const double rem = std::abs(t_end - t);
      const bool clipped = std::abs(h) >= rem;
      double hh = clipped ? rem : std::abs(h);
      double s = dir * hh;
      Vec k2 = rhs(x + s * (a21 * k1));
      Vec k3 = rhs(x + s * (a31 * k1 + a32 * k2));
      Vec k4 = rhs(x + s * (a41 * k1 + a42 * k2 + a43 * k3));
      Vec k5 = rhs(x + s * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      Vec k6 = rhs(x + s * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      Vec xn = x + s * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      Vec k7 = rhs(xn);
      Vec err = s * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double en = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        en = std::max(en, std::abs(err[i]) / (tol * (1.0 + std::max(std::abs(x[i]), std::abs(xn[i])))));
      if (en <= 1.0) {
        x = xn;
        k1 = k7;
        t = clipped ? t_end : t + s;
        ++steps;
      } else {
        ++rejected;
      }
      double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      // a step shortened to hit t_end says nothing about the admissible size
      if (!(clipped && en <= 1.0)) h = hh * fac;
      if (en > 1.0 && h < 1e-14 * (1.0 + std::abs(t)))
        throw Error(ErrorCode::BudgetExceeded, "level curve step size underflow");
      if (steps + rejected > 1000000) throw Error(ErrorCode::BudgetExceeded, "level curve step budget exhausted");
    }
  }
};

}  // namespace

LevelCurve trace_level_curve(const LevelChart& chart, const Vec& y, const Vec& v, std::span<const double> times,
                             double tolerance) {
  const auto& u0 = chart.u0();
  const double two_lambda = 2.0 * chart.lambda();
  if (v.size() != chart.x0().size() || y.size() != chart.x0().size())
    throw Error(ErrorCode::InvalidArgument, "trace: dimension mismatch");
  if (std::abs(v.norm() - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "v must be a unit vector");
  if (std::abs(v.dot(u0)) > 1e-10) throw Error(ErrorCode::InvalidArgument, "v must be orthogonal to u0");
  if (!(y.norm() < two_lambda)) throw Error(ErrorCode::LeftChart, "start offset outside the chart ball");
  Vec vp = chart.A().transpose() * v;
  for (double t : times)
    if (!((y + t * vp).norm() < two_lambda))
      throw Error(ErrorCode::LeftChart, "t = " + std::to_string(t) + " leaves the chart ball of radius 2 lambda");

  LevelCurve out;
  const std::size_t n = times.size();
  out.t.assign(times.begin(), times.end());
  out.gamma.resize(n);
  out.Gamma.resize(n);
  out.omega.resize(n);
  Vec start = chart.psi(y);

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (times[i] >= 0 ? pos : neg).push_back(i);
  std::sort(pos.begin(), pos.end(), [&](auto a, auto b) { return times[a] < times[b]; });
  std::sort(neg.begin(), neg.end(), [&](auto a, auto b) { return times[a] > times[b]; });

  Integrator integ{chart.model(), v, u0, tolerance};
  for (const auto* side : {&pos, &neg}) {
    Vec x = start;
    double t = 0.0;
    double h = 0.01 * two_lambda;
    for (std::size_t i : *side) {
      integ.advance(x, t, times[i], h);
      t = times[i];
      out.gamma[i] = x;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.Gamma[i] = out.gamma[i] - times[i] * v - start;
    out.omega[i] = chart.model().eval(out.gamma[i]);
  }
  out.steps = integ.steps;
  out.rejected = integ.rejected;
  return out;
}

CurvatureSequence gtilde_sequence(const DispersionModel& model, const Vec& x0, const Vec& v, int N) {
  if (!model.is_trig()) throw Error(ErrorCode::UnsupportedModel, "curvature sequence needs a TrigPoly model");
  if (N < 2 || N > 10) throw Error(ErrorCode::InvalidArgument, "N must lie in 2..10");
  Vec grad = model.gradient(x0);
  double gn = grad.norm();
  if (!(gn > 0.0)) throw Error(ErrorCode::ZeroGradient, "grad omega(x0) = 0");
  Vec u0 = grad / gn;
  if (std::abs(v.norm() - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "v must be a unit vector");
  if (std::abs(v.dot(u0)) > 1e-10) throw Error(ErrorCode::InvalidArgument, "v must be orthogonal to u0");

  const int top = N + 1;
  // D[a][l] = (-u0.grad)^a (v.grad)^l omega(x0)
  std::vector<std::vector<double>> D(top + 1, std::vector<double>(top + 1, 0.0));
  Vec mu0 = -u0;
  std::vector<Vec> dirs;
  for (int a = 0; a <= top; ++a) {
    for (int l = 0; a + l <= top; ++l) {
      dirs.assign(a, mu0);
      dirs.insert(dirs.end(), l, v);
      D[a][l] = model.mixed_derivative(x0, dirs);
    }
  }

  CurvatureSequence seq;
  seq.x0 = x0;
  seq.v = v;
  seq.u0 = u0;
  seq.N = N;
  seq.g.assign(top + 1, 0.0);
  for (int n = 2; n <= top; ++n) {
    double s = 0.0;
    for (int k = 2; k <= n; ++k) {
      for (const auto& c : enumerate_compositions(n, k)) {
        double prod = c.weight;
        int ell = 0;
        for (int m : c.parts) {
          if (m == 1)
            ++ell;
          else
            prod *= seq.g[m];
        }
        s += prod * D[k - ell][ell];
      }
    }
    seq.g[n] = s / gn;
  }
  return seq;
}

double select_nu(int n, double a, double b, double c, double eps_prime) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "select_nu needs n >= 2");
  if (!(eps_prime > 0.0)) throw Error(ErrorCode::InvalidArgument, "select_nu needs eps' > 0");
  if (!(std::abs(c) >= eps_prime)) throw Error(ErrorCode::PreconditionViolated, "|c| < eps'");
  for (double nu : {1.0, 2.0, 0.0, -1.0}) {
    double val = std::pow(nu, n) * a + std::pow(1.0 - nu, n) * b + c;
    if (std::abs(val) >= 0.5 * eps_prime) return nu;
  }
  throw Error(ErrorCode::PreconditionViolated, "no admissible nu among {1, 2, 0, -1}");
}

}  // namespace rlab
