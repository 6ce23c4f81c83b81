#include "resolvent_lab/oracle.hpp"

#include <cmath>

#include "resolvent_lab/error.hpp"

namespace rlab::oracle {

std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes, int max_order) {
  const int n = int(nodes.size());
  std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, max_order);
    double c2 = 1.0;
    double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace {

std::vector<std::vector<long double>> fornberg_weights_ld(std::span<const long double> nodes, int max_order) {
  const int n = int(nodes.size());
  std::vector<std::vector<long double>> c(max_order + 1, std::vector<long double>(n, 0.0L));
  long double c1 = 1.0L, c4 = nodes[0];
  c[0][0] = 1.0L;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, max_order);
    long double c2 = 1.0L, c5 = c4;
    c4 = nodes[i];
    for (int j = 0; j < i; ++j) {
      long double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

double central_fd(const std::function<double(double)>& f, double t0, int k, double h, int p) {
  std::vector<double> nodes;
  for (int j = -p; j <= p; ++j) nodes.push_back(double(j));
  auto w = fornberg_weights(0.0, nodes, k);
  double s = 0.0;
  for (int j = 0; j < int(nodes.size()); ++j)
    if (w[k][j] != 0.0) s += w[k][j] * f(t0 + nodes[j] * h);
  return s / std::pow(h, k);
}

}  // namespace

double fd_derivative_steps(const std::function<double(double)>& f, double t0, int k, std::span<const double> steps) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "fd order must be >= 1");
  const int p = (k + 1) / 2 + 1;
  int q = 2 * ((2 * p + 2 - k) / 2);
  std::vector<double> d;
  for (double h : steps) d.push_back(central_fd(f, t0, k, h, p));
  // Richardson tableau for step ratio 2
  while (d.size() > 1) {
    double r = std::pow(2.0, q);
    std::vector<double> nd;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) nd.push_back((r * d[i + 1] - d[i]) / (r - 1.0));
    d = nd;
    q += 2;
  }
  return d[0];
}

double fd_derivative(const std::function<double(double)>& f, double t0, int k, double h) {
  const double steps[3] = {h, h / 2, h / 4};
  return fd_derivative_steps(f, t0, k, steps);
}

double trapezoid_resolvent_1d(const std::function<double(double)>& omega, double alpha, double beta, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double k = -0.5 + double(i) / n;
    s += 1.0 / std::hypot(alpha - omega(k), beta);
  }
  return s / n;
}

double trapezoid_crossing_1d(const std::function<double(double)>& omega, double a1, double a2, double a3, double k0,
                             double beta, int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = omega(-0.5 + double(i) / n);
  // omega(k1 - k2 + k0) on the grid needs k0 shifted to a grid offset; evaluate directly
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double k1 = -0.5 + double(i) / n;
    double r1 = 1.0 / std::hypot(a1 - w[i], beta);
    double inner = 0.0;
    for (int j = 0; j < n; ++j) {
      double k2 = -0.5 + double(j) / n;
      double r2 = 1.0 / std::hypot(a2 - w[j], beta);
      double r3 = 1.0 / std::hypot(a3 - omega(k1 - k2 + k0), beta);
      inner += r2 * r3;
    }
    s += r1 * inner;
  }
  return s / (double(n) * n);
}

double trapezoid_f_omega_1d(const std::function<double(double)>& omega_prime, double s, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = std::abs(omega_prime(-0.5 + (i + 0.5) / n));
    if (g >= s) acc += 1.0 / (g * g * g);
  }
  return acc / n;
}

double linear_resolvent_closed_form(double a, double b, double alpha, double beta) {
  return std::asinh((b - alpha) / beta) - std::asinh((a - alpha) / beta);
}

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
    w[i] = (b - a) / ((1.0 - z * z) * pp * pp);
  }
}

long double fd_derivative_wide(const std::function<long double(long double)>& f, long double t0, int k,
                               long double h) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "fd order must be >= 1");
  const int p = k + 4;
  std::vector<long double> nodes;
  for (int j = -p; j <= p; ++j) nodes.push_back(j);
  auto w = fornberg_weights_ld(nodes, k);
  long double s = 0.0L;
  for (int j = 0; j < int(nodes.size()); ++j)
    if (w[k][j] != 0.0L) s += w[k][j] * f(t0 + nodes[j] * h);
  return s / std::pow(h, k);
}

}  // namespace rlab::oracle
