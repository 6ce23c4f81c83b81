#pragma once

#include <functional>
#include <span>
#include <vector>

#include "resolvent_lab/dispersion.hpp"

namespace rlab {

struct Composition {
  std::vector<int> parts;
  double weight = 1.0;  // prod_{j<k} m_j / sum_{j'>=j} m_j'
};

double composition_weight(std::span<const int> parts);

/// Ordered compositions of n into k positive parts, in lexicographic order.
std::vector<Composition> enumerate_compositions(int n, int k);

/// Mixed directional derivative of a field at a fixed point:
/// dirs -> prod_j (dirs[j] . grad) f.
using MixedDerivative = std::function<double(std::span<const Vec>)>;

/// (1/n!) d^n/dt^n f(Gamma(t)) from the curve derivatives
/// curve[m-1] = Gamma^(m)(t), m = 1..n.
double composite_derivative(const MixedDerivative& f, std::span<const Vec> curve, int n);

/// Local chart flattening the level sets of omega near x0.
///   phi(x) = (omega(x) - omega(x0)) / |grad omega(x0)| e1 + O Q_{u0} (x - x0)
/// with O u0 = e1, and psi the inverse of phi on the ball of radius 2 lambda.
class LevelChart {
 public:
  LevelChart(DispersionModel model, Vec x0, double lambda, double newton_tolerance);

  const DispersionModel& model() const { return model_; }
  const Vec& x0() const { return x0_; }
  double lambda() const { return lambda_; }
  double omega0() const { return omega0_; }
  const Vec& grad0() const { return grad0_; }
  double grad_norm() const { return grad_norm_; }
  const Vec& u0() const { return u0_; }
  /// A = O^T, so A e1 = u0.
  const Mat& A() const { return A_; }
  double newton_tolerance() const { return tol_; }

  Vec phi(const Vec& x) const;
  Mat dphi(const Vec& x) const;

  /// Inverse chart by damped Newton iteration. Throws NewtonDivergence.
  Vec psi(const Vec& y) const;
  Vec psi(const Vec& y, int* iterations, double* residual) const;
  Mat dpsi(const Vec& y) const;

 private:
  DispersionModel model_;
  Vec x0_;
  double lambda_;
  double omega0_;
  Vec grad0_;
  double grad_norm_;
  Vec u0_;
  Mat O_;
  Mat A_;
  double tol_;
};

/// |grad omega(x0)| / (8 ||omega||'_2), the largest admissible chart radius.
double max_chart_radius(const DispersionModel& model, const Vec& x0);

/// Rotation O with O u = e1 and det O = +1 (Householder reflection with one
/// row flipped).
Mat rotation_to_e1(const Vec& u);

LevelChart build_level_chart(const DispersionModel& model, const Vec& x0, double lambda,
                             double newton_tolerance = 1e-12);

struct LevelCurve {
  std::vector<double> t;
  std::vector<Vec> gamma;      // gamma(t)
  std::vector<Vec> Gamma;      // gamma(t) - t v - psi(y)
  std::vector<double> omega;   // omega(gamma(t))
  int steps = 0;
  int rejected = 0;
};

/// Integrates gamma' = v - g(gamma) u0, g = (v.grad omega)/(u0.grad omega),
/// from gamma(0) = psi(y), reporting gamma at each requested time.
LevelCurve trace_level_curve(const LevelChart& chart, const Vec& y, const Vec& v, std::span<const double> times,
                             double tolerance = 1e-10);

/// Uniformly spaced sample times on [t0, t1] (inclusive), n >= 2.
std::vector<double> linspace(double t0, double t1, int n);

/// g(x) = (v . grad omega(x)) / (u0 . grad omega(x)).
double level_slope(const DispersionModel& model, const Vec& x, const Vec& v, const Vec& u0);

struct CurvatureSequence {
  Vec x0;
  Vec v;
  Vec u0;
  std::vector<double> g;  // g[n] = g~_n for n = 0..N+1; g[0] unused, g[1] = 0
  int N = 0;

  double at(int n) const { return g.at(n); }
};

CurvatureSequence gtilde_sequence(const DispersionModel& model, const Vec& x0, const Vec& v, int N);

/// First nu in the order (1, 2, 0, -1) with |nu^n a + (1-nu)^n b + c| >= eps/2.
double select_nu(int n, double a, double b, double c, double eps_prime);

}  // namespace rlab
