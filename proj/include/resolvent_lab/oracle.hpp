#pragma once

#include <functional>
#include <span>
#include <vector>

#include "resolvent_lab/dispersion.hpp"

// Independent reference computations used by the test and verification
// suites. Nothing here shares code paths with the estimators it checks.
namespace rlab::oracle {

/// Fornberg weights: w[k][j] is the weight of f(nodes[j]) in the k-th
/// derivative at x0, for k = 0..max_order.
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes, int max_order);

/// k-th derivative of f at t0 from central stencils with steps h, h/2, h/4,
/// combined by two levels of Richardson extrapolation.
double fd_derivative(const std::function<double(double)>& f, double t0, int k, double h);

/// Same with caller-chosen steps (h_i = h0 / 2^i assumed).
double fd_derivative_steps(const std::function<double(double)>& f, double t0, int k, std::span<const double> steps);

/// k-th derivative from a single central stencil of 2k + 9 points in
/// extended precision, for high orders where double rounding dominates.
long double fd_derivative_wide(const std::function<long double(long double)>& f, long double t0, int k, long double h);

/// Periodic trapezoid rule of int_{T^1} dk / |alpha - omega(k) + i beta|.
double trapezoid_resolvent_1d(const std::function<double(double)>& omega, double alpha, double beta, int n);

/// Tensor trapezoid rule of the d = 1 crossing integral over T^1 x T^1.
double trapezoid_crossing_1d(const std::function<double(double)>& omega, double a1, double a2, double a3, double k0,
                             double beta, int n);

/// Periodic trapezoid of f_omega(s) in d = 1.
double trapezoid_f_omega_1d(const std::function<double(double)>& omega_prime, double s, int n);

/// Closed form of int_a^b dx / |x - alpha + i beta|.
double linear_resolvent_closed_form(double a, double b, double alpha, double beta);

/// Gauss-Legendre rule on [a, b] with n nodes (Golub-Welsch free, Newton on P_n).
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

}  // namespace rlab::oracle
