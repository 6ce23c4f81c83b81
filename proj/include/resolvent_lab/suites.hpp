#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "resolvent_lab/dispersion.hpp"

// Randomised property suites for the explicit inequalities: one-dimensional
// resolvent bounds, the basic estimate lemmas, the bracket properties, the
// nu-selection lemma, and the chart / level-curve / curvature geometry.
namespace rlab {

struct SuiteResult {
  std::string id;
  std::uint64_t draws = 0;
  std::uint64_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min relative slack, < 0 on violation
  double max_error = 0.0;  // largest measured error where the suite compares against a tolerance
  std::uint64_t seed = 0;
  std::string detail;

  bool pass() const { return violations == 0; }
};

/// Relative slack allowed for rounding in inequalities that can be tight.
inline constexpr double kRoundingSlack = 4.0 * std::numeric_limits<double>::epsilon();

// one-dimensional resolvent bounds (quadrature tolerance max(tol, tol |I|))
SuiteResult suite_poly_whole_line(std::uint64_t seed, int draws = 200, double tol = 1e-6);
SuiteResult suite_linear_window(std::uint64_t seed, int draws = 200, double tol = 1e-6);
SuiteResult suite_monotone_interval(std::uint64_t seed, int draws = 200, double tol = 1e-6);
SuiteResult suite_higher_order_interval(std::uint64_t seed, int draws = 200, double tol = 1e-6);

// basic estimate lemmas
SuiteResult suite_delbeta(std::uint64_t seed, int draws = 100000);
SuiteResult suite_lnsint(std::uint64_t seed, int draws = 1000);
SuiteResult suite_idshift(std::uint64_t seed, int draws = 100000);
SuiteResult suite_nablaomdiff(std::uint64_t seed, int draws = 100000);
SuiteResult suite_bracket(std::uint64_t seed, int draws = 100000);
SuiteResult suite_select_nu(std::uint64_t seed, int draws = 1000000);

// geometry
SuiteResult suite_dispersion_properties(std::uint64_t seed, int draws = 1000);
SuiteResult suite_composite_derivative(std::uint64_t seed, int draws = 200, double tol = 1e-6);
SuiteResult suite_chart(const DispersionModel& model, std::uint64_t seed, int base_points = 10, int draws = 1000);
SuiteResult suite_level_curve(const DispersionModel& model, std::uint64_t seed, int draws = 20);
SuiteResult suite_gtilde(const DispersionModel& model, std::uint64_t seed, int draws = 20, double tol = 1e-4);
SuiteResult suite_curvature_drift(const DispersionModel& model, std::uint64_t seed, int draws = 100);

/// Random trigonometric polynomial with `terms` terms, integer frequencies
/// in [-max_freq, max_freq]^d and coefficients in [-1, 1].
class CounterRng;
TrigPoly random_trig_poly(CounterRng& rng, int dim, int terms, int max_freq);

}  // namespace rlab
