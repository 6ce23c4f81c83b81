#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "resolvent_lab/dispersion.hpp"
#include "resolvent_lab/quadrature.hpp"

namespace rlab {

/// omega is constant on {x : x.u = r0}. w is the primitive integer vector
/// with u = w / |w|.
struct HyperplaneCertificate {
  Vec u;
  IVec w;
  double r0 = 0.0;
  double value = 0.0;
  double max_deviation = 0.0;
  bool all_offsets = false;  // omega depends on x.u only
};

struct HyperplaneOptions {
  int scan_points = 4096;
  double merge_tolerance = 1e-9;
  int verify_points = 10000;
  std::uint64_t seed = 7;
};

std::vector<HyperplaneCertificate> find_hyperplanes(const DispersionModel& model,
                                                    const HyperplaneOptions& options = {});

/// Max |omega - value| over fresh random points of the hyperplane.
double hyperplane_deviation(const DispersionModel& model, const HyperplaneCertificate& cert, int points,
                            std::uint64_t seed);

struct CriticalPoint {
  Vec location;
  double value = 0.0;
  double hessian_det = 0.0;
  int index = 0;
  double gradient_residual = 0.0;
};

struct CriticalPointTable {
  std::vector<CriticalPoint> points;
  bool is_morse = false;
  bool isolated = true;
  int diverged = 0;
  int grid_per_axis = 0;
};

inline constexpr double kMorseDeterminantFloor = 1e-9;

/// Critical points of omega (of the inner polynomial away from its zeros
/// for sqrt models, which are never Morse).
CriticalPointTable find_critical_points(const DispersionModel& model, int grid_per_axis = 0);

struct ProbeOptions {
  int n_max = 4;
  int grid_per_axis = 0;  // 0: 16 for d <= 3, 8 for d = 4
  int u_points = 192;
  int v_points = 64;
  int refine_cells = 8;
  int workers = 0;
};

struct CurvatureProbe {
  int n_max = 0;
  int n0_hat = 0;
  double eps0_hat = 0.0;
  Vec k_min;
  Vec u_min;
  std::vector<double> min_by_order;  // [n'] = min over the grid of B with orders 2..n'; entries 0, 1 unused
  std::uint64_t evaluations = 0;
};

/// max over 2 <= n <= n_max and tangent v of |(v.grad)^n omega(k)| / n!.
double probe_point(const DispersionModel& model, const Vec& k, const Vec& u, int n_max, int v_points = 64);

CurvatureProbe curvature_probe(const DispersionModel& model, const ProbeOptions& options = {});

struct SuppressionConstants {
  int n0 = 2;
  double eps0 = 0.0;
  std::vector<double> M;  // M[n] = ||omega||'_n, n = 0..n0+1
  double a0 = 1.0;
  double mu = 0.0;
  long gamma_num = 1;
  long gamma_den = 1;
  double gamma = 0.0;
  double c_tilde = 1.0;
  double log_beta0 = 0.0;
  double beta0 = 0.0;  // underflows to 0 for realistic inputs; log_beta0 is exact

  double r0(double s) const;
  double lambda(double s) const;
  double delta(double s) const { return lambda(s); }
};

SuppressionConstants suppression_constants(const DispersionModel& model, int n0, double eps0);

struct FOmegaFit {
  std::vector<double> s;
  std::vector<QuadratureEstimate> estimates;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double p0_estimate = 0.0;  // log-log slope of f against <ln s>
  bool pass = false;
};

inline constexpr double kFOmegaFitR2 = 0.9;

std::vector<double> default_f_omega_grid();
FOmegaFit fit_f_omega(const DispersionModel& model, const std::vector<double>& s, const McConfig& config);

enum class Verdict { Suppresses, DoesNotSuppress, Inconclusive };
std::string_view to_string(Verdict v);

struct ClassifyOptions {
  ProbeOptions probe;
  HyperplaneOptions hyperplanes;
  bool fit_f_omega = true;
  McConfig f_omega_config{.samples = 1000000};
  double eps0_threshold = 1e-6;
};

struct ClassificationReport {
  std::string model_name;
  std::vector<HyperplaneCertificate> certificates;
  CriticalPointTable critical_points;
  std::optional<FOmegaFit> f_omega;
  std::optional<CurvatureProbe> probe;
  std::optional<SuppressionConstants> constants;
  Verdict verdict = Verdict::Inconclusive;
  double eps0_threshold = 1e-6;
  double fit_r2_threshold = kFOmegaFitR2;
  std::string reason;
};

ClassificationReport classify(const DispersionModel& model, const ClassifyOptions& options = {});

}  // namespace rlab
