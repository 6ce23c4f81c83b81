#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "resolvent_lab/dispersion.hpp"
#include "resolvent_lab/rng.hpp"

namespace rlab {

// ---------------------------------------------------------------- 1D

struct Resolvent1dOptions {
  double abs_tolerance = 1e-6;
  double rel_tolerance = 0.0;  // effective tolerance is max(abs, rel * |I|)
  int max_panels = 200000;
  int initial_panels = 16;
};

struct Resolvent1dResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error (including any tail bound)
  int panels = 0;
  int evaluations = 0;
};

/// int_a^b dx / |f(x) - alpha + i beta| by adaptive Gauss-Kronrod (7/15)
/// with forced refinement of panels where |f - alpha| comes within 10 beta.
Resolvent1dResult resolvent_1d(const std::function<double(double)>& f, double alpha, double beta, double a, double b,
                               const Resolvent1dOptions& options = {});

/// Whole-line integral for the polynomial sum_k coeffs[k] x^k (degree >= 2),
/// truncated at |x| = max(1e3, 1/(beta * tol)) plus the analytic tail of the
/// leading term.
Resolvent1dResult resolvent_1d_polynomial(std::span<const double> coeffs, double alpha, double beta,
                                          const Resolvent1dOptions& options = {});

double polynomial_value(std::span<const double> coeffs, double x);

// ---------------------------------------------------------------- Monte Carlo

struct McConfig {
  std::uint64_t samples = 100000;
  int strata_per_axis = 2;
  double importance_weight = 0.5;  // mixture weight p of the level-set proposal
  int groups = 15;                 // median-of-means groups, odd
  std::uint64_t seed = 1;
  int workers = 0;                 // 0: RESOLVENT_LAB_WORKERS or logical cores
  bool record_time = true;         // false writes wall_time = 0
};

void validate(const McConfig& config);

struct QuadratureEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  double median_of_means = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t strata = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
};

struct ResolventQuery {
  std::array<double, 3> alpha{0.0, 0.0, 0.0};
  double beta = 1.0;
  Vec k0;
};

void validate(const ResolventQuery& query, int dim);

/// Proposal concentrated in a tube of normal half-width r_n around the level
/// set {omega = alpha}. Built from seed points found by root finding along
/// random lines; each seed carries a kernel with normal profile
/// proportional to 1/sqrt(t^2 + w^2), w = beta/|grad omega|, times a uniform
/// tangential disc. Density is evaluable exactly.
class LevelSetTube {
 public:
  struct Options {
    int seeds = 0;             // 0: default per dimension
    double normal_radius = 0.02;
    double tangent_radius = 0;  // 0: default per dimension
    int max_rays = 0;          // 0: 64 * seeds
  };

  LevelSetTube(const DispersionModel& model, double alpha, double beta, std::uint64_t seed, const Options& options);
  LevelSetTube(const DispersionModel& model, double alpha, double beta, std::uint64_t seed)
      : LevelSetTube(model, alpha, beta, seed, Options{}) {}

  bool empty() const { return seeds_.empty(); }
  std::size_t size() const { return seeds_.size(); }
  int dim() const { return dim_; }

  /// Draws a point (not wrapped) using the given uniform stream.
  Vec sample(CounterRng& rng) const;
  /// Density on the torus at x.
  double density(const Vec& x) const;

  const std::vector<Vec>& seed_points() const { return seeds_; }

 private:
  int cell_of(const Vec& x, std::array<int, kMaxDim>& c) const;

  int dim_;
  double rn_;
  double rt_;
  double tangent_volume_;
  std::vector<Vec> seeds_;
  std::vector<Vec> normals_;
  std::vector<Mat> frames_;  // rows 1..d-1 span the tangent plane
  std::vector<double> width_;
  std::vector<double> norm_const_;  // asinh(r_n / w)
  int cells_per_axis_;
  // seeds bucketed by cell: flat[cell_start_[c] .. cell_start_[c+1]) with
  // packed (seed, normal, w^2, 1/(2 asinh)) records
  std::vector<int> cell_start_;
  std::vector<double> packed_;
  std::vector<int> neighbour_offsets_;
};

/// Tubes for one (model, beta, seed), shared across queries. The tube for a
/// given alpha is seeded from alpha itself, so a cached tube is identical to
/// the one a fresh call would build. Thread-safe.
class TubeCache {
 public:
  TubeCache(const DispersionModel& model, double beta, std::uint64_t seed);
  std::shared_ptr<const LevelSetTube> get(double alpha);
  double beta() const { return beta_; }
  std::uint64_t seed() const { return seed_; }

 private:
  const DispersionModel& model_;
  double beta_;
  std::uint64_t seed_;
  std::mutex mu_;
  std::map<double, std::shared_ptr<const LevelSetTube>> tubes_;
};

std::uint64_t tube_seed(std::uint64_t seed, double alpha);

/// Points where the 1D function crosses zero along the segment, by a uniform
/// scan followed by bisection.
std::vector<double> scan_roots(const std::function<double(double)>& f, double t0, double t1, int scan_points);

/// int_{T^d} 1(|grad omega| >= s) |grad omega|^-p / |alpha - omega + i beta|.
QuadratureEstimate resolvent_torus(const DispersionModel& model, double alpha, double beta, double weight_power,
                                   double gradient_floor, const McConfig& config);

/// Crossing integral over (T^d)^2 with k3 = k1 - k2 + k0.
QuadratureEstimate crossing_integral(const DispersionModel& model, const ResolventQuery& query,
                                     const McConfig& config, TubeCache* cache = nullptr);

/// Crossing integral restricted to {|k1.u - r0| <= delta} x {|k2.u - r0| <= delta}
/// for an integer-direction slab u = w/|w|. Sampling is exact inside the slab.
QuadratureEstimate crossing_integral_slab(const DispersionModel& model, const ResolventQuery& query, const IVec& w,
                                          double r0, double delta, const McConfig& config);

/// int_{T^d} |grad omega|^-3 1(|grad omega| >= s).
QuadratureEstimate f_omega(const DispersionModel& model, double s, const McConfig& config);

/// Generic engine: value of f at uniform points of the unit cube [0,1)^D,
/// stratified per axis and grouped for median of means. Used for volumes.
QuadratureEstimate mc_cube(int D, const std::function<double(const double*)>& f, const McConfig& config,
                           std::uint32_t stream);

}  // namespace rlab
