#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "resolvent_lab/classify.hpp"
#include "resolvent_lab/quadrature.hpp"

namespace rlab {

struct ScanGrid {
  std::vector<std::array<double, 3>> alphas;
  std::vector<Vec> k0s;
  std::size_t size() const { return alphas.size() * k0s.size(); }
};

/// alpha_j on a uniform grid over [min omega - 1, max omega + 1], keeping
/// alpha_2 <= alpha_3 (the integral is symmetric under that swap), and k0 on
/// a uniform torus grid.
ScanGrid default_scan_grid(const DispersionModel& model, int alpha_points = 5, int k0_per_axis = 2);

ScanGrid single_cell_grid(const ResolventQuery& query);

struct ScanOptions {
  McConfig config;                  // budget for each refined cell
  std::uint64_t cheap_samples = 0;  // 0: max(2000, config.samples / cells)
  int top_k = 8;
  std::uint64_t final_samples = 0;  // > config.samples: re-estimate the maximiser with this budget
};

struct ScanCell {
  ResolventQuery query;
  QuadratureEstimate cheap;
  std::optional<QuadratureEstimate> refined;
};

struct ScanResult {
  double beta = 0.0;
  ResolventQuery best;
  QuadratureEstimate estimate;
  std::vector<ScanCell> cells;
  std::size_t best_cell = 0;
};

ScanResult sup_scan(const DispersionModel& model, double beta, const ScanGrid& grid, const ScanOptions& options);

/// log I = log C + rho log beta + q log <ln beta>, q constrained to [0, 8],
/// weighted by the relative standard errors when they are positive.
struct PowerLawFit {
  double log_c = 0.0;
  double rho = 0.0;
  double rho_se = 0.0;
  double q = 0.0;
  double r2 = 0.0;
  int points = 0;
  bool q_clamped = false;
};

inline constexpr double kMaxLogPower = 8.0;

PowerLawFit fit_power_log(const std::vector<double>& beta, const std::vector<double>& value,
                          const std::vector<double>& standard_error);

struct SweepResult {
  std::vector<double> betas;
  std::vector<ScanResult> points;
  std::optional<PowerLawFit> fit;  // present when there are at least 4 points
};

std::vector<double> default_beta_grid();

SweepResult beta_sweep(const DispersionModel& model, const std::vector<double>& betas, const ScanGrid& grid,
                       const ScanOptions& options);

struct SlabBound {
  HyperplaneCertificate certificate;
  double c_prime = 0.0;    // Lipschitz bound sum |c_m| 2 pi |m|
  double C = 0.0;          // min over the measured deltas of vol(M'_delta) / delta
  double C_nominal = 0.0;  // 2 |w|, exact for delta <= 1 / (2 |w|)
  double c = 0.0;          // C^2 / (2 <C'>^3)
  std::vector<double> deltas;
  std::vector<QuadratureEstimate> volumes;
};

/// Measured slab volumes at each delta (1 is always included).
SlabBound slab_lower_bound(const DispersionModel& model, const HyperplaneCertificate& cert,
                           std::vector<double> deltas, const McConfig& config);

double slab_volume_exact(const HyperplaneCertificate& cert, double delta);

struct SlabCheck {
  double beta = 0.0;
  QuadratureEstimate restricted;
  double scaled = 0.0;     // beta * restricted
  double scaled_se = 0.0;
  bool pass = false;       // scaled + 3 se >= c
};

/// I_scr restricted to M'_beta x M'_beta at alpha = (value, value, value),
/// k0 = [r0 u].
SlabCheck slab_check(const DispersionModel& model, const SlabBound& bound, double beta, const McConfig& config);

ResolventQuery certificate_query(const DispersionModel& model, const HyperplaneCertificate& cert, double beta);

}  // namespace rlab
