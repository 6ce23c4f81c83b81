#include "resolvent_lab/scaling.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "resolvent_lab/error.hpp"

namespace rlab {

ScanGrid default_scan_grid(const DispersionModel& model, int alpha_points, int k0_per_axis) {
  if (alpha_points < 1 || k0_per_axis < 1) throw Error(ErrorCode::InvalidArgument, "scan grid sizes must be >= 1");
  auto [lo, hi] = model.value_range();
  lo -= 1.0;
  hi += 1.0;
  std::vector<double> a;
  for (int i = 0; i < alpha_points; ++i)
    a.push_back(alpha_points == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (alpha_points - 1));
  ScanGrid g;
  for (double a1 : a)
    for (std::size_t j = 0; j < a.size(); ++j)
      for (std::size_t k = j; k < a.size(); ++k) g.alphas.push_back({a1, a[j], a[k]});
  const int d = model.dim();
  std::size_t n = 1;
  for (int i = 0; i < d; ++i) n *= k0_per_axis;
  for (std::size_t idx = 0; idx < n; ++idx) {
    Vec k(d);
    std::size_t q = idx;
    for (int i = 0; i < d; ++i) {
      k[i] = -0.5 + double(q % k0_per_axis) / k0_per_axis;
      q /= k0_per_axis;
    }
    g.k0s.push_back(k);
  }
  return g;
}

ScanGrid single_cell_grid(const ResolventQuery& query) { return ScanGrid{{query.alpha}, {query.k0}}; }

ScanResult sup_scan(const DispersionModel& model, double beta, const ScanGrid& grid, const ScanOptions& opt) {
  if (grid.alphas.empty() || grid.k0s.empty()) throw Error(ErrorCode::InvalidArgument, "scan grid is empty");
  if (opt.top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1");
  validate(opt.config);
  ScanResult out;
  out.beta = beta;
  TubeCache cache(model, beta, opt.config.seed);
  const std::size_t n = grid.size();
  for (const auto& k0 : grid.k0s)
    for (const auto& a : grid.alphas) {
      ScanCell c;
      c.query = {a, beta, k0};
      validate(c.query, model.dim());
      out.cells.push_back(c);
    }

  std::vector<std::size_t> top(n);
  std::iota(top.begin(), top.end(), 0);
  if (n > std::size_t(opt.top_k)) {
    McConfig cheap = opt.config;
    cheap.samples = opt.cheap_samples > 0 ? opt.cheap_samples : std::max<std::uint64_t>(2000, opt.config.samples / n);
    for (auto& c : out.cells) c.cheap = crossing_integral(model, c.query, cheap, &cache);
    std::stable_sort(top.begin(), top.end(),
                     [&](std::size_t a, std::size_t b) { return out.cells[a].cheap.value > out.cells[b].cheap.value; });
    top.resize(opt.top_k);
  }
  double best = -1.0;
  for (std::size_t i : top) {
    auto e = crossing_integral(model, out.cells[i].query, opt.config, &cache);
    if (n <= std::size_t(opt.top_k)) out.cells[i].cheap = e;
    out.cells[i].refined = e;
    if (e.value > best) {
      best = e.value;
      out.best_cell = i;
    }
  }
  out.best = out.cells[out.best_cell].query;
  out.estimate = *out.cells[out.best_cell].refined;
  if (opt.final_samples > opt.config.samples) {
    McConfig fin = opt.config;
    fin.samples = opt.final_samples;
    out.estimate = crossing_integral(model, out.best, fin, &cache);
  }
  return out;
}

PowerLawFit fit_power_log(const std::vector<double>& beta, const std::vector<double>& value,
                          const std::vector<double>& se) {
  const std::size_t n = beta.size();
  if (n < 4) throw Error(ErrorCode::FitDegenerate, "power-law fit needs at least 4 points");
  if (value.size() != n || (!se.empty() && se.size() != n))
    throw Error(ErrorCode::InvalidArgument, "fit inputs have mismatched lengths");
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(beta[i] > 0 && value[i] > 0)) throw Error(ErrorCode::InvalidArgument, "fit needs positive beta and values");
    X(i, 0) = 1.0;
    X(i, 1) = std::log(beta[i]);
    X(i, 2) = std::log(sabs(std::log(beta[i])));
    y[i] = std::log(value[i]);
    double rel = se.empty() ? 0.0 : se[i] / value[i];
    w[i] = rel > 0 ? 1.0 / std::max(rel, 1e-6) : 1.0;
  }
  // equal weights when any point is exact, so exact points do not dominate
  bool any_exact = se.empty() || std::any_of(se.begin(), se.end(), [](double s) { return !(s > 0); });
  if (any_exact) w.setOnes();
  Eigen::MatrixXd Xw = w.asDiagonal() * X;
  Eigen::VectorXd yw = w.asDiagonal() * y;

  PowerLawFit f;
  f.points = int(n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw Error(ErrorCode::FitDegenerate, "power-law design matrix is rank deficient");
  Eigen::VectorXd b = qr.solve(yw);
  // SSE is a convex quadratic in q after profiling out (log C, rho), so the
  // constrained optimum is the clamped unconstrained one
  double q = std::clamp(b[2], 0.0, kMaxLogPower);
  f.q_clamped = q != b[2];
  Eigen::VectorXd yq = yw - q * Xw.col(2);
  Eigen::MatrixXd X2 = Xw.leftCols(2);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(X2);
  if (qr2.rank() < 2) throw Error(ErrorCode::FitDegenerate, "power-law design matrix is rank deficient");
  Eigen::VectorXd b2 = qr2.solve(yq);
  f.log_c = b2[0];
  f.rho = b2[1];
  f.q = q;
  Eigen::VectorXd r = yq - X2 * b2;
  double sse = r.squaredNorm();
  // weighted R^2 against the weighted mean
  double mw = (w.array() * yw.array()).sum() / w.array().square().sum();
  double sst = (yw - mw * w).squaredNorm();
  f.r2 = sst > 0 ? 1.0 - sse / sst : 1.0;
  double dof = double(n) - (f.q_clamped ? 2.0 : 3.0);
  double sigma2 = dof > 0 ? sse / dof : 0.0;
  Eigen::MatrixXd cov = (X2.transpose() * X2).inverse() * sigma2;
  f.rho_se = std::sqrt(std::max(0.0, cov(1, 1)));
  return f;
}

std::vector<double> default_beta_grid() { return {0.3, 0.2, 0.1, 0.05, 0.03, 0.02, 0.01}; }

SweepResult beta_sweep(const DispersionModel& model, const std::vector<double>& betas, const ScanGrid& grid,
                       const ScanOptions& opt) {
  if (betas.empty()) throw Error(ErrorCode::InvalidArgument, "beta grid is empty");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0 && betas[i] <= 1)) throw Error(ErrorCode::InvalidArgument, "beta values must lie in (0, 1]");
    if (i > 0 && !(betas[i] < betas[i - 1])) throw Error(ErrorCode::InvalidArgument, "beta grid must be strictly decreasing");
  }
  SweepResult out;
  out.betas = betas;
  std::vector<double> v, s;
  for (double b : betas) {
    out.points.push_back(sup_scan(model, b, grid, opt));
    v.push_back(out.points.back().estimate.value);
    s.push_back(out.points.back().estimate.standard_error);
  }
  if (betas.size() >= 4) out.fit = fit_power_log(betas, v, s);
  return out;
}

// ---------------------------------------------------------------- slab

double slab_volume_exact(const HyperplaneCertificate& cert, double delta) {
  return std::min(1.0, 2.0 * delta * cert.w.cast<double>().norm());
}

SlabBound slab_lower_bound(const DispersionModel& model, const HyperplaneCertificate& cert, std::vector<double> deltas,
                           const McConfig& config) {
  const int d = model.dim();
  if (cert.u.size() != d) throw Error(ErrorCode::InvalidArgument, "certificate dimension mismatch");
  if (std::find(deltas.begin(), deltas.end(), 1.0) == deltas.end()) deltas.push_back(1.0);
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  SlabBound b;
  b.certificate = cert;
  b.deltas = deltas;
  if (model.is_trig()) {
    b.c_prime = model.inner().derivative_bound(1);
  } else {
    // sqrt(p) is Lipschitz with constant sqrt(sup |grad p|^2 / (4 p)) <= sqrt(||p||'_2 / 2)
    b.c_prime = std::sqrt(0.5 * model.inner().derivative_bound(2));
  }
  const double wn = cert.w.cast<double>().norm();
  b.C_nominal = 2.0 * wn;
  b.C = std::numeric_limits<double>::infinity();
  std::uint32_t stream = 0;
  for (double delta : deltas) {
    const double c = cert.r0 * wn, half = delta * wn;
    auto inside = [&, d](const double* x) {
      double t = 0.0;
      for (int i = 0; i < d; ++i) t += cert.w[i] * (x[i] - 0.5);
      t -= c;
      t -= std::nearbyint(t);
      return std::abs(t) <= half ? 1.0 : 0.0;
    };
    auto e = mc_cube(d, inside, config, stream++);
    b.volumes.push_back(e);
    b.C = std::min(b.C, e.value / delta);
  }
  b.c = b.C * b.C / (2.0 * std::pow(sabs(b.c_prime), 3));
  return b;
}

ResolventQuery certificate_query(const DispersionModel& model, const HyperplaneCertificate& cert, double beta) {
  ResolventQuery q;
  q.alpha = {cert.value, cert.value, cert.value};
  q.beta = beta;
  q.k0 = torus_wrap(Vec(cert.r0 * cert.u));
  (void)model;
  return q;
}

SlabCheck slab_check(const DispersionModel& model, const SlabBound& bound, double beta, const McConfig& config) {
  SlabCheck c;
  c.beta = beta;
  const auto& cert = bound.certificate;
  c.restricted = crossing_integral_slab(model, certificate_query(model, cert, beta), cert.w, cert.r0, beta, config);
  c.scaled = beta * c.restricted.value;
  c.scaled_se = beta * c.restricted.standard_error;
  c.pass = c.scaled + 3.0 * c.scaled_se >= bound.c;
  return c;
}

}  // namespace rlab
