#include "resolvent_lab/quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <bit>
#include <limits>
#include <optional>
#include <queue>

#include "resolvent_lab/calculus.hpp"
#include "resolvent_lab/error.hpp"
#include "resolvent_lab/parallel.hpp"

namespace rlab {

// ================================================================ 1D

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double value;
  double err;
  bool forced;
};

struct PanelLess {
  bool operator()(const Panel& x, const Panel& y) const {
    if (x.forced != y.forced) return !x.forced;
    return x.err < y.err;
  }
};

Panel eval_panel(const std::function<double(double)>& f, double alpha, double beta, double a, double b, int& evals) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double xs[17], gs[17];
  // ascending nodes: a, kronrod nodes, b
  xs[0] = a;
  for (int i = 0; i < 7; ++i) xs[1 + i] = c - h * kXgk[i];
  xs[8] = c;
  for (int i = 0; i < 7; ++i) xs[9 + i] = c + h * kXgk[6 - i];
  xs[16] = b;
  for (int i = 0; i < 17; ++i) gs[i] = f(xs[i]) - alpha;
  evals += 17;
  auto F = [&](int i) { return 1.0 / std::hypot(gs[i], beta); };
  double k15 = kWgk[7] * F(8), g7 = kWg[3] * F(8);
  for (int i = 0; i < 7; ++i) {
    double s = F(1 + i) + F(15 - i);
    k15 += kWgk[i] * s;
    if (i % 2 == 1) g7 += kWg[i / 2] * s;
  }
  Panel p{a, b, k15 * h, std::abs(k15 - g7) * h, false};

  double minabs = std::abs(gs[0]), slope = 0.0, gap = 0.0;
  bool sign_change = false;
  for (int i = 1; i < 17; ++i) {
    minabs = std::min(minabs, std::abs(gs[i]));
    double dx = xs[i] - xs[i - 1];
    gap = std::max(gap, dx);
    if (dx > 0) slope = std::max(slope, std::abs(gs[i] - gs[i - 1]) / dx);
    if ((gs[i] > 0) != (gs[i - 1] > 0)) sign_change = true;
  }
  bool suspect = sign_change || minabs - slope * gap < 10.0 * beta;
  double width = b - a;
  double floor_w = 64 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
  if (suspect && slope > 0 && width > beta / slope && width > floor_w) p.forced = true;
  return p;
}

}  // namespace

Resolvent1dResult resolvent_1d(const std::function<double(double)>& f, double alpha, double beta, double a, double b,
                               const Resolvent1dOptions& options) {
  if (!(beta > 0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
    throw Error(ErrorCode::InvalidArgument, "need a finite interval with a < b");
  Resolvent1dResult out;
  std::priority_queue<Panel, std::vector<Panel>, PanelLess> heap;
  double total = 0.0, err = 0.0;
  int forced = 0;
  const int n0 = std::max(1, options.initial_panels);
  for (int i = 0; i < n0; ++i) {
    double pa = a + (b - a) * i / n0, pb = i + 1 == n0 ? b : a + (b - a) * (i + 1) / n0;
    Panel p = eval_panel(f, alpha, beta, pa, pb, out.evaluations);
    total += p.value;
    if (p.forced) ++forced; else err += p.err;
    heap.push(p);
  }
  out.panels = n0;
  auto tol = [&] { return std::max(options.abs_tolerance, options.rel_tolerance * std::abs(total)); };
  while (forced > 0 || err > tol()) {
    if (out.panels >= options.max_panels)
      throw Error(ErrorCode::BudgetExceeded, "resolvent_1d exceeded " + std::to_string(options.max_panels) + " panels");
    Panel p = heap.top();
    heap.pop();
    total -= p.value;
    if (p.forced) --forced; else err -= p.err;
    double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      // cannot split further; accept as is
      total += p.value;
      err += p.err;
      p.forced = false;
      heap.push(p);
      continue;
    }
    for (auto [pa, pb] : {std::pair{p.a, m}, std::pair{m, p.b}}) {
      Panel q = eval_panel(f, alpha, beta, pa, pb, out.evaluations);
      total += q.value;
      if (q.forced) ++forced; else err += q.err;
      heap.push(q);
    }
    ++out.panels;
    if (err < 0) err = 0;  // running sums can drift below zero by rounding
  }
  // re-sum in a fixed order for a stable result
  double s = 0.0, e = 0.0;
  std::vector<Panel> all;
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const auto& p : all) {
    s += p.value;
    e += p.err;
  }
  out.value = s;
  out.error = e;
  return out;
}

double polynomial_value(std::span<const double> coeffs, double x) {
  double s = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) s = s * x + coeffs[k];
  return s;
}

Resolvent1dResult resolvent_1d_polynomial(std::span<const double> coeffs, double alpha, double beta,
                                          const Resolvent1dOptions& options) {
  const int n = int(coeffs.size()) - 1;
  if (n < 2 || coeffs[n] == 0.0)
    throw Error(ErrorCode::InvalidArgument, "whole-line integral needs a polynomial of degree >= 2");
  if (!(beta > 0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  std::vector<double> c(coeffs.begin(), coeffs.end());
  c[0] -= alpha;
  const double an = std::abs(c[n]);
  double R = 0.0;
  for (int k = 0; k < n; ++k) R = std::max(R, std::abs(c[k]) / an);
  R = 2.0 * (1.0 + R);
  const double tol_ref = std::max(options.abs_tolerance, options.rel_tolerance);
  double X = std::max(1e3, 1.0 / (beta * tol_ref));
  X = std::max(X, 2.0 * R);
  auto P = [&](double x) { return polynomial_value(c, x); };

  std::vector<std::pair<double, double>> pieces{{-R, R}};
  for (double lo = R; lo < X; lo *= 2.0) {
    double hi = std::min(2.0 * lo, X);
    pieces.push_back({lo, hi});
    pieces.push_back({-hi, -lo});
  }
  Resolvent1dOptions sub = options;
  sub.abs_tolerance = options.abs_tolerance / double(pieces.size());
  Resolvent1dResult out;
  for (auto [a, b] : pieces) {
    auto r = resolvent_1d(P, 0.0, beta, a, b, sub);
    out.value += r.value;
    out.error += r.error;
    out.panels += r.panels;
    out.evaluations += r.evaluations;
  }
  double tail = 2.0 / (an * (n - 1) * std::pow(X, n - 1));
  out.value += tail;
  out.error += tail;  // |P| >= |a_n| x^n / 2 beyond 2R, so the tail is at most twice this
  return out;
}

// ================================================================ Monte Carlo

void validate(const McConfig& c) {
  if (c.samples == 0) throw Error(ErrorCode::InvalidArgument, "samples must be positive");
  if (c.strata_per_axis < 1) throw Error(ErrorCode::InvalidArgument, "strata_per_axis must be >= 1");
  if (!(c.importance_weight >= 0.0 && c.importance_weight <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "importance_weight must lie in [0, 1]");
  if (c.groups < 1 || c.groups % 2 == 0) throw Error(ErrorCode::InvalidArgument, "groups must be odd and positive");
  if (c.samples < std::uint64_t(c.groups)) throw Error(ErrorCode::InvalidArgument, "samples must be >= groups");
  if (c.workers < 0) throw Error(ErrorCode::InvalidArgument, "workers must be >= 0");
}

void validate(const ResolventQuery& q, int dim) {
  if (!(q.beta > 0.0 && q.beta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "beta must lie in (0, 1]");
  for (double a : q.alpha)
    if (!std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "alpha must be finite");
  if (q.k0.size() != dim) throw Error(ErrorCode::InvalidArgument, "k0 has the wrong dimension");
}

namespace {

double unit_ball_volume(int m) {
  switch (m) {
    case 0: return 1.0;
    case 1: return 2.0;
    case 2: return kPi;
    case 3: return 4.0 * kPi / 3.0;
    default: return kPi * kPi / 2.0;
  }
}

double unit_sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return kTwoPi;
    case 3: return 4.0 * kPi;
    default: return 2.0 * kPi * kPi;
  }
}

Vec random_direction(CounterRng& rng, int d) {
  Vec e(d);
  double n = 0.0;
  while (n < 1e-12) {
    for (int i = 0; i < d; ++i) e[i] = rng.normal();
    n = e.norm();
  }
  return e / n;
}

inline double wrap1(double x) {
  double v = x - std::floor(x + 0.5);
  if (v >= 0.5) v -= 1.0;
  return v;
}

}  // namespace

std::vector<double> scan_roots(const std::function<double(double)>& f, double t0, double t1, int scan_points) {
  std::vector<double> roots;
  double prev_t = t0, prev = f(t0);
  for (int i = 1; i <= scan_points; ++i) {
    double t = t0 + (t1 - t0) * i / scan_points;
    double v = f(t);
    if (prev == 0.0) {
      roots.push_back(prev_t);
    } else if ((prev < 0) != (v < 0) && v != 0.0) {
      double a = prev_t, b = t, fa = prev;
      for (int it = 0; it < 80; ++it) {
        double m = 0.5 * (a + b);
        if (!(m > a && m < b)) break;
        double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_t = t;
    prev = v;
  }
  return roots;
}

LevelSetTube::LevelSetTube(const DispersionModel& model, double alpha, double beta, std::uint64_t seed,
                           const Options& opt)
    : dim_(model.dim()) {
  const int d = dim_;
  int K = opt.seeds;
  if (K <= 0) K = d == 1 ? 0 : d == 2 ? 1024 : d == 3 ? 4096 : 8192;
  rn_ = opt.normal_radius;
  rt_ = opt.tangent_radius > 0 ? opt.tangent_radius : (d == 2 ? 0.01 : d == 3 ? 0.02 : 0.04);
  if (d == 1) rt_ = 0.0;
  tangent_volume_ = unit_ball_volume(d - 1) * std::pow(rt_, d - 1);

  auto add_seed = [&](const Vec& x) {
    Vec g;
    try {
      model.value_and_gradient(x, g);
    } catch (const Error&) {
      return;  // cusp
    }
    double gn = g.norm();
    if (!(gn > 0)) return;
    seeds_.push_back(torus_wrap(x));
    Vec n = g / gn;
    normals_.push_back(n);
    frames_.push_back(rotation_to_e1(n));
    double w = std::min(beta / gn, rn_);
    width_.push_back(w);
    norm_const_.push_back(std::asinh(rn_ / w));
  };

  if (d == 1) {
    Vec x(1);
    auto f = [&](double t) {
      x[0] = t;
      return model.eval(x) - alpha;
    };
    for (double r : scan_roots(f, -0.5, 0.5, 4096)) {
      x[0] = r;
      add_seed(x);
    }
  } else if (!model.inner().is_constant()) {
    CounterRng rng(seed, 0x7E5Eu, 0);
    int max_rays = opt.max_rays > 0 ? opt.max_rays : 64 * K;
    Vec x0(d), e(d), x(d);
    for (int ray = 0; ray < max_rays && int(seeds_.size()) < K; ++ray) {
      if (ray >= 4096 && seeds_.empty()) break;  // level set empty or too small to hit
      for (int i = 0; i < d; ++i) x0[i] = rng.uniform() - 0.5;
      e = random_direction(rng, d);
      auto f = [&](double t) {
        x = x0 + t * e;
        return model.eval(x) - alpha;
      };
      for (double r : scan_roots(f, 0.0, 1.0, 64)) {
        if (int(seeds_.size()) >= K) break;
        add_seed(x0 + r * e);
      }
    }
  }

  const double R = std::sqrt(rn_ * rn_ + rt_ * rt_);
  cells_per_axis_ = std::max(1, int(std::floor(1.0 / R)));
  const int cp = cells_per_axis_;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= cp;
  std::vector<std::vector<int>> buckets(total);
  std::array<int, kMaxDim> c{};
  for (std::size_t j = 0; j < seeds_.size(); ++j) buckets[cell_of(seeds_[j], c)].push_back(int(j));
  const int rec = 2 * d + 2;
  cell_start_.assign(total + 1, 0);
  for (std::size_t k = 0; k < total; ++k) {
    cell_start_[k + 1] = cell_start_[k] + int(buckets[k].size());
    for (int j : buckets[k]) {
      for (int i = 0; i < d; ++i) packed_.push_back(seeds_[j][i]);
      for (int i = 0; i < d; ++i) packed_.push_back(normals_[j][i]);
      packed_.push_back(width_[j] * width_[j]);
      packed_.push_back(1.0 / (2.0 * norm_const_[j]));
    }
  }
  (void)rec;
  // distinct neighbour cell offsets in index space, per axis in {-1, 0, 1}
  const int span = std::min(3, cp);
  int combos = 1;
  for (int i = 0; i < d; ++i) combos *= span;
  for (int k = 0; k < combos; ++k) {
    int r = k;
    std::array<int, kMaxDim> o{};
    for (int i = 0; i < d; ++i) {
      o[i] = span == 3 ? r % 3 - 1 : r % span;
      r /= span;
    }
    for (int i = 0; i < d; ++i) neighbour_offsets_.push_back(o[i]);
  }
}

int LevelSetTube::cell_of(const Vec& x, std::array<int, kMaxDim>& c) const {
  int idx = 0, stride = 1;
  for (int i = 0; i < dim_; ++i) {
    int ci = int(std::floor((wrap1(x[i]) + 0.5) * cells_per_axis_));
    ci = std::clamp(ci, 0, cells_per_axis_ - 1);
    c[i] = ci;
    idx += ci * stride;
    stride *= cells_per_axis_;
  }
  return idx;
}

Vec LevelSetTube::sample(CounterRng& rng) const {
  const int d = dim_;
  std::size_t j = std::min<std::size_t>(std::size_t(rng.uniform() * seeds_.size()), seeds_.size() - 1);
  double u = 2.0 * rng.uniform() - 1.0;
  double t = width_[j] * std::sinh(u * norm_const_[j]);
  Vec x = seeds_[j] + t * normals_[j];
  if (d > 1) {
    int m = d - 1;
    double dir[kMaxDim];
    double nn = 0.0;
    while (nn < 1e-12) {
      nn = 0.0;
      for (int i = 0; i < m; ++i) {
        dir[i] = rng.normal();
        nn += dir[i] * dir[i];
      }
    }
    nn = std::sqrt(nn);
    double r = rt_ * std::pow(rng.uniform(), 1.0 / m);
    for (int i = 0; i < m; ++i) x += (r * dir[i] / nn) * frames_[j].row(1 + i).transpose();
  }
  return x;
}

double LevelSetTube::density(const Vec& x) const {
  if (seeds_.empty()) return 0.0;
  const int d = dim_;
  const int cp = cells_per_axis_;
  const bool wrap_cells = cp >= 3;
  std::array<int, kMaxDim> c{};
  double xw[kMaxDim];
  for (int i = 0; i < d; ++i) xw[i] = wrap1(x[i]);
  cell_of(x, c);
  const int rec = 2 * d + 2;
  const double rn2 = rn_ * rn_, rt2 = rt_ * rt_;
  const std::size_t combos = neighbour_offsets_.size() / d;
  double acc = 0.0;
  for (std::size_t k = 0; k < combos; ++k) {
    int idx = 0, stride = 1;
    for (int i = 0; i < d; ++i) {
      int o = neighbour_offsets_[k * d + i];
      int ci = wrap_cells ? (c[i] + o + cp) % cp : o;
      idx += ci * stride;
      stride *= cp;
    }
    const double* rp = packed_.data() + std::size_t(cell_start_[idx]) * rec;
    const double* re = packed_.data() + std::size_t(cell_start_[idx + 1]) * rec;
    for (; rp < re; rp += rec) {
      double t = 0.0, r2 = 0.0;
      for (int i = 0; i < d; ++i) {
        double dl = xw[i] - rp[i];
        dl -= std::nearbyint(dl);
        t += rp[d + i] * dl;
        r2 += dl * dl;
      }
      double t2 = t * t;
      if (t2 > rn2 || r2 - t2 > rt2) continue;
      acc += rp[2 * d + 1] / std::sqrt(t2 + rp[2 * d]);
    }
  }
  return acc / (tangent_volume_ * double(seeds_.size()));
}

namespace {

// Mixture of stratified uniform draws on [-1/2,1/2)^D and an importance
// proposal, combined with the balance heuristic under deterministic
// allocation.
struct MixtureProblem {
  int D = 1;
  std::function<double(const double*)> integrand;
  // both may be empty when there is no importance component
  std::function<void(CounterRng&, double*)> imp_sample;
  std::function<double(const double*)> imp_density;
};

QuadratureEstimate run_mixture(const MixtureProblem& prob, const McConfig& cfg, std::uint32_t stream) {
  validate(cfg);
  auto t_start = std::chrono::steady_clock::now();
  const int D = prob.D;
  const int G = cfg.groups;
  const bool has_imp = bool(prob.imp_sample) && cfg.importance_weight > 0.0;
  const double p = has_imp ? cfg.importance_weight : 0.0;

  // strata: spa^D, reduced until every unit gets at least one uniform draw
  int spa = cfg.strata_per_axis;
  auto strata_of = [&](int s) {
    std::uint64_t S = 1;
    for (int i = 0; i < D; ++i) S *= std::uint64_t(s);
    return S;
  };
  while (spa > 1 && double(cfg.samples) * (1.0 - p) < double(G) * double(strata_of(spa))) --spa;
  const std::uint64_t S = strata_of(spa);
  const std::uint64_t units = std::uint64_t(G) * S;
  std::uint64_t n_u = std::uint64_t(std::floor(double(cfg.samples) * (1.0 - p) / double(units)));
  std::uint64_t n_i = std::uint64_t(std::floor(double(cfg.samples) * p / double(units)));
  if (n_u + n_i == 0) n_u = 1;
  const double n_group = double((n_u + n_i) * S);
  const double cu = double(n_u * S) / n_group;
  const double ci = double(n_i * S) / n_group;

  std::vector<double> partial(units, 0.0);
  parallel_for(units, cfg.workers, [&](std::size_t unit) {
    const std::uint64_t stratum = unit % S;
    double lo[2 * kMaxDim];
    std::uint64_t r = stratum;
    for (int i = 0; i < D; ++i) {
      lo[i] = double(r % spa) / spa - 0.5;
      r /= spa;
    }
    const double cell = 1.0 / spa;
    double x[2 * kMaxDim];
    double acc = 0.0;
    for (std::uint64_t k = 0; k < n_u + n_i; ++k) {
      CounterRng rng(cfg.seed, stream, (std::uint64_t(unit) << 32) | k);
      if (k < n_u) {
        for (int i = 0; i < D; ++i) x[i] = lo[i] + cell * rng.uniform();
      } else {
        prob.imp_sample(rng, x);
        for (int i = 0; i < D; ++i) x[i] = wrap1(x[i]);
      }
      double f = prob.integrand(x);
      if (f == 0.0) continue;
      double q = has_imp ? cu + ci * prob.imp_density(x) : 1.0;
      acc += f / q;
    }
    partial[unit] = acc;
  });

  std::vector<double> gv(G, 0.0);
  for (std::uint64_t unit = 0; unit < units; ++unit) gv[unit / S] += partial[unit];
  for (auto& v : gv) v /= n_group;
  double mean = 0.0;
  for (double v : gv) mean += v;
  mean /= G;
  double var = 0.0;
  for (double v : gv) var += (v - mean) * (v - mean);
  QuadratureEstimate est;
  est.value = mean;
  est.standard_error = G > 1 ? std::sqrt(var / (G - 1) / G) : 0.0;
  std::vector<double> sorted = gv;
  std::nth_element(sorted.begin(), sorted.begin() + G / 2, sorted.end());
  est.median_of_means = sorted[G / 2];
  est.samples = std::uint64_t(n_group) * G;
  est.strata = S;
  est.seed = cfg.seed;
  if (cfg.record_time)
    est.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return est;
}

enum Stream : std::uint32_t {
  kStreamResolvent = 1,
  kStreamCrossing = 2,
  kStreamFOmega = 3,
  kStreamSlab = 4,
};

}  // namespace

QuadratureEstimate resolvent_torus(const DispersionModel& model, double alpha, double beta, double weight_power,
                                   double gradient_floor, const McConfig& config) {
  if (!(beta > 0.0 && beta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "beta must lie in (0, 1]");
  if (!(weight_power >= 0.0 && weight_power <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "weight power must lie in [0, 1]");
  if (!(gradient_floor >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gradient floor must be >= 0");
  if (!model.is_trig() && gradient_floor == 0.0 && weight_power > 0.0)
    throw Error(ErrorCode::CuspSingularity, "weighted integral of a sqrt model needs a positive gradient floor");
  validate(config);
  const int d = model.dim();
  const bool need_grad = weight_power > 0.0 || gradient_floor > 0.0;
  auto tube = std::make_shared<LevelSetTube>(model, alpha, beta, mix_seed(config.seed, 11));

  MixtureProblem prob;
  prob.D = d;
  prob.integrand = [&, d](const double* xs) {
    Vec x = Eigen::Map<const Vec>(xs, d);
    double w = 1.0;
    double om;
    if (need_grad) {
      if (!model.is_trig() && model.in_cusp_exclusion(x)) return 0.0;
      Vec g;
      try {
        om = model.value_and_gradient(x, g);
      } catch (const Error&) {
        return 0.0;
      }
      double gn = g.norm();
      if (gn < gradient_floor || gn == 0.0) return 0.0;
      if (weight_power > 0.0) w = std::pow(gn, -weight_power);
    } else {
      om = model.eval(x);
    }
    return w / std::hypot(alpha - om, beta);
  };
  if (!tube->empty()) {
    prob.imp_sample = [tube, d](CounterRng& rng, double* xs) {
      Vec x = tube->sample(rng);
      for (int i = 0; i < d; ++i) xs[i] = x[i];
    };
    prob.imp_density = [tube, d](const double* xs) { return tube->density(Eigen::Map<const Vec>(xs, d)); };
  }
  return run_mixture(prob, config, kStreamResolvent);
}

std::uint64_t tube_seed(std::uint64_t seed, double alpha) {
  return mix_seed(mix_seed(seed, 21), std::bit_cast<std::uint64_t>(alpha + 0.0));
}

TubeCache::TubeCache(const DispersionModel& model, double beta, std::uint64_t seed)
    : model_(model), beta_(beta), seed_(seed) {}

std::shared_ptr<const LevelSetTube> TubeCache::get(double alpha) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = tubes_.find(alpha);
    if (it != tubes_.end()) return it->second;
  }
  auto t = std::make_shared<const LevelSetTube>(model_, alpha, beta_, tube_seed(seed_, alpha));
  std::lock_guard<std::mutex> lock(mu_);
  return tubes_.emplace(alpha, t).first->second;
}

QuadratureEstimate crossing_integral(const DispersionModel& model, const ResolventQuery& query,
                                     const McConfig& config, TubeCache* cache) {
  const int d = model.dim();
  validate(query, d);
  validate(config);
  const double beta = query.beta;
  const auto& al = query.alpha;
  const Vec k0 = query.k0;

  if (cache && (cache->beta() != beta || cache->seed() != config.seed))
    throw Error(ErrorCode::InvalidArgument, "tube cache built for a different beta or seed");
  std::optional<TubeCache> local;
  if (!cache) cache = &local.emplace(model, beta, config.seed);
  std::vector<std::shared_ptr<const LevelSetTube>> tubes(3);
  for (int j = 0; j < 3; ++j) tubes[j] = cache->get(al[j]);

  MixtureProblem prob;
  prob.D = 2 * d;
  prob.integrand = [&, d](const double* xs) {
    Vec k1 = Eigen::Map<const Vec>(xs, d), k2 = Eigen::Map<const Vec>(xs + d, d);
    Vec k3 = k1 - k2 + k0;
    double r = std::hypot(al[0] - model.eval(k1), beta) * std::hypot(al[1] - model.eval(k2), beta) *
               std::hypot(al[2] - model.eval(k3), beta);
    return 1.0 / r;
  };
  // pairwise components: (k1,k2), (k1,k3), (k2,k3) drawn from their tubes
  std::vector<int> comps;
  if (!tubes[0]->empty() && !tubes[1]->empty()) comps.push_back(0);
  if (!tubes[0]->empty() && !tubes[2]->empty()) comps.push_back(1);
  if (!tubes[1]->empty() && !tubes[2]->empty()) comps.push_back(2);
  if (!comps.empty()) {
    prob.imp_sample = [tubes, comps, k0, d](CounterRng& rng, double* xs) {
      int c = comps[std::min<std::size_t>(std::size_t(rng.uniform() * comps.size()), comps.size() - 1)];
      Vec k1, k2;
      if (c == 0) {
        k1 = tubes[0]->sample(rng);
        k2 = tubes[1]->sample(rng);
      } else if (c == 1) {
        k1 = tubes[0]->sample(rng);
        Vec k3 = tubes[2]->sample(rng);
        k2 = k1 + k0 - k3;
      } else {
        k2 = tubes[1]->sample(rng);
        Vec k3 = tubes[2]->sample(rng);
        k1 = k3 + k2 - k0;
      }
      for (int i = 0; i < d; ++i) {
        xs[i] = k1[i];
        xs[d + i] = k2[i];
      }
    };
    prob.imp_density = [tubes, comps, k0, d](const double* xs) {
      Vec k1 = Eigen::Map<const Vec>(xs, d), k2 = Eigen::Map<const Vec>(xs + d, d);
      Vec k3 = k1 - k2 + k0;
      double q1 = -1, q2 = -1, q3 = -1;
      auto Q1 = [&] { return q1 < 0 ? (q1 = tubes[0]->density(k1)) : q1; };
      auto Q2 = [&] { return q2 < 0 ? (q2 = tubes[1]->density(k2)) : q2; };
      auto Q3 = [&] { return q3 < 0 ? (q3 = tubes[2]->density(k3)) : q3; };
      double s = 0.0;
      for (int c : comps) {
        if (c == 0) s += Q1() * Q2();
        else if (c == 1) s += Q1() * Q3();
        else s += Q2() * Q3();
      }
      return s / double(comps.size());
    };
  }
  return run_mixture(prob, config, kStreamCrossing);
}

QuadratureEstimate crossing_integral_slab(const DispersionModel& model, const ResolventQuery& query, const IVec& w,
                                          double r0, double delta, const McConfig& config) {
  const int d = model.dim();
  validate(query, d);
  validate(config);
  if (w.size() != d) throw Error(ErrorCode::InvalidArgument, "slab normal has the wrong dimension");
  if (!(delta > 0)) throw Error(ErrorCode::InvalidArgument, "slab half width must be positive");
  int j = -1;
  for (int i = 0; i < d; ++i)
    if (w[i] != 0 && (j < 0 || std::abs(w[i]) < std::abs(w[j]))) j = i;
  if (j < 0) throw Error(ErrorCode::InvalidArgument, "slab normal must be non-zero");
  const double wn = std::sqrt(double(w.cast<double>().squaredNorm()));
  const double c = r0 * wn;           // x.w = c on the hyperplane
  const double half = delta * wn;     // |x.w - c| <= half
  if (half >= 0.5) {
    // the slab covers the torus
    McConfig full = config;
    full.importance_weight = 0.0;
    return crossing_integral(model, query, full);
  }
  const double measure = 2.0 * half;
  const auto& al = query.alpha;
  const double beta = query.beta;
  const Vec k0 = query.k0;
  auto draw = [&](CounterRng& rng, Vec& x) {
    double rest = 0.0;
    for (int i = 0; i < d; ++i) {
      if (i == j) continue;
      x[i] = rng.uniform() - 0.5;
      rest += w[i] * x[i];
    }
    double tau = c + half * (2.0 * rng.uniform() - 1.0);
    int aw = std::abs(w[j]);
    int n = std::min(int(rng.uniform() * aw), aw - 1);
    x[j] = (tau - rest + n) / w[j];
  };
  MixtureProblem prob;
  prob.D = 2 * d;
  prob.integrand = [&, d](const double* xs) {
    Vec k1 = Eigen::Map<const Vec>(xs, d), k2 = Eigen::Map<const Vec>(xs + d, d);
    Vec k3 = k1 - k2 + k0;
    double r = std::hypot(al[0] - model.eval(k1), beta) * std::hypot(al[1] - model.eval(k2), beta) *
               std::hypot(al[2] - model.eval(k3), beta);
    return measure * measure / r;
  };
  // all draws come from the slab sampler: the "importance" component with weight 1
  McConfig cfg = config;
  cfg.importance_weight = 1.0;
  cfg.strata_per_axis = 1;
  prob.imp_sample = [&, d](CounterRng& rng, double* xs) {
    Vec k1(d), k2(d);
    draw(rng, k1);
    draw(rng, k2);
    for (int i = 0; i < d; ++i) {
      xs[i] = k1[i];
      xs[d + i] = k2[i];
    }
  };
  prob.imp_density = [](const double*) { return 1.0; };
  return run_mixture(prob, cfg, kStreamSlab);
}

QuadratureEstimate f_omega(const DispersionModel& model, double s, const McConfig& config) {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "s must be positive");
  validate(config);
  const int d = model.dim();
  // point kernels at the critical points
  struct Kernel {
    Vec c;
    double r_lo, r_hi, log_ratio;
  };
  auto kernels = std::make_shared<std::vector<Kernel>>();
  if (!model.inner().is_constant()) {
    auto sp = find_stationary_points(model.inner());
    for (const auto& c : sp.points) {
      if (!model.is_trig() && model.in_cusp_exclusion(c)) continue;
      double hn;
      try {
        hn = model.hessian(c).norm();
      } catch (const Error&) {
        continue;
      }
      double r_hi = 0.1;
      double r_lo = std::min(0.25 * s / std::max(hn, 1e-300), 0.01 * r_hi);
      kernels->push_back({c, r_lo, r_hi, std::log(r_hi / r_lo)});
    }
  }
  const double area = unit_sphere_area(d);
  MixtureProblem prob;
  prob.D = d;
  prob.integrand = [&, d](const double* xs) {
    Vec x = Eigen::Map<const Vec>(xs, d);
    if (!model.is_trig() && model.in_cusp_exclusion(x)) return 0.0;
    Vec g;
    try {
      model.value_and_gradient(x, g);
    } catch (const Error&) {
      return 0.0;
    }
    double gn = g.norm();
    if (gn < s || gn == 0.0) return 0.0;
    return 1.0 / (gn * gn * gn);
  };
  if (!kernels->empty()) {
    prob.imp_sample = [kernels, d](CounterRng& rng, double* xs) {
      const auto& K = *kernels;
      const auto& k = K[std::min<std::size_t>(std::size_t(rng.uniform() * K.size()), K.size() - 1)];
      double r = k.r_lo * std::exp(rng.uniform() * k.log_ratio);
      Vec e = random_direction(rng, d);
      for (int i = 0; i < d; ++i) xs[i] = k.c[i] + r * e[i];
    };
    prob.imp_density = [kernels, d, area](const double* xs) {
      double acc = 0.0;
      for (const auto& k : *kernels) {
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) {
          double dx = wrap1(xs[i] - k.c[i]);
          r2 += dx * dx;
        }
        double r = std::sqrt(r2);
        if (r < k.r_lo || r > k.r_hi) continue;
        acc += 1.0 / (k.log_ratio * area * std::pow(r, d));
      }
      return acc / double(kernels->size());
    };
  }
  return run_mixture(prob, config, kStreamFOmega);
}

QuadratureEstimate mc_cube(int D, const std::function<double(const double*)>& f, const McConfig& config,
                           std::uint32_t stream) {
  if (D < 1 || D > 2 * kMaxDim) throw Error(ErrorCode::InvalidArgument, "cube dimension out of range");
  MixtureProblem prob;
  prob.D = D;
  prob.integrand = [&, D](const double* xs) {
    double y[2 * kMaxDim];
    for (int i = 0; i < D; ++i) y[i] = xs[i] + 0.5;
    return f(y);
  };
  McConfig cfg = config;
  cfg.importance_weight = 0.0;
  return run_mixture(prob, cfg, 100 + stream);
}

}  // namespace rlab
