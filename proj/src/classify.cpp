#include "resolvent_lab/classify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <set>

#include "resolvent_lab/calculus.hpp"
#include "resolvent_lab/error.hpp"
#include "resolvent_lab/parallel.hpp"
#include "resolvent_lab/rng.hpp"

namespace rlab {

namespace {

using cplx = std::complex<double>;

struct Freq {
  IVec n;
  cplx c;
};

// a cos + b sin = (a - ib)/2 e^{i th} + (a + ib)/2 e^{-i th}
std::vector<Freq> full_spectrum(const TrigPoly& p) {
  std::vector<Freq> out;
  for (const auto& t : p.terms()) {
    out.push_back({t.m, cplx(t.cos_coeff, -t.sin_coeff) / 2.0});
    out.push_back({IVec(-t.m), cplx(t.cos_coeff, t.sin_coeff) / 2.0});
  }
  return out;
}

IVec primitive(IVec w) {
  long g = 0;
  for (int i = 0; i < w.size(); ++i) g = std::gcd(g, long(std::abs(w[i])));
  if (g == 0) return w;
  for (int i = 0; i < w.size(); ++i) w[i] /= int(g);
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] == 0) continue;
    if (w[i] < 0) w = -w;
    break;
  }
  return w;
}

std::vector<int> key_of(const IVec& w) { return std::vector<int>(w.data(), w.data() + w.size()); }

std::vector<IVec> candidate_directions(const std::vector<Freq>& spec) {
  std::set<std::vector<int>> seen;
  std::vector<IVec> out;
  auto add = [&](const IVec& w) {
    if (w.isZero()) return;
    IVec p = primitive(w);
    if (seen.insert(key_of(p)).second) out.push_back(p);
  };
  for (std::size_t i = 0; i < spec.size(); ++i) {
    add(spec[i].n);
    for (std::size_t j = i + 1; j < spec.size(); ++j) add(IVec(spec[i].n - spec[j].n));
  }
  return out;
}

// rows 1..d-1 of a rotation taking u to e1
Mat tangent_basis(const Vec& u) {
  Mat O = rotation_to_e1(u);
  return O.bottomRows(u.size() - 1);
}

}  // namespace

double hyperplane_deviation(const DispersionModel& model, const HyperplaneCertificate& cert, int points,
                            std::uint64_t seed) {
  const int d = model.dim();
  Mat T = tangent_basis(cert.u);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    CounterRng rng(seed, 9, std::uint64_t(i));
    double r0 = cert.r0, value = cert.value;
    if (cert.all_offsets) {
      r0 = rng.uniform(-1.0, 1.0);
      value = model.eval(Vec(r0 * cert.u));
    }
    Vec x = r0 * cert.u;
    for (int j = 0; j < d - 1; ++j) x += rng.uniform(-2.0, 2.0) * T.row(j).transpose();
    worst = std::max(worst, std::abs(model.eval(x) - value));
  }
  return worst;
}

std::vector<HyperplaneCertificate> find_hyperplanes(const DispersionModel& model, const HyperplaneOptions& opt) {
  const TrigPoly& p = model.inner();
  const int d = p.dim();
  std::vector<HyperplaneCertificate> out;
  auto verify_and_push = [&](HyperplaneCertificate c) {
    c.max_deviation = hyperplane_deviation(model, c, opt.verify_points, opt.seed);
    if (c.max_deviation < 1e-9 * (1.0 + std::abs(c.value))) out.push_back(c);
  };
  if (p.is_constant()) {
    IVec w = IVec::Zero(d);
    w[0] = 1;
    verify_and_push({w.cast<double>(), w, 0.0, model.eval(Vec::Zero(d)), 0.0, true});
    return out;
  }
  const auto spec = full_spectrum(p);
  double scale = 1.0;
  for (const auto& f : spec) scale += std::abs(f.c);

  for (const IVec& w : candidate_directions(spec)) {
    const long w2 = w.squaredNorm();
    const double wn = std::sqrt(double(w2));
    const Vec u = w.cast<double>() / wn;
    // classes by projection onto u^perp, keyed by |w|^2 n - (n.w) w
    std::map<std::vector<long>, std::vector<std::pair<cplx, double>>> classes;
    bool has_transverse = false;
    for (const auto& f : spec) {
      long nw = f.n.dot(w);
      std::vector<long> key(d);
      for (int i = 0; i < d; ++i) key[i] = w2 * f.n[i] - nw * w[i];
      bool zero = std::all_of(key.begin(), key.end(), [](long k) { return k == 0; });
      if (!zero) has_transverse = true;
      if (!zero) classes[key].push_back({f.c, kTwoPi * double(nw) / wn});
    }
    if (!has_transverse) {
      verify_and_push({u, w, 0.0, model.eval(Vec::Zero(d)), 0.0, true});
      continue;
    }
    auto F = [&](double r, double* dF) {
      double s = 0.0, ds = 0.0;
      for (const auto& [key, list] : classes) {
        cplx S = 0.0, dS = 0.0;
        for (const auto& [c, om] : list) {
          cplx e = c * std::polar(1.0, om * r);
          S += e;
          dS += cplx(0.0, om) * e;
        }
        s += std::norm(S);
        ds += 2.0 * std::real(std::conj(S) * dS);
      }
      if (dF) *dF = ds;
      return s;
    };
    // the offset r0 has period |w| here
    const int N = opt.scan_points;
    const double lo = -0.5 * wn, h = wn / N;
    std::vector<double> vals(N);
    for (int i = 0; i < N; ++i) vals[i] = F(lo + i * h, nullptr);
    std::vector<double> roots;
    for (int i = 0; i < N; ++i) {
      double a = vals[(i + N - 1) % N], b = vals[i], c = vals[(i + 1) % N];
      if (!(b <= a && b <= c)) continue;
      double xl = lo + (i - 1) * h, xr = lo + (i + 1) * h, x = lo + i * h;
      double dl, dr;
      F(xl, &dl);
      F(xr, &dr);
      if (dl < 0 && dr > 0) {
        // bisect past the requested tolerance until the bracket stops shrinking
        for (int it = 0; it < 200 && xr - xl > 0.0; ++it) {
          double m = 0.5 * (xl + xr), dm;
          if (!(m > xl && m < xr)) break;
          F(m, &dm);
          if (dm < 0) xl = m; else xr = m;
        }
        x = 0.5 * (xl + xr);
      }
      if (std::sqrt(F(x, nullptr)) > 1e-9 * scale) continue;
      // canonical offset in [-|w|/2, |w|/2)
      x -= wn * std::floor((x - lo) / wn);
      bool dup = false;
      for (double r : roots)
        if (std::abs(r - x) < opt.merge_tolerance || std::abs(std::abs(r - x) - wn) < opt.merge_tolerance) dup = true;
      if (!dup) roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());
    for (double r0 : roots) verify_and_push({u, w, r0, model.eval(Vec(r0 * u)), 0.0, false});
  }
  return out;
}

CriticalPointTable find_critical_points(const DispersionModel& model, int grid_per_axis) {
  CriticalPointTable out;
  StationaryPointOptions o;
  o.grid_per_axis = grid_per_axis;
  auto sp = find_stationary_points(model.inner(), o);
  out.isolated = sp.isolated;
  out.diverged = sp.diverged;
  out.grid_per_axis = sp.grid_per_axis;
  bool morse = sp.isolated;
  for (const auto& x : sp.points) {
    if (!model.is_trig() && model.in_cusp_exclusion(x)) continue;
    CriticalPoint c;
    c.location = x;
    c.value = model.eval(x);
    Mat H = model.hessian(x);
    c.hessian_det = H.determinant();
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    for (int i = 0; i < H.rows(); ++i)
      if (es.eigenvalues()[i] < 0) ++c.index;
    c.gradient_residual = model.gradient(x).norm();
    if (!(std::abs(c.hessian_det) > kMorseDeterminantFloor)) morse = false;
    out.points.push_back(c);
  }
  if (!model.is_trig() && !model.cusp_points().empty()) morse = false;
  out.is_morse = morse;
  return out;
}

// ---------------------------------------------------------------- probe

namespace {

constexpr double kGolden = 2.39996322972865332;  // pi (3 - sqrt 5)

// Directions on the half sphere (u and -u are equivalent for the probe),
// always including the coordinate axes.
std::vector<Vec> half_sphere_design(int dim, int count, std::uint64_t seed) {
  std::vector<Vec> out;
  for (int i = 0; i < dim; ++i) out.push_back(Vec::Unit(dim, i));
  if (dim == 1) return out;
  for (int i = 0; i < count; ++i) {
    Vec u(dim);
    if (dim == 2) {
      double th = kPi * (i + 0.5) / count;
      u << std::cos(th), std::sin(th);
    } else if (dim == 3) {
      double z = (i + 0.5) / count;
      double r = std::sqrt(1.0 - z * z), ph = kGolden * i;
      u << r * std::cos(ph), r * std::sin(ph), z;
    } else {
      CounterRng rng(seed, 11, std::uint64_t(i));
      for (int j = 0; j < dim; ++j) u[j] = rng.normal();
      u.normalize();
      if (u[dim - 1] < 0) u = -u;
    }
    out.push_back(u);
  }
  return out;
}

std::vector<Vec> tangent_design(const Vec& u, int count) {
  const int d = u.size();
  std::vector<Vec> out;
  if (d == 1) return out;
  Mat T = tangent_basis(u);
  for (const Vec& c : half_sphere_design(d - 1, count, 13)) out.push_back(T.transpose() * c);
  return out;
}

struct ProbeTables {
  // per term, per order: cos/sin part of (v.grad)^n after the (2 pi m.v)^n factor
  std::vector<double> shifted;  // [term * (n_max+1) + n]
};

// fills best[n'] = max over v, 2 <= n <= n' of |(v.grad)^n omega(k)| / n!
void probe_cell(const TrigPoly& p, const Vec& k, const std::vector<Vec>& vs, int n_max, std::vector<double>& best,
                std::vector<double>& scratch) {
  const auto& terms = p.terms();
  const int T = int(terms.size());
  const int O = n_max + 1;
  scratch.assign(std::size_t(T) * O, 0.0);
  for (int j = 0; j < T; ++j) {
    double th = kTwoPi * terms[j].m.cast<double>().dot(k);
    double c = std::cos(th), s = std::sin(th);
    // d^n/dth^n of a cos + b sin cycles with period 4
    double a = terms[j].cos_coeff, b = terms[j].sin_coeff;
    double cyc[4] = {a * c + b * s, -a * s + b * c, -a * c - b * s, a * s - b * c};
    for (int n = 0; n < O; ++n) scratch[std::size_t(j) * O + n] = cyc[n % 4];
  }
  best.assign(O, 0.0);
  double fact[kMaxDerivativeOrder + 1];
  fact[0] = 1.0;
  for (int n = 1; n <= n_max; ++n) fact[n] = fact[n - 1] * n;
  std::vector<double> acc(O);
  for (const Vec& v : vs) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int j = 0; j < T; ++j) {
      double w = kTwoPi * terms[j].m.cast<double>().dot(v);
      double wp = w;
      for (int n = 1; n < O; ++n) {
        acc[n] += wp * scratch[std::size_t(j) * O + n];
        wp *= w;
      }
    }
    double run = 0.0;
    for (int n = 2; n < O; ++n) {
      run = std::max(run, std::abs(acc[n]) / fact[n]);
      best[n] = std::max(best[n], run);
    }
  }
}

}  // namespace

double probe_point(const DispersionModel& model, const Vec& k, const Vec& u, int n_max, int v_points) {
  if (!model.is_trig()) throw Error(ErrorCode::UnsupportedModel, "curvature probe needs a trigonometric polynomial");
  if (n_max < 2 || n_max > 8) throw Error(ErrorCode::InvalidArgument, "n_max must lie in 2..8");
  std::vector<double> best, scratch;
  probe_cell(model.inner(), k, tangent_design(u.normalized(), v_points), n_max, best, scratch);
  return best[n_max];
}

CurvatureProbe curvature_probe(const DispersionModel& model, const ProbeOptions& opt) {
  if (!model.is_trig()) throw Error(ErrorCode::UnsupportedModel, "curvature probe needs a trigonometric polynomial");
  if (opt.n_max < 2 || opt.n_max > 8) throw Error(ErrorCode::InvalidArgument, "n_max must lie in 2..8");
  const int d = model.dim();
  const int n_max = opt.n_max;
  const int g = opt.grid_per_axis > 0 ? opt.grid_per_axis : (d <= 3 ? 16 : 8);
  const TrigPoly& p = model.inner();

  const auto us = half_sphere_design(d, opt.u_points, 17);
  std::vector<std::vector<Vec>> vs;
  for (const Vec& u : us) vs.push_back(tangent_design(u, opt.v_points));

  std::size_t cells = 1;
  for (int i = 0; i < d; ++i) cells *= g;
  auto grid_point = [&](std::size_t idx) {
    Vec k(d);
    for (int i = 0; i < d; ++i) {
      k[i] = -0.5 + double(idx % g) / g;
      idx /= g;
    }
    return k;
  };

  CurvatureProbe out;
  out.n_max = n_max;
  // per k: best (over u) minimum of B at each order, plus the argmin u for the top order
  std::vector<std::vector<double>> min_k(cells);
  std::vector<int> arg_u(cells, 0);
  parallel_for(cells, opt.workers, [&](std::size_t c) {
    Vec k = grid_point(c);
    std::vector<double> best, scratch, mins(n_max + 1, std::numeric_limits<double>::infinity());
    int au = 0;
    for (std::size_t iu = 0; iu < us.size(); ++iu) {
      probe_cell(p, k, vs[iu], n_max, best, scratch);
      for (int n = 2; n <= n_max; ++n) mins[n] = std::min(mins[n], best[n]);
      if (best[n_max] <= mins[n_max]) au = int(iu);
    }
    min_k[c] = mins;
    arg_u[c] = au;
  });
  out.evaluations = cells * us.size() * std::size_t(std::max<std::size_t>(1, vs[0].size()));

  std::vector<double> mins(n_max + 1, std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < cells; ++c)
    for (int n = 2; n <= n_max; ++n) mins[n] = std::min(mins[n], min_k[c][n]);

  // refine x4 around the smallest cells
  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return min_k[a][n_max] < min_k[b][n_max]; });
  const int R = std::min<int>(opt.refine_cells, int(cells));
  const double hk = 1.0 / g;
  const double hu = d == 2 ? kPi / opt.u_points : std::sqrt(kTwoPi / opt.u_points);
  Vec best_k = grid_point(order[0]);
  Vec best_u = us[arg_u[order[0]]];
  double best_val = min_k[order[0]][n_max];
  struct Refined {
    std::vector<double> mins;
    double val;
    Vec k, u;
  };
  std::vector<Refined> refined(R);
  parallel_for(std::size_t(R), opt.workers, [&](std::size_t r) {
    Vec k0 = grid_point(order[r]);
    Vec u0 = us[arg_u[order[r]]];
    Mat Tu = d > 1 ? tangent_basis(u0) : Mat();
    std::vector<double> best, scratch, mn(n_max + 1, std::numeric_limits<double>::infinity());
    double bv = std::numeric_limits<double>::infinity();
    Vec bk = k0, bu = u0;
    std::size_t kc = 1, uc = 1;
    for (int i = 0; i < d; ++i) kc *= 5;
    for (int i = 0; i < d - 1; ++i) uc *= 5;
    for (std::size_t iu = 0; iu < uc; ++iu) {
      Vec u = u0;
      std::size_t q = iu;
      for (int i = 0; i < d - 1; ++i) {
        u += (int(q % 5) - 2) * 0.25 * hu * Tu.row(i).transpose();
        q /= 5;
      }
      u.normalize();
      auto vv = tangent_design(u, 4 * opt.v_points);
      for (std::size_t ik = 0; ik < kc; ++ik) {
        Vec k = k0;
        std::size_t qk = ik;
        for (int i = 0; i < d; ++i) {
          k[i] += (int(qk % 5) - 2) * 0.25 * hk;
          qk /= 5;
        }
        probe_cell(p, k, vv, n_max, best, scratch);
        for (int n = 2; n <= n_max; ++n) mn[n] = std::min(mn[n], best[n]);
        if (best[n_max] < bv) {
          bv = best[n_max];
          bk = k;
          bu = u;
        }
      }
    }
    refined[r] = {mn, bv, bk, bu};
  });
  for (const auto& r : refined) {
    for (int n = 2; n <= n_max; ++n) mins[n] = std::min(mins[n], r.mins[n]);
    if (r.val < best_val) {
      best_val = r.val;
      best_k = r.k;
      best_u = r.u;
    }
  }
  mins[0] = mins[1] = 0.0;
  out.min_by_order = mins;
  out.eps0_hat = mins[n_max];
  out.k_min = torus_wrap(best_k);
  out.u_min = best_u;
  out.n0_hat = n_max;
  for (int n = 2; n <= n_max; ++n) {
    if (mins[n] > 1e-6 && mins[n] >= 0.5 * mins[n_max]) {
      out.n0_hat = n;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------- constants

double SuppressionConstants::r0(double s) const { return std::min(1.0, s / 2.0); }

double SuppressionConstants::lambda(double s) const {
  return 0.25 * std::min(0.5, eps0 / a0 * std::pow(r0(s) * mu, n0));
}

SuppressionConstants suppression_constants(const DispersionModel& model, int n0, double eps0) {
  if (!model.is_trig()) throw Error(ErrorCode::UnsupportedModel, "suppression constants need a trigonometric polynomial");
  if (n0 < 2 || n0 > kMaxDerivativeOrder - 1) throw Error(ErrorCode::InvalidArgument, "n0 must lie in 2..11");
  if (!(eps0 > 0.0 && eps0 <= 0.5)) throw Error(ErrorCode::InvalidArgument, "eps0 must lie in (0, 1/2]");
  SuppressionConstants c;
  c.n0 = n0;
  c.eps0 = eps0;
  auto norms = model.smooth_norms(n0 + 1);
  c.M.resize(n0 + 2);
  for (int n = 0; n <= n0 + 1; ++n) c.M[n] = norms.cumulative(n);
  c.a0 = std::max(1.0, 8.0 * c.M[2]);
  c.mu = 1.0 / (1.0 + std::ldexp(1.0, n0 + 3) + c.M[n0 + 1] * std::ldexp(1.0, 4 * n0 + 1));
  c.gamma_num = 1;
  c.gamma_den = 3L * n0 * (n0 + 1);
  c.gamma = double(c.gamma_num) / double(c.gamma_den);
  c.c_tilde = 1.0 + c.M[n0];
  double log_inner = std::log(eps0) + (n0 - 1) * std::log(c.mu) - std::log(c.c_tilde) -
                     (3 * n0 + 8) * std::log(2.0) - n0 * std::log(double(n0 + 1));
  c.log_beta0 = 1.5 * (n0 + 1) * log_inner;
  c.beta0 = std::exp(c.log_beta0);
  return c;
}

// ---------------------------------------------------------------- f_omega fit

std::vector<double> default_f_omega_grid() {
  std::vector<double> s;
  for (int j = 2; j <= 9; ++j) s.push_back(std::ldexp(1.0, -j));
  return s;
}

FOmegaFit fit_f_omega(const DispersionModel& model, const std::vector<double>& s, const McConfig& config) {
  if (s.size() < 3) throw Error(ErrorCode::FitDegenerate, "f_omega fit needs at least 3 points");
  FOmegaFit out;
  out.s = s;
  std::vector<double> x, y;
  for (double si : s) {
    auto e = f_omega(model, si, config);
    out.estimates.push_back(e);
    x.push_back(sabs(std::log(si)));
    y.push_back(e.value);
  }
  const double n = double(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0) throw Error(ErrorCode::FitDegenerate, "f_omega fit: s values coincide");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  bool positive = std::all_of(y.begin(), y.end(), [](double v) { return v > 0; });
  if (positive) {
    double lx = 0, ly = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      lx += std::log(x[i]);
      ly += std::log(y[i]);
    }
    lx /= n;
    ly /= n;
    double a = 0, b = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      a += (std::log(x[i]) - lx) * (std::log(y[i]) - ly);
      b += (std::log(x[i]) - lx) * (std::log(x[i]) - lx);
    }
    out.p0_estimate = a / b;
  }
  double ymax = *std::max_element(y.begin(), y.end()), ymin = *std::min_element(y.begin(), y.end());
  bool flat = ymax > 0 && ymax - ymin <= 0.01 * ymax;
  out.pass = out.r2 >= kFOmegaFitR2 || flat;
  return out;
}

// ---------------------------------------------------------------- verdict

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Suppresses: return "Suppresses";
    case Verdict::DoesNotSuppress: return "DoesNotSuppress";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

ClassificationReport classify(const DispersionModel& model, const ClassifyOptions& opt) {
  ClassificationReport r;
  r.model_name = model.name();
  r.eps0_threshold = opt.eps0_threshold;
  r.certificates = find_hyperplanes(model, opt.hyperplanes);
  r.critical_points = find_critical_points(model, 0);
  if (opt.fit_f_omega && model.dim() >= 1) r.f_omega = fit_f_omega(model, default_f_omega_grid(), opt.f_omega_config);

  if (!r.certificates.empty()) {
    r.verdict = Verdict::DoesNotSuppress;
    r.reason = "hyperplane certificate found";
    if (model.is_trig() && model.dim() > 1) r.probe = curvature_probe(model, opt.probe);
    return r;
  }
  if (!model.is_trig()) {
    r.verdict = Verdict::Inconclusive;
    r.reason = "no certificate; curvature probe unavailable for sqrt models";
    return r;
  }
  r.probe = curvature_probe(model, opt.probe);
  const double eps0 = r.probe->eps0_hat;
  if (eps0 > opt.eps0_threshold)
    r.constants = suppression_constants(model, std::max(2, r.probe->n0_hat), std::min(eps0, 0.5));
  bool assumption = r.critical_points.is_morse || (r.f_omega && r.f_omega->pass);
  if (eps0 > opt.eps0_threshold && assumption) {
    r.verdict = Verdict::Suppresses;
    r.reason = r.critical_points.is_morse ? "no certificate, Morse, eps0 above threshold"
                                          : "no certificate, f_omega log fit passes, eps0 above threshold";
  } else {
    r.verdict = Verdict::Inconclusive;
    r.reason = eps0 > opt.eps0_threshold ? "no certificate but neither Morse nor f_omega fit pass"
                                         : "no certificate but eps0 estimate below threshold";
  }
  return r;
}

}  // namespace rlab
