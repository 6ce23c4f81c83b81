#include "resolvent_lab/dispersion.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "resolvent_lab/error.hpp"

namespace rlab {

double sabs(double x) { return std::hypot(1.0, x); }

Vec torus_wrap(const Vec& x) {
  Vec y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double v = x[i] - std::floor(x[i] + 0.5);
    // floor can round x + 0.5 up to an integer for x just below 1/2
    if (v >= 0.5) v -= 1.0;
    if (v < -0.5) v += 1.0;
    y[i] = v;
  }
  return y;
}

double torus_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "torus_distance: dimension mismatch");
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    d -= std::round(d);
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

void check_order(int n) {
  if (n < 0 || n > kMaxDerivativeOrder)
    throw Error(ErrorCode::InvalidArgument, "derivative order must lie in 0.." + std::to_string(kMaxDerivativeOrder));
}

void check_dim(int d) {
  if (d < 1 || d > kMaxDim) throw Error(ErrorCode::InvalidArgument, "dimension must lie in 1..4");
}

// cos(theta + n pi/2) and sin(theta + n pi/2)
inline void quarter_shift(int n, double c, double s, double& cn, double& sn) {
  switch (n & 3) {
    case 0: cn = c; sn = s; break;
    case 1: cn = -s; sn = c; break;
    case 2: cn = -c; sn = -s; break;
    default: cn = s; sn = -c; break;
  }
}

inline double dot_m(const FrequencyVector& m, const Vec& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) s += m[i] * x[i];
  return s;
}

inline double mnorm(const FrequencyVector& m) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) s += double(m[i]) * m[i];
  return std::sqrt(s);
}

struct FreqLess {
  bool operator()(const FrequencyVector& a, const FrequencyVector& b) const {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  }
};

}  // namespace

TrigPoly::TrigPoly(int dim, double constant, std::vector<TrigTerm> terms) : dim_(dim), constant_(constant) {
  check_dim(dim);
  if (!std::isfinite(constant)) throw Error(ErrorCode::InvalidArgument, "non-finite constant");
  std::map<FrequencyVector, std::pair<double, double>, FreqLess> merged;
  for (auto& t : terms) {
    if (t.m.size() != dim) throw Error(ErrorCode::InvalidArgument, "frequency vector length differs from dimension");
    if (!std::isfinite(t.cos_coeff) || !std::isfinite(t.sin_coeff))
      throw Error(ErrorCode::InvalidArgument, "non-finite coefficient");
    FrequencyVector m = t.m;
    double a = t.cos_coeff, b = t.sin_coeff;
    int lead = 0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (m[i] != 0) {
        lead = m[i];
        break;
      }
    }
    if (lead == 0) {
      constant_ += a;
      continue;
    }
    if (lead < 0) {
      m = -m;
      b = -b;
    }
    auto& slot = merged[m];
    slot.first += a;
    slot.second += b;
  }
  for (auto& [m, ab] : merged) {
    if (ab.first == 0.0 && ab.second == 0.0) continue;
    terms_.push_back({m, ab.first, ab.second});
  }
}

double TrigPoly::value(const Vec& x) const {
  double s = constant_;
  for (const auto& t : terms_) {
    double th = kTwoPi * dot_m(t.m, x);
    if (t.sin_coeff == 0.0)
      s += t.cos_coeff * std::cos(th);
    else if (t.cos_coeff == 0.0)
      s += t.sin_coeff * std::sin(th);
    else
      s += t.cos_coeff * std::cos(th) + t.sin_coeff * std::sin(th);
  }
  return s;
}

double TrigPoly::value_and_gradient(const Vec& x, Vec& grad) const {
  grad.setZero(dim_);
  double s = constant_;
  for (const auto& t : terms_) {
    double th = kTwoPi * dot_m(t.m, x);
    double c = std::cos(th), sn = std::sin(th);
    s += t.cos_coeff * c + t.sin_coeff * sn;
    double w = kTwoPi * (-t.cos_coeff * sn + t.sin_coeff * c);
    for (int i = 0; i < dim_; ++i) grad[i] += w * t.m[i];
  }
  return s;
}

Vec TrigPoly::gradient(const Vec& x) const {
  Vec g;
  value_and_gradient(x, g);
  return g;
}

Mat TrigPoly::hessian(const Vec& x) const {
  Mat h = Mat::Zero(dim_, dim_);
  const double f = kTwoPi * kTwoPi;
  for (const auto& t : terms_) {
    double th = kTwoPi * dot_m(t.m, x);
    double w = -f * (t.cos_coeff * std::cos(th) + t.sin_coeff * std::sin(th));
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) h(i, j) += w * t.m[i] * t.m[j];
  }
  return h;
}

double TrigPoly::directional(const Vec& x, const Vec& v, int order) const {
  check_order(order);
  double s = order == 0 ? constant_ : 0.0;
  for (const auto& t : terms_) {
    double th = kTwoPi * dot_m(t.m, x);
    double w = kTwoPi * dot_m(t.m, v);
    double cn, sn;
    quarter_shift(order, std::cos(th), std::sin(th), cn, sn);
    s += std::pow(w, order) * (t.cos_coeff * cn + t.sin_coeff * sn);
  }
  return s;
}

void TrigPoly::directional_orders(const Vec& x, const Vec& v, std::span<double> out) const {
  if (out.empty()) return;
  check_order(int(out.size()) - 1);
  std::fill(out.begin(), out.end(), 0.0);
  out[0] = constant_;
  for (const auto& t : terms_) {
    double th = kTwoPi * dot_m(t.m, x);
    double w = kTwoPi * dot_m(t.m, v);
    double c = std::cos(th), s = std::sin(th);
    double wp = 1.0;
    for (std::size_t n = 0; n < out.size(); ++n) {
      double cn, sn;
      quarter_shift(int(n), c, s, cn, sn);
      out[n] += wp * (t.cos_coeff * cn + t.sin_coeff * sn);
      wp *= w;
    }
  }
}

double TrigPoly::mixed(const Vec& x, std::span<const Vec> dirs) const {
  int n = int(dirs.size());
  check_order(n);
  double s = n == 0 ? constant_ : 0.0;
  for (const auto& t : terms_) {
    double th = kTwoPi * dot_m(t.m, x);
    double w = 1.0;
    for (const auto& v : dirs) w *= kTwoPi * dot_m(t.m, v);
    double cn, sn;
    quarter_shift(n, std::cos(th), std::sin(th), cn, sn);
    s += w * (t.cos_coeff * cn + t.sin_coeff * sn);
  }
  return s;
}

double TrigPoly::derivative_bound(int order) const {
  if (order < 0) throw Error(ErrorCode::InvalidArgument, "negative order");
  double s = order == 0 ? std::abs(constant_) : 0.0;
  for (const auto& t : terms_) s += std::hypot(t.cos_coeff, t.sin_coeff) * std::pow(kTwoPi * mnorm(t.m), order);
  return s;
}

TrigPoly TrigPoly::scaled(double factor) const {
  std::vector<TrigTerm> ts = terms_;
  for (auto& t : ts) {
    t.cos_coeff *= factor;
    t.sin_coeff *= factor;
  }
  return TrigPoly(dim_, constant_ * factor, std::move(ts));
}

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::TrigPoly ? "TrigPoly" : "SqrtOfTrigPoly";
}

double SmoothNorms::at(int n) const {
  if (n < 0 || n > order) throw Error(ErrorCode::InvalidArgument, "smooth norm order out of range");
  return values[n];
}

double SmoothNorms::cumulative(int n) const {
  if (n < 0 || n > order) throw Error(ErrorCode::InvalidArgument, "smooth norm order out of range");
  return *std::max_element(values.begin(), values.begin() + n + 1);
}

namespace {

int default_grid(int d) {
  switch (d) {
    case 1: return 1024;
    case 2: return 128;
    case 3: return 64;
    default: return 20;
  }
}

// Calls fn(x) at every point of the periodic grid (i + offset)/g - 1/2.
template <class Fn>
void for_each_grid_point(int d, int g, double offset, Fn&& fn) {
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= std::size_t(g);
  Vec x(d);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (int i = 0; i < d; ++i) {
      x[i] = (double(r % g) + offset) / g - 0.5;
      r /= g;
    }
    fn(idx, x);
  }
}

}  // namespace

DispersionModel::DispersionModel(ModelKind kind, TrigPoly inner, std::string name)
    : kind_(kind), inner_(std::move(inner)), name_(std::move(name)) {
  if (kind_ == ModelKind::SqrtOfTrigPoly) {
    int d = inner_.dim();
    int g = std::min(default_grid(d), d == 1 ? 4096 : 256);
    if (d == 3) g = 48;
    if (d == 4) g = 16;
    double lo = inner_.constant();
    for_each_grid_point(d, g, 0.0, [&](std::size_t, const Vec& x) { lo = std::min(lo, inner_.value(x)); });
    if (inner_.is_constant()) lo = inner_.constant();
    if (lo < -1e-12)
      throw Error(ErrorCode::InvalidArgument,
                  "inner polynomial of a sqrt model takes negative value " + std::to_string(lo));
    if (!inner_.is_constant()) {
      auto sp = find_stationary_points(inner_);
      double scale = std::max(1.0, inner_.derivative_bound(0));
      for (auto& p : sp.points)
        if (inner_.value(p) < 1e-10 * scale) cusps_.push_back(p);
    } else if (inner_.constant() <= kCuspValueFloor) {
      throw Error(ErrorCode::InvalidArgument, "sqrt of an identically vanishing polynomial");
    }
  }
}

void DispersionModel::check_point(const Vec& x) const {
  if (x.size() != dim())
    throw Error(ErrorCode::InvalidArgument, "point has dimension " + std::to_string(x.size()) + ", model has " +
                                                std::to_string(dim()));
}

bool DispersionModel::in_cusp_exclusion(const Vec& x) const {
  for (const auto& c : cusps_)
    if (torus_distance(x, c) < kCuspExclusionRadius) return true;
  return false;
}

double DispersionModel::eval(const Vec& x) const {
  check_point(x);
  double p = inner_.value(x);
  return is_trig() ? p : std::sqrt(std::max(p, 0.0));
}

double DispersionModel::value_and_gradient(const Vec& x, Vec& grad) const {
  check_point(x);
  double p = inner_.value_and_gradient(x, grad);
  if (is_trig()) return p;
  if (p <= kCuspValueFloor || in_cusp_exclusion(x))
    throw Error(ErrorCode::CuspSingularity, "gradient requested at a zero of the inner polynomial");
  double r = std::sqrt(p);
  grad /= 2.0 * r;
  return r;
}

Vec DispersionModel::gradient(const Vec& x) const {
  Vec g;
  value_and_gradient(x, g);
  return g;
}

Mat DispersionModel::hessian(const Vec& x) const {
  check_point(x);
  if (is_trig()) return inner_.hessian(x);
  Vec gp;
  double p = inner_.value_and_gradient(x, gp);
  if (p <= kCuspValueFloor || in_cusp_exclusion(x))
    throw Error(ErrorCode::CuspSingularity, "hessian requested at a zero of the inner polynomial");
  double r = std::sqrt(p);
  Mat h = inner_.hessian(x) / (2.0 * r);
  h -= gp * gp.transpose() / (4.0 * p * r);
  return h;
}

double DispersionModel::directional_derivative(const Vec& x, const Vec& v, int n) const {
  check_point(x);
  check_point(v);
  check_order(n);
  if (std::abs(v.norm() - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "direction must be a unit vector");
  if (is_trig()) return inner_.directional(x, v, n);
  if (n == 0) return eval(x);
  if (n == 1) return v.dot(gradient(x));
  throw Error(ErrorCode::UnsupportedModel, "directional derivatives of order >= 2 need a TrigPoly model");
}

double DispersionModel::mixed_derivative(const Vec& x, std::span<const Vec> dirs) const {
  check_point(x);
  if (is_trig()) return inner_.mixed(x, dirs);
  if (dirs.empty()) return eval(x);
  if (dirs.size() == 1) return dirs[0].dot(gradient(x));
  throw Error(ErrorCode::UnsupportedModel, "mixed derivatives of order >= 2 need a TrigPoly model");
}

SmoothNorms DispersionModel::smooth_norms(int order) const {
  if (!is_trig()) throw Error(ErrorCode::UnsupportedModel, "smooth norms need a TrigPoly model");
  if (order < 0) throw Error(ErrorCode::InvalidArgument, "negative order");
  SmoothNorms out;
  out.order = order;
  for (int n = 0; n <= order; ++n) out.values.push_back(inner_.derivative_bound(n));
  return out;
}

std::pair<double, double> DispersionModel::value_range() const {
  if (inner_.is_constant()) {
    double c = is_trig() ? inner_.constant() : std::sqrt(std::max(inner_.constant(), 0.0));
    return {c, c};
  }
  double lo = inner_.value(Vec::Zero(dim())), hi = lo;
  auto sp = find_stationary_points(inner_);
  for (auto& p : sp.points) {
    double v = inner_.value(p);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for_each_grid_point(dim(), std::min(32, default_grid(dim())), 0.0, [&](std::size_t, const Vec& x) {
    double v = inner_.value(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  });
  if (is_trig()) return {lo, hi};
  return {std::sqrt(std::max(lo, 0.0)), std::sqrt(std::max(hi, 0.0))};
}

DispersionModel zero_model(int dim) { return DispersionModel(ModelKind::TrigPoly, TrigPoly::zero(dim), "zero"); }

DispersionModel nn_laplacian(int dim) {
  check_dim(dim);
  std::vector<TrigTerm> ts;
  for (int i = 0; i < dim; ++i) {
    FrequencyVector m = FrequencyVector::Zero(dim);
    m[i] = 1;
    ts.push_back({m, -1.0, 0.0});
  }
  return DispersionModel(ModelKind::TrigPoly, TrigPoly(dim, double(dim), std::move(ts)), "nn" + std::to_string(dim));
}

DispersionModel ce_morse_d3() {
  // 5 - cos(2 pi x1) (3 + cos(2 pi x2) + cos(2 pi x3)), products expanded
  auto f = [](int a, int b, int c) {
    FrequencyVector m(3);
    m << a, b, c;
    return m;
  };
  std::vector<TrigTerm> ts = {
      {f(1, 0, 0), -3.0, 0.0}, {f(1, 1, 0), -0.5, 0.0}, {f(1, -1, 0), -0.5, 0.0},
      {f(1, 0, 1), -0.5, 0.0}, {f(1, 0, -1), -0.5, 0.0},
  };
  return DispersionModel(ModelKind::TrigPoly, TrigPoly(3, 5.0, std::move(ts)), "ce_morse_d3");
}

namespace {
TrigPoly nn2d_inner() {
  FrequencyVector e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  return TrigPoly(2, 2.0, {{e1, -1.0, 0.0}, {e2, -1.0, 0.0}});
}
}  // namespace

DispersionModel nn2d_sqrt() { return DispersionModel(ModelKind::SqrtOfTrigPoly, nn2d_inner(), "nn2d_sqrt"); }

DispersionModel nn2d_squared() { return DispersionModel(ModelKind::TrigPoly, nn2d_inner(), "nn2d_squared"); }

std::vector<std::string> builtin_names() {
  return {"zero", "nn1", "nn2", "nn3", "nn4", "nn2d_sqrt", "nn2d_squared", "ce_morse_d3"};
}

DispersionModel builtin_model(std::string_view name) {
  if (name == "zero") return zero_model(1);
  if (name == "nn1") return nn_laplacian(1);
  if (name == "nn2") return nn_laplacian(2);
  if (name == "nn3") return nn_laplacian(3);
  if (name == "nn4") return nn_laplacian(4);
  if (name == "nn2d_sqrt") return nn2d_sqrt();
  if (name == "nn2d_squared") return nn2d_squared();
  if (name == "ce_morse_d3") return ce_morse_d3();
  throw Error(ErrorCode::InvalidArgument, "unknown builtin model '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int lineno) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos == tok.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad number '" + tok + "'");
}

int parse_int(const std::string& tok, int lineno) {
  int v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad integer '" + tok + "'");
  return v;
}

}  // namespace

DispersionModel parse_dispersion_dsl(std::string_view text, std::string default_name) {
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  int dim = 0;
  bool sqrt_flag = false;
  double constant = 0.0;
  std::string name = std::move(default_name);
  std::vector<TrigTerm> terms;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];
    if (kw == "dim") {
      if (dim != 0) fail("duplicate 'dim'");
      if (tok.size() != 2) fail("'dim' takes one integer");
      dim = parse_int(tok[1], lineno);
      if (dim < 1 || dim > kMaxDim) fail("dimension must lie in 1..4");
      continue;
    }
    if (dim == 0) fail("'dim' must come before '" + kw + "'");
    if (kw == "sqrt") {
      if (tok.size() != 1) fail("'sqrt' takes no arguments");
      sqrt_flag = true;
    } else if (kw == "name") {
      if (tok.size() != 2) fail("'name' takes one identifier");
      name = tok[1];
    } else if (kw == "const") {
      if (tok.size() != 2) fail("'const' takes one number");
      constant += parse_double(tok[1], lineno);
    } else if (kw == "cos" || kw == "sin") {
      if (int(tok.size()) != dim + 2) fail("'" + kw + "' takes " + std::to_string(dim) + " integers and a coefficient");
      FrequencyVector m(dim);
      for (int i = 0; i < dim; ++i) m[i] = parse_int(tok[1 + i], lineno);
      double c = parse_double(tok.back(), lineno);
      terms.push_back(kw == "cos" ? TrigTerm{m, c, 0.0} : TrigTerm{m, 0.0, c});
    } else {
      fail("unknown directive '" + kw + "'");
    }
  }
  if (dim == 0) throw Error(ErrorCode::ParseError, "missing 'dim' line");
  return DispersionModel(sqrt_flag ? ModelKind::SqrtOfTrigPoly : ModelKind::TrigPoly,
                         TrigPoly(dim, constant, std::move(terms)), name);
}

DispersionModel load_dispersion_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open dispersion file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dispersion_dsl(ss.str(), std::filesystem::path(path).stem().string());
}

std::string to_dsl(const DispersionModel& model) {
  std::ostringstream os;
  char buf[64];
  const auto& p = model.inner();
  os << "dim " << p.dim() << "\n";
  os << "name " << model.name() << "\n";
  if (!model.is_trig()) os << "sqrt\n";
  std::snprintf(buf, sizeof buf, "%.17g", p.constant());
  os << "const " << buf << "\n";
  for (const auto& t : p.terms()) {
    for (int k = 0; k < 2; ++k) {
      double c = k == 0 ? t.cos_coeff : t.sin_coeff;
      if (c == 0.0) continue;
      os << (k == 0 ? "cos" : "sin");
      for (int i = 0; i < p.dim(); ++i) os << ' ' << t.m[i];
      std::snprintf(buf, sizeof buf, "%.17g", c);
      os << ' ' << buf << "\n";
    }
  }
  return os.str();
}

DispersionModel resolve_model(std::string_view name_or_path) {
  auto names = builtin_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return builtin_model(name_or_path);
  std::string path(name_or_path);
  if (std::filesystem::exists(path)) return load_dispersion_file(path);
  throw Error(ErrorCode::InvalidArgument,
              "'" + path + "' is neither a builtin model nor a readable file (builtins: zero, nn1, nn2, nn3, nn4, "
                           "nn2d_sqrt, nn2d_squared, ce_morse_d3)");
}

StationaryPointSearch find_stationary_points(const TrigPoly& p, const StationaryPointOptions& options) {
  StationaryPointSearch out;
  const int d = p.dim();
  const int g = options.grid_per_axis > 0 ? options.grid_per_axis : default_grid(d);
  out.grid_per_axis = g;
  if (p.is_constant()) {
    out.isolated = false;
    return out;
  }
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= std::size_t(g);
  std::vector<double> f(total);
  Vec grad;
  for_each_grid_point(d, g, 0.0, [&](std::size_t idx, const Vec& x) {
    p.value_and_gradient(x, grad);
    f[idx] = grad.squaredNorm();
  });

  // neighbour offsets in {-1,0,1}^d minus the origin
  std::vector<std::array<int, kMaxDim>> offs;
  int n3 = 1;
  for (int i = 0; i < d; ++i) n3 *= 3;
  for (int k = 0; k < n3; ++k) {
    std::array<int, kMaxDim> o{};
    int r = k;
    bool zero = true;
    for (int i = 0; i < d; ++i) {
      o[i] = r % 3 - 1;
      r /= 3;
      zero = zero && o[i] == 0;
    }
    if (!zero) offs.push_back(o);
  }

  std::vector<std::size_t> seeds;
  const std::size_t seed_cap = 16 * options.max_points;
  std::array<int, kMaxDim> coord{};
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (int i = 0; i < d; ++i) {
      coord[i] = int(r % g);
      r /= g;
    }
    bool is_min = true;
    for (const auto& o : offs) {
      std::size_t nb = 0, stride = 1;
      for (int i = 0; i < d; ++i) {
        int c = (coord[i] + o[i] + g) % g;
        nb += std::size_t(c) * stride;
        stride *= g;
      }
      if (f[nb] < f[idx]) {
        is_min = false;
        break;
      }
    }
    if (is_min) {
      seeds.push_back(idx);
      if (seeds.size() > seed_cap) {
        out.isolated = false;
        break;
      }
    }
  }

  for (std::size_t idx : seeds) {
    Vec x(d);
    std::size_t r = idx;
    for (int i = 0; i < d; ++i) {
      x[i] = double(r % g) / g - 0.5;
      r /= g;
    }
    Vec gx;
    p.value_and_gradient(x, gx);
    double gn = gx.norm();
    for (int it = 0; it < options.max_iterations && gn > options.gradient_tolerance; ++it) {
      Mat h = p.hessian(x);
      Vec step = h.completeOrthogonalDecomposition().solve(gx);
      double t = 1.0;
      bool moved = false;
      for (int k = 0; k < 40; ++k, t *= 0.5) {
        Vec xn = x - t * step;
        Vec gxn;
        p.value_and_gradient(xn, gxn);
        double gnn = gxn.norm();
        if (gnn < gn) {
          x = xn;
          gx = gxn;
          gn = gnn;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (!(gn <= options.accept_tolerance)) {
      ++out.diverged;
      continue;
    }
    x = torus_wrap(x);
    bool dup = false;
    for (const auto& q : out.points) {
      if (torus_distance(q, x) < options.dedup_radius) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    out.points.push_back(x);
    if (out.points.size() > options.max_points) {
      out.isolated = false;
      break;
    }
  }
  std::sort(out.points.begin(), out.points.end(), [](const Vec& a, const Vec& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  return out;
}

}  // namespace rlab
