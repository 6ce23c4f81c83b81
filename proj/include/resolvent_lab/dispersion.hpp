#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "resolvent_lab/linalg.hpp"

namespace rlab {

/// Japanese bracket sqrt(1 + x^2).
double sabs(double x);

/// Canonical representative of [x] in [-1/2, 1/2)^d.
Vec torus_wrap(const Vec& x);

/// min over integer shifts n of |a - b + n|.
double torus_distance(const Vec& a, const Vec& b);

/// Highest derivative order supported by the exact evaluators.
inline constexpr int kMaxDerivativeOrder = 12;

using FrequencyVector = IVec;

struct TrigTerm {
  FrequencyVector m;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

/// Real trigonometric polynomial
///   c + sum_m [a_m cos(2 pi m.x) + b_m sin(2 pi m.x)].
///
/// Terms are canonicalised on construction: the zero frequency folds into
/// the constant, m and -m are merged (first non-zero entry of m positive),
/// and duplicate frequencies are summed. Terms are kept in lexicographic
/// order of m so iteration order is deterministic.
class TrigPoly {
 public:
  TrigPoly() : TrigPoly(1, 0.0, {}) {}
  TrigPoly(int dim, double constant, std::vector<TrigTerm> terms);

  static TrigPoly zero(int dim) { return TrigPoly(dim, 0.0, {}); }

  int dim() const { return dim_; }
  double constant() const { return constant_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  double value_and_gradient(const Vec& x, Vec& grad) const;
  Mat hessian(const Vec& x) const;

  /// (v . grad)^order applied at x; order 0 is the value.
  double directional(const Vec& x, const Vec& v, int order) const;

  /// out[n] = (v . grad)^n at x for n = 0 .. out.size() - 1.
  void directional_orders(const Vec& x, const Vec& v, std::span<double> out) const;

  /// prod_j (dirs[j] . grad) applied at x.
  double mixed(const Vec& x, std::span<const Vec> dirs) const;

  /// sum_m |c_m| (2 pi |m|)^order, with |c| added at order 0. Upper bound on
  /// the sup of the order-th derivative operator norm.
  double derivative_bound(int order) const;

  TrigPoly scaled(double factor) const;

 private:
  int dim_;
  double constant_;
  std::vector<TrigTerm> terms_;
};

enum class ModelKind { TrigPoly, SqrtOfTrigPoly };

std::string_view to_string(ModelKind kind);

/// Upper estimates of the derivative norms ||D^n omega||_inf, n = 0..order.
struct SmoothNorms {
  int order = 0;
  std::vector<double> values;  // values[n] bounds ||D^n omega||_inf

  double at(int n) const;
  /// sup over 0 <= k <= n, the cumulative norm used by the chart and
  /// suppression constants.
  double cumulative(int n) const;
};

/// A Z^d-periodic dispersion relation.
class DispersionModel {
 public:
  DispersionModel(ModelKind kind, TrigPoly inner, std::string name);

  ModelKind kind() const { return kind_; }
  const TrigPoly& inner() const { return inner_; }
  const std::string& name() const { return name_; }
  int dim() const { return inner_.dim(); }
  bool is_trig() const { return kind_ == ModelKind::TrigPoly; }

  double eval(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  double value_and_gradient(const Vec& x, Vec& grad) const;
  Mat hessian(const Vec& x) const;
  double directional_derivative(const Vec& x, const Vec& v, int n) const;
  double mixed_derivative(const Vec& x, std::span<const Vec> dirs) const;

  SmoothNorms smooth_norms(int order) const;

  /// Zeros of the inner polynomial (SqrtOfTrigPoly only).
  const std::vector<Vec>& cusp_points() const { return cusps_; }
  bool in_cusp_exclusion(const Vec& x) const;

  /// Min and max of omega over the torus (critical values plus a grid scan).
  std::pair<double, double> value_range() const;

 private:
  void check_point(const Vec& x) const;

  ModelKind kind_;
  TrigPoly inner_;
  std::string name_;
  std::vector<Vec> cusps_;
};

inline constexpr double kCuspValueFloor = 1e-12;
inline constexpr double kCuspExclusionRadius = 1e-6;

// Builtin models.
DispersionModel zero_model(int dim = 1);
DispersionModel nn_laplacian(int dim);
DispersionModel ce_morse_d3();
DispersionModel nn2d_sqrt();
DispersionModel nn2d_squared();

std::vector<std::string> builtin_names();
DispersionModel builtin_model(std::string_view name);

/// Text format, one directive per line:
///   dim <d>
///   sqrt
///   name <identifier>
///   const <c>
///   cos <k1> ... <kd> <coeff>
///   sin <k1> ... <kd> <coeff>
/// '#' starts a comment. See docs/dispersion_dsl.md.
DispersionModel parse_dispersion_dsl(std::string_view text, std::string default_name = "custom");
DispersionModel load_dispersion_file(const std::string& path);
std::string to_dsl(const DispersionModel& model);

/// Builtin name or path to a DSL file.
DispersionModel resolve_model(std::string_view name_or_path);

struct StationaryPointOptions {
  int grid_per_axis = 0;  // 0 picks a default per dimension
  double gradient_tolerance = 1e-12;
  double accept_tolerance = 1e-9;
  int max_iterations = 50;
  double dedup_radius = 1e-6;
  std::size_t max_points = 4096;
};

struct StationaryPointSearch {
  std::vector<Vec> points;
  int diverged = 0;
  bool isolated = true;  // false when the critical set is not a finite set
  int grid_per_axis = 0;
};

/// Zeros of grad p, from Newton polishing of discrete local minima of
/// |grad p|^2 on a periodic grid.
StationaryPointSearch find_stationary_points(const TrigPoly& p, const StationaryPointOptions& options = {});

}  // namespace rlab
