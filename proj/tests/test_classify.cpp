#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "resolvent_lab/classify.hpp"
#include "resolvent_lab/error.hpp"

using namespace rlab;
using rlab::test::vec;

namespace {

bool has_cert(const std::vector<HyperplaneCertificate>& cs, const Vec& u, double r0, double value) {
  for (const auto& c : cs)
    if ((c.u - u).norm() < 1e-9 && std::abs(c.r0 - r0) < 1e-9 && std::abs(c.value - value) < 1e-8) return true;
  return false;
}

}  // namespace

TEST_CASE("hyperplane certificates") {
  auto ce = find_hyperplanes(ce_morse_d3());
  CHECK(has_cert(ce, vec({1, 0, 0}), 0.25, 5.0));
  CHECK(has_cert(ce, vec({1, 0, 0}), -0.25, 5.0));
  const double s = std::sqrt(0.5);
  auto sq = find_hyperplanes(nn2d_squared());
  CHECK(has_cert(sq, vec({s, s}), 0.5 * s, 2.0));
  CHECK(find_hyperplanes(nn_laplacian(3)).empty());
  for (const auto& c : ce) CHECK(hyperplane_deviation(ce_morse_d3(), c, 10000, 99) < 1e-8);
  for (const auto& c : sq) CHECK(hyperplane_deviation(nn2d_squared(), c, 10000, 99) < 1e-8);
}

TEST_CASE("critical points of ce_morse_d3") {
  auto t = find_critical_points(ce_morse_d3());
  REQUIRE(t.points.size() == 8);
  CHECK(t.is_morse);
  double min_det = 1e300;
  for (const auto& p : t.points) {
    for (int i = 0; i < 3; ++i) {
      double x = std::abs(p.location[i]);
      CHECK((x < 1e-9 || std::abs(x - 0.5) < 1e-9));
    }
    CHECK(p.gradient_residual < 1e-9);
    min_det = std::min(min_det, std::abs(p.hessian_det));
  }
  CHECK(min_det >= kTwoPi * kTwoPi);
}

TEST_CASE("critical points of nn3") {
  auto t = find_critical_points(nn_laplacian(3));
  REQUIRE(t.points.size() == 8);
  CHECK(t.is_morse);
  std::vector<int> byval(4, 0);
  for (const auto& p : t.points) byval[int(std::lround(p.value / 2))]++;
  CHECK(byval == std::vector<int>{1, 3, 3, 1});
}

TEST_CASE("critical point count is stable under refinement") {
  for (auto m : {nn_laplacian(3), ce_morse_d3()}) {
    auto a = find_critical_points(m, 64), b = find_critical_points(m, 96);
    CHECK(a.points.size() == b.points.size());
  }
}

TEST_CASE("curvature probe") {
  auto m = ce_morse_d3();
  CHECK(probe_point(m, vec({0.25, 0.1, 0.2}), vec({1, 0, 0}), 4) < 1e-10);
  ProbeOptions po;
  po.n_max = 3;
  po.workers = 1;
  auto p = curvature_probe(nn_laplacian(3), po);
  CHECK(p.eps0_hat > 0);
  // recorded from the first run on the default grid
  CHECK(p.eps0_hat == doctest::Approx(11.617237678012657).epsilon(1e-9));
}

TEST_CASE("suppression constants") {
  auto c2 = suppression_constants(nn_laplacian(3), 2, 0.5);
  CHECK(c2.gamma_num == 1);
  CHECK(c2.gamma_den == 18);
  auto c3 = suppression_constants(nn_laplacian(3), 3, 0.5);
  CHECK(c3.gamma_den == 36);
  for (const auto& c : {c2, c3}) {
    CHECK(c.mu > 0);
    CHECK(c.mu <= 1.0 / 33);
    CHECK(c.gamma > 0);
    CHECK(c.gamma <= 1.0 / 18);
    for (double s : {1e-1, 1e-3, 1e-6}) CHECK(c.lambda(s) <= 0.125);
  }
}

TEST_CASE("f_omega slope against the critical-point sum") {
  // near a nondegenerate critical point f grows like (4 pi / |det H|) ln(1/s)
  McConfig c;
  c.samples = 200000;
  c.workers = 1;
  c.record_time = false;
  auto fit = fit_f_omega(nn_laplacian(3), default_f_omega_grid(), c);
  double expect = 8 * 4 * kPi / std::pow(4 * kPi * kPi, 3);
  CHECK(fit.r2 >= kFOmegaFitR2);
  CHECK(fit.pass);
  CHECK(std::abs(fit.slope) == doctest::Approx(expect).epsilon(0.15));
}

TEST_CASE("verdicts") {
  ClassifyOptions o;
  o.fit_f_omega = false;
  o.probe.workers = 1;
  auto ce = classify(ce_morse_d3(), o);
  CHECK(ce.verdict == Verdict::DoesNotSuppress);
  CHECK(ce.critical_points.is_morse);
  CHECK(classify(nn2d_sqrt(), o).verdict == Verdict::DoesNotSuppress);
  auto nn3 = classify(nn_laplacian(3), o);
  CHECK(nn3.verdict == Verdict::Suppresses);
  CHECK(nn3.certificates.empty());
  CHECK(nn3.critical_points.is_morse);
}
