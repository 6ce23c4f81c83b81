#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "resolvent_lab/calculus.hpp"
#include "resolvent_lab/classify.hpp"
#include "resolvent_lab/error.hpp"
#include "resolvent_lab/oracle.hpp"
#include "resolvent_lab/suites.hpp"

using namespace rlab;
using rlab::test::vec;

namespace {

long double binomial(int n, int k) {
  long double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("composition counts") {
  for (int n = 1; n <= 10; ++n)
    for (int k = 1; k <= n; ++k) {
      auto c = enumerate_compositions(n, k);
      CHECK(double(c.size()) == double(binomial(n - 1, k - 1)));
      for (const auto& comp : c) {
        int sum = 0;
        for (int p : comp.parts) sum += p;
        CHECK(sum == n);
        CHECK(comp.weight > 0.0);
        CHECK(comp.weight <= 1.0);
      }
    }
}

TEST_CASE("composition goldens") {
  auto c = enumerate_compositions(4, 2);
  REQUIRE(c.size() == 3);
  CHECK(c[0].parts == std::vector<int>{1, 3});
  CHECK(c[1].parts == std::vector<int>{2, 2});
  CHECK(c[2].parts == std::vector<int>{3, 1});
  auto c2 = enumerate_compositions(2, 2);
  REQUIRE(c2.size() == 1);
  CHECK(c2[0].weight == doctest::Approx(0.5));
  std::vector<int> m{1, 2};
  CHECK(composition_weight(m) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("composite derivative of x1 x2 along (t, t^2)") {
  // f o Gamma = t^3
  MixedDerivative f = [](std::span<const Vec> dirs) {
    if (dirs.size() == 1) return 0.0;  // gradient at the origin vanishes
    if (dirs.size() == 2) return dirs[0][0] * dirs[1][1] + dirs[0][1] * dirs[1][0];
    return 0.0;
  };
  std::vector<Vec> curve{vec({1, 0}), vec({0, 2}), vec({0, 0})};
  CHECK(composite_derivative(f, curve, 3) == doctest::Approx(1.0));
}

TEST_CASE("composite derivative suite") {
  auto r = suite_composite_derivative(23, 60);
  CHECK(r.violations == 0);
  CHECK(r.max_error < 1e-6);
}

TEST_CASE("rotation to e1") {
  for (auto u : {vec({1, 0, 0}), vec({-1, 0, 0}), vec({0.6, 0.8, 0}), vec({0.1, -0.7, 0.70710678}), vec({0.5, 0.5, 0.5, 0.5})}) {
    u /= u.norm();
    Mat O = rotation_to_e1(u);
    Mat I = Mat::Identity(u.size(), u.size());
    CHECK((O * O.transpose() - I).norm() < 1e-12);
    CHECK(O.determinant() == doctest::Approx(1.0));
    Vec e = O * u;
    CHECK(e[0] == doctest::Approx(1.0));
    CHECK(e.tail(u.size() - 1).norm() < 1e-12);
  }
}

TEST_CASE("level chart basics") {
  auto m = nn_laplacian(3);
  Vec x0 = vec({0.25, 0.1, -0.05});
  double lam = max_chart_radius(m, x0);
  CHECK(lam > 0);
  CHECK(lam <= m.gradient(x0).norm() / (8 * m.smooth_norms(2).cumulative(2)) * (1 + 1e-12));
  auto chart = build_level_chart(m, x0, lam);
  CHECK((chart.A() * chart.A().transpose() - Mat::Identity(3, 3)).norm() < 1e-12);
  CHECK(chart.phi(x0).norm() < 1e-15);
  Vec y = vec({0.3 * lam, -0.5 * lam, 0.9 * lam});
  Vec x = chart.psi(y);
  CHECK((chart.phi(x) - y).norm() < 1e-10);
  // first chart coordinate is the normalised level
  CHECK(y[0] == doctest::Approx((m.eval(x) - chart.omega0()) / chart.grad_norm()));
  CHECK_THROWS_AS(build_level_chart(m, x0, 10 * lam), Error);
}

TEST_CASE("chart and level curve suites") {
  for (auto m : {nn_laplacian(3), ce_morse_d3()}) {
    CHECK(suite_chart(m, 3, 4, 200).violations == 0);
    CHECK(suite_level_curve(m, 3, 6).violations == 0);
    CHECK(suite_curvature_drift(m, 3, 30).violations == 0);
  }
}

TEST_CASE("level curve stays on the level set") {
  auto m = ce_morse_d3();
  Vec x0 = vec({0.1, 0.2, 0.3});
  double lam = max_chart_radius(m, x0);
  auto chart = build_level_chart(m, x0, lam);
  Vec v = vec({0, 1, 0});
  v -= v.dot(chart.u0()) * chart.u0();
  v /= v.norm();
  auto c = trace_level_curve(chart, Vec::Zero(3), v, linspace(-1.5 * lam, 1.5 * lam, 21));
  REQUIRE(c.t.size() == 21);
  for (double w : c.omega) CHECK(std::abs(w - c.omega[10]) < 1e-8);
}

TEST_CASE("linspace") {
  auto t = linspace(-1, 1, 5);
  CHECK(t == std::vector<double>{-1, -0.5, 0, 0.5, 1});
  CHECK_THROWS_AS(linspace(0, 1, 1), Error);
}

TEST_CASE("gtilde golden on nn3") {
  // the level curve through (1/4, 0, 0) with v = e2 is
  // x1 = acos(1 - cos 2 pi t) / (2 pi), so G(t) = 1/4 - x1(t) and g~_n = G^(n)(0) / n!
  auto s = gtilde_sequence(nn_laplacian(3), vec({0.25, 0, 0}), vec({0, 1, 0}), 4);
  CHECK(s.at(1) == 0.0);
  CHECK(s.at(2) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(std::abs(s.at(3)) < 1e-10);
  const long double tau = 2 * 3.14159265358979323846264338327950288L;
  auto G = [&](long double t) { return 0.25L - std::acos(1 - std::cos(tau * t)) / tau; };
  long double g4 = oracle::fd_derivative_wide(G, 0.0L, 4, 0.02L) / 24;
  CHECK(s.at(4) == doctest::Approx(double(g4)).epsilon(1e-6));
  CHECK(s.at(4) == doctest::Approx(-10.3354).epsilon(1e-5));
}

TEST_CASE("gtilde suite") {
  for (auto m : {nn_laplacian(3), ce_morse_d3()}) {
    auto r = suite_gtilde(m, 8, 6);
    CHECK(r.violations == 0);
    CHECK(r.max_error < 1e-4);
  }
}

TEST_CASE("select_nu order") {
  CHECK(select_nu(2, 0, 0, 1, 1) == 1.0);
  CHECK(select_nu(2, -1, 0, 1, 1) == 2.0);
  CHECK(select_nu(3, -0.5, -3.5, 0.5, 0.2) == 0.0);
  CHECK_THROWS_AS(select_nu(2, 0, 0, 0.1, 1), Error);
  CHECK(suite_select_nu(4, 20000).violations == 0);
}

TEST_CASE("level slope") {
  auto m = nn_laplacian(3);
  Vec x = vec({0.25, 0.1, 0});
  Vec g = m.gradient(x);
  CHECK(level_slope(m, x, vec({0, 1, 0}), vec({1, 0, 0})) == doctest::Approx(g[1] / g[0]));
}
