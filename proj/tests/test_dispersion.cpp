#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "resolvent_lab/dispersion.hpp"
#include "resolvent_lab/error.hpp"
#include "resolvent_lab/oracle.hpp"
#include "resolvent_lab/rng.hpp"
#include "resolvent_lab/suites.hpp"

using namespace rlab;
using rlab::test::ivec;
using rlab::test::vec;

TEST_CASE("builtin values") {
  auto ce = ce_morse_d3();
  CHECK(ce.eval(vec({0.25, 0.3, -0.2})) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(ce.eval(vec({-0.25, -0.1, 0.45})) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(ce.eval(vec({0.5, 0, 0})) == doctest::Approx(10.0).epsilon(1e-14));
  auto nn3 = nn_laplacian(3);
  CHECK(std::abs(nn3.eval(vec({0, 0, 0}))) < 1e-15);
  CHECK(nn3.eval(vec({0.5, 0.5, 0.5})) == doctest::Approx(6.0));
  CHECK(zero_model(2).eval(vec({0.1, 0.2})) == 0.0);
}

TEST_CASE("builtin gradients") {
  Vec g = nn_laplacian(3).gradient(vec({0.25, 0, 0}));
  CHECK(g[0] == doctest::Approx(kTwoPi).epsilon(1e-15));
  CHECK(std::abs(g[1]) < 1e-15);
  CHECK(std::abs(g[2]) < 1e-15);
  CHECK(ce_morse_d3().gradient(vec({0, 0, 0})).norm() < 1e-14);
}

TEST_CASE("hessian goldens") {
  Mat h = ce_morse_d3().hessian(vec({0, 0, 0})) / (kTwoPi * kTwoPi);
  CHECK(h(0, 0) == doctest::Approx(5.0));
  CHECK(h(1, 1) == doctest::Approx(1.0));
  CHECK(h(2, 2) == doctest::Approx(1.0));
  CHECK(std::abs(h(0, 1)) < 1e-14);
  Mat h3 = nn_laplacian(3).hessian(vec({0, 0, 0}));
  for (int i = 0; i < 3; ++i) CHECK(h3(i, i) == doctest::Approx(4 * kPi * kPi));
}

TEST_CASE("hessian matches finite differences of the gradient") {
  auto m = ce_morse_d3();
  Vec x = vec({0.13, -0.31, 0.07});
  Mat h = m.hessian(x);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      auto f = [&](double t) {
        Vec y = x;
        y[j] += t;
        return m.gradient(y)[i];
      };
      CHECK(oracle::fd_derivative(f, 0.0, 1, 1e-2) == doctest::Approx(h(i, j)).epsilon(1e-7));
    }
}

TEST_CASE("directional derivatives") {
  auto nn3 = nn_laplacian(3);
  // second derivative of 1 - cos(2 pi x2) at 0
  CHECK(nn3.directional_derivative(vec({0.25, 0, 0}), vec({0, 1, 0}), 2) == doctest::Approx(4 * kPi * kPi));
  auto nn1 = nn_laplacian(1);
  CHECK(std::abs(nn1.directional_derivative(vec({0}), vec({1}), 3)) < 1e-12);

  CounterRng rng(11, 0, 0);
  for (int i = 0; i < 50; ++i) {
    Vec x = vec({rng.uniform(), rng.uniform(), rng.uniform()});
    Vec v = vec({rng.normal(), rng.normal(), rng.normal()});
    v /= v.norm();
    double d1 = ce_morse_d3().directional_derivative(x, v, 1);
    double ref = v.dot(ce_morse_d3().gradient(x));
    CHECK(std::abs(d1 - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("directional derivatives of order n match finite differences") {
  auto m = ce_morse_d3();
  Vec x = vec({0.21, 0.04, -0.33});
  Vec v = vec({0.6, -0.8, 0.0});
  for (int n = 2; n <= 4; ++n) {
    auto f = [&](long double t) {
      Vec y = x + double(t) * v;
      return (long double)m.eval(y);
    };
    long double ref = oracle::fd_derivative_wide(f, 0.0L, n, 0.05L);
    double got = m.directional_derivative(x, v, n);
    CHECK(std::abs(got - double(ref)) <= 1e-5 * std::max(1.0, std::abs(got)));
  }
}

TEST_CASE("periodicity") {
  CounterRng rng(3, 0, 0);
  auto m = ce_morse_d3();
  for (int i = 0; i < 10000; ++i) {
    Vec x = vec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    Vec n = vec({double(int(rng.uniform(-5, 5))), double(int(rng.uniform(-5, 5))), double(int(rng.uniform(-5, 5)))});
    double a = m.eval(x), b = m.eval(x + n);
    REQUIRE(std::abs(a - b) <= 1e-12 * (1 + std::abs(a)));
  }
}

TEST_CASE("gradient matches Richardson finite differences") {
  CounterRng rng(5, 0, 0);
  auto m = ce_morse_d3();
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    Vec x = vec({rng.uniform(), rng.uniform(), rng.uniform()});
    Vec g = m.gradient(x);
    for (int j = 0; j < 3; ++j) {
      auto f = [&](double t) {
        Vec y = x;
        y[j] += t;
        return m.eval(y);
      };
      double fd = oracle::fd_derivative(f, 0.0, 1, 1e-2);
      if (std::abs(fd - g[j]) > 1e-7 * std::max(1.0, g.norm())) ++bad;
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("sabs and torus helpers") {
  CHECK(sabs(0.0) == 1.0);
  CHECK(sabs(3.0) == doctest::Approx(std::sqrt(10.0)));
  CHECK(torus_distance(vec({0.49}), vec({-0.49})) == doctest::Approx(0.02));
  Vec w = torus_wrap(vec({1.3, -0.7, 2.5}));
  for (int i = 0; i < 3; ++i) {
    CHECK(w[i] >= -0.5);
    CHECK(w[i] < 0.5);
  }
  CHECK(w[0] == doctest::Approx(0.3));
  CHECK(w[1] == doctest::Approx(0.3));
  CounterRng rng(9, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    Vec a = vec({rng.uniform(-3, 3), rng.uniform(-3, 3)});
    Vec b = vec({rng.uniform(-3, 3), rng.uniform(-3, 3)});
    double d = torus_distance(a, b);
    CHECK(d == doctest::Approx(torus_distance(b, a)));
    CHECK(d <= std::sqrt(2.0) / 2 + 1e-15);
  }
}

TEST_CASE("trig poly canonical form") {
  // m and -m merge, zero frequency folds into the constant, duplicates sum
  TrigPoly p(2, 1.0,
             {{ivec({1, 0}), 1.0, 0.5}, {ivec({-1, 0}), 2.0, 0.5}, {ivec({0, 0}), 0.25, 0.0}, {ivec({0, 1}), -1.0, 0.0}});
  CHECK(p.constant() == doctest::Approx(1.25));
  REQUIRE(p.terms().size() == 2);
  for (std::size_t i = 0; i < p.terms().size(); ++i)
    for (std::size_t j = i + 1; j < p.terms().size(); ++j) CHECK(p.terms()[i].m != p.terms()[j].m);
  Vec x = vec({0.17, 0.4});
  double ref = 1.0 + 0.25 + 1.0 * std::cos(kTwoPi * 0.17) + 0.5 * std::sin(kTwoPi * 0.17) + 2.0 * std::cos(kTwoPi * 0.17) -
               0.5 * std::sin(kTwoPi * 0.17) - std::cos(kTwoPi * 0.4);
  CHECK(p.value(x) == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("smooth norms bound grid suprema") {
  for (auto m : {nn_laplacian(2), nn_laplacian(3), ce_morse_d3()}) {
    auto norms = m.smooth_norms(3);
    int d = m.dim();
    int g = d == 3 ? 24 : 64;
    double sup[4] = {0, 0, 0, 0};
    CounterRng rng(1, 0, 0);
    std::vector<int> idx(d, 0);
    for (;;) {
      Vec x(d);
      for (int i = 0; i < d; ++i) x[i] = double(idx[i]) / g;
      sup[0] = std::max(sup[0], std::abs(m.eval(x)));
      for (int n = 1; n <= 3; ++n)
        for (int k = 0; k < 8; ++k) {
          Vec v(d);
          for (int i = 0; i < d; ++i) v[i] = rng.normal();
          v /= v.norm();
          sup[n] = std::max(sup[n], std::abs(m.directional_derivative(x, v, n)));
        }
      int i = 0;
      while (i < d && ++idx[i] == g) idx[i++] = 0;
      if (i == d) break;
    }
    for (int n = 0; n <= 3; ++n) CHECK(norms.at(n) >= sup[n]);
  }
}

TEST_CASE("sqrt model cusps") {
  auto m = nn2d_sqrt();
  CHECK(m.kind() == ModelKind::SqrtOfTrigPoly);
  CHECK_THROWS_AS(m.gradient(vec({0, 0})), Error);
  try {
    m.gradient(vec({0, 0}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CuspSingularity);
  }
  CHECK(!m.cusp_points().empty());
  CHECK(m.eval(vec({0.25, 0.25})) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("dsl round trip and errors") {
  for (const auto& name : builtin_names()) {
    auto m = builtin_model(name);
    auto back = parse_dispersion_dsl(to_dsl(m));
    CHECK(back.name() == m.name());
    CHECK(back.kind() == m.kind());
    Vec x = Vec::Constant(m.dim(), 0.1234);
    CHECK(back.eval(x) == doctest::Approx(m.eval(x)).epsilon(1e-15));
  }
  auto p = parse_dispersion_dsl("# comment\ndim 2\nconst 1\ncos 1 1 0.5\nsin 0 1 -2\n");
  CHECK(p.dim() == 2);
  CHECK(p.eval(vec({0, 0.25})) == doctest::Approx(1 + 0.5 * std::cos(kTwoPi * 0.25) - 2));
  CHECK_THROWS_AS(parse_dispersion_dsl("dim 2\ncos 1 0.5\n"), Error);
  CHECK_THROWS_AS(parse_dispersion_dsl("dim 0\n"), Error);
  CHECK_THROWS_AS(parse_dispersion_dsl("dim 2\nfoo 1\n"), Error);
  CHECK_THROWS_AS(builtin_model("nope"), Error);
}

TEST_CASE("stationary points of nn3") {
  auto s = find_stationary_points(nn_laplacian(3).inner());
  REQUIRE(s.points.size() == 8);
  std::vector<int> counts(4, 0);
  for (const auto& p : s.points) {
    double v = nn_laplacian(3).eval(p);
    CHECK(nn_laplacian(3).gradient(p).norm() < 1e-9);
    counts[int(std::lround(v / 2))]++;
  }
  CHECK(counts == std::vector<int>{1, 3, 3, 1});
}

TEST_CASE("value range") {
  auto [lo, hi] = nn_laplacian(3).value_range();
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(6.0));
}

TEST_CASE("dispersion property suite") {
  auto r = suite_dispersion_properties(17, 300);
  CHECK(r.violations == 0);
  CHECK(r.draws > 0);
}
