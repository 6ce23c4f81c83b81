#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "resolvent_lab/error.hpp"
#include "resolvent_lab/oracle.hpp"
#include "resolvent_lab/quadrature.hpp"
#include "resolvent_lab/rng.hpp"
#include "resolvent_lab/suites.hpp"

using namespace rlab;
using rlab::test::vec;

namespace {

McConfig cfg(std::uint64_t n, std::uint64_t seed = 1, int workers = 1) {
  McConfig c;
  c.samples = n;
  c.seed = seed;
  c.workers = workers;
  c.record_time = false;
  return c;
}

ResolventQuery query(double a1, double a2, double a3, double beta, Vec k0) {
  ResolventQuery q;
  q.alpha = {a1, a2, a3};
  q.beta = beta;
  q.k0 = std::move(k0);
  return q;
}

bool same(const QuadratureEstimate& a, const QuadratureEstimate& b) {
  return a.value == b.value && a.standard_error == b.standard_error && a.median_of_means == b.median_of_means &&
         a.samples == b.samples;
}

}  // namespace

TEST_CASE("philox known answers") {
  auto a = philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(a == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  auto b = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(b == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  auto c = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(c == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter rng is seekable") {
  CounterRng a(42, 3, 7), b(42, 3, 7), c(42, 3, 8);
  for (int i = 0; i < 10; ++i) {
    double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
  CHECK(a.uniform() != c.uniform());
}

TEST_CASE("resolvent_1d goldens") {
  Resolvent1dOptions o;
  auto zero = resolvent_1d([](double) { return 0.0; }, 0.0, 0.5, 0.0, 1.0, o);
  CHECK(zero.value == doctest::Approx(2.0).epsilon(1e-9));
  auto lin = resolvent_1d([](double x) { return x; }, 0.0, 1.0, -1.0, 1.0, o);
  CHECK(std::abs(lin.value - 2 * std::asinh(1.0)) < 1e-6);
  CHECK(std::abs(lin.value - oracle::linear_resolvent_closed_form(-1, 1, 0, 1)) < 1e-6);
}

TEST_CASE("whole-line quadratic") {
  // int dx / sqrt(x^4 + beta^2) = Gamma(1/4)^2 / (2 sqrt(pi)) beta^(-1/2)
  const double k = std::pow(std::tgamma(0.25), 2) / (2 * std::sqrt(kPi));
  std::vector<double> c{0, 0, 1};
  for (double beta : {1.0, 0.1, 0.01}) {
    auto r = resolvent_1d_polynomial(c, 0.0, beta);
    CHECK(r.value == doctest::Approx(k / std::sqrt(beta)).epsilon(2e-6));
    CHECK(r.value <= 8.0 / std::sqrt(beta));
  }
}

TEST_CASE("gauss legendre is exact on polynomials") {
  std::vector<double> x, w;
  oracle::gauss_legendre(6, -1, 2, x, w);
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 11);
  CHECK(s == doctest::Approx((std::pow(2.0, 12) - 1) / 12).epsilon(1e-13));
}

TEST_CASE("one-dimensional bound suites") {
  CHECK(suite_poly_whole_line(1, 40).violations == 0);
  CHECK(suite_linear_window(1, 40).violations == 0);
  CHECK(suite_monotone_interval(1, 40).violations == 0);
  CHECK(suite_higher_order_interval(1, 40).violations == 0);
}

TEST_CASE("zero model closed forms") {
  auto z = zero_model(1);
  auto r = resolvent_torus(z, 0.3, 0.4, 0.0, 0.0, cfg(20000));
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
  for (int d = 1; d <= 3; ++d) {
    auto m = zero_model(d);
    auto one = crossing_integral(m, query(0, 0, 0, 1.0, Vec::Zero(d)), cfg(20000));
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-13));
    auto eight = crossing_integral(m, query(0, 0, 0, 0.5, Vec::Zero(d)), cfg(20000));
    CHECK(eight.value == doctest::Approx(8.0).epsilon(1e-13));
  }
  // beta^-3 scaling at fixed alpha = 0
  auto m = zero_model(2);
  for (double beta : {0.9, 0.3, 0.07}) {
    auto e = crossing_integral(m, query(0, 0, 0, beta, Vec::Zero(2)), cfg(4000));
    CHECK(e.value == doctest::Approx(std::pow(beta, -3)).epsilon(1e-13));
  }
  auto e = crossing_integral(m, query(0.5, 0, 0.3, 0.5, Vec::Zero(2)), cfg(4000));
  CHECK(e.value == doctest::Approx(1 / (std::sqrt(0.5) * 0.5 * std::sqrt(0.34))).epsilon(1e-13));
}

TEST_CASE("d = 1 resolvent against the trapezoid oracle") {
  auto m = nn_laplacian(1);
  auto w = [](double k) { return 1 - std::cos(kTwoPi * k); };
  double ref = oracle::trapezoid_resolvent_1d(w, 1.0, 0.1, 1000000);
  auto e = resolvent_torus(m, 1.0, 0.1, 0.0, 0.0, cfg(200000, 5));
  CHECK(std::abs(e.value - ref) <= 3 * e.standard_error);
}

TEST_CASE("d = 1 crossing integral against the tensor trapezoid oracle") {
  auto m = nn_laplacian(1);
  auto w = [](double k) { return 1 - std::cos(kTwoPi * k); };
  double ref = oracle::trapezoid_crossing_1d(w, 1, 1, 1, 0, 0.2, 2048);
  int ok = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    auto e = crossing_integral(m, query(1, 1, 1, 0.2, vec({0})), cfg(20000, s));
    ok += std::abs(e.value - ref) <= 3 * e.standard_error;
  }
  CHECK(ok >= 9);
}

TEST_CASE("f_omega in d = 1") {
  auto m = nn_laplacian(1);
  auto wp = [](double k) { return kTwoPi * std::sin(kTwoPi * k); };
  double ref = oracle::trapezoid_f_omega_1d(wp, 0.5, 1000000);
  auto e = f_omega(m, 0.5, cfg(200000, 3));
  CHECK(std::abs(e.value - ref) <= 3 * e.standard_error + 1e-12);
  CHECK(f_omega(m, 7.0, cfg(10000)).value == 0.0);
}

TEST_CASE("importance mixture is unbiased") {
  auto m = nn_laplacian(2);
  CounterRng rng(77, 0, 0);
  int ok = 0;
  for (int i = 0; i < 20; ++i) {
    auto q = query(rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0.2, 0.6),
                   vec({rng.uniform(), rng.uniform()}));
    McConfig a = cfg(20000, 100 + i), b = a;
    a.importance_weight = 0.0;
    b.importance_weight = 0.5;
    auto ea = crossing_integral(m, q, a), eb = crossing_integral(m, q, b);
    ok += std::abs(ea.value - eb.value) <= 3 * std::hypot(ea.standard_error, eb.standard_error);
  }
  CHECK(ok == 20);
}

TEST_CASE("restricted integral does not exceed the full one") {
  auto m = ce_morse_d3();
  auto q = query(5, 5, 5, 0.3, vec({0.25, 0, 0}));
  auto full = crossing_integral(m, q, cfg(100000, 2));
  auto slab = crossing_integral_slab(m, q, test::ivec({1, 0, 0}), 0.25, 0.3, cfg(100000, 3));
  CHECK(slab.value <= full.value + 3 * std::hypot(full.standard_error, slab.standard_error));
}

TEST_CASE("determinism across worker counts") {
  auto m = nn_laplacian(3);
  auto q = query(3, 3, 3, 0.2, vec({0.1, 0.2, 0.3}));
  auto a = crossing_integral(m, q, cfg(30000, 9, 1));
  auto b = crossing_integral(m, q, cfg(30000, 9, 4));
  auto c = crossing_integral(m, q, cfg(30000, 9, 1));
  CHECK(same(a, b));
  CHECK(same(a, c));
  auto d = crossing_integral(m, q, cfg(30000, 10, 1));
  CHECK(a.value != d.value);
}

TEST_CASE("tube cache matches a fresh tube") {
  auto m = nn_laplacian(3);
  auto q = query(2, 3, 4, 0.1, vec({0, 0, 0}));
  TubeCache cache(m, 0.1, 4);
  auto a = crossing_integral(m, q, cfg(20000, 4), &cache);
  auto b = crossing_integral(m, q, cfg(20000, 4));
  CHECK(same(a, b));
  CHECK(cache.get(2.0).get() == cache.get(2.0).get());
}

TEST_CASE("invalid inputs") {
  McConfig c = cfg(100);
  c.groups = 4;
  CHECK_THROWS_AS(validate(c), Error);
  c = cfg(0);
  CHECK_THROWS_AS(validate(c), Error);
  CHECK_THROWS_AS(validate(query(0, 0, 0, 0.0, vec({0})), 1), Error);
  CHECK_THROWS_AS(validate(query(0, 0, 0, 1.5, vec({0})), 1), Error);
  CHECK_THROWS_AS(validate(query(0, 0, 0, 0.5, vec({0, 0})), 1), Error);
}

TEST_CASE("scan_roots") {
  auto r = scan_roots([](double t) { return std::cos(kTwoPi * t); }, 0, 1, 64);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("mc_cube volume") {
  auto e = mc_cube(2, [](const double* u) { return u[0] + u[1] < 1.0 ? 1.0 : 0.0; }, cfg(40000), 5);
  CHECK(std::abs(e.value - 0.5) <= 4 * e.standard_error);
}
