#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "resolvent_lab/error.hpp"
#include "resolvent_lab/rng.hpp"
#include "resolvent_lab/scaling.hpp"

using namespace rlab;
using rlab::test::vec;

namespace {

McConfig cfg(std::uint64_t n, std::uint64_t seed = 1) {
  McConfig c;
  c.samples = n;
  c.seed = seed;
  c.workers = 1;
  c.record_time = false;
  return c;
}

}  // namespace

TEST_CASE("power law fit recovers planted exponents") {
  CounterRng rng(8, 0, 0);
  auto betas = default_beta_grid();
  for (double rho : {-1.0, -0.8, -0.3}) {
    for (double q : {0.0, 1.0, 2.5}) {
      std::vector<double> v, se;
      for (double b : betas) {
        double noise = 1 + 0.05 * (2 * rng.uniform() - 1);
        double L = std::sqrt(1 + std::log(b) * std::log(b));
        double x = 2.0 * std::pow(b, rho) * std::pow(L, q) * noise;
        v.push_back(x);
        se.push_back(0.05 * x);
      }
      auto f = fit_power_log(betas, v, se);
      CHECK(std::abs(f.rho - rho) <= 0.05 * (1 + q));
      CHECK(f.q >= 0);
      CHECK(f.q <= kMaxLogPower);
    }
  }
  // exact data, exact answer
  std::vector<double> v, se(betas.size(), 0.0);
  for (double b : betas) v.push_back(std::pow(b, -0.7));
  auto f = fit_power_log(betas, v, se);
  CHECK(f.rho == doctest::Approx(-0.7).epsilon(1e-8));
  CHECK(std::abs(f.q) < 1e-8);
  CHECK_THROWS_AS(fit_power_log({0.1, 0.2}, {1, 2}, {0, 0}), Error);
}

TEST_CASE("scan grid") {
  auto g = default_scan_grid(nn_laplacian(3), 5, 2);
  CHECK(g.k0s.size() == 8);
  for (const auto& a : g.alphas) {
    CHECK(a[1] <= a[2]);
    for (double x : a) {
      CHECK(x >= -1 - 1e-12);
      CHECK(x <= 7 + 1e-12);
    }
  }
  CHECK(g.size() == g.alphas.size() * g.k0s.size());
}

TEST_CASE("sup scan on the zero model") {
  ScanOptions o;
  o.config = cfg(2000);
  auto r = sup_scan(zero_model(1), 0.5, default_scan_grid(zero_model(1), 5, 2), o);
  CHECK(r.best.alpha == std::array<double, 3>{0, 0, 0});
  CHECK(r.estimate.value == doctest::Approx(8.0));
}

TEST_CASE("single cell scan reduces to the crossing integral") {
  ResolventQuery q;
  q.alpha = {2, 2, 2};
  q.beta = 0.3;
  q.k0 = vec({0.1, 0.2});
  ScanOptions o;
  o.config = cfg(20000, 6);
  auto r = sup_scan(nn_laplacian(2), 0.3, single_cell_grid(q), o);
  auto e = crossing_integral(nn_laplacian(2), q, o.config);
  CHECK(r.estimate.value == e.value);
  CHECK(r.estimate.standard_error == e.standard_error);
}

TEST_CASE("refined cells are not certified lower than cheap ones") {
  ScanOptions o;
  o.config = cfg(20000, 2);
  o.top_k = 4;
  auto r = sup_scan(nn_laplacian(2), 0.2, default_scan_grid(nn_laplacian(2), 4, 1), o);
  int refined = 0;
  for (const auto& c : r.cells) {
    if (!c.refined) continue;
    ++refined;
    CHECK(c.refined->value + 3 * std::hypot(c.refined->standard_error, c.cheap.standard_error) >= c.cheap.value);
  }
  CHECK(refined == 4);
}

TEST_CASE("beta sweep") {
  ScanOptions o;
  o.config = cfg(4000);
  o.top_k = 2;
  std::vector<double> betas{0.3, 0.1, 0.03, 0.01};
  auto s = beta_sweep(nn_laplacian(1), betas, default_scan_grid(nn_laplacian(1), 3, 1), o);
  CHECK(s.points.size() == 4);
  CHECK(s.fit.has_value());
  CHECK_THROWS_AS(beta_sweep(nn_laplacian(1), {0.1, 0.3}, default_scan_grid(nn_laplacian(1), 3, 1), o), Error);
  auto g = default_beta_grid();
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] < g[i - 1]);
}

TEST_CASE("slab bound for ce_morse_d3") {
  auto certs = find_hyperplanes(ce_morse_d3());
  REQUIRE(!certs.empty());
  const auto& cert = certs.front();
  CHECK(slab_volume_exact(cert, 0.1) == doctest::Approx(0.2));
  auto b = slab_lower_bound(ce_morse_d3(), cert, {0.3, 0.1}, cfg(100000));
  CHECK(b.c > 0);
  CHECK(b.C_nominal == doctest::Approx(2.0));
  CHECK(b.C <= b.C_nominal * 1.01);
  CHECK(std::find(b.deltas.begin(), b.deltas.end(), 1.0) != b.deltas.end());
  auto q = certificate_query(ce_morse_d3(), cert, 0.1);
  CHECK(q.alpha == std::array<double, 3>{5, 5, 5});
  CHECK(std::abs(std::abs(q.k0[0]) - 0.25) < 1e-12);
}
