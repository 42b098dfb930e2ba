#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "memsim/history.hpp"

using namespace memsim;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<SGrid> default_grid(std::size_t J = 256) {
  return std::make_shared<SGrid>(build_sgrid(1.0, J, 1e-8));
}

std::shared_ptr<KernelSpec> exp_kernel() {
  return std::make_shared<KernelSpec>(KernelSpec::exponential(1.0, 1.0, 1.0));
}
}  // namespace

TEST_CASE("transport derivative is exact on profiles linear in s") {
  auto g = default_grid();
  HistoryField eta(2, g, exp_kernel());
  eta.fill([](std::size_t k, double s) { return k == 1 ? s : 2.0 * s; });
  HistoryField t = apply_Tmu(eta);
  for (std::size_t j = 0; j < g->size(); ++j) {
    CHECK(t.at(0, j) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(t.at(1, j) == doctest::Approx(-2.0).epsilon(1e-12));
  }
}

TEST_CASE("dissipativity margin is non-positive and tight at equilibrium") {
  auto g = default_grid();
  auto k = exp_kernel();
  HistoryField eta(1, g, k);
  eta.fill([](std::size_t, double s) { return 1.0 - std::exp(-s); });
  const double margin = dissipativity_margin(eta);
  CHECK(margin <= 0.0);
  // the only residual is the truncation boundary term ~ mu(s_max) ~ 1e-8
  CHECK(std::abs(margin) <= 1e-6 * kPi * kPi / 3.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    HistoryField h(4, g, k);
    const double a = unif(rng), b = unif(rng), c = unif(rng);
    h.fill([&](std::size_t km, double s) {
      return (a + b * (1.0 - std::exp(-c * c * s))) / static_cast<double>(km);
    });
    const double m = dissipativity_margin(h);
    CHECK(m <= 1e-6 * std::max(1.0, m_norm_sq(h, 0.0)));
  }
}

TEST_CASE("explicit transport step honours CFL and moves mass") {
  auto g = default_grid();
  auto k = exp_kernel();
  HistoryField eta(1, g, k);
  SpectralField u(1);
  u.coeffs[0] = 1.0;
  CHECK_THROWS_WITH_AS(evolve_history(eta, u, 1.0), doctest::Contains("CFL"),
                       std::invalid_argument);

  const double dt = 0.5 * g->min_spacing();
  HistoryField next = evolve_history(eta, u, dt);
  for (std::size_t j = 0; j < g->size(); ++j) CHECK(next.at(0, j) == doctest::Approx(dt));
  CHECK_THROWS_AS(evolve_history(eta, SpectralField(3), dt), std::invalid_argument);
}

TEST_CASE("memory integral of a linear profile") {
  auto g = default_grid();
  HistoryField eta(2, g, exp_kernel());
  eta.fill([](std::size_t k, double s) { return k == 1 ? s : 0.0; });
  SpectralField mi = memory_integral(eta);
  // int mu(s) s ds = 1, scaled by alpha_1
  CHECK(mi.coeffs[0] == doctest::Approx(kPi * kPi).epsilon(2e-3));
  CHECK(mi.coeffs[1] == 0.0);
}

TEST_CASE("ring buffer reproduces the running integral for constant input") {
  const double dt = 1e-2;
  PastPath path(1, dt, 5.0);
  SpectralField u(1);
  u.coeffs[0] = 2.0;
  path.push(u);
  for (int i = 0; i < 300; ++i) path.push(u);
  CHECK(path.t() == doctest::Approx(3.0));
  std::vector<double> c;
  path.C_at(1.7, c);
  CHECK(c[0] == doctest::Approx(3.4).epsilon(1e-12));
  // eta(t,s) = 2s for s <= t; = 2t beyond the trajectory with zero initial history
  CHECK(path.representation_eta(3.0, 1.25).coeffs[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(path.representation_eta(3.0, 4.5).coeffs[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("representation formula matches the analytic history of cos") {
  const double dt = 1e-3;
  PastPath path(1, dt, 25.0);
  SpectralField u(1);
  for (int i = 0; i <= 20000; ++i) {
    u.coeffs[0] = std::cos(dt * i);
    path.push(u);
  }
  const double t = 20.0;
  for (double s : {0.3, 2.0, 7.7, 18.0}) {
    const double exact = std::sin(t) - std::sin(t - s);
    CHECK(path.representation_eta(t, s).coeffs[0] == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("initial history is blended in for ages beyond the trajectory") {
  auto g = default_grid();
  auto k = exp_kernel();
  const double dt = 1e-2;
  PastPath path(1, dt, 30.0);
  HistoryField eta0(1, g, k);
  eta0.fill([](std::size_t, double s) { return s; });
  path.set_initial_history(g, eta0.coeffs);
  SpectralField u(1);
  u.coeffs[0] = 1.0;
  path.push(u);
  for (int i = 0; i < 100; ++i) path.push(u);
  const double t = 1.0;
  // s > t: eta = eta0(s - t) + t = (s - t) + t = s
  CHECK(path.representation_eta(t, 3.0).coeffs[0] == doctest::Approx(3.0).epsilon(1e-6));
  // s <= t: pure running integral
  CHECK(path.representation_eta(t, 0.4).coeffs[0] == doctest::Approx(0.4).epsilon(1e-9));

  HistoryField snap = path.history_on_grid(g, k);
  CHECK(snap.at(0, g->size() - 1) == doctest::Approx(g->s_max).epsilon(1e-6));
}

TEST_CASE("weighted history sum agrees with the explicit representation") {
  const double dt = 1e-3;
  PastPath path(2, dt, 10.0);
  SpectralField u(2);
  for (int i = 0; i <= 5000; ++i) {
    u.coeffs[0] = std::cos(dt * i);
    u.coeffs[1] = std::sin(2.0 * dt * i);
    path.push(u);
  }
  const std::vector<double> s{0.1, 0.5, 1.0, 2.5};
  const std::vector<double> w{0.2, 0.3, 0.4, 0.1};
  std::vector<double> out;
  path.weighted_history_sum(s, w, out);
  for (std::size_t k = 0; k < 2; ++k) {
    double ref = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      ref += w[i] * path.representation_eta(path.t(), s[i]).coeffs[k];
    CHECK(out[k] == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("buffer eviction is detected") {
  PastPath path(1, 1e-2, 0.5);
  SpectralField u(1);
  u.coeffs[0] = 1.0;
  path.push(u);
  for (int i = 0; i < 200; ++i) path.push(u);
  std::vector<double> out;
  CHECK_THROWS_AS(path.u_at(0.1, out), std::out_of_range);
  CHECK_THROWS_AS(path.C_at(0.1, out), std::out_of_range);
  CHECK_NOTHROW(path.u_at(path.t() - 0.3, out));
}

TEST_CASE("integration-by-parts discrepancy is small and shrinks with resolution") {
  auto g = default_grid();
  auto k = exp_kernel();
  const double dt = 1e-3;
  PastPath path(1, dt, 20.0);
  SpectralField u(1);
  for (int i = 0; i <= 20000; ++i) {
    u.coeffs[0] = std::cos(dt * i);
    path.push(u);
  }
  const double d1 = check_integration_by_parts(path, *k, *g, 20.0);
  CHECK(d1 <= 2e-4);

  auto g4 = default_grid(1024);
  PastPath path4(1, dt / 4.0, 20.0);
  for (int i = 0; i <= 80000; ++i) {
    u.coeffs[0] = std::cos(dt / 4.0 * i);
    path4.push(u);
  }
  const double d4 = check_integration_by_parts(path4, *k, *g4, 20.0);
  CHECK(d4 < d1);
  CHECK(d4 <= 5e-5);
}
