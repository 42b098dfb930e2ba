#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "memsim/integrator.hpp"

using namespace memsim;

namespace {
constexpr double kPi = 3.14159265358979323846;

ModelSpec linear_model(std::size_t J = 256, double tail_tol = 1e-8) {
  ModelSpec m;
  m.kernel = std::make_shared<KernelSpec>(KernelSpec::exponential(1.0, 1.0, 1.0));
  m.sgrid = std::make_shared<SGrid>(build_sgrid(1.0, J, tail_tol));
  m.noise = NoiseSpec::diagonal(std::vector<double>(8, 0.0));
  return m;
}

StepperConfig base_cfg(std::size_t n = 8, double dt = 1e-3, double kappa = 0.5) {
  StepperConfig c;
  c.n_modes = n;
  c.dt = dt;
  c.kappa = kappa;
  return c;
}
}  // namespace

TEST_CASE("drift assembles diffusion, memory and reaction") {
  ModelSpec m = linear_model();
  StepperConfig cfg = base_cfg();
  Simulator sim(m, cfg);

  SUBCASE("zero state has zero drift") {
    SpectralField d = sim.drift();
    for (double c : d.coeffs) CHECK(c == 0.0);
  }

  SUBCASE("pure diffusion on e_1") {
    sim.set_initial(basis_field(8, 1));
    CHECK(sim.drift().coeffs[0] == doctest::Approx(-0.5 * kPi * kPi).epsilon(1e-12));
  }

  SUBCASE("memory term from a linear-in-s history") {
    HistoryField eta(8, m.sgrid, m.kernel);
    eta.fill([](std::size_t k, double s) { return k == 1 ? s : 0.0; });
    sim.set_initial(SpectralField(8), eta);
    // int mu s ds = 1 so the drift is -(1-kappa) alpha_1 e_1
    CHECK(sim.drift().coeffs[0] == doctest::Approx(-0.5 * kPi * kPi).epsilon(2e-3));
    CHECK(sim.memory_term().coeffs[0] == doctest::Approx(kPi * kPi).epsilon(2e-3));
  }
}

TEST_CASE("zero state is a fixed point without noise") {
  ModelSpec m = linear_model();
  m.potential = certify_potential({0.0, 1.0, 0.0, -1.0});  // phi(0) = 0
  Simulator sim(m, base_cfg());
  std::mt19937_64 rng = make_rng(1, 0);
  for (int i = 0; i < 50; ++i) sim.step(rng);
  CHECK(sobolev_norm_sq(sim.u(), 0.0) == 0.0);
}

TEST_CASE("kappa = 1 reduces to semi-implicit heat decay") {
  ModelSpec m = linear_model();
  StepperConfig cfg = base_cfg(8, 1e-4, 1.0);
  Simulator sim(m, cfg);
  sim.set_initial(basis_field(8, 1));
  std::mt19937_64 rng = make_rng(1, 0);
  for (int i = 0; i < 1000; ++i) sim.step(rng);
  const double exact = std::exp(-kPi * kPi * 0.1);
  CHECK(sim.u().coeffs[0] == doctest::Approx(exact).epsilon(1e-3));
}

TEST_CASE("implicit diffusion is stable for any dt") {
  ModelSpec m = linear_model();
  StepperConfig cfg = base_cfg(8, 1.0, 1.0);  // dt = 1
  Simulator sim(m, cfg);
  sim.set_initial(basis_field(8, 1) + 0.5 * basis_field(8, 5));
  std::mt19937_64 rng = make_rng(2, 0);
  double prev = sobolev_norm_sq(sim.u(), 0.0);
  for (int i = 0; i < 20; ++i) {
    sim.step(rng);
    const double cur = sobolev_norm_sq(sim.u(), 0.0);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("determinism: same seed, same bits") {
  ModelSpec m = linear_model();
  m.noise = NoiseSpec::diagonal({1.0, 0.5, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0});
  StepperConfig cfg = base_cfg();
  Simulator a(m, cfg), b(m, cfg);
  std::mt19937_64 ra = make_rng(9, 3), rb = make_rng(9, 3);
  for (int i = 0; i < 200; ++i) {
    a.step(ra);
    b.step(rb);
  }
  for (std::size_t k = 0; k < 8; ++k) CHECK(a.u().coeffs[k] == b.u().coeffs[k]);
}

TEST_CASE("blow-up detection") {
  ModelSpec m = linear_model();
  StepperConfig cfg = base_cfg();
  cfg.blowup_threshold = 1e-6;
  Simulator sim(m, cfg);
  sim.set_initial(basis_field(8, 1));
  std::mt19937_64 rng = make_rng(1, 0);
  CHECK_THROWS_AS(sim.step(rng), BlowupError);
}

TEST_CASE("control configuration enforces the spectral gap") {
  CHECK_THROWS_AS(ControlConfig::checked(1, 0.05, 1.0), std::invalid_argument);
  ControlConfig ok = ControlConfig::checked(1, 0.5, 1.0);
  CHECK(ok.n_hat == 1);
}

TEST_CASE("controlled step with matching reference reduces to plain step") {
  ModelSpec m = linear_model();
  StepperConfig cfg = base_cfg();
  Simulator a(m, cfg), b(m, cfg);
  a.set_initial(basis_field(8, 2));
  b.set_initial(basis_field(8, 2));
  const ControlConfig ctrl = ControlConfig::checked(1, cfg.kappa, 0.0);
  SpectralField dw(8);
  dw.coeffs[0] = 0.01;
  const SpectralField ref = a.u();
  a.step_with_increment(dw);
  b.step_controlled(dw, ref, ctrl);
  for (std::size_t k = 0; k < 8; ++k) CHECK(a.u().coeffs[k] == b.u().coeffs[k]);
}

TEST_CASE("one controlled step matches the scalar recursion") {
  ModelSpec m = linear_model();
  StepperConfig cfg = base_cfg(1, 1e-3, 0.5);
  Simulator ref(m, cfg), hat(m, cfg);
  ref.set_initial(basis_field(1, 1));
  hat.set_initial(SpectralField(1));
  const ControlConfig ctrl = ControlConfig::checked(1, cfg.kappa, 0.0);
  const double alpha = kPi * kPi;
  const SpectralField u_prev = ref.u();
  SpectralField dw(1);
  ref.step_with_increment(dw);
  hat.step_controlled(dw, u_prev, ctrl);
  const double ga = cfg.kappa * alpha;
  const double u1 = 1.0 / (1.0 + cfg.dt * ga);
  const double uhat1 = (0.0 - cfg.dt * ga * (0.0 - 1.0)) / (1.0 + cfg.dt * ga);
  CHECK(ref.u().coeffs[0] == doctest::Approx(u1).epsilon(1e-14));
  CHECK(hat.u().coeffs[0] == doctest::Approx(uhat1).epsilon(1e-14));
}

TEST_CASE("trajectory records: bookkeeping and reproducibility") {
  ModelSpec m = linear_model();
  m.noise = NoiseSpec::diagonal({1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  StepperConfig cfg = base_cfg();
  RecordOptions opts;
  opts.stride = 10;

  Simulator sim(m, cfg);
  std::mt19937_64 rng = make_rng(4, 0);
  TrajectoryRecord zero = run_trajectory(sim, 0.0, rng, opts);
  CHECK(zero.points.size() == 1);

  Simulator s1(m, cfg), s2(m, cfg);
  std::mt19937_64 r1 = make_rng(4, 0), r2 = make_rng(4, 0);
  TrajectoryRecord a = run_trajectory(s1, 0.1, r1, opts);
  TrajectoryRecord b = run_trajectory(s2, 0.1, r2, opts);
  CHECK(a.points.size() == 11);  // initial + 100/10
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].psi0 == b.points[i].psi0);
    CHECK(a.points[i].h1_norm_sq == b.points[i].h1_norm_sq);
  }
}

TEST_CASE("coupled pair from identical zero data stays identical") {
  ModelSpec m = linear_model();
  m.noise = NoiseSpec::diagonal({1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  StepperConfig cfg = base_cfg();
  const ControlConfig ctrl = ControlConfig::checked(1, cfg.kappa, 0.0);
  RecordOptions opts;
  opts.stride = 20;
  PairedRecord rec = run_coupled_pair(m, cfg, ctrl, SpectralField(8), 0.2, 11, opts, true);
  for (const auto& p : rec.points) CHECK(p.diff_sq <= 1e-24);
}

TEST_CASE("history backends agree on a deterministic linear run") {
  ModelSpec m = linear_model(256);
  StepperConfig ring = base_cfg(4, 5e-4, 0.5);
  StepperConfig grid = ring;
  grid.backend = StepperConfig::Backend::GridTransport;
  Simulator a(m, ring), b(m, grid);
  a.set_initial(basis_field(4, 1));
  b.set_initial(basis_field(4, 1));
  std::mt19937_64 ra = make_rng(1, 0), rb = make_rng(1, 0);
  for (int i = 0; i < 1000; ++i) {
    a.step(ra);
    b.step(rb);
  }
  HistoryField ea = a.eta_snapshot();
  HistoryField eb = b.eta_snapshot();
  HistoryField diff = ea;
  for (std::size_t i = 0; i < diff.coeffs.size(); ++i) diff.coeffs[i] -= eb.coeffs[i];
  const double rel = std::sqrt(m_norm_sq(diff, 0.0) / m_norm_sq(ea, 0.0));
  CHECK(rel <= 0.05);
  CHECK(a.u().coeffs[0] == doctest::Approx(b.u().coeffs[0]).epsilon(5e-3));
}
