#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "memsim/config.hpp"
#include "memsim/io.hpp"

using namespace memsim;

namespace {

const char* kDefaultConfig = R"(
# Allen-Cahn with exponential memory
[model]
kappa = 0.5
delta = 1.0
kernel = exponential
mu0 = 1.0
rate = 1.0
potential = 0 1 0 -1
noise = power
noise_amplitude = 1.0
noise_exponent = 2.0

[discretization]
n_modes = 16
j_nodes = 256
dt = 1e-3
backend = ring-buffer

[run]
T = 5
seed = 11
record_stride = 50
)";

}  // namespace

TEST_CASE("config parsing and defaults") {
  ExperimentConfig cfg = parse_config(kDefaultConfig);
  CHECK(cfg.kappa == 0.5);
  CHECK(cfg.potential_coeffs == std::vector<double>{0.0, 1.0, 0.0, -1.0});
  CHECK(cfg.noise_family == "power");
  CHECK(cfg.n_modes == 16);
  CHECK(cfg.seed == 11);
  CHECK(cfg.burn_in == -1.0);  // default sentinel
}

TEST_CASE("config rejects unknown keys and malformed lines") {
  CHECK_THROWS_WITH_AS(parse_config("[model]\nkapa = 0.5\n"), doctest::Contains("unknown key"),
                       std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[model]\nkappa 0.5\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[mystery]\nx = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[model]\nkappa = fast\n"), std::invalid_argument);
}

TEST_CASE("validated setup certifies the default model") {
  ExperimentConfig cfg = parse_config(kDefaultConfig);
  ValidatedSetup s = validate_setup(cfg);
  CHECK(s.a_phi == doctest::Approx(1.0));
  CHECK(s.c0 == doctest::Approx(0.5));
  CHECK(s.kernel_report.accepted);
  CHECK(s.burn_in == doctest::Approx(20.0));
  CHECK(s.model.sgrid->s_max == doctest::Approx(std::log(1e8)));
}

TEST_CASE("validation failures name the broken assumption") {
  ExperimentConfig cfg = parse_config(kDefaultConfig);
  cfg.potential_coeffs = {0.0, 0.0, 0.0, 1.0};
  CHECK_THROWS_WITH_AS(validate_setup(cfg), doctest::Contains("leading coefficient"),
                       std::invalid_argument);

  ExperimentConfig bad_kernel = parse_config(kDefaultConfig);
  bad_kernel.delta = 2.0;  // mu = e^{-s} decays too slowly for delta = 2
  CHECK_THROWS_WITH_AS(validate_setup(bad_kernel), doctest::Contains("decay-class"),
                       std::invalid_argument);

  ExperimentConfig bad_kappa = parse_config(kDefaultConfig);
  bad_kappa.kappa = 1.5;
  CHECK_THROWS_AS(validate_setup(bad_kappa), std::invalid_argument);
}

TEST_CASE("regularity mode gates") {
  ExperimentConfig cfg = parse_config(kDefaultConfig);
  cfg.noise_exponent = 1.0;
  cfg.noise_m = 2;
  CHECK_THROWS_WITH_AS(validate_setup(cfg, true), doctest::Contains("diverges"),
                       std::invalid_argument);
  cfg.noise_m = 0;
  CHECK_NOTHROW(validate_setup(cfg, true));
}

TEST_CASE("shortest round-trip float formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 2.5}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(1e100).size() < 12);
}

TEST_CASE("trajectory CSV layout") {
  std::vector<TrajectoryPoint> pts(3);
  pts[1].t = 0.5;
  pts[1].psi0 = 1.25;
  const char* path = "traj_io_test.csv";
  write_trajectory_csv(path, pts);
  std::ifstream in(path);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  CHECK(header == "t,Psi0,Psi1,Psi2,H0_norm_sq,H1_norm_sq,eta_M0_sq,tail_sup,diff_sq");
  CHECK(row1.substr(0, 9) == "0.5,1.25,");
  std::remove(path);
}

TEST_CASE("binary snapshot round trip") {
  auto grid = std::make_shared<SGrid>(build_sgrid(1.0, 128, 1e-8));
  auto kernel = std::make_shared<KernelSpec>(KernelSpec::exponential(1.0, 1.0, 1.0));
  SpectralField u(3);
  u.coeffs = {0.25, -1.5, 1e-9};
  HistoryField eta(3, grid, kernel);
  eta.fill([](std::size_t k, double s) { return double(k) * s; });
  const char* path = "snapshot_io_test.bin";
  write_snapshot(path, u, eta);
  Snapshot s = read_snapshot(path);
  CHECK(s.n_modes == 3);
  CHECK(s.j_nodes == 128);
  CHECK(s.u == u.coeffs);
  CHECK(s.eta == eta.coeffs);
  std::remove(path);
  CHECK_THROWS_AS(read_snapshot("does_not_exist.bin"), std::runtime_error);
}

TEST_CASE("manifest hashing is stable") {
  CHECK(fnv1a("") == 14695981039346656037ULL);
  CHECK(fnv1a("a") != fnv1a("b"));
  nlohmann::json m = make_manifest("config text", 42, 4);
  CHECK(m["seed"] == 42);
  CHECK(m["config_fnv1a"] == fnv1a("config text"));
}

TEST_CASE("monitor reports serialize with a criterion label") {
  MonitorReport rep;
  rep.name = "psi0_decay";
  rep.pass = true;
  rep.c0 = 0.5;
  nlohmann::json j = monitor_to_json(rep, "energy_decay_bound");
  CHECK(j["verdict"] == "pass");
  CHECK(j["criterion"] == "energy_decay_bound");
  CHECK(j["constants"]["c0"] == 0.5);
}
