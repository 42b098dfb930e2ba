#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "memsim/config.hpp"
#include "memsim/io.hpp"
#include "memsim/lyapunov.hpp"
#include "memsim/measure.hpp"
#include "memsim/oracles.hpp"

namespace fs = std::filesystem;
using namespace memsim;

namespace {

struct Common {
  std::string config_path;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t threads = 1;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = parse_config(slurp(c.config_path));
  if (c.seed_set) cfg.seed = c.seed;
  return cfg;
}

void emit_manifest(const Common& c, const ExperimentConfig& cfg, const std::string& mode) {
  nlohmann::json m = make_manifest(slurp(c.config_path), cfg.seed, c.threads);
  m["mode"] = mode;
  write_json((fs::path(c.output_dir) / "manifest.json").string(), m);
}

/// Run fn(i) for i in [0, n) across the requested threads; results land in
/// index order so output never depends on scheduling.
template <typename F>
void fan_out(std::size_t n, std::size_t n_threads, F&& fn) {
  const std::size_t nt = std::max<std::size_t>(1, std::min(n_threads, n));
  if (nt == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

int cmd_validate(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const ValidatedSetup setup = validate_setup(cfg);
  std::cout << "kernel: accepted, worst margin " << format_double(setup.kernel_report.worst_margin)
            << " at s = " << format_double(setup.kernel_report.worst_node) << "\n";
  const auto& p = setup.model.potential;
  if (!p.is_zero()) {
    std::cout << "potential: p0 = " << p.p0 << ", a1 = " << format_double(p.a1)
              << ", a2 = " << format_double(p.a2) << ", a3 = " << format_double(p.a3)
              << ", a_phi = " << format_double(p.a_phi) << "\n";
  } else {
    std::cout << "potential: none\n";
  }
  std::cout << "noise: Tr(QQ*) = " << format_double(setup.trace_q0)
            << ", Tr(QAQ) = " << format_double(trace_QAmQ(setup.model.noise, 1)) << "\n";
  std::cout << "decay: c0 = " << format_double(setup.c0) << ", C0 = " << format_double(setup.C0)
            << ", burn_in = " << format_double(setup.burn_in) << "\n";
  std::cout << "age grid: s_max = " << format_double(setup.model.sgrid->s_max)
            << ", nodes = " << setup.model.sgrid->size() << "\n";
  std::cout << "validate: pass\n";
  return 0;
}

int cmd_simulate(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const ValidatedSetup setup = validate_setup(cfg);
  fs::create_directories(c.output_dir);

  RecordOptions opts;
  opts.stride = cfg.record_stride;
  opts.with_tail = true;

  std::vector<TrajectoryRecord> records(cfg.ensemble);
  fan_out(cfg.ensemble, c.threads, [&](std::size_t i) {
    Simulator sim(setup.model, setup.stepper);
    std::mt19937_64 rng = make_rng(cfg.seed, i);
    records[i] = run_trajectory(sim, cfg.T, rng, opts);
  });

  const DecayConstants dc = decay_constants(cfg.kappa, cfg.delta, setup.model.potential.a3,
                                            setup.trace_q0);
  nlohmann::json monitors = nlohmann::json::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string stem = "trajectory_" + std::to_string(i);
    write_trajectory_csv((fs::path(c.output_dir) / (stem + ".csv")).string(),
                         records[i].points);
    write_snapshot((fs::path(c.output_dir) / (stem + ".state")).string(), records[i].final_u,
                   records[i].final_eta);
    monitors.push_back(
        monitor_to_json(monitor_dissipation(records[i].points, dc), "energy_decay_bound"));
  }
  write_json((fs::path(c.output_dir) / "monitors.json").string(), monitors);
  emit_manifest(c, cfg, "simulate");
  std::cout << "simulate: wrote " << records.size() << " trajectories to " << c.output_dir
            << "\n";
  return 0;
}

int cmd_measure(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const ValidatedSetup setup = validate_setup(cfg);
  fs::create_directories(c.output_dir);

  MeasureOptions mo;
  mo.burn_in = setup.burn_in;
  mo.record_stride = cfg.record_stride;
  const DecayConstants dc = decay_constants(cfg.kappa, cfg.delta, setup.model.potential.a3,
                                            setup.trace_q0);
  mo.beta_exp = dc.beta;
  mo.with_tail = true;

  const MeasureEstimate est = krylov_bogoliubov(setup.model, setup.stepper, cfg.T, cfg.seed, mo);
  write_json((fs::path(c.output_dir) / "measure.json").string(), measure_to_json(est));
  write_spectral_csv((fs::path(c.output_dir) / "spectral_profile.csv").string(),
                     est.spectral_profile);
  emit_manifest(c, cfg, "measure");
  std::cout << "measure: psi0 = " << format_double(est.moments.at("psi0").estimate) << " +- "
            << format_double(est.moments.at("psi0").std_error) << " (" << est.n_samples
            << " samples)\n";
  return 0;
}

int cmd_nudge(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const ValidatedSetup setup = validate_setup(cfg);
  fs::create_directories(c.output_dir);
  const ControlConfig ctrl = ControlConfig::checked(cfg.n_hat, cfg.kappa,
                                                    setup.model.potential.a_phi,
                                                    cfg.literal_unweighted);

  // default probe state: u0 = e_1 + e_2/2, zero history
  SpectralField u0(cfg.n_modes);
  u0.coeffs[0] = 1.0;
  if (cfg.n_modes > 1) u0.coeffs[1] = 0.5;

  RecordOptions opts;
  opts.stride = cfg.record_stride;

  const double rate = std::min(2.0 * (cfg.kappa * eigenvalue(cfg.n_hat) -
                                      setup.model.potential.a_phi),
                               cfg.delta);
  const double amp = 1.0 / (1.0 - cfg.kappa);

  std::vector<PairedRecord> records(cfg.ensemble);
  fan_out(cfg.ensemble, c.threads, [&](std::size_t i) {
    records[i] = run_coupled_pair(setup.model, setup.stepper, ctrl, u0, cfg.T,
                                  cfg.seed + i, opts, true);
  });

  nlohmann::json verdicts = nlohmann::json::array();
  bool all_pass = true;
  for (std::size_t i = 0; i < records.size(); ++i) {
    write_paired_csv((fs::path(c.output_dir) / ("pair_" + std::to_string(i) + ".csv")).string(),
                     records[i]);
    const double init = records[i].points.front().diff_sq;
    double worst = 0.0;
    for (const auto& p : records[i].points)
      worst = std::max(worst, p.diff_sq - (amp * std::exp(-rate * p.t) * init + 1e-8));
    verdicts.push_back({{"path", i},
                        {"criterion", "pathwise_contraction"},
                        {"worst_margin", worst},
                        {"verdict", worst <= 0.0 ? "pass" : "fail"}});
    all_pass = all_pass && worst <= 0.0;
  }
  write_json((fs::path(c.output_dir) / "nudge.json").string(), verdicts);
  emit_manifest(c, cfg, "nudge");
  std::cout << "nudge: " << (all_pass ? "pass" : "fail") << " over " << records.size()
            << " paths\n";
  return all_pass ? 0 : 1;
}

int cmd_oracle_check(const Common& c) {
  ExperimentConfig cfg = load(c);
  // the oracle regime is linear and deterministic
  cfg.potential_coeffs.clear();
  cfg.noise_family = "none";
  const ValidatedSetup setup = validate_setup(cfg);
  fs::create_directories(c.output_dir);
  if (setup.model.kernel->family != KernelSpec::Family::Exponential ||
      setup.model.kernel->rate != setup.model.kernel->delta)
    throw std::invalid_argument("oracle-check: needs mu(s) = mu0 exp(-delta s)");

  SpectralField u0(cfg.n_modes);
  u0.coeffs[0] = 1.0;
  Simulator sim(setup.model, setup.stepper);
  sim.set_initial(u0);
  std::mt19937_64 rng = make_rng(cfg.seed, 0);

  std::vector<double> times;
  std::vector<std::vector<double>> engine_u;
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
  const std::size_t stride = std::max<std::size_t>(1, cfg.record_stride);
  times.push_back(0.0);
  engine_u.push_back(u0.coeffs);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    sim.step(rng);
    if (i % stride == 0 || i == n_steps) {
      times.push_back(sim.t());
      engine_u.push_back(sim.u().coeffs);
    }
  }

  const PronySolution sol = prony_solve(u0.coeffs, std::vector<double>(cfg.n_modes, 0.0),
                                        cfg.kappa, *setup.model.kernel, times);
  std::ofstream out(fs::path(c.output_dir) / "oracle_comparison.csv");
  out << "t,engine_u1,oracle_u1,abs_error\n";
  double sup_err = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double err = std::abs(engine_u[i][0] - sol.u[0][i]);
    sup_err = std::max(sup_err, err);
    out << format_double(times[i]) << ',' << format_double(engine_u[i][0]) << ','
        << format_double(sol.u[0][i]) << ',' << format_double(err) << '\n';
  }
  const bool pass = sup_err <= 1e-3;
  write_json((fs::path(c.output_dir) / "oracle.json").string(),
             {{"criterion", "linear_memory_oracle"},
              {"sup_error", sup_err},
              {"tolerance", 1e-3},
              {"verdict", pass ? "pass" : "fail"}});
  emit_manifest(c, cfg, "oracle-check");
  std::cout << "oracle-check: sup error " << format_double(sup_err) << " -> "
            << (pass ? "pass" : "fail") << "\n";
  return pass ? 0 : 1;
}

int cmd_regularity(const Common& c, const std::string& rough_path) {
  const ExperimentConfig cfg = load(c);
  ExperimentConfig rough_cfg = rough_path.empty() ? cfg : parse_config(slurp(rough_path));
  if (rough_path.empty()) rough_cfg.noise_exponent = 1.0;  // default rough companion
  const ValidatedSetup smooth = validate_setup(cfg, true);
  rough_cfg.noise_m = 0;
  const ValidatedSetup rough = validate_setup(rough_cfg, true);
  fs::create_directories(c.output_dir);

  MeasureOptions mo;
  mo.burn_in = smooth.burn_in;
  mo.record_stride = cfg.record_stride;
  const RegularityReport rep = regularity_diagnostic(smooth.model, rough.model, smooth.stepper,
                                                     cfg.T, cfg.seed, mo);
  write_json((fs::path(c.output_dir) / "regularity.json").string(),
             {{"criterion", "stationary_support_regularity"},
              {"h1_smooth", rep.h1_smooth.estimate},
              {"h2_smooth", rep.h2_smooth.estimate},
              {"h1_rough", rep.h1_rough.estimate},
              {"mixed_smooth", rep.mixed_smooth.estimate},
              {"decay_exp_smooth", rep.decay_exp_smooth},
              {"decay_exp_rough", rep.decay_exp_rough},
              {"stability_ratio_smooth", rep.stability_ratio_smooth},
              {"stability_ratio_rough", rep.stability_ratio_rough},
              {"verdict", rep.pass ? "pass" : "fail"}});
  emit_manifest(c, cfg, "regularity");
  std::cout << "regularity: decay exponents " << format_double(rep.decay_exp_smooth) << " vs "
            << format_double(rep.decay_exp_rough) << " -> " << (rep.pass ? "pass" : "fail")
            << "\n";
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral engine for stochastic reaction-diffusion with memory"};
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config_path, "experiment config file")->required();
  app.add_option("--output-dir", common.output_dir, "artifact directory");
  app.add_option("--threads", common.threads, "ensemble fan-out width");
  auto* seed_opt = app.add_option("--seed", common.seed, "override the config seed");

  auto* validate = app.add_subcommand("validate", "run all validators, print constants");
  auto* simulate = app.add_subcommand("simulate", "ensemble trajectories + monitors");
  auto* measure = app.add_subcommand("measure", "time-averaged invariant-measure estimate");
  auto* nudge = app.add_subcommand("nudge", "coupled controlled pair, contraction verdicts");
  auto* oracle = app.add_subcommand("oracle-check", "engine vs closed-form linear oracle");
  auto* regularity = app.add_subcommand("regularity", "smooth vs rough noise comparison");
  std::string rough_path;
  regularity->add_option("--rough-config", rough_path, "config for the rough-noise companion");

  CLI11_PARSE(app, argc, argv);
  common.seed_set = seed_opt->count() > 0;

  try {
    if (validate->parsed()) return cmd_validate(common);
    if (simulate->parsed()) return cmd_simulate(common);
    if (measure->parsed()) return cmd_measure(common);
    if (nudge->parsed()) return cmd_nudge(common);
    if (oracle->parsed()) return cmd_oracle_check(common);
    if (regularity->parsed()) return cmd_regularity(common, rough_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
