#include "memsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "memsim/lyapunov.hpp"

namespace memsim {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::istringstream in(v);
  double x;
  while (in >> x) out.push_back(x);
  if (!in.eof()) throw std::invalid_argument("config: malformed numeric list '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw std::invalid_argument("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw std::invalid_argument("config: bad integer value for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean value for " + key + ": '" + v + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "discretization" && section != "run" &&
          section != "control")
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;

    if (full == "model.kappa") cfg.kappa = parse_real(full, val);
    else if (full == "model.delta") cfg.delta = parse_real(full, val);
    else if (full == "model.kernel") cfg.kernel_family = val;
    else if (full == "model.mu0") cfg.mu0 = parse_real(full, val);
    else if (full == "model.rate") cfg.rate = parse_real(full, val);
    else if (full == "model.kernel_file") cfg.kernel_file = val;
    else if (full == "model.potential") cfg.potential_coeffs = parse_list(val);
    else if (full == "model.noise") cfg.noise_family = val;
    else if (full == "model.noise_q") cfg.noise_q = parse_list(val);
    else if (full == "model.noise_amplitude") cfg.noise_amplitude = parse_real(full, val);
    else if (full == "model.noise_exponent") cfg.noise_exponent = parse_real(full, val);
    else if (full == "model.noise_cutoff") cfg.noise_cutoff = parse_u64(full, val);
    else if (full == "model.noise_m") cfg.noise_m = parse_u64(full, val);
    else if (full == "discretization.n_modes") cfg.n_modes = parse_u64(full, val);
    else if (full == "discretization.j_nodes") cfg.j_nodes = parse_u64(full, val);
    else if (full == "discretization.dt") cfg.dt = parse_real(full, val);
    else if (full == "discretization.backend") cfg.backend = val;
    else if (full == "discretization.collocation") cfg.collocation = parse_u64(full, val);
    else if (full == "discretization.tail_tol") cfg.tail_tol = parse_real(full, val);
    else if (full == "discretization.quad_refine") cfg.quad_refine = parse_u64(full, val);
    else if (full == "run.T") cfg.T = parse_real(full, val);
    else if (full == "run.burn_in") cfg.burn_in = parse_real(full, val);
    else if (full == "run.seed") cfg.seed = parse_u64(full, val);
    else if (full == "run.ensemble") cfg.ensemble = parse_u64(full, val);
    else if (full == "run.record_stride") cfg.record_stride = parse_u64(full, val);
    else if (full == "control.n_hat") cfg.n_hat = parse_u64(full, val);
    else if (full == "control.literal_unweighted") cfg.literal_unweighted = parse_bool(full, val);
    else
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" +
                                  full + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ValidatedSetup validate_setup(const ExperimentConfig& cfg, bool regularity_mode) {
  ValidatedSetup setup;

  if (!(cfg.kappa > 0.0 && cfg.kappa <= 1.0))
    throw std::invalid_argument("validation: kappa must lie in (0, 1]");
  if (cfg.delta <= 0.0) throw std::invalid_argument("validation: delta must be positive");

  auto sgrid = std::make_shared<SGrid>(
      build_sgrid(cfg.delta, cfg.j_nodes, cfg.tail_tol, cfg.mu0));

  std::shared_ptr<KernelSpec> kernel;
  if (cfg.kernel_family == "exponential") {
    kernel = std::make_shared<KernelSpec>(KernelSpec::exponential(cfg.mu0, cfg.rate, cfg.delta));
  } else if (cfg.kernel_family == "tabulated") {
    if (cfg.kernel_file.empty())
      throw std::invalid_argument("validation: tabulated kernel needs model.kernel_file");
    kernel = std::make_shared<KernelSpec>(load_tabulated_kernel(cfg.kernel_file, cfg.delta));
  } else {
    throw std::invalid_argument("validation: unknown kernel family '" + cfg.kernel_family + "'");
  }

  setup.kernel_report = validate_M_delta(*kernel, *sgrid);
  if (!setup.kernel_report.accepted)
    throw std::invalid_argument("validation: kernel fails the decay-class test (mu' + delta*mu "
                                "<= 0): " + setup.kernel_report.message);

  PotentialSpec potential;
  if (!cfg.potential_coeffs.empty()) {
    bool all_zero = true;
    for (double c : cfg.potential_coeffs) all_zero = all_zero && c == 0.0;
    if (!all_zero) potential = certify_potential(cfg.potential_coeffs);
  }

  NoiseSpec noise;
  const std::size_t cutoff = cfg.noise_cutoff > 0 ? cfg.noise_cutoff : cfg.n_modes;
  if (cfg.noise_family == "none") {
    noise = NoiseSpec::diagonal(std::vector<double>(cfg.n_modes, 0.0), cfg.noise_m);
  } else if (cfg.noise_family == "diagonal") {
    noise = NoiseSpec::diagonal(cfg.noise_q, cfg.noise_m);
  } else if (cfg.noise_family == "power") {
    noise = NoiseSpec::power(cfg.noise_amplitude, cfg.noise_exponent, cutoff, cfg.noise_m);
  } else {
    throw std::invalid_argument("validation: unknown noise family '" + cfg.noise_family + "'");
  }

  if (regularity_mode) {
    if (!potential.is_zero() && potential.p1() >= 4)
      throw std::invalid_argument(
          "validation: regularity mode needs derivative growth exponent p1 < 4");
    if (noise.power_family && power_trace_diverges(noise.exponent, noise.m_trace))
      throw std::invalid_argument(
          "validation: noise trace diverges at the declared regularity order");
  }

  setup.model = ModelSpec{potential, noise, kernel, sgrid};
  setup.stepper.dt = cfg.dt;
  setup.stepper.kappa = cfg.kappa;
  setup.stepper.n_modes = cfg.n_modes;
  setup.stepper.collocation_points = cfg.collocation;
  setup.stepper.quad_refine = cfg.quad_refine;
  if (cfg.backend == "ring-buffer") {
    setup.stepper.backend = StepperConfig::Backend::RingBuffer;
  } else if (cfg.backend == "grid-transport") {
    setup.stepper.backend = StepperConfig::Backend::GridTransport;
  } else {
    throw std::invalid_argument("validation: unknown backend '" + cfg.backend + "'");
  }

  setup.a_phi = potential.a_phi;
  setup.trace_q0 = trace_QAmQ(noise, 0);
  const DecayConstants dc =
      decay_constants(cfg.kappa, cfg.delta, potential.a3, setup.trace_q0);
  setup.c0 = dc.c0;
  setup.C0 = dc.C0;
  setup.burn_in = cfg.burn_in >= 0.0 ? cfg.burn_in : 10.0 / dc.c0;
  return setup;
}

}  // namespace memsim
