#ifndef MEMSIM_CONFIG_HPP
#define MEMSIM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "memsim/integrator.hpp"

namespace memsim {

/// Flat [section] key = value configuration file, one reviewable artifact
/// per experiment.  Unknown keys are rejected so typos cannot silently
/// change an experiment.
struct ExperimentConfig {
  // [model]
  double kappa = 0.5;
  double delta = 1.0;
  std::string kernel_family = "exponential";  // or "tabulated"
  double mu0 = 1.0;
  double rate = 1.0;
  std::string kernel_file;
  std::vector<double> potential_coeffs;  // empty = no reaction term
  std::string noise_family = "none";     // none | diagonal | power
  std::vector<double> noise_q;
  double noise_amplitude = 1.0;
  double noise_exponent = 2.0;
  std::size_t noise_cutoff = 0;  // 0 = n_modes
  std::size_t noise_m = 0;

  // [discretization]
  std::size_t n_modes = 64;
  std::size_t j_nodes = 256;
  double dt = 1e-3;
  std::string backend = "ring-buffer";  // or "grid-transport"
  std::size_t collocation = 0;          // 0 = auto dealiased
  double tail_tol = 1e-8;
  std::size_t quad_refine = 4;

  // [run]
  double T = 10.0;
  double burn_in = -1.0;  // < 0 selects the default 10/c0
  std::uint64_t seed = 1;
  std::size_t ensemble = 1;
  std::size_t record_stride = 100;

  // [control]
  std::size_t n_hat = 1;
  bool literal_unweighted = false;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

/// Fully validated runtime objects built from a config.  Construction runs
/// every validator (kernel class membership, potential certification, noise
/// admissibility) and throws a structured error naming the failed check.
struct ValidatedSetup {
  ModelSpec model;
  StepperConfig stepper;
  double a_phi = 0.0;
  double c0 = 0.0, C0 = 0.0;
  double burn_in = 0.0;
  double trace_q0 = 0.0;  // Tr(QQ*)
  ValidationReport kernel_report;
};

ValidatedSetup validate_setup(const ExperimentConfig& cfg, bool regularity_mode = false);

}  // namespace memsim

#endif
