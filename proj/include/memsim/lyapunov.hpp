#ifndef MEMSIM_LYAPUNOV_HPP
#define MEMSIM_LYAPUNOV_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "memsim/integrator.hpp"

namespace memsim {

/// Decay constants of the energy inequality
///   E Psi0(t) <= exp(-c0 t) Psi0(0) + C0:
/// c0 = min{2 kappa alpha_1, (1-kappa) delta},
/// C0 = (a3 |domain| + Tr(QQ*)/2) / c0 with |domain| = 1.
struct DecayConstants {
  double c0 = 0.0;
  double C0 = 0.0;
  double beta = 0.0;  // exponential-moment rate, half of kappa*alpha_1/Tr(QQ*)
};

DecayConstants decay_constants(double kappa, double delta, double a3, double trace_QQ);

/// Psi_m = (1/2)||u||^2_{H^m} + ((1-kappa)/2)||eta||^2_{M^m}.
double psi(const SpectralField& u, const HistoryField& eta, double kappa, int m);

/// Generator applied to Psi_0 at the state:
///   -kappa ||A^{1/2}u||^2 + (1-kappa) <T eta, eta>_{M^0} + <phi(u), u> + Tr(QQ*)/2.
/// The transport pairing reuses the mu'-quadrature of dissipativity_margin;
/// <phi(u), u> is evaluated spectrally on the dealiased grid.
double generator_psi0(const SpectralField& u, const HistoryField& eta, const ModelSpec& model,
                      double kappa, const CollocationGrid& colloc);

struct MonitorReport {
  std::string name;
  bool pass = false;
  double worst_margin = 0.0;  // max over records of observed - bound
  double worst_t = 0.0;
  double c0 = 0.0, C0 = 0.0;
  std::size_t n_points = 0;
};

/// Pathwise (or ensemble-mean) check of psi0(t) <= exp(-c0 t) psi0(0) + C0.
MonitorReport monitor_dissipation(const std::vector<TrajectoryPoint>& points,
                                  const DecayConstants& c, double tolerance = 0.0);

/// Boundedness monitor for the higher functionals: reports the max and the
/// last-half vs second-quarter average ratio (plateau when <= ratio_limit).
MonitorReport monitor_boundedness(const std::vector<double>& t, const std::vector<double>& v,
                                  const std::string& name, double ratio_limit = 2.0);

struct GeneratorConsistency {
  double fd = 0.0;        // (E Psi0(t+h) - E Psi0(t)) / h
  double mean_gen = 0.0;  // E L Psi0 at time t
  double diff = 0.0;      // |fd - mean_gen|
  double se = 0.0;        // standard error of the paired difference
  bool pass = false;
};

/// Ensemble check of d/dt E Psi0 = E L Psi0 with common random numbers:
/// each trajectory is run to t, sampled, then continued by h on the same
/// stream.  Pass when diff <= 4 se + bias_frac * |mean_gen|.
GeneratorConsistency generator_consistency(const ModelSpec& model, const StepperConfig& cfg,
                                           std::size_t ensemble, double t, double h,
                                           std::uint64_t seed, double bias_frac = 0.05,
                                           std::size_t n_threads = 1);

}  // namespace memsim

#endif
