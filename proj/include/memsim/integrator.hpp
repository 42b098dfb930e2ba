#ifndef MEMSIM_INTEGRATOR_HPP
#define MEMSIM_INTEGRATOR_HPP

#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "memsim/history.hpp"
#include "memsim/kernel.hpp"
#include "memsim/model.hpp"
#include "memsim/spectral.hpp"

namespace memsim {

/// Everything that defines the continuous model: kernel, age grid, reaction
/// term, noise operator.
struct ModelSpec {
  PotentialSpec potential;
  NoiseSpec noise;
  std::shared_ptr<const KernelSpec> kernel;
  std::shared_ptr<const SGrid> sgrid;
};

struct StepperConfig {
  double dt = 1e-3;
  double kappa = 0.5;  // in (0,1]; 1 turns the memory term off entirely
  std::size_t n_modes = 64;
  enum class Backend { RingBuffer, GridTransport };
  Backend backend = Backend::RingBuffer;
  std::size_t collocation_points = 0;  // 0 selects the dealiased minimum
  std::size_t quad_refine = 4;         // ring-buffer memory quadrature subdivision
  double blowup_threshold = 1e8;       // abort when ||u||_{H^0} exceeds this
  double span = 0.0;                   // ring-buffer window; 0 selects s_max
};

/// Feedback on the first n_hat modes of the controlled copy.  Construction
/// verifies the spectral-gap condition kappa * alpha_{n_hat} > a_phi.
struct ControlConfig {
  std::size_t n_hat = 1;
  bool literal_unweighted = false;  // drop the kappa/(1-kappa) drift weights

  static ControlConfig checked(std::size_t n_hat, double kappa, double a_phi,
                               bool literal_unweighted = false);
};

struct BlowupError : std::runtime_error {
  double t_last;
  double norm_sq;
  BlowupError(double t, double n)
      : std::runtime_error("solution blew up at t = " + std::to_string(t)),
        t_last(t),
        norm_sq(n) {}
};

/// One trajectory of the truncated extended system, advanced in place.
/// History backend: ring buffer (exact representation of eta for the
/// recorded path) or explicit grid transport (CFL sub-stepping).
class Simulator {
 public:
  Simulator(ModelSpec model, StepperConfig cfg);

  void set_initial(const SpectralField& u0);
  void set_initial(const SpectralField& u0, const HistoryField& eta0);

  void step(std::mt19937_64& rng);
  void step_with_increment(const SpectralField& dw);
  /// Controlled update driven by the reference trajectory's u and the same
  /// noise increment.
  void step_controlled(const SpectralField& dw, const SpectralField& u_reference,
                       const ControlConfig& ctrl);

  const SpectralField& u() const { return u_; }
  double t() const { return t_; }
  const ModelSpec& model() const { return model_; }
  const StepperConfig& config() const { return cfg_; }

  /// eta on the model's s-grid (snapshot; exact for the ring buffer).
  HistoryField eta_snapshot() const;
  /// Quadrature of int mu A eta at the current state, per backend.
  SpectralField memory_term() const;
  /// -kappa A u - (1-kappa) int mu A eta + phi(u).
  SpectralField drift() const;
  SpectralField phi_of_u() const;
  SpectralField noise_increment(std::mt19937_64& rng) const;

  const PastPath* path() const { return path_.get(); }

 private:
  ModelSpec model_;
  StepperConfig cfg_;
  CollocationGrid colloc_;
  SpectralField u_;
  double t_ = 0.0;

  std::unique_ptr<PastPath> path_;  // ring-buffer backend
  HistoryField eta_;                // grid-transport backend
  std::size_t transport_substeps_ = 1;

  std::vector<double> quad_s_, quad_wmu_;  // refined memory quadrature
  mutable std::vector<double> scratch_;

  void advance_history(const SpectralField& u_new);
  void core_step(const SpectralField& dw, const SpectralField* u_reference,
                 const ControlConfig* ctrl);
};

struct TrajectoryPoint {
  double t = 0.0;
  double psi0 = 0.0, psi1 = 0.0, psi2 = 0.0;
  double h0_norm_sq = 0.0, h1_norm_sq = 0.0;
  double eta_m0_sq = 0.0;
  double tail_sup = 0.0;
  double diff_sq = 0.0;  // paired runs only
};

struct TrajectoryRecord {
  std::vector<TrajectoryPoint> points;
  SpectralField final_u;
  HistoryField final_eta;
};

struct RecordOptions {
  std::size_t stride = 100;
  bool with_tail = false;
  std::vector<double> r_samples;  // for tail_sup; empty selects a default
  bool with_psi12 = true;
};

/// Step sim to time T, sampling the monitored functionals every stride steps
/// (including the initial state).  Deterministic per (seed, config).
TrajectoryRecord run_trajectory(Simulator& sim, double T, std::mt19937_64& rng,
                                const RecordOptions& opts);

struct PairedRecord {
  std::vector<TrajectoryPoint> points;  // diff_sq = ||(u-uhat, eta-etahat)||^2 in H^0 x M^0
  std::vector<double> hat_norm_sq;      // ||(uhat, etahat)||^2 at record times
};

/// Reference trajectory plus controlled copy started from (0, 0), driven by
/// shared per-step noise increments (or independent ones as a negative
/// control).
PairedRecord run_coupled_pair(const ModelSpec& model, const StepperConfig& cfg,
                              const ControlConfig& ctrl, const SpectralField& u0, double T,
                              std::uint64_t seed, const RecordOptions& opts,
                              bool shared_noise = true);

}  // namespace memsim

#endif
