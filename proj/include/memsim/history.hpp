#ifndef MEMSIM_HISTORY_HPP
#define MEMSIM_HISTORY_HPP

#include <cstddef>
#include <memory>
#include <vector>

#include "memsim/kernel.hpp"
#include "memsim/spectral.hpp"

namespace memsim {

/// eta(t,s) sampled at the s-grid nodes, mode-by-mode.  The transport
/// boundary condition eta(0) = 0 is represented by a ghost node at s = 0
/// that is identically zero.
struct HistoryField {
  std::size_t n_modes = 0;
  std::vector<double> coeffs;  // row-major: coeffs[k*J + j], k mode, j node
  std::shared_ptr<const SGrid> grid;
  std::shared_ptr<const KernelSpec> kernel;

  HistoryField() = default;
  HistoryField(std::size_t n, std::shared_ptr<const SGrid> g,
               std::shared_ptr<const KernelSpec> k);

  std::size_t n_nodes() const { return grid ? grid->size() : 0; }
  double& at(std::size_t k0, std::size_t j0) { return coeffs[k0 * n_nodes() + j0]; }
  double at(std::size_t k0, std::size_t j0) const { return coeffs[k0 * n_nodes() + j0]; }
  bool finite() const;

  /// Fill from a per-mode profile eta_k(s) = f(k, s) (k 1-based).
  template <typename F>
  void fill(F&& f) {
    const std::size_t J = n_nodes();
    for (std::size_t k = 0; k < n_modes; ++k)
      for (std::size_t j = 0; j < J; ++j)
        coeffs[k * J + j] = f(k + 1, grid->nodes[j]);
  }
};

/// -d/ds eta via first-order upwind differences from smaller s, with the
/// zero ghost node at s = 0.  Throws on a single-node grid.
HistoryField apply_Tmu(const HistoryField& eta);

/// <T_mu eta, eta>_{M^0} + (delta/2) ||eta||^2_{M^0}, evaluated through the
/// mu' quadrature identity so that kernels with mu' + delta*mu <= 0 give a
/// non-positive value up to the truncation boundary term.
double dissipativity_margin(const HistoryField& eta);

/// One explicit upwind step of d/dt eta = T_mu eta + u.  Requires
/// dt <= min grid spacing (CFL); the s = 0 ghost stays zero.
HistoryField evolve_history(const HistoryField& eta, const SpectralField& u, double dt);

/// Spectral field with k-th coefficient  sum_j w_j mu(s_j) alpha_k eta_k(s_j),
/// the quadrature of int mu(s) A eta(s) ds.
SpectralField memory_integral(const HistoryField& eta);

/// Ring buffer of u snapshots over [t - span, t] at uniform spacing dt,
/// together with the running time integral C(t) = int_0^t u, so that
/// eta(t,s) = C(t) - C(t-s) (+ initial history for s > t).
class PastPath {
 public:
  PastPath(std::size_t n_modes, double dt, double span);

  /// Initial history eta0 tabulated on an s-grid (linear interpolation in s).
  void set_initial_history(std::shared_ptr<const SGrid> grid, std::vector<double> eta0_coeffs);

  /// Record the state at the next time level t = start + (count)*dt.
  void push(const SpectralField& u);

  double t() const { return static_cast<double>(steps_) * dt_; }
  double dt() const { return dt_; }
  double span() const { return span_; }
  std::size_t n_modes() const { return n_modes_; }

  /// u at time tq <= t(), linear interpolation between snapshots.
  void u_at(double tq, std::vector<double>& out) const;

  /// C(tq) = int_0^tq u, trapezoidal in the snapshots.
  void C_at(double tq, std::vector<double>& out) const;

  /// eta(t, s) by the representation formula.  Throws if the buffer does
  /// not cover [t - min(s, span), t].
  SpectralField representation_eta(double tq, double s) const;

  /// eta(t, .) sampled on a grid, as a HistoryField.
  HistoryField history_on_grid(std::shared_ptr<const SGrid> grid,
                               std::shared_ptr<const KernelSpec> kernel) const;

  /// out[k] = sum_i w[i] * eta_k(t(), s[i]) without per-node allocation;
  /// the workhorse behind the ring-buffer memory quadrature.
  void weighted_history_sum(const std::vector<double>& s, const std::vector<double>& w,
                            std::vector<double>& out) const;

 private:
  std::size_t n_modes_;
  double dt_;
  double span_;
  std::size_t capacity_;  // snapshots retained
  std::size_t steps_ = 0; // pushes performed minus one (time index of newest)
  bool started_ = false;
  std::vector<double> u_ring_;  // capacity_ x n_modes
  std::vector<double> C_ring_;
  std::shared_ptr<const SGrid> eta0_grid_;
  std::vector<double> eta0_;    // n_modes x eta0_grid size

  std::size_t oldest_index() const;
  const double* row(const std::vector<double>& ring, std::size_t time_index) const;
  void eta0_at(double s, std::vector<double>& out) const;
  friend struct PastPathProbe;
};

/// Relative discrepancy between the quadratures of int K(s) Delta u(t-s) ds
/// and int mu(s) Delta eta(t,s) ds with eta from the representation formula.
/// K is recovered from mu: closed form for the exponential family, tail
/// quadrature for tabulated kernels.
double check_integration_by_parts(const PastPath& path, const KernelSpec& kernel,
                                  const SGrid& grid, double t);

}  // namespace memsim

#endif
