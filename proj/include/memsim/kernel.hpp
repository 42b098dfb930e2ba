#ifndef MEMSIM_KERNEL_HPP
#define MEMSIM_KERNEL_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace memsim {

struct HistoryField;  // history.hpp

/// Geometric grid in the memory-age variable s, truncated at s_max where the
/// kernel tail drops below the declared tolerance.  Weights are trapezoidal.
struct SGrid {
  std::vector<double> nodes;    // s_1 < ... < s_J
  std::vector<double> weights;  // trapezoid weights on [s_1, s_J]
  double s_min = 0.0;
  double s_max = 0.0;
  double ratio = 0.0;     // geometric growth factor between adjacent nodes
  double tail_tol = 0.0;  // bound on the truncated tail of integral mu
  double quad_tol = 5e-3; // declared relative quadrature tolerance

  std::size_t size() const { return nodes.size(); }
  double spacing(std::size_t j) const;  // s_j - s_{j-1}, with s_0 = 0 (1-based j)
  double min_spacing() const;
};

/// Memory kernel mu in the exponential-decay class: positive with
/// mu' + delta*mu <= 0.
struct KernelSpec {
  enum class Family { Exponential, Tabulated };

  Family family = Family::Exponential;
  double delta = 1.0;  // decay-class rate
  double mu0 = 1.0;    // mu(0)
  double rate = 1.0;   // exponential family: mu(s) = mu0 * exp(-rate*s)

  // Tabulated family: samples (tab_s, tab_mu), strictly increasing s.
  std::vector<double> tab_s;
  std::vector<double> tab_mu;

  double mu(double s) const;        // linear interpolation for tabulated
  double mu_prime(double s) const;  // closed form / one-sided differences
  double integral() const;          // int_0^inf mu (analytic for exponential)

  static KernelSpec exponential(double mu0, double rate, double delta);
};

struct ValidationReport {
  bool accepted = false;
  double worst_margin = 0.0;  // decay-class excess, <= 0 required: mu' + delta*mu
                              // (closed form) or the relative growth of
                              // exp(delta*s)*mu between nodes (tabulated)
  double worst_node = 0.0;
  std::string message;
};

/// Positivity and mu' + delta*mu <= 0 at every grid node.  Tolerance 1e-10
/// for closed-form derivatives, 1e-6 slack for tabulated kernels.
ValidationReport validate_M_delta(const KernelSpec& kernel, const SGrid& grid);

/// mu := -K' sampled on the grid via central differences.  Rejects kernels
/// whose derivative is not strictly negative somewhere on the grid.
KernelSpec mu_from_K(const std::function<double(double)>& K, const SGrid& grid, double delta);

/// Tabulated kernel from a two-column whitespace-delimited text file (s, mu).
KernelSpec load_tabulated_kernel(const std::string& path, double delta);

/// Geometric grid with s_max = ln(mu0/(delta*tail_tol))/delta.  s_min <= 0
/// selects the default placement (1e-4 absolute, clipped below s_max).
SGrid build_sgrid(double delta, std::size_t n_nodes, double tail_tol, double mu0 = 1.0,
                  double s_min = -1.0);

/// Quadrature of <eta1, eta2>_{M^beta} =
/// int mu(s) sum_k alpha_k^{1+beta} eta1_k(s) eta2_k(s) ds.
double weighted_inner(const HistoryField& eta1, const HistoryField& eta2, double beta);

inline double m_norm_sq(const HistoryField& eta, double beta) {
  return weighted_inner(eta, eta, beta);
}

/// int over (0,1/r) u (r,inf) of mu(s) ||A^{1/2} eta(s)||^2 ds, r >= 1.
double tail_function(const HistoryField& eta, double r);

/// sup_r r * tail_function(eta, r) approximated over log-spaced samples.
double tail_sup(const HistoryField& eta, const std::vector<double>& r_samples);

/// ||eta||^2_{M^beta} + ||T_mu eta||^2_{M^0} + max_r r*tail(eta,r).
/// The sup over r >= 1 is under-approximated by the sample max.
double E_beta_norm_sq(const HistoryField& eta, double beta,
                      const std::vector<double>& r_samples);

/// Log-spaced samples of r in [1, r_max].
std::vector<double> log_spaced_r(double r_max, std::size_t count = 64);

}  // namespace memsim

#endif
