#ifndef MEMSIM_ORACLES_HPP
#define MEMSIM_ORACLES_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "memsim/kernel.hpp"

namespace memsim {

/// Closed-form reference for the linear deterministic memory system with an
/// exactly exponential kernel mu(s) = mu0 exp(-delta s).  Per mode the pair
/// (u_k, m_k), with m_k the kernel-weighted history moment int mu eta_k ds,
/// satisfies the 2x2 linear system
///   du_k/dt = -kappa alpha_k u_k - (1-kappa) alpha_k m_k
///   dm_k/dt = -delta m_k + (mu0/delta) u_k
/// solved here by an exact matrix exponential (independent of the engine).
struct PronySolution {
  std::vector<double> times;
  std::vector<std::vector<double>> u;  // u[k][i] mode k+1 at times[i]
  std::vector<std::vector<double>> m;
};

PronySolution prony_solve(const std::vector<double>& u0, const std::vector<double>& m0,
                          double kappa, const KernelSpec& kernel,
                          const std::vector<double>& times);

/// Stationary variance q_k^2 / (2 kappa alpha_k) of the memoryless
/// Ornstein-Uhlenbeck mode (kappa = 1, phi = 0 configuration).
double ou_stationary_variance(std::size_t k, double q_k, double kappa);

/// Brute-force trapezoid on a uniform grid with n_cells * refine cells; the
/// reference quadrature path, sharing no code with the production grids.
double fine_quadrature(const std::function<double(double)>& f, double a, double b,
                       std::size_t n_cells, std::size_t refine = 4);

}  // namespace memsim

#endif
