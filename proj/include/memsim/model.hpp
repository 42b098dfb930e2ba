#ifndef MEMSIM_MODEL_HPP
#define MEMSIM_MODEL_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "memsim/spectral.hpp"

namespace memsim {

/// Polynomial reaction term phi(x) = sum_i c_i x^i with certified one-sided
/// bounds:  |phi| <= a1 (1 + |x|^p0),  x phi(x) <= -a2 |x|^{p0+1} + a3,
/// phi' <= a_phi.
struct PotentialSpec {
  std::vector<double> poly_coeffs;  // c_0 .. c_p0
  std::size_t p0 = 0;               // degree, odd, >= 3
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double a_phi = 0.0;                    // sup of phi'
  std::vector<std::size_t> p_exponents;  // growth exponent of the i-th derivative

  double eval(double x) const;        // phi(x)
  double eval_prime(double x) const;  // phi'(x)
  std::size_t p1() const { return p_exponents.empty() ? 0 : p_exponents[0]; }
  bool is_zero() const;
};

/// Diagonal noise operator: Q e_k = q_k e_k.
struct NoiseSpec {
  std::vector<double> q;       // per-mode amplitudes, q_k >= 0
  std::size_t m_trace = 0;     // declared regularity order
  bool power_family = false;   // q_k = amplitude / k^exponent, k <= q.size()
  double amplitude = 0.0;
  double exponent = 0.0;

  static NoiseSpec diagonal(std::vector<double> q, std::size_t m_trace = 0);
  static NoiseSpec power(double amplitude, double exponent, std::size_t cutoff,
                         std::size_t m_trace = 0);
};

/// Certify a polynomial potential.  Throws std::invalid_argument when the
/// polynomial violates phi(0) = 0, has even degree, or has a non-negative
/// leading coefficient.
PotentialSpec certify_potential(const std::vector<double>& poly_coeffs);

/// Smallest C on a dense lattice with |phi(x)| <= C(|x| + |x|^{p0}).
double check_growth_bound(const PotentialSpec& spec);

/// Pseudo-spectral evaluation of phi(u): physical values on g, pointwise
/// polynomial, transform back truncated to u's mode count.  Requires
/// g.n_points >= ceil((p0+1)/2) * N for exact dealiasing.
SpectralField apply_potential(const SpectralField& u, const PotentialSpec& spec,
                              const CollocationGrid& g);

/// Collocation size for exact dealiasing of a degree-p0 polynomial.
std::size_t dealiased_grid_size(std::size_t n_modes, std::size_t p0);

/// Tr(Q A^m Q) = sum_k q_k^2 alpha_k^m over the stored modes (always finite).
double trace_QAmQ(const NoiseSpec& noise, std::size_t m);

/// Whether the untruncated power family sum_k (a/k^e)^2 alpha_k^m diverges;
/// reported as the +inf flag for tail-extrapolated configurations.
bool power_trace_diverges(double exponent, std::size_t m);

/// Coefficients q_k sqrt(dt) xi_k with xi_k iid standard normal from rng.
SpectralField sample_noise_increment(const NoiseSpec& noise, double dt, std::mt19937_64& rng);

/// Deterministic per-trajectory stream: same (seed, stream_id) gives the
/// same generator regardless of scheduling.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace memsim

#endif
