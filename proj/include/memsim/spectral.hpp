#ifndef MEMSIM_SPECTRAL_HPP
#define MEMSIM_SPECTRAL_HPP

#include <cstddef>
#include <vector>

namespace memsim {

/// Modal coefficients of a field on (0,1) in the Dirichlet sine basis
/// e_k(x) = sqrt(2) sin(k pi x), k = 1..N.
struct SpectralField {
  std::vector<double> coeffs;

  SpectralField() = default;
  explicit SpectralField(std::size_t n_modes) : coeffs(n_modes, 0.0) {}

  std::size_t n_modes() const { return coeffs.size(); }
  double& operator[](std::size_t k0) { return coeffs[k0]; }        // 0-based
  double operator[](std::size_t k0) const { return coeffs[k0]; }

  bool finite() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double a, SpectralField u);

/// Unit basis vector e_k (1-based mode index) embedded in an N-mode field.
SpectralField basis_field(std::size_t n_modes, std::size_t k);

/// alpha_k = (k pi)^2, the Dirichlet eigenvalue on (0,1). Throws on k = 0.
double eigenvalue(std::size_t k);

/// sum_k alpha_k^r u_k^2.  r = 0 recovers the L^2 norm squared.
double sobolev_norm_sq(const SpectralField& u, double r);

double inner(const SpectralField& a, const SpectralField& b);

/// Truncation to the first n modes. n >= N returns u unchanged.
SpectralField project(const SpectralField& u, std::size_t n);

/// (A u)_k = alpha_k u_k.
SpectralField apply_A(const SpectralField& u);

/// Uniform collocation nodes x_j = j/(M+1), j = 1..M, interior to (0,1).
struct CollocationGrid {
  std::size_t n_points;
  explicit CollocationGrid(std::size_t m) : n_points(m) {}
  double node(std::size_t j) const;  // 1-based
};

/// u(x_j) = sum_k u_k sqrt(2) sin(k pi x_j).  Requires M >= N.
std::vector<double> to_physical(const SpectralField& u, const CollocationGrid& g);

/// Exact discrete inverse of to_physical for M >= N:
/// u_k = (1/(M+1)) sum_j values_j sqrt(2) sin(k pi x_j).
SpectralField to_spectral(const std::vector<double>& values, const CollocationGrid& g,
                          std::size_t n_modes);

}  // namespace memsim

#endif
