#include "memsim/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace memsim {

namespace {
constexpr double kPi = std::numbers::pi;
}

bool SpectralField::finite() const {
  for (double c : coeffs)
    if (!std::isfinite(c)) return false;
  return true;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.coeffs.size() != coeffs.size()) throw std::invalid_argument("mode count mismatch");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (o.coeffs.size() != coeffs.size()) throw std::invalid_argument("mode count mismatch");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (double& c : coeffs) c *= a;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double a, SpectralField u) { return u *= a; }

SpectralField basis_field(std::size_t n_modes, std::size_t k) {
  if (k < 1 || k > n_modes) throw std::invalid_argument("basis_field: mode index out of range");
  SpectralField u(n_modes);
  u.coeffs[k - 1] = 1.0;
  return u;
}

double eigenvalue(std::size_t k) {
  if (k < 1) throw std::invalid_argument("eigenvalue: mode index must be >= 1");
  const double kp = static_cast<double>(k) * kPi;
  return kp * kp;
}

double sobolev_norm_sq(const SpectralField& u, double r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) {
    const double c = u.coeffs[i];
    if (c == 0.0) continue;
    acc += std::pow(eigenvalue(i + 1), r) * c * c;
  }
  return acc;
}

double inner(const SpectralField& a, const SpectralField& b) {
  if (a.coeffs.size() != b.coeffs.size()) throw std::invalid_argument("mode count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) acc += a.coeffs[i] * b.coeffs[i];
  return acc;
}

SpectralField project(const SpectralField& u, std::size_t n) {
  if (n < 1) throw std::invalid_argument("project: n must be >= 1");
  SpectralField out = u;
  for (std::size_t i = n; i < out.coeffs.size(); ++i) out.coeffs[i] = 0.0;
  return out;
}

SpectralField apply_A(const SpectralField& u) {
  SpectralField out = u;
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) out.coeffs[i] *= eigenvalue(i + 1);
  return out;
}

double CollocationGrid::node(std::size_t j) const {
  return static_cast<double>(j) / static_cast<double>(n_points + 1);
}

std::vector<double> to_physical(const SpectralField& u, const CollocationGrid& g) {
  const std::size_t n = u.n_modes();
  const std::size_t m = g.n_points;
  if (m < n) throw std::invalid_argument("to_physical: grid smaller than mode count (aliasing)");
  std::vector<double> vals(m, 0.0);
  const double root2 = std::numbers::sqrt2;
  for (std::size_t k = 1; k <= n; ++k) {
    const double c = u.coeffs[k - 1];
    if (c == 0.0) continue;
    const double w = static_cast<double>(k) * kPi / static_cast<double>(m + 1);
    for (std::size_t j = 1; j <= m; ++j)
      vals[j - 1] += c * root2 * std::sin(w * static_cast<double>(j));
  }
  return vals;
}

SpectralField to_spectral(const std::vector<double>& values, const CollocationGrid& g,
                          std::size_t n_modes) {
  const std::size_t m = g.n_points;
  if (values.size() != m) throw std::invalid_argument("to_spectral: value count != grid size");
  if (m < n_modes) throw std::invalid_argument("to_spectral: grid smaller than mode count (aliasing)");
  SpectralField u(n_modes);
  const double root2 = std::numbers::sqrt2;
  const double scale = 1.0 / static_cast<double>(m + 1);
  for (std::size_t k = 1; k <= n_modes; ++k) {
    const double w = static_cast<double>(k) * kPi / static_cast<double>(m + 1);
    double acc = 0.0;
    for (std::size_t j = 1; j <= m; ++j)
      acc += values[j - 1] * root2 * std::sin(w * static_cast<double>(j));
    u.coeffs[k - 1] = acc * scale;
  }
  return u;
}

}  // namespace memsim
