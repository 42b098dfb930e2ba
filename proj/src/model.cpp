#include "memsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace memsim {

namespace {

double poly_eval(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
  return d;
}

double bisect_root(const std::vector<double>& c, double a, double b) {
  double fa = poly_eval(c, a);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = poly_eval(c, m);
    if (fm == 0.0 || b - a < 1e-14 * std::max(1.0, std::abs(m))) return m;
    if ((fa < 0.0) == (fm < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Max of the polynomial q over [-R, R]: dense grid plus the critical points
/// of q recovered from sign changes of q'.
double poly_max(const std::vector<double>& q, double R) {
  const std::vector<double> dq = poly_derivative(q);
  const std::size_t cells = 20000;
  double best = -std::numeric_limits<double>::infinity();
  double prev_x = -R;
  double prev_d = poly_eval(dq, prev_x);
  best = std::max(best, poly_eval(q, prev_x));
  for (std::size_t i = 1; i <= cells; ++i) {
    const double x = -R + 2.0 * R * static_cast<double>(i) / static_cast<double>(cells);
    const double d = poly_eval(dq, x);
    best = std::max(best, poly_eval(q, x));
    if ((prev_d < 0.0) != (d < 0.0)) best = std::max(best, poly_eval(q, bisect_root(dq, prev_x, x)));
    prev_x = x;
    prev_d = d;
  }
  return best;
}

}  // namespace

double PotentialSpec::eval(double x) const { return poly_coeffs.empty() ? 0.0 : poly_eval(poly_coeffs, x); }

double PotentialSpec::eval_prime(double x) const {
  if (poly_coeffs.size() <= 1) return 0.0;
  return poly_eval(poly_derivative(poly_coeffs), x);
}

bool PotentialSpec::is_zero() const {
  for (double c : poly_coeffs)
    if (c != 0.0) return false;
  return true;
}

PotentialSpec certify_potential(const std::vector<double>& poly_coeffs) {
  std::size_t deg = poly_coeffs.size();
  while (deg > 0 && poly_coeffs[deg - 1] == 0.0) --deg;
  if (deg == 0) throw std::invalid_argument("potential: zero polynomial has no sign structure");
  --deg;  // highest power with a non-zero coefficient
  if (!poly_coeffs.empty() && poly_coeffs[0] != 0.0)
    throw std::invalid_argument("potential: constant term must vanish (phi(0) = 0)");
  if (deg % 2 == 0)
    throw std::invalid_argument("potential: even degree cannot satisfy the one-sided sign bound");
  if (poly_coeffs[deg] >= 0.0)
    throw std::invalid_argument(
        "potential: leading coefficient must be negative for the one-sided sign bound");

  PotentialSpec spec;
  spec.poly_coeffs.assign(poly_coeffs.begin(), poly_coeffs.begin() + deg + 1);
  spec.p0 = deg;

  const double lead = std::abs(spec.poly_coeffs[deg]);
  double other = 0.0;
  for (std::size_t i = 1; i < deg; ++i) other += std::abs(spec.poly_coeffs[i]);
  const double R = 1.0 + 4.0 * other / lead;  // beyond R the leading term dominates

  // a1: coefficient-sum bound, |phi| <= (sum |c_i|) (1 + |x|^{p0}).
  spec.a1 = other + lead;

  // a2 from the leading term; a3 = max over R of x phi(x) + a2 x^{p0+1}
  // (p0 odd, so |x|^{p0+1} = x^{p0+1} and the target is a polynomial).
  spec.a2 = 0.5 * lead;
  std::vector<double> g(deg + 2, 0.0);
  for (std::size_t i = 1; i <= deg; ++i) g[i + 1] = spec.poly_coeffs[i];
  g[deg + 1] += spec.a2;
  spec.a3 = std::max(0.0, poly_max(g, R));

  // a_phi = sup phi' (attained: phi' has even degree, negative leading term).
  spec.a_phi = poly_max(poly_derivative(spec.poly_coeffs), R);

  for (std::size_t i = 1; i <= deg; ++i) spec.p_exponents.push_back(deg - i);

  // verification lattice inside [-R, R]; the tail beyond R is covered by the
  // leading-term domination built into R
  const std::size_t n_check = 40001;
  const double slack = 1e-9 * std::max({1.0, spec.a1, spec.a3, std::abs(spec.a_phi)});
  for (std::size_t i = 0; i < n_check; ++i) {
    const double x = -R + 2.0 * R * static_cast<double>(i) / static_cast<double>(n_check - 1);
    const double ax = std::abs(x);
    const double phi = spec.eval(x);
    if (std::abs(phi) > spec.a1 * (1.0 + std::pow(ax, static_cast<double>(deg))) + slack ||
        x * phi > -spec.a2 * std::pow(ax, static_cast<double>(deg + 1)) + spec.a3 + slack ||
        spec.eval_prime(x) > spec.a_phi + slack)
      throw std::logic_error("potential certification failed its own verification lattice");
  }
  return spec;
}

double check_growth_bound(const PotentialSpec& spec) {
  if (spec.is_zero()) return 0.0;
  double best = 0.0;
  const double p = static_cast<double>(spec.p0);
  auto ratio = [&](double x) {
    const double ax = std::abs(x);
    return std::abs(spec.eval(x)) / (ax + std::pow(ax, p));
  };
  // log-spaced |x| covers both the small-x (linear term) and large-x
  // (leading term) limits of the ratio
  const std::size_t n = 200001;
  for (std::size_t i = 0; i < n; ++i) {
    const double ax = std::pow(10.0, -6.0 + 12.0 * static_cast<double>(i) / static_cast<double>(n - 1));
    best = std::max({best, ratio(ax), ratio(-ax)});
  }
  return best;
}

std::size_t dealiased_grid_size(std::size_t n_modes, std::size_t p0) {
  if (p0 <= 1) return n_modes;
  return ((p0 + 1 + 1) / 2) * n_modes;  // ceil((p0+1)/2) * N
}

SpectralField apply_potential(const SpectralField& u, const PotentialSpec& spec,
                              const CollocationGrid& g) {
  const std::size_t n = u.n_modes();
  if (spec.is_zero()) return SpectralField(n);
  if (g.n_points < dealiased_grid_size(n, spec.p0))
    throw std::invalid_argument("apply_potential: collocation grid too small (aliasing)");
  std::vector<double> vals = to_physical(u, g);
  for (double& v : vals) v = poly_eval(spec.poly_coeffs, v);
  return to_spectral(vals, g, n);
}

NoiseSpec NoiseSpec::diagonal(std::vector<double> q, std::size_t m_trace) {
  for (double v : q)
    if (v < 0.0) throw std::invalid_argument("noise amplitudes must be >= 0");
  NoiseSpec n;
  n.q = std::move(q);
  n.m_trace = m_trace;
  return n;
}

NoiseSpec NoiseSpec::power(double amplitude, double exponent, std::size_t cutoff,
                           std::size_t m_trace) {
  if (amplitude < 0.0) throw std::invalid_argument("noise amplitude must be >= 0");
  NoiseSpec n;
  n.power_family = true;
  n.amplitude = amplitude;
  n.exponent = exponent;
  n.m_trace = m_trace;
  n.q.resize(cutoff);
  for (std::size_t k = 1; k <= cutoff; ++k)
    n.q[k - 1] = amplitude / std::pow(static_cast<double>(k), exponent);
  return n;
}

bool power_trace_diverges(double exponent, std::size_t m) {
  // q_k^2 alpha_k^m ~ k^{2m - 2e}; the series converges iff 2e - 2m > 1
  return 2.0 * exponent - 2.0 * static_cast<double>(m) <= 1.0;
}

double trace_QAmQ(const NoiseSpec& noise, std::size_t m) {
  double acc = 0.0;
  for (std::size_t k = 1; k <= noise.q.size(); ++k)
    acc += noise.q[k - 1] * noise.q[k - 1] * std::pow(eigenvalue(k), static_cast<double>(m));
  return acc;
}

SpectralField sample_noise_increment(const NoiseSpec& noise, double dt, std::mt19937_64& rng) {
  if (dt <= 0.0) throw std::invalid_argument("sample_noise_increment: dt must be > 0");
  SpectralField out(noise.q.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  const double root_dt = std::sqrt(dt);
  for (std::size_t k = 0; k < noise.q.size(); ++k)
    out.coeffs[k] = noise.q[k] * root_dt * normal(rng);
  return out;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream_id) {
  // splitmix64 of (seed, stream_id) so nearby seeds decorrelate
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return std::mt19937_64(z);
}

}  // namespace memsim
