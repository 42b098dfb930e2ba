#include "memsim/history.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace memsim {

HistoryField::HistoryField(std::size_t n, std::shared_ptr<const SGrid> g,
                           std::shared_ptr<const KernelSpec> k)
    : n_modes(n), coeffs(n * g->size(), 0.0), grid(std::move(g)), kernel(std::move(k)) {}

bool HistoryField::finite() const {
  for (double c : coeffs)
    if (!std::isfinite(c)) return false;
  return true;
}

HistoryField apply_Tmu(const HistoryField& eta) {
  const SGrid& g = *eta.grid;
  const std::size_t J = g.size();
  if (J < 2) throw std::invalid_argument("apply_Tmu: grid needs at least two nodes");
  HistoryField out(eta.n_modes, eta.grid, eta.kernel);
  for (std::size_t k = 0; k < eta.n_modes; ++k) {
    const double* in = &eta.coeffs[k * J];
    double* o = &out.coeffs[k * J];
    o[0] = -(in[0] - 0.0) / g.nodes[0];  // ghost eta(0) = 0
    for (std::size_t j = 1; j < J; ++j)
      o[j] = -(in[j] - in[j - 1]) / (g.nodes[j] - g.nodes[j - 1]);
  }
  return out;
}

double dissipativity_margin(const HistoryField& eta) {
  const SGrid& g = *eta.grid;
  const KernelSpec& k = *eta.kernel;
  const std::size_t J = g.size();

  // g_j = ||A^{1/2} eta(s_j)||^2
  std::vector<double> e(J, 0.0);
  for (std::size_t km = 0; km < eta.n_modes; ++km) {
    const double a = eigenvalue(km + 1);
    const double* row = &eta.coeffs[km * J];
    for (std::size_t j = 0; j < J; ++j) e[j] += a * row[j] * row[j];
  }

  // <T eta, eta>_{M^0} = (1/2) int mu' g  - (1/2) mu(s_max) g(s_max), using
  // the ghost value g(0) = 0 for the [0, s_1] cell.  Evaluating the mu'
  // route with the same weights as the norm makes the cancellation against
  // (delta/2)||eta||^2 exact for kernels with mu' = -delta*mu.
  double acc = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const double s = g.nodes[j];
    acc += g.weights[j] * (k.mu_prime(s) + k.delta * k.mu(s)) * e[j];
  }
  acc += 0.5 * g.nodes[0] * (k.mu_prime(g.nodes[0]) + k.delta * k.mu(g.nodes[0])) * e[0];
  return 0.5 * acc - 0.5 * k.mu(g.s_max) * e[J - 1];
}

HistoryField evolve_history(const HistoryField& eta, const SpectralField& u, double dt) {
  const SGrid& g = *eta.grid;
  const std::size_t J = g.size();
  if (J < 2) throw std::invalid_argument("evolve_history: grid needs at least two nodes");
  if (u.n_modes() != eta.n_modes) throw std::invalid_argument("evolve_history: mode mismatch");
  const double h_min = g.min_spacing();
  if (dt > h_min)
    throw std::invalid_argument("evolve_history: CFL violation, dt = " + std::to_string(dt) +
                                " exceeds the limiting grid spacing " + std::to_string(h_min));
  HistoryField out(eta.n_modes, eta.grid, eta.kernel);
  for (std::size_t k = 0; k < eta.n_modes; ++k) {
    const double* in = &eta.coeffs[k * J];
    double* o = &out.coeffs[k * J];
    const double uk = u.coeffs[k];
    o[0] = in[0] - dt / g.nodes[0] * (in[0] - 0.0) + dt * uk;
    for (std::size_t j = 1; j < J; ++j)
      o[j] = in[j] - dt / (g.nodes[j] - g.nodes[j - 1]) * (in[j] - in[j - 1]) + dt * uk;
  }
  return out;
}

SpectralField memory_integral(const HistoryField& eta) {
  const SGrid& g = *eta.grid;
  const KernelSpec& k = *eta.kernel;
  const std::size_t J = g.size();
  SpectralField out(eta.n_modes);
  std::vector<double> wmu(J);
  for (std::size_t j = 0; j < J; ++j) wmu[j] = g.weights[j] * k.mu(g.nodes[j]);
  for (std::size_t km = 0; km < eta.n_modes; ++km) {
    const double* row = &eta.coeffs[km * J];
    double acc = 0.0;
    for (std::size_t j = 0; j < J; ++j) acc += wmu[j] * row[j];
    out.coeffs[km] = eigenvalue(km + 1) * acc;
  }
  return out;
}

PastPath::PastPath(std::size_t n_modes, double dt, double span)
    : n_modes_(n_modes), dt_(dt), span_(span) {
  if (dt <= 0.0 || span <= 0.0) throw std::invalid_argument("PastPath: dt and span must be > 0");
  capacity_ = static_cast<std::size_t>(std::ceil(span / dt)) + 2;
  u_ring_.assign(capacity_ * n_modes_, 0.0);
  C_ring_.assign(capacity_ * n_modes_, 0.0);
}

void PastPath::set_initial_history(std::shared_ptr<const SGrid> grid,
                                   std::vector<double> eta0_coeffs) {
  if (eta0_coeffs.size() != n_modes_ * grid->size())
    throw std::invalid_argument("set_initial_history: size mismatch");
  eta0_grid_ = std::move(grid);
  eta0_ = std::move(eta0_coeffs);
}

std::size_t PastPath::oldest_index() const {
  return steps_ + 1 >= capacity_ ? steps_ + 1 - capacity_ : 0;
}

const double* PastPath::row(const std::vector<double>& ring, std::size_t time_index) const {
  return &ring[(time_index % capacity_) * n_modes_];
}

void PastPath::push(const SpectralField& u) {
  if (u.n_modes() != n_modes_) throw std::invalid_argument("PastPath::push: mode mismatch");
  if (!started_) {
    started_ = true;
    steps_ = 0;
    double* ur = &u_ring_[0];
    double* cr = &C_ring_[0];
    for (std::size_t k = 0; k < n_modes_; ++k) {
      ur[k] = u.coeffs[k];
      cr[k] = 0.0;
    }
    return;
  }
  const std::size_t prev = steps_;
  ++steps_;
  const double* up = row(u_ring_, prev);
  const double* cp = row(C_ring_, prev);
  double* un = &u_ring_[(steps_ % capacity_) * n_modes_];
  double* cn = &C_ring_[(steps_ % capacity_) * n_modes_];
  for (std::size_t k = 0; k < n_modes_; ++k) {
    un[k] = u.coeffs[k];
    cn[k] = cp[k] + 0.5 * dt_ * (up[k] + u.coeffs[k]);
  }
}

void PastPath::u_at(double tq, std::vector<double>& out) const {
  out.assign(n_modes_, 0.0);
  const double tol = 1e-9 * std::max(1.0, t());
  if (tq < -tol || tq > t() + tol) throw std::out_of_range("PastPath::u_at: time outside buffer");
  double f = std::clamp(tq / dt_, 0.0, static_cast<double>(steps_));
  const std::size_t i0 = std::min(static_cast<std::size_t>(f), steps_);
  const std::size_t i1 = std::min(i0 + 1, steps_);
  if (i0 < oldest_index()) throw std::out_of_range("PastPath::u_at: time evicted from buffer");
  const double frac = f - static_cast<double>(i0);
  const double* a = row(u_ring_, i0);
  const double* b = row(u_ring_, i1);
  for (std::size_t k = 0; k < n_modes_; ++k) out[k] = a[k] * (1.0 - frac) + b[k] * frac;
}

void PastPath::C_at(double tq, std::vector<double>& out) const {
  out.assign(n_modes_, 0.0);
  const double tol = 1e-9 * std::max(1.0, t());
  if (tq < -tol || tq > t() + tol) throw std::out_of_range("PastPath::C_at: time outside buffer");
  double f = std::clamp(tq / dt_, 0.0, static_cast<double>(steps_));
  const std::size_t i0 = static_cast<std::size_t>(f);
  const std::size_t i1 = std::min(i0 + 1, steps_);
  if (i0 < oldest_index()) throw std::out_of_range("PastPath::C_at: time evicted from buffer");
  const double frac = f - static_cast<double>(i0);
  const double* c0 = row(C_ring_, i0);
  const double* u0 = row(u_ring_, i0);
  const double* u1 = row(u_ring_, i1);
  // partial trapezoid cell: C(tq) = C_i0 + h*(u_i0 + u(tq))/2
  const double h = frac * dt_;
  for (std::size_t k = 0; k < n_modes_; ++k) {
    const double uq = u0[k] * (1.0 - frac) + u1[k] * frac;
    out[k] = c0[k] + 0.5 * h * (u0[k] + uq);
  }
}

void PastPath::eta0_at(double s, std::vector<double>& out) const {
  out.assign(n_modes_, 0.0);
  if (!eta0_grid_) return;
  const auto& nodes = eta0_grid_->nodes;
  const std::size_t J = nodes.size();
  if (s <= nodes.front()) {
    const double f = s / nodes.front();  // eta0(0) = 0 ghost
    for (std::size_t k = 0; k < n_modes_; ++k) out[k] = f * eta0_[k * J];
    return;
  }
  if (s >= nodes.back()) {
    for (std::size_t k = 0; k < n_modes_; ++k) out[k] = eta0_[k * J + (J - 1)];
    return;
  }
  std::size_t j = 1;
  while (nodes[j] < s) ++j;
  const double f = (s - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
  for (std::size_t k = 0; k < n_modes_; ++k)
    out[k] = eta0_[k * J + (j - 1)] * (1.0 - f) + eta0_[k * J + j] * f;
}

SpectralField PastPath::representation_eta(double tq, double s) const {
  if (s < 0.0) throw std::invalid_argument("representation_eta: s must be >= 0");
  const double reach = std::min(s, span_);
  if (tq - std::min(s, tq) < -1e-12 || tq > t() + 1e-9 ||
      (tq > reach && tq - reach < static_cast<double>(oldest_index()) * dt_ - 1e-9))
    throw std::out_of_range("representation_eta: buffer does not cover the requested window");
  SpectralField out(n_modes_);
  std::vector<double> c_now, c_then;
  C_at(tq, c_now);
  if (s <= tq) {
    C_at(tq - s, c_then);
    for (std::size_t k = 0; k < n_modes_; ++k) out.coeffs[k] = c_now[k] - c_then[k];
  } else {
    eta0_at(s - tq, c_then);
    for (std::size_t k = 0; k < n_modes_; ++k) out.coeffs[k] = c_now[k] + c_then[k];
  }
  return out;
}

HistoryField PastPath::history_on_grid(std::shared_ptr<const SGrid> grid,
                                       std::shared_ptr<const KernelSpec> kernel) const {
  HistoryField eta(n_modes_, grid, kernel);
  const std::size_t J = grid->size();
  const double tq = t();
  for (std::size_t j = 0; j < J; ++j) {
    SpectralField col = representation_eta(tq, grid->nodes[j]);
    for (std::size_t k = 0; k < n_modes_; ++k) eta.coeffs[k * J + j] = col.coeffs[k];
  }
  return eta;
}

void PastPath::weighted_history_sum(const std::vector<double>& s, const std::vector<double>& w,
                                    std::vector<double>& out) const {
  out.assign(n_modes_, 0.0);
  const double tq = t();
  std::vector<double> c_now, c_then;
  C_at(tq, c_now);
  double wsum_now = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    wsum_now += w[i];
    if (s[i] <= tq) {
      C_at(tq - s[i], c_then);
      for (std::size_t k = 0; k < n_modes_; ++k) out[k] -= w[i] * c_then[k];
    } else if (eta0_grid_) {
      eta0_at(s[i] - tq, c_then);
      for (std::size_t k = 0; k < n_modes_; ++k) out[k] += w[i] * c_then[k];
    }
  }
  for (std::size_t k = 0; k < n_modes_; ++k) out[k] += wsum_now * c_now[k];
}

double check_integration_by_parts(const PastPath& path, const KernelSpec& kernel,
                                  const SGrid& grid, double t) {
  const std::size_t n = path.n_modes();
  if (t > path.t() + 1e-9) throw std::out_of_range("check_integration_by_parts: t beyond path");
  if (t < grid.s_max) throw std::out_of_range("check_integration_by_parts: need t >= s_max");

  // K recovered from mu: K(s) = int_s^inf mu.
  auto K = [&](double s) -> double {
    if (kernel.family == KernelSpec::Family::Exponential)
      return kernel.mu0 / kernel.rate * std::exp(-kernel.rate * s);
    double acc = kernel.mu(grid.s_max) / kernel.delta;  // exponential tail estimate
    const auto& ts = kernel.tab_s;
    for (std::size_t i = ts.size() - 1; i >= 1; --i) {
      const double lo = std::max(s, ts[i - 1]);
      if (ts[i] <= lo) break;
      acc += 0.5 * (kernel.mu(lo) + kernel.mu(ts[i])) * (ts[i] - lo);
    }
    return acc;
  };

  // Refined trapezoid over [0, s_max]: each grid cell split in 4, plus the
  // [0, s_1] stub, with u and eta fetched from the ring buffer.
  std::vector<double> lhs(n, 0.0), rhs(n, 0.0), buf;
  auto add_point = [&](double s, double w) {
    path.u_at(t - s, buf);
    const double kw = w * K(s);
    for (std::size_t k = 0; k < n; ++k) lhs[k] += kw * buf[k];
    SpectralField eta_s = path.representation_eta(t, s);
    const double mw = w * kernel.mu(s);
    for (std::size_t k = 0; k < n; ++k) rhs[k] += mw * eta_s.coeffs[k];
  };
  const int sub = 4;
  double prev = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double s1 = grid.nodes[j];
    const double h = (s1 - prev) / sub;
    for (int i = 0; i < sub; ++i) {
      add_point(prev + h * i, 0.5 * h);
      add_point(prev + h * (i + 1), 0.5 * h);
    }
    prev = s1;
  }

  // Both sides carry the common factor -A; compare A-weighted fields.
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = eigenvalue(k + 1);
    num += a * a * (lhs[k] - rhs[k]) * (lhs[k] - rhs[k]);
    den += a * a * std::max(lhs[k] * lhs[k], rhs[k] * rhs[k]);
  }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

}  // namespace memsim
