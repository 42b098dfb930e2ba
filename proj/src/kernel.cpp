#include "memsim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "memsim/history.hpp"

namespace memsim {

double SGrid::spacing(std::size_t j) const {
  if (j < 1 || j > nodes.size()) throw std::out_of_range("SGrid::spacing");
  return j == 1 ? nodes[0] : nodes[j - 1] - nodes[j - 2];
}

double SGrid::min_spacing() const {
  double h = nodes[0];
  for (std::size_t j = 1; j < nodes.size(); ++j) h = std::min(h, nodes[j] - nodes[j - 1]);
  return h;
}

KernelSpec KernelSpec::exponential(double mu0, double rate, double delta) {
  if (mu0 <= 0.0 || rate <= 0.0 || delta <= 0.0)
    throw std::invalid_argument("exponential kernel needs positive mu0, rate, delta");
  KernelSpec k;
  k.family = Family::Exponential;
  k.mu0 = mu0;
  k.rate = rate;
  k.delta = delta;
  return k;
}

double KernelSpec::mu(double s) const {
  if (family == Family::Exponential) return mu0 * std::exp(-rate * s);
  if (tab_s.empty()) throw std::logic_error("tabulated kernel has no samples");
  if (s <= tab_s.front()) return tab_mu.front();
  if (s >= tab_s.back()) return tab_mu.back();
  auto it = std::upper_bound(tab_s.begin(), tab_s.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - tab_s.begin());
  const double f = (s - tab_s[i - 1]) / (tab_s[i] - tab_s[i - 1]);
  return tab_mu[i - 1] * (1.0 - f) + tab_mu[i] * f;
}

double KernelSpec::mu_prime(double s) const {
  if (family == Family::Exponential) return -rate * mu(s);
  if (tab_s.size() < 2) throw std::logic_error("tabulated kernel needs >= 2 samples");
  // slope of the segment containing s (one-sided at the ends)
  std::size_t i = static_cast<std::size_t>(
      std::upper_bound(tab_s.begin(), tab_s.end(), s) - tab_s.begin());
  i = std::clamp<std::size_t>(i, 1, tab_s.size() - 1);
  return (tab_mu[i] - tab_mu[i - 1]) / (tab_s[i] - tab_s[i - 1]);
}

double KernelSpec::integral() const {
  if (family == Family::Exponential) return mu0 / rate;
  double acc = 0.0;
  for (std::size_t i = 1; i < tab_s.size(); ++i)
    acc += 0.5 * (tab_mu[i] + tab_mu[i - 1]) * (tab_s[i] - tab_s[i - 1]);
  return acc;
}

ValidationReport validate_M_delta(const KernelSpec& kernel, const SGrid& grid) {
  if (grid.size() == 0) throw std::invalid_argument("validate_M_delta: empty grid");
  ValidationReport rep;
  const bool closed_form = kernel.family == KernelSpec::Family::Exponential;
  const double scale = std::max(1.0, kernel.mu0 * kernel.delta);
  const double slack = (closed_form ? 1e-10 : 1e-6) * scale;

  double worst = -std::numeric_limits<double>::infinity();
  double worst_node = grid.nodes[0];
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double s = grid.nodes[j];
    const double m = kernel.mu(s);
    if (!(m > 0.0)) {
      rep.accepted = false;
      rep.worst_node = s;
      rep.message = "kernel not positive at s = " + std::to_string(s);
      return rep;
    }
    double margin;
    if (closed_form) {
      margin = kernel.mu_prime(s) + kernel.delta * m;
    } else {
      // mu' + delta*mu <= 0 iff exp(delta*s)*mu is non-increasing; on sampled
      // data the secant of that product is exact, while a difference of mu
      // alone would misjudge convex kernels on a coarse geometric grid
      const std::size_t jn = (j + 1 < grid.size()) ? j + 1 : j - 1;
      const std::size_t lo = std::min(j, jn), hi = std::max(j, jn);
      const double slo = grid.nodes[lo], shi = grid.nodes[hi];
      const double wlo = std::exp(kernel.delta * slo) * kernel.mu(slo);
      const double whi = std::exp(kernel.delta * shi) * kernel.mu(shi);
      // relative excess: immune to sampling noise amplified by tiny spacings
      margin = (whi / wlo - 1.0) * kernel.delta * m;
    }
    if (margin > worst) {
      worst = margin;
      worst_node = s;
    }
  }
  rep.worst_margin = worst;
  rep.worst_node = worst_node;
  rep.accepted = worst <= slack;
  if (!rep.accepted)
    rep.message = "mu' + delta*mu = " + std::to_string(worst) +
                  " > 0 at s = " + std::to_string(worst_node);
  return rep;
}

KernelSpec mu_from_K(const std::function<double(double)>& K, const SGrid& grid, double delta) {
  KernelSpec k;
  k.family = KernelSpec::Family::Tabulated;
  k.delta = delta;
  k.tab_s = grid.nodes;
  k.tab_mu.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double s = grid.nodes[j];
    const double h = std::max(1e-7, 1e-7 * s);
    const double d = (K(s + h) - K(std::max(0.0, s - h))) / (h + std::min(s, h));
    k.tab_mu[j] = -d;
    if (!(k.tab_mu[j] > 0.0))
      throw std::invalid_argument("mu_from_K: -K' not positive at s = " + std::to_string(s));
  }
  const double h0 = 1e-7;
  k.mu0 = -(K(h0) - K(0.0)) / h0;
  return k;
}

KernelSpec load_tabulated_kernel(const std::string& path, double delta) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel file: " + path);
  KernelSpec k;
  k.family = KernelSpec::Family::Tabulated;
  k.delta = delta;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    double s, m;
    if (ls >> s >> m) {
      if (!k.tab_s.empty() && s <= k.tab_s.back())
        throw std::runtime_error("kernel file: s values must be strictly increasing");
      k.tab_s.push_back(s);
      k.tab_mu.push_back(m);
    }
  }
  if (k.tab_s.size() < 2) throw std::runtime_error("kernel file: need at least two samples");
  k.mu0 = k.tab_mu.front();
  return k;
}

SGrid build_sgrid(double delta, std::size_t n_nodes, double tail_tol, double mu0, double s_min) {
  if (n_nodes < 8) throw std::invalid_argument("build_sgrid: need at least 8 nodes");
  if (tail_tol <= 0.0 || delta <= 0.0 || mu0 <= 0.0)
    throw std::invalid_argument("build_sgrid: parameters must be positive");
  const double s_max = std::log(mu0 / (delta * tail_tol)) / delta;
  if (s_max <= 0.0) throw std::invalid_argument("build_sgrid: tail tolerance already met at s = 0");

  SGrid g;
  g.tail_tol = tail_tol;
  g.s_max = s_max;
  g.s_min = s_min > 0.0 ? s_min : std::min(1e-4, s_max / 100.0);
  if (g.s_min >= s_max) throw std::invalid_argument("build_sgrid: s_min >= s_max");
  const std::size_t J = n_nodes;
  g.ratio = std::pow(s_max / g.s_min, 1.0 / static_cast<double>(J - 1));
  g.nodes.resize(J);
  for (std::size_t j = 0; j < J; ++j)
    g.nodes[j] = g.s_min * std::pow(g.ratio, static_cast<double>(j));
  g.nodes.back() = s_max;  // kill accumulated round-off at the end point
  g.weights.assign(J, 0.0);
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const double h = g.nodes[j + 1] - g.nodes[j];
    g.weights[j] += 0.5 * h;
    g.weights[j + 1] += 0.5 * h;
  }

  // SGrid invariants, checked against the reference exponential kernel.
  double quad = 0.0;
  for (std::size_t j = 0; j < J; ++j) quad += g.weights[j] * mu0 * std::exp(-delta * g.nodes[j]);
  quad += 0.5 * g.s_min * (mu0 + mu0 * std::exp(-delta * g.s_min));  // [0, s_1] stub
  const double exact = mu0 / delta * (1.0 - std::exp(-delta * s_max));
  if (std::abs(quad - exact) > g.quad_tol * exact)
    throw std::invalid_argument(
        "build_sgrid: quadrature tolerance unreachable with " + std::to_string(J) +
        " nodes; increase the node count");
  return g;
}

namespace {

// ||A^{1/2} eta(s_j)||^2 per node, weighted by alpha^{1+beta}.
std::vector<double> node_energy(const HistoryField& a, const HistoryField& b, double beta) {
  const std::size_t J = a.n_nodes();
  std::vector<double> e(J, 0.0);
  for (std::size_t k = 0; k < a.n_modes; ++k) {
    const double w = std::pow(eigenvalue(k + 1), 1.0 + beta);
    const double* ra = &a.coeffs[k * J];
    const double* rb = &b.coeffs[k * J];
    for (std::size_t j = 0; j < J; ++j) e[j] += w * ra[j] * rb[j];
  }
  return e;
}

void require_compatible(const HistoryField& a, const HistoryField& b) {
  if (a.grid != b.grid || a.kernel != b.kernel || a.n_modes != b.n_modes)
    throw std::invalid_argument("history fields live on different grids");
}

// Integral of the piecewise-linear interpolant of f over [a,b] within the grid.
double clipped_trapezoid(const SGrid& g, const std::vector<double>& f, double a, double b) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    const double s0 = g.nodes[j], s1 = g.nodes[j + 1];
    const double lo = std::max(a, s0), hi = std::min(b, s1);
    if (hi <= lo) continue;
    const double h = s1 - s0;
    const double f_lo = f[j] + (f[j + 1] - f[j]) * (lo - s0) / h;
    const double f_hi = f[j] + (f[j + 1] - f[j]) * (hi - s0) / h;
    acc += 0.5 * (f_lo + f_hi) * (hi - lo);
  }
  return acc;
}

}  // namespace

double weighted_inner(const HistoryField& eta1, const HistoryField& eta2, double beta) {
  require_compatible(eta1, eta2);
  const SGrid& g = *eta1.grid;
  const KernelSpec& k = *eta1.kernel;
  const std::vector<double> e = node_energy(eta1, eta2, beta);
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) acc += g.weights[j] * k.mu(g.nodes[j]) * e[j];
  return acc;
}

double tail_function(const HistoryField& eta, double r) {
  if (r < 1.0) throw std::domain_error("tail_function: r must be >= 1");
  const SGrid& g = *eta.grid;
  const KernelSpec& k = *eta.kernel;
  const std::size_t J = g.size();
  std::vector<double> f = node_energy(eta, eta, 0.0);
  double full = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    f[j] *= k.mu(g.nodes[j]);
    full += g.weights[j] * f[j];
  }
  const double middle = clipped_trapezoid(g, f, 1.0 / r, r);
  return std::max(0.0, full - middle);
}

double tail_sup(const HistoryField& eta, const std::vector<double>& r_samples) {
  double best = 0.0;
  for (double r : r_samples) best = std::max(best, r * tail_function(eta, r));
  return best;
}

double E_beta_norm_sq(const HistoryField& eta, double beta,
                      const std::vector<double>& r_samples) {
  return m_norm_sq(eta, beta) + m_norm_sq(apply_Tmu(eta), 0.0) + tail_sup(eta, r_samples);
}

std::vector<double> log_spaced_r(double r_max, std::size_t count) {
  if (count < 2 || r_max <= 1.0) return {1.0};
  std::vector<double> r(count);
  const double step = std::log(r_max) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) r[i] = std::exp(step * static_cast<double>(i));
  return r;
}

}  // namespace memsim
