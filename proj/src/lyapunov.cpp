#include "memsim/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace memsim {

DecayConstants decay_constants(double kappa, double delta, double a3, double trace_QQ) {
  DecayConstants c;
  c.c0 = std::min(2.0 * kappa * eigenvalue(1), (1.0 - kappa) * delta);
  if (kappa == 1.0) c.c0 = 2.0 * eigenvalue(1);  // memory absent, only diffusion decays
  if (c.c0 <= 0.0) throw std::invalid_argument("decay_constants: vanishing decay rate");
  c.C0 = (a3 * 1.0 + 0.5 * trace_QQ) / c.c0;
  c.beta = trace_QQ > 0.0 ? 0.5 * kappa * eigenvalue(1) / trace_QQ : 0.0;
  return c;
}

double psi(const SpectralField& u, const HistoryField& eta, double kappa, int m) {
  if (m < 0) throw std::invalid_argument("psi: m must be >= 0");
  const double r = static_cast<double>(m);
  return 0.5 * sobolev_norm_sq(u, r) + 0.5 * (1.0 - kappa) * m_norm_sq(eta, r);
}

double generator_psi0(const SpectralField& u, const HistoryField& eta, const ModelSpec& model,
                      double kappa, const CollocationGrid& colloc) {
  const double diffusion = -kappa * sobolev_norm_sq(u, 1.0);
  double transport = 0.0;
  if (kappa != 1.0) {
    // <T eta, eta>_{M^0} recovered from the margin identity
    transport = (1.0 - kappa) *
                (dissipativity_margin(eta) - 0.5 * model.kernel->delta * m_norm_sq(eta, 0.0));
  }
  const double reaction = inner(apply_potential(u, model.potential, colloc), u);
  return diffusion + transport + reaction + 0.5 * trace_QAmQ(model.noise, 0);
}

MonitorReport monitor_dissipation(const std::vector<TrajectoryPoint>& points,
                                  const DecayConstants& c, double tolerance) {
  if (points.empty()) throw std::invalid_argument("monitor_dissipation: empty record");
  MonitorReport rep;
  rep.name = "psi0_decay";
  rep.c0 = c.c0;
  rep.C0 = c.C0;
  rep.n_points = points.size();
  const double psi0_init = points.front().psi0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const double bound = std::exp(-c.c0 * p.t) * psi0_init + c.C0;
    const double margin = p.psi0 - bound;
    if (margin > worst) {
      worst = margin;
      rep.worst_t = p.t;
    }
  }
  rep.worst_margin = worst;
  rep.pass = worst <= tolerance;
  return rep;
}

MonitorReport monitor_boundedness(const std::vector<double>& t, const std::vector<double>& v,
                                  const std::string& name, double ratio_limit) {
  if (t.size() != v.size() || v.size() < 8)
    throw std::invalid_argument("monitor_boundedness: need >= 8 samples");
  MonitorReport rep;
  rep.name = name;
  rep.n_points = v.size();
  const std::size_t n = v.size();
  double q2_mean = 0.0;
  std::size_t q2_count = 0;
  for (std::size_t i = n / 4; i < n / 2; ++i, ++q2_count) q2_mean += v[i];
  q2_mean /= static_cast<double>(q2_count);
  double last_max = 0.0;
  for (std::size_t i = n / 2; i < n; ++i) last_max = std::max(last_max, v[i]);
  // worst_margin carries the plateau ratio; pass when the last half never
  // exceeds ratio_limit times the second-quarter mean
  rep.worst_margin = q2_mean > 0.0 ? last_max / q2_mean : 0.0;
  rep.pass = q2_mean > 0.0 ? rep.worst_margin <= ratio_limit : last_max == 0.0;
  return rep;
}

GeneratorConsistency generator_consistency(const ModelSpec& model, const StepperConfig& cfg,
                                           std::size_t ensemble, double t, double h,
                                           std::uint64_t seed, double bias_frac,
                                           std::size_t n_threads) {
  if (ensemble < 1000) throw std::invalid_argument("generator_consistency: ensemble too small");
  const auto n_pre = static_cast<std::size_t>(std::llround(t / cfg.dt));
  const auto n_post = static_cast<std::size_t>(std::llround(h / cfg.dt));
  if (n_post == 0) throw std::invalid_argument("generator_consistency: h below dt");

  std::vector<double> diff(ensemble, 0.0), gen(ensemble, 0.0);
  const CollocationGrid colloc(cfg.collocation_points > 0
                                   ? cfg.collocation_points
                                   : dealiased_grid_size(cfg.n_modes, model.potential.p0));

  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Simulator sim(model, cfg);
      std::mt19937_64 rng = make_rng(seed, i);
      for (std::size_t s = 0; s < n_pre; ++s) sim.step(rng);
      HistoryField eta = sim.eta_snapshot();
      const double psi_t = psi(sim.u(), eta, cfg.kappa, 0);
      gen[i] = generator_psi0(sim.u(), eta, model, cfg.kappa, colloc);
      for (std::size_t s = 0; s < n_post; ++s) sim.step(rng);
      const double psi_th = psi(sim.u(), sim.eta_snapshot(), cfg.kappa, 0);
      diff[i] = (psi_th - psi_t) / h - gen[i];
    }
  };

  const std::size_t nt = std::max<std::size_t>(1, n_threads);
  if (nt == 1) {
    work(0, ensemble);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (ensemble + nt - 1) / nt;
    for (std::size_t c = 0; c < nt; ++c) {
      const std::size_t lo = c * chunk;
      const std::size_t hi = std::min(ensemble, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  // fixed-order reduction keeps results identical across thread counts
  GeneratorConsistency out;
  double mean_diff = 0.0;
  for (std::size_t i = 0; i < ensemble; ++i) {
    mean_diff += diff[i];
    out.mean_gen += gen[i];
  }
  mean_diff /= static_cast<double>(ensemble);
  out.mean_gen /= static_cast<double>(ensemble);
  double var = 0.0;
  for (double d : diff) var += (d - mean_diff) * (d - mean_diff);
  var /= static_cast<double>(ensemble - 1);
  out.se = std::sqrt(var / static_cast<double>(ensemble));
  out.diff = std::abs(mean_diff);
  out.fd = mean_diff + out.mean_gen;
  out.pass = out.diff <= 4.0 * out.se + bias_frac * std::abs(out.mean_gen);
  return out;
}

}  // namespace memsim
