#include "memsim/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace memsim {

ControlConfig ControlConfig::checked(std::size_t n_hat, double kappa, double a_phi,
                                     bool literal_unweighted) {
  if (n_hat < 1) throw std::invalid_argument("control: n_hat must be >= 1");
  if (!(kappa * eigenvalue(n_hat) > a_phi))
    throw std::invalid_argument(
        "control: spectral gap condition kappa*alpha_{n_hat} > a_phi fails (" +
        std::to_string(kappa * eigenvalue(n_hat)) + " <= " + std::to_string(a_phi) + ")");
  ControlConfig c;
  c.n_hat = n_hat;
  c.literal_unweighted = literal_unweighted;
  return c;
}

Simulator::Simulator(ModelSpec model, StepperConfig cfg)
    : model_(std::move(model)),
      cfg_(cfg),
      colloc_(cfg.collocation_points > 0
                  ? cfg.collocation_points
                  : dealiased_grid_size(cfg.n_modes, model_.potential.p0)),
      u_(cfg.n_modes) {
  if (!(cfg_.kappa > 0.0 && cfg_.kappa <= 1.0))
    throw std::invalid_argument("stepper: kappa must lie in (0, 1]");
  if (cfg_.dt <= 0.0) throw std::invalid_argument("stepper: dt must be > 0");
  if (!model_.sgrid || !model_.kernel) throw std::invalid_argument("stepper: model incomplete");

  if (cfg_.backend == StepperConfig::Backend::RingBuffer) {
    const double span = cfg_.span > 0.0 ? cfg_.span : model_.sgrid->s_max;
    if (span < model_.sgrid->s_max)
      throw std::invalid_argument("stepper: ring-buffer span shorter than the age grid");
    path_ = std::make_unique<PastPath>(cfg_.n_modes, cfg_.dt, span);
    path_->push(u_);

    // refined trapezoid in s for the memory quadrature; the s = 0 endpoint
    // drops out because eta(t, 0) = 0
    const std::size_t refine = std::max<std::size_t>(1, cfg_.quad_refine);
    const auto& nodes = model_.sgrid->nodes;
    std::vector<double> pts{0.0};
    double prev = 0.0;
    for (double sj : nodes) {
      const double h = (sj - prev) / static_cast<double>(refine);
      for (std::size_t i = 1; i <= refine; ++i) pts.push_back(prev + h * static_cast<double>(i));
      prev = sj;
    }
    std::vector<double> w(pts.size(), 0.0);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double h = pts[i + 1] - pts[i];
      w[i] += 0.5 * h;
      w[i + 1] += 0.5 * h;
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
      quad_s_.push_back(pts[i]);
      quad_wmu_.push_back(w[i] * model_.kernel->mu(pts[i]));
    }
  } else {
    eta_ = HistoryField(cfg_.n_modes, model_.sgrid, model_.kernel);
    const double h_min = model_.sgrid->min_spacing();
    transport_substeps_ =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg_.dt / h_min)));
  }
}

void Simulator::set_initial(const SpectralField& u0) {
  if (u0.n_modes() != cfg_.n_modes) throw std::invalid_argument("set_initial: mode mismatch");
  u_ = u0;
  t_ = 0.0;
  if (path_) {
    path_ = std::make_unique<PastPath>(cfg_.n_modes, cfg_.dt,
                                       cfg_.span > 0.0 ? cfg_.span : model_.sgrid->s_max);
    path_->push(u_);
  } else {
    std::fill(eta_.coeffs.begin(), eta_.coeffs.end(), 0.0);
  }
}

void Simulator::set_initial(const SpectralField& u0, const HistoryField& eta0) {
  set_initial(u0);
  if (path_) {
    path_->set_initial_history(eta0.grid, eta0.coeffs);
  } else {
    if (eta0.grid != model_.sgrid) throw std::invalid_argument("set_initial: grid mismatch");
    eta_ = eta0;
  }
}

SpectralField Simulator::memory_term() const {
  if (path_) {
    path_->weighted_history_sum(quad_s_, quad_wmu_, scratch_);
    SpectralField out(cfg_.n_modes);
    for (std::size_t k = 0; k < cfg_.n_modes; ++k)
      out.coeffs[k] = eigenvalue(k + 1) * scratch_[k];
    return out;
  }
  return memory_integral(eta_);
}

SpectralField Simulator::phi_of_u() const { return apply_potential(u_, model_.potential, colloc_); }

SpectralField Simulator::noise_increment(std::mt19937_64& rng) const {
  SpectralField raw = sample_noise_increment(model_.noise, cfg_.dt, rng);
  SpectralField dw(cfg_.n_modes);
  const std::size_t n = std::min(raw.n_modes(), cfg_.n_modes);
  std::copy(raw.coeffs.begin(), raw.coeffs.begin() + static_cast<std::ptrdiff_t>(n),
            dw.coeffs.begin());
  return dw;
}

SpectralField Simulator::drift() const {
  SpectralField d = phi_of_u();
  const double one_minus_k = 1.0 - cfg_.kappa;
  SpectralField mem = one_minus_k != 0.0 ? memory_term() : SpectralField(cfg_.n_modes);
  for (std::size_t k = 0; k < cfg_.n_modes; ++k)
    d.coeffs[k] += -cfg_.kappa * eigenvalue(k + 1) * u_.coeffs[k] - one_minus_k * mem.coeffs[k];
  return d;
}

void Simulator::advance_history(const SpectralField& u_new) {
  if (path_) {
    path_->push(u_new);
    return;
  }
  const double dt_sub = cfg_.dt / static_cast<double>(transport_substeps_);
  for (std::size_t i = 0; i < transport_substeps_; ++i)
    eta_ = evolve_history(eta_, u_new, dt_sub);
}

void Simulator::core_step(const SpectralField& dw, const SpectralField* u_reference,
                          const ControlConfig* ctrl) {
  const double diffusion_w = (ctrl && ctrl->literal_unweighted) ? 1.0 : cfg_.kappa;
  const double memory_w = (ctrl && ctrl->literal_unweighted) ? 1.0 : 1.0 - cfg_.kappa;

  SpectralField phi = phi_of_u();
  SpectralField mem =
      memory_w != 0.0 ? memory_term() : SpectralField(cfg_.n_modes);

  SpectralField u_new(cfg_.n_modes);
  for (std::size_t k = 0; k < cfg_.n_modes; ++k) {
    double num = u_.coeffs[k] +
                 cfg_.dt * (-memory_w * mem.coeffs[k] + phi.coeffs[k]) + dw.coeffs[k];
    if (ctrl && k < ctrl->n_hat) {
      const double gain = cfg_.kappa * eigenvalue(ctrl->n_hat);
      num -= cfg_.dt * gain * (u_.coeffs[k] - u_reference->coeffs[k]);
    }
    u_new.coeffs[k] = num / (1.0 + cfg_.dt * diffusion_w * eigenvalue(k + 1));
  }

  const double nsq = sobolev_norm_sq(u_new, 0.0);
  if (!u_new.finite() || nsq > cfg_.blowup_threshold * cfg_.blowup_threshold)
    throw BlowupError(t_, nsq);

  advance_history(u_new);
  u_ = u_new;
  t_ += cfg_.dt;
}

void Simulator::step(std::mt19937_64& rng) { core_step(noise_increment(rng), nullptr, nullptr); }

void Simulator::step_with_increment(const SpectralField& dw) { core_step(dw, nullptr, nullptr); }

void Simulator::step_controlled(const SpectralField& dw, const SpectralField& u_reference,
                                const ControlConfig& ctrl) {
  core_step(dw, &u_reference, &ctrl);
}

HistoryField Simulator::eta_snapshot() const {
  if (path_) return path_->history_on_grid(model_.sgrid, model_.kernel);
  return eta_;
}

namespace {

TrajectoryPoint sample_point(const Simulator& sim, const RecordOptions& opts,
                             const std::vector<double>& r_samples) {
  TrajectoryPoint p;
  p.t = sim.t();
  const SpectralField& u = sim.u();
  const double kappa = sim.config().kappa;
  HistoryField eta = sim.eta_snapshot();
  p.h0_norm_sq = sobolev_norm_sq(u, 0.0);
  p.h1_norm_sq = sobolev_norm_sq(u, 1.0);
  p.eta_m0_sq = m_norm_sq(eta, 0.0);
  p.psi0 = 0.5 * p.h0_norm_sq + 0.5 * (1.0 - kappa) * p.eta_m0_sq;
  if (opts.with_psi12) {
    p.psi1 = 0.5 * p.h1_norm_sq + 0.5 * (1.0 - kappa) * m_norm_sq(eta, 1.0);
    p.psi2 = 0.5 * sobolev_norm_sq(u, 2.0) + 0.5 * (1.0 - kappa) * m_norm_sq(eta, 2.0);
  }
  if (opts.with_tail) p.tail_sup = tail_sup(eta, r_samples);
  return p;
}

}  // namespace

TrajectoryRecord run_trajectory(Simulator& sim, double T, std::mt19937_64& rng,
                                const RecordOptions& opts) {
  std::vector<double> r_samples = opts.r_samples;
  if (opts.with_tail && r_samples.empty())
    r_samples = log_spaced_r(sim.model().sgrid->s_max, 64);

  TrajectoryRecord rec;
  rec.points.push_back(sample_point(sim, opts, r_samples));
  const auto n_steps = static_cast<std::size_t>(std::llround(T / sim.config().dt));
  const std::size_t stride = std::max<std::size_t>(1, opts.stride);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    sim.step(rng);
    if (i % stride == 0 || i == n_steps)
      rec.points.push_back(sample_point(sim, opts, r_samples));
  }
  rec.final_u = sim.u();
  rec.final_eta = sim.eta_snapshot();
  return rec;
}

PairedRecord run_coupled_pair(const ModelSpec& model, const StepperConfig& cfg,
                              const ControlConfig& ctrl, const SpectralField& u0, double T,
                              std::uint64_t seed, const RecordOptions& opts, bool shared_noise) {
  Simulator ref(model, cfg);
  Simulator hat(model, cfg);
  ref.set_initial(u0);
  hat.set_initial(SpectralField(cfg.n_modes));
  std::mt19937_64 rng_ref = make_rng(seed, 0);
  std::mt19937_64 rng_hat = make_rng(seed, 1);

  auto sample_pair = [&](PairedRecord& out) {
    TrajectoryPoint p;
    p.t = ref.t();
    SpectralField du = ref.u() - hat.u();
    HistoryField eta_ref = ref.eta_snapshot();
    HistoryField eta_hat = hat.eta_snapshot();
    HistoryField deta = eta_ref;
    for (std::size_t i = 0; i < deta.coeffs.size(); ++i) deta.coeffs[i] -= eta_hat.coeffs[i];
    p.diff_sq = sobolev_norm_sq(du, 0.0) + m_norm_sq(deta, 0.0);
    p.h0_norm_sq = sobolev_norm_sq(ref.u(), 0.0);
    p.eta_m0_sq = m_norm_sq(eta_ref, 0.0);
    p.psi0 = 0.5 * p.h0_norm_sq + 0.5 * (1.0 - cfg.kappa) * p.eta_m0_sq;
    out.points.push_back(p);
    out.hat_norm_sq.push_back(sobolev_norm_sq(hat.u(), 0.0) + m_norm_sq(eta_hat, 0.0));
  };

  PairedRecord rec;
  sample_pair(rec);
  const auto n_steps = static_cast<std::size_t>(std::llround(T / cfg.dt));
  const std::size_t stride = std::max<std::size_t>(1, opts.stride);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const SpectralField u_ref_prev = ref.u();
    const SpectralField dw = ref.noise_increment(rng_ref);
    ref.step_with_increment(dw);
    if (shared_noise) {
      hat.step_controlled(dw, u_ref_prev, ctrl);
    } else {
      hat.step_controlled(hat.noise_increment(rng_hat), u_ref_prev, ctrl);
    }
    if (i % stride == 0 || i == n_steps) sample_pair(rec);
  }
  return rec;
}

}  // namespace memsim
