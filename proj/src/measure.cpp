#include "memsim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "memsim/lyapunov.hpp"

namespace memsim {

namespace {

Moment batch_moment(const std::vector<double>& series, std::size_t n_batches) {
  Moment m;
  const std::size_t n = series.size();
  if (n == 0) return m;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  m.estimate = mean;
  const std::size_t B = std::min(n_batches, n);
  if (B < 2) return m;
  const std::size_t len = n / B;
  double var = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    double bm = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) bm += series[i];
    bm /= static_cast<double>(len);
    var += (bm - mean) * (bm - mean);
  }
  var /= static_cast<double>(B - 1);
  m.std_error = std::sqrt(var / static_cast<double>(B));
  return m;
}

double window_ratio(const std::vector<double>& v) {
  // last-quarter mean over second-quarter mean
  const std::size_t n = v.size();
  if (n < 8) return 0.0;
  double q2 = 0.0, q4 = 0.0;
  std::size_t c2 = 0, c4 = 0;
  for (std::size_t i = n / 4; i < n / 2; ++i, ++c2) q2 += v[i];
  for (std::size_t i = 3 * n / 4; i < n; ++i, ++c4) q4 += v[i];
  q2 /= static_cast<double>(c2);
  q4 /= static_cast<double>(c4);
  return q2 > 0.0 ? q4 / q2 : 0.0;
}

}  // namespace

MeasureEstimate krylov_bogoliubov(const ModelSpec& model, const StepperConfig& cfg, double T,
                                  std::uint64_t seed, const MeasureOptions& opts) {
  if (T <= opts.burn_in) throw std::invalid_argument("krylov_bogoliubov: T must exceed burn-in");
  Simulator sim(model, cfg);
  sim.set_initial(SpectralField(cfg.n_modes));
  std::mt19937_64 rng = make_rng(seed, 0);

  const auto n_steps = static_cast<std::size_t>(std::llround(T / cfg.dt));
  const std::size_t stride = std::max<std::size_t>(1, opts.record_stride);
  std::vector<double> r_samples;
  if (opts.with_tail) r_samples = log_spaced_r(model.sgrid->s_max, 64);

  std::vector<double> s_psi0, s_psi1, s_psi2, s_exp, s_tail, s_h1, s_h2, s_mixed;
  std::vector<std::vector<double>> s_uk(cfg.n_modes);

  for (std::size_t i = 1; i <= n_steps; ++i) {
    sim.step(rng);
    if (i % stride != 0) continue;
    if (sim.t() < opts.burn_in) continue;
    const SpectralField& u = sim.u();
    HistoryField eta = sim.eta_snapshot();
    const double h0 = sobolev_norm_sq(u, 0.0);
    const double h1 = sobolev_norm_sq(u, 1.0);
    const double p0 = 0.5 * h0 + 0.5 * (1.0 - cfg.kappa) * m_norm_sq(eta, 0.0);
    s_psi0.push_back(p0);
    s_h1.push_back(h1);
    if (opts.with_psi12) {
      const double h2 = sobolev_norm_sq(u, 2.0);
      s_psi1.push_back(0.5 * h1 + 0.5 * (1.0 - cfg.kappa) * m_norm_sq(eta, 1.0));
      s_psi2.push_back(0.5 * h2 + 0.5 * (1.0 - cfg.kappa) * m_norm_sq(eta, 2.0));
      s_h2.push_back(h2);
      s_mixed.push_back(h1 * h2);
    }
    if (opts.beta_exp > 0.0) s_exp.push_back(std::exp(opts.beta_exp * p0));
    if (opts.with_tail) s_tail.push_back(tail_sup(eta, r_samples));
    for (std::size_t k = 0; k < cfg.n_modes; ++k)
      s_uk[k].push_back(u.coeffs[k] * u.coeffs[k]);
  }

  MeasureEstimate est;
  est.T = T;
  est.burn_in = opts.burn_in;
  est.n_batches = opts.n_batches;
  est.n_samples = s_psi0.size();
  est.beta_exp = opts.beta_exp;
  est.moments["psi0"] = batch_moment(s_psi0, opts.n_batches);
  est.moments["h1_sq"] = batch_moment(s_h1, opts.n_batches);
  if (opts.with_psi12) {
    est.moments["psi1"] = batch_moment(s_psi1, opts.n_batches);
    est.moments["psi2"] = batch_moment(s_psi2, opts.n_batches);
    est.moments["h2_sq"] = batch_moment(s_h2, opts.n_batches);
    est.moments["mixed_h1_h2"] = batch_moment(s_mixed, opts.n_batches);
  }
  if (opts.beta_exp > 0.0) est.moments["exp_psi0"] = batch_moment(s_exp, opts.n_batches);
  if (opts.with_tail) {
    est.moments["tail_sup"] = batch_moment(s_tail, opts.n_batches);
    est.tail_sup_avg = est.moments["tail_sup"].estimate;
  }
  est.spectral_profile.resize(cfg.n_modes);
  for (std::size_t k = 0; k < cfg.n_modes; ++k) {
    const Moment mk = batch_moment(s_uk[k], opts.n_batches);
    est.moments["uk_sq_" + std::to_string(k + 1)] = mk;
    est.spectral_profile[k] = mk.estimate;
  }
  est.series["h1_sq"] = std::move(s_h1);
  if (opts.with_psi12) est.series["h2_sq"] = std::move(s_h2);
  return est;
}

TightnessReport tightness_diagnostic(const ModelSpec& model, const StepperConfig& cfg, double T,
                                     std::uint64_t seed, std::size_t record_stride,
                                     double ratio_limit) {
  Simulator sim(model, cfg);
  sim.set_initial(SpectralField(cfg.n_modes));
  std::mt19937_64 rng = make_rng(seed, 0);
  const auto n_steps = static_cast<std::size_t>(std::llround(T / cfg.dt));
  const std::vector<double> r_samples = log_spaced_r(model.sgrid->s_max, 64);

  double cum = 0.0;
  std::vector<double> ts, cums, transports, tails;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    sim.step(rng);
    cum += cfg.dt * sobolev_norm_sq(sim.u(), 1.0);
    if (i % record_stride != 0) continue;
    HistoryField eta = sim.eta_snapshot();
    ts.push_back(sim.t());
    cums.push_back(cum);
    transports.push_back(m_norm_sq(apply_Tmu(eta), 0.0));
    tails.push_back(tail_sup(eta, r_samples));
  }
  if (ts.size() < 8) throw std::invalid_argument("tightness_diagnostic: record too short");

  // the uniform bounds hold in expectation; instantaneous energy-type series
  // are heavy-tailed (pathwise max routinely 3-5x the mean), so the plateau
  // check runs on running time averages, the natural estimator of E[.]
  auto running_mean = [](std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      acc += v[i];
      v[i] = acc / static_cast<double>(i + 1);
    }
  };
  running_mean(transports);
  running_mean(tails);

  TightnessReport rep;
  // least-squares slope of the cumulative integral over the last 3/4
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = ts.size() / 4; i < ts.size(); ++i, ++n) {
    sx += ts[i];
    sy += cums[i];
    sxx += ts[i] * ts[i];
    sxy += ts[i] * cums[i];
  }
  const double dn = static_cast<double>(n);
  rep.cumulative_slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);

  MonitorReport mt = monitor_boundedness(ts, transports, "transport_norm", ratio_limit);
  MonitorReport mtail = monitor_boundedness(ts, tails, "tail_sup", ratio_limit);
  rep.transport_plateau = mt.worst_margin;
  rep.tail_plateau = mtail.worst_margin;
  rep.transport_bounded = mt.pass;
  rep.tail_bounded = mtail.pass;
  return rep;
}

StationarityVerdict stationarity_test(const MeasureEstimate& a, const MeasureEstimate& b,
                                      double z_max) {
  StationarityVerdict v;
  for (const auto& [name, ma] : a.moments) {
    auto it = b.moments.find(name);
    if (it == b.moments.end()) continue;
    const Moment& mb = it->second;
    const double denom = std::sqrt(ma.std_error * ma.std_error + mb.std_error * mb.std_error);
    const double z = denom > 0.0 ? (ma.estimate - mb.estimate) / denom
                                 : (ma.estimate == mb.estimate ? 0.0 : std::numeric_limits<double>::infinity());
    v.z_scores[name] = z;
    v.worst_z = std::max(v.worst_z, std::abs(z));
  }
  v.pass = v.worst_z <= z_max;
  return v;
}

double fit_spectral_decay(const std::vector<double>& mean_uk_sq, double floor_frac) {
  double peak = 0.0;
  for (double v : mean_uk_sq) peak = std::max(peak, v);
  if (peak <= 0.0) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < mean_uk_sq.size(); ++k) {
    if (mean_uk_sq[k] <= floor_frac * peak) continue;
    const double x = std::log(static_cast<double>(k + 1));
    const double y = std::log(mean_uk_sq[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

RegularityReport regularity_diagnostic(const ModelSpec& smooth, const ModelSpec& rough,
                                       const StepperConfig& cfg, double T, std::uint64_t seed,
                                       const MeasureOptions& opts) {
  if (smooth.potential.p1() >= 4 || rough.potential.p1() >= 4)
    throw std::invalid_argument(
        "regularity_diagnostic: derivative growth exponent must satisfy p1 < 4");
  for (const ModelSpec* m : {&smooth, &rough}) {
    if (m->noise.power_family &&
        power_trace_diverges(m->noise.exponent, m->noise.m_trace))
      throw std::invalid_argument(
          "regularity_diagnostic: noise trace diverges at its declared regularity order");
  }

  MeasureOptions mo = opts;
  mo.with_psi12 = true;
  const MeasureEstimate es = krylov_bogoliubov(smooth, cfg, T, seed, mo);
  const MeasureEstimate er = krylov_bogoliubov(rough, cfg, T, seed + 1, mo);

  RegularityReport rep;
  rep.h1_smooth = es.moments.at("h1_sq");
  rep.h2_smooth = es.moments.at("h2_sq");
  rep.h1_rough = er.moments.at("h1_sq");
  rep.mixed_smooth = es.moments.at("mixed_h1_h2");
  rep.decay_exp_smooth = fit_spectral_decay(es.spectral_profile);
  rep.decay_exp_rough = fit_spectral_decay(er.spectral_profile);
  rep.stability_ratio_smooth = window_ratio(es.series.at("h1_sq"));
  rep.stability_ratio_rough = window_ratio(er.series.at("h1_sq"));
  rep.smooth_steeper = rep.decay_exp_smooth < rep.decay_exp_rough;
  const bool stable = rep.stability_ratio_smooth <= 2.0 && rep.stability_ratio_rough <= 2.0 &&
                      window_ratio(es.series.at("h2_sq")) <= 2.0;
  rep.pass = rep.smooth_steeper && stable && std::isfinite(rep.h1_smooth.estimate) &&
             std::isfinite(rep.h1_rough.estimate) && std::isfinite(rep.h2_smooth.estimate);
  return rep;
}

}  // namespace memsim
