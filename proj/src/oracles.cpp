#include "memsim/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "memsim/spectral.hpp"

namespace memsim {

namespace {

struct Mat2 {
  double a, b, c, d;
};

// exp(M t) applied to (x, y), via the scalar-shift decomposition
// M = p I + R with tr R = 0, exp(Mt) = e^{pt} (cosh(qt) I + sinh(qt)/q R)
// and q^2 = det(-R) sign-resolved into the trig branch when negative.
void expmat_apply(const Mat2& M, double t, double& x, double& y) {
  const double p = 0.5 * (M.a + M.d);
  const double ra = M.a - p, rd = M.d - p;  // rd = -ra
  const double q2 = ra * ra + M.b * M.c;
  double ch, shq;  // cosh(qt), sinh(qt)/q
  if (q2 > 1e-30) {
    const double q = std::sqrt(q2);
    ch = std::cosh(q * t);
    shq = std::sinh(q * t) / q;
  } else if (q2 < -1e-30) {
    const double w = std::sqrt(-q2);
    ch = std::cos(w * t);
    shq = std::sin(w * t) / w;
  } else {
    ch = 1.0;
    shq = t;
  }
  const double e = std::exp(p * t);
  const double nx = e * ((ch + shq * ra) * x + shq * M.b * y);
  const double ny = e * (shq * M.c * x + (ch + shq * rd) * y);
  x = nx;
  y = ny;
}

}  // namespace

PronySolution prony_solve(const std::vector<double>& u0, const std::vector<double>& m0,
                          double kappa, const KernelSpec& kernel,
                          const std::vector<double>& times) {
  if (kernel.family != KernelSpec::Family::Exponential || kernel.rate != kernel.delta)
    throw std::invalid_argument(
        "prony_solve: exact reduction holds only for mu(s) = mu0 exp(-delta s)");
  if (u0.size() != m0.size()) throw std::invalid_argument("prony_solve: size mismatch");

  PronySolution sol;
  sol.times = times;
  sol.u.resize(u0.size());
  sol.m.resize(u0.size());
  const double pi = 3.14159265358979323846;
  for (std::size_t k = 0; k < u0.size(); ++k) {
    const double kp = static_cast<double>(k + 1) * pi;
    const double alpha = kp * kp;
    const Mat2 M{-kappa * alpha, -(1.0 - kappa) * alpha, kernel.mu0 / kernel.delta,
                 -kernel.delta};
    sol.u[k].reserve(times.size());
    sol.m[k].reserve(times.size());
    for (double t : times) {
      double x = u0[k], y = m0[k];
      expmat_apply(M, t, x, y);
      sol.u[k].push_back(x);
      sol.m[k].push_back(y);
    }
  }
  return sol;
}

double ou_stationary_variance(std::size_t k, double q_k, double kappa) {
  if (k < 1 || kappa <= 0.0) throw std::invalid_argument("ou_stationary_variance: bad arguments");
  const double pi = 3.14159265358979323846;
  const double kp = static_cast<double>(k) * pi;
  return q_k * q_k / (2.0 * kappa * kp * kp);
}

double fine_quadrature(const std::function<double(double)>& f, double a, double b,
                       std::size_t n_cells, std::size_t refine) {
  if (b <= a || n_cells == 0 || refine == 0)
    throw std::invalid_argument("fine_quadrature: bad interval or resolution");
  const std::size_t n = n_cells * refine;
  const double h = (b - a) / static_cast<double>(n);
  double acc = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < n; ++i) acc += f(a + h * static_cast<double>(i));
  return acc * h;
}

}  // namespace memsim
