#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sccsim/dynamics.hpp"

namespace oracle {

using Vec7 = std::array<double, 7>;

// Classical RK4 on dp/dt = M p with a fixed step count.
inline Vec7 rk4(const sccsim::RateMatrix& m, Vec7 p, double t, int steps = 20000) {
  const double h = t / steps;
  auto f = [&](const Vec7& x) {
    Vec7 y{};
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) y[i] += m(i, j) * x[j];
    return y;
  };
  for (int s = 0; s < steps; ++s) {
    const Vec7 k1 = f(p);
    Vec7 tmp;
    for (int i = 0; i < 7; ++i) tmp[i] = p[i] + 0.5 * h * k1[i];
    const Vec7 k2 = f(tmp);
    for (int i = 0; i < 7; ++i) tmp[i] = p[i] + 0.5 * h * k2[i];
    const Vec7 k3 = f(tmp);
    for (int i = 0; i < 7; ++i) tmp[i] = p[i] + h * k3[i];
    const Vec7 k4 = f(tmp);
    for (int i = 0; i < 7; ++i) p[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return p;
}

// Trapezoid integral of a sampled function.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

inline double poisson_pmf(std::uint64_t k, double mu) {
  if (mu <= 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(k) * std::log(mu) - mu - std::lgamma(static_cast<double>(k) + 1.0));
}

inline std::vector<double> poisson_vector(double mu, std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) p[k] = poisson_pmf(k, mu);
  return p;
}

// NV- count pmf with conversion at t ~ Exp(tau) during [0, w]; closed form
// through the regularized lower incomplete gamma function.
inline std::vector<double> nv_minus_mixture(double bright_mhz, double dark_mhz, double tau_us, double w_us,
                                            std::size_t n) {
  const double survive = std::exp(-w_us / tau_us);
  const double c = 1.0 / ((bright_mhz - dark_mhz) * tau_us);
  const double lo = dark_mhz * w_us, hi = bright_mhz * w_us;
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = static_cast<double>(k) + 1.0;
    const double xl = (1.0 + c) * lo, xh = (1.0 + c) * hi;
    // Difference taken on the side of the smaller tail to avoid cancellation.
    const double g = xl > a ? boost::math::gamma_q(a, xl) - boost::math::gamma_q(a, xh)
                            : boost::math::gamma_p(a, xh) - boost::math::gamma_p(a, xl);
    p[k] = survive * poisson_pmf(k, hi) + c * std::exp(c * lo) * std::pow(1.0 + c, -a) * g;
  }
  return p;
}

// Exhaustive threshold scan, ties to the smaller k.
struct Scan {
  std::uint64_t k = 0;
  double favg = 0.0;
};
inline Scan brute_force_threshold(const std::vector<double>& bright, const std::vector<double>& dark,
                                  std::uint64_t kmax) {
  Scan best{0, -1.0};
  for (std::uint64_t k = 0; k <= kmax; ++k) {
    double pb = 0.0, pd = 0.0;
    for (std::size_t n = 0; n < bright.size(); ++n)
      if (n >= k) pb += bright[n];
    for (std::size_t n = 0; n < dark.size(); ++n)
      if (n < k) pd += dark[n];
    const double f = 0.5 * (pb + pd);
    if (f > best.favg + 1e-14) best = {k, f};
  }
  return best;
}

// Pearson chi-square p-value of observed counts against a pmf; bins with
// expected count < 5 are pooled into their neighbour.
inline double chi_square_p(const std::map<std::uint64_t, std::uint64_t>& observed, const std::vector<double>& pmf,
                           std::uint64_t shots) {
  std::size_t top = pmf.size();
  if (!observed.empty()) top = std::max<std::size_t>(top, observed.rbegin()->first + 1);
  std::vector<double> exp_c, obs_c;
  double e_acc = 0.0, o_acc = 0.0;
  for (std::size_t k = 0; k < top; ++k) {
    e_acc += (k < pmf.size() ? pmf[k] : 0.0) * static_cast<double>(shots);
    const auto it = observed.find(k);
    o_acc += it == observed.end() ? 0.0 : static_cast<double>(it->second);
    if (e_acc >= 5.0) {
      exp_c.push_back(e_acc);
      obs_c.push_back(o_acc);
      e_acc = o_acc = 0.0;
    }
  }
  if (!exp_c.empty()) {
    exp_c.back() += e_acc;
    obs_c.back() += o_acc;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < exp_c.size(); ++i) chi2 += (obs_c[i] - exp_c[i]) * (obs_c[i] - exp_c[i]) / exp_c[i];
  const double dof = static_cast<double>(exp_c.size()) - 1.0;
  if (dof < 1.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), chi2));
}

// One-sample Kolmogorov-Smirnov p-value against Exp(rate) (asymptotic).
inline double ks_exponential_p(std::vector<double> x, double rate) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 1.0 - std::exp(-rate * x[i]);
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double q = 0.0;
  for (int j = 1; j <= 100; ++j) q += 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
  return std::clamp(q, 0.0, 1.0);
}

// |observed/N - p| within z binomial standard errors (with a floor for p ~ 0).
inline bool within_binomial(double observed_fraction, double p, double n, double z = 3.0) {
  const double sigma = std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
  return std::abs(observed_fraction - p) <= z * sigma;
}

}  // namespace oracle
