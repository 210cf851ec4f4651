#include "sccsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "sccsim/dynamics.hpp"
#include "sccsim/protocol.hpp"

namespace sccsim {

const FitParameter& FitResult::at(std::string_view name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no fit parameter named " + std::string(name));
}

namespace {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& r0) {
  Eigen::MatrixXd j(r0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd xh = x;
    const double h = 1e-7 * std::max(std::abs(x(k)), 1e-3);
    xh(k) += h;
    j.col(k) = (f(xh) - r0) / h;
  }
  return j;
}

Eigen::MatrixXd scaled_covariance(const Eigen::MatrixXd& j, double rss) {
  const auto n = j.rows();
  const auto p = j.cols();
  const Eigen::MatrixXd jtj = j.transpose() * j;
  const Eigen::MatrixXd inv = jtj.completeOrthogonalDecomposition().pseudoInverse();
  const double s2 = n > p ? rss / static_cast<double>(n - p) : 0.0;
  return inv * s2;
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& residuals, const Eigen::VectorXd& x0, const LmOptions& opts) {
  LmResult out;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = residuals(x);
  double cost = r.squaredNorm();
  double lambda = opts.initial_lambda;
  Eigen::MatrixXd j = numeric_jacobian(residuals, x, r);

  for (int it = 1; it <= opts.max_iterations; ++it) {
    out.iterations = it;
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd grad = j.transpose() * r;
    Eigen::MatrixXd a = jtj;
    for (Eigen::Index k = 0; k < a.rows(); ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-12);
    const Eigen::VectorXd step = a.ldlt().solve(-grad);
    if (!step.allFinite()) {
      lambda *= 10.0;
      if (lambda > 1e16) break;
      continue;
    }
    const Eigen::VectorXd x_new = x + step;
    const Eigen::VectorXd r_new = residuals(x_new);
    const double cost_new = r_new.allFinite() ? r_new.squaredNorm() : std::numeric_limits<double>::infinity();
    if (cost_new <= cost) {
      const bool small = step.norm() <= opts.rel_step_tol * (x.norm() + opts.rel_step_tol);
      x = x_new;
      r = r_new;
      cost = cost_new;
      lambda = std::max(lambda / 10.0, 1e-12);
      j = numeric_jacobian(residuals, x, r);
      if (small || cost == 0.0) {
        out.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) {
        // No descent direction left: stationary point.
        out.converged = true;
        break;
      }
    }
  }
  out.x = x;
  out.rss = cost;
  out.covariance = scaled_covariance(j, cost);
  return out;
}

ScalarFitResult bounded_scalar_minimize(const std::function<double(double)>& cost, double lo, double hi,
                                        int grid_points, const LmOptions& opts) {
  if (!(hi > lo)) throw ValidationError("empty search interval");
  grid_points = std::max(grid_points, 3);
  const double dx = (hi - lo) / (grid_points - 1);
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double c = cost(lo + i * dx);
    if (c < best_cost) {
      best_cost = c;
      best = i;
    }
  }
  double a = lo + std::max(best - 1, 0) * dx;
  double b = lo + std::min(best + 1, grid_points - 1) * dx;
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = cost(x1);
  double f2 = cost(x2);
  ScalarFitResult out;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    out.iterations = it;
    if (b - a <= opts.rel_step_tol * (std::abs(a) + std::abs(b)) + 1e-14) {
      out.converged = true;
      break;
    }
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = cost(x2);
    }
  }
  // Endpoints of the bracket may beat the interior when the minimum sits on
  // the search boundary.
  out.x = 0.5 * (a + b);
  out.cost = cost(out.x);
  for (double edge : {a, b}) {
    const double c = cost(edge);
    if (c < out.cost) {
      out.x = edge;
      out.cost = c;
    }
  }
  return out;
}

namespace {

/// Scalar least-squares fit with uncertainty from a central-difference
/// Jacobian at the optimum.
FitResult scalar_least_squares(const std::function<Eigen::VectorXd(double)>& residuals, double lo, double hi,
                               const std::string& name) {
  const auto cost = [&](double x) { return residuals(x).squaredNorm(); };
  const auto best = bounded_scalar_minimize(cost, lo, hi);
  const Eigen::VectorXd r = residuals(best.x);
  const double h = 1e-6 * std::max(std::abs(best.x), 1e-3);
  const double xp = std::min(best.x + h, hi);
  const double xm = std::max(best.x - h, lo);
  const Eigen::VectorXd jac = (residuals(xp) - residuals(xm)) / (xp - xm);
  const double jtj = jac.squaredNorm();
  const auto n = r.size();
  const double s2 = n > 1 ? best.cost / static_cast<double>(n - 1) : 0.0;
  const double sigma = jtj > 0.0 ? std::sqrt(s2 / jtj) : 0.0;
  FitResult out;
  out.parameters.push_back({name, best.x, sigma});
  out.rss = best.cost;
  out.converged = best.converged && std::isfinite(best.cost);
  out.iterations = best.iterations;
  return out;
}

}  // namespace

FitResult fit_double_exponential(std::span<const double> t_us, std::span<const double> y_kctps) {
  if (t_us.size() != y_kctps.size()) throw ValidationError("t and y differ in length");
  if (t_us.size() < 6) throw ValidationError("double-exponential fit needs at least 6 points");
  // Canonical order so the fit does not depend on input order.
  std::vector<std::size_t> order(t_us.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return t_us[a] < t_us[b]; });
  const auto n = static_cast<Eigen::Index>(t_us.size());
  Eigen::VectorXd t(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i) = t_us[order[static_cast<std::size_t>(i)]];
    y(i) = y_kctps[order[static_cast<std::size_t>(i)]];
  }
  if (!y.allFinite() || !t.allFinite()) throw ValidationError("non-finite data");

  const double mean = y.mean();
  const double spread = (y.array() - mean).abs().maxCoeff();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (spread <= 1e-12 * std::max(1.0, std::abs(mean))) {
    FitResult flat;
    flat.parameters = {{"A1", 0.0, 0.0}, {"tau1", nan, 0.0}, {"A2", 0.0, 0.0}, {"tau2", nan, 0.0},
                       {"C", mean, 0.0},  {"initial", mean, 0.0}, {"final", mean, 0.0}};
    flat.converged = true;
    return flat;
  }

  // x = (A1, log tau1, A2, log tau2, C)
  const ResidualFn residuals = [&](const Eigen::VectorXd& x) {
    const double tau1 = std::exp(x(1));
    const double tau2 = std::exp(x(3));
    return Eigen::VectorXd(x(0) * (-t.array() / tau1).exp() + x(2) * (-t.array() / tau2).exp() + x(4) - y.array());
  };
  // Amplitudes by linear least squares for fixed time constants.
  auto linear_amplitudes = [&](double tau1, double tau2) {
    Eigen::MatrixXd basis(n, 3);
    basis.col(0) = (-t.array() / tau1).exp();
    basis.col(1) = (-t.array() / tau2).exp();
    basis.col(2).setOnes();
    return Eigen::VectorXd(basis.colPivHouseholderQr().solve(y));
  };

  const double span = std::max(t(n - 1) - t(0), 1e-12);
  const std::array<std::pair<double, double>, 5> starts = {
      {{span / 50, span / 5}, {span / 20, span / 3}, {span / 100, span / 10}, {span / 10, span}, {span / 30, span / 2}}};
  LmResult best;
  best.rss = std::numeric_limits<double>::infinity();
  for (const auto& [tau1, tau2] : starts) {
    const Eigen::VectorXd amp = linear_amplitudes(tau1, tau2);
    Eigen::VectorXd x0(5);
    x0 << amp(0), std::log(tau1), amp(1), std::log(tau2), amp(2);
    auto r = levenberg_marquardt(residuals, x0);
    if (r.converged && std::isfinite(r.rss) && r.rss < best.rss) best = std::move(r);
  }
  if (!std::isfinite(best.rss)) throw ConvergenceError("double-exponential fit did not converge");

  Eigen::VectorXd x = best.x;
  Eigen::MatrixXd cov = best.covariance;
  if (x(1) > x(3)) {
    Eigen::PermutationMatrix<5> perm;
    perm.indices() << 2, 3, 0, 1, 4;
    x = perm * x;
    cov = perm * cov * perm.transpose();
  }
  auto sd = [&](int i) { return std::sqrt(std::max(cov(i, i), 0.0)); };
  const double tau1 = std::exp(x(1));
  const double tau2 = std::exp(x(3));
  // initial = A1 + A2 + C
  Eigen::Vector<double, 5> g_init;
  g_init << 1, 0, 1, 0, 1;
  const double sigma_init = std::sqrt(std::max(double(g_init.transpose() * cov * g_init), 0.0));

  FitResult out;
  out.parameters = {{"A1", x(0), sd(0)},
                    {"tau1", tau1, tau1 * sd(1)},
                    {"A2", x(2), sd(2)},
                    {"tau2", tau2, tau2 * sd(3)},
                    {"C", x(4), sd(4)},
                    {"initial", x(0) + x(2) + x(4), sigma_init},
                    {"final", x(4), sd(4)}};
  out.rss = best.rss;
  out.converged = best.converged;
  out.iterations = best.iterations;
  return out;
}

double excitation_rate_from_saturation(double pl_kctps, double pl_sat_kctps, double gamma_mhz) {
  if (!(pl_kctps >= 0.0)) throw ValidationError("PL must be >= 0");
  if (!(pl_kctps < pl_sat_kctps)) throw ValidationError("PL must be below saturation PL");
  return pl_kctps / (pl_sat_kctps - pl_kctps) * gamma_mhz;
}

FitResult fit_linear_origin(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("x and y differ in length");
  if (x.empty()) throw ValidationError("linear fit needs at least one point");
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  if (sxx == 0.0) throw ValidationError("all x are zero");
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) rss += (y[i] - slope * x[i]) * (y[i] - slope * x[i]);
  const double sigma = x.size() > 1 ? std::sqrt(rss / static_cast<double>(x.size() - 1) / sxx) : 0.0;
  FitResult out;
  out.parameters.push_back({"slope", slope, sigma});
  out.rss = rss;
  out.converged = true;
  return out;
}

FitResult fit_ionization_rate(std::span<const double> durations_us, std::span<const double> nv_minus_pop,
                              const RateSet& rates, double max_gamma_ion) {
  if (durations_us.size() != nv_minus_pop.size()) throw ValidationError("durations and data differ in length");
  if (durations_us.empty()) throw ValidationError("no data");
  for (double v : nv_minus_pop) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("population data outside [0,1]");
  }
  validate(rates);
  const Eigen::Map<const Eigen::VectorXd> data(nv_minus_pop.data(), static_cast<Eigen::Index>(nv_minus_pop.size()));
  auto residuals = [&](double g) {
    const auto model = ionization_curve(rates, g, durations_us);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(model.data(), data.size()) - data);
  };
  auto fit = scalar_least_squares(residuals, 0.0, max_gamma_ion, "gamma_ion");
  if (!fit.converged) throw ConvergenceError("ionization-rate fit did not converge");
  return fit;
}

ResidualPopulation residual_population(double c_eq, double c_bg, double c_bright, double c_bright_bg,
                                       const CountRateSigmas& s) {
  const double signal = c_bright - c_bright_bg;
  if (!(signal > 0.0)) throw ValidationError("bright reference at or below its background");
  const double frac = (c_eq - c_bg) / signal;
  // d/dc_eq = 1/S, d/dc_bg = -1/S, d/dc_bright = -frac/S, d/dc_bright_bg = frac/S
  const double var = (s.c_eq * s.c_eq + s.c_bg * s.c_bg + frac * frac * (s.c_bright * s.c_bright +
                                                                         s.c_bright_bg * s.c_bright_bg)) /
                     (signal * signal);
  return {frac, std::sqrt(var)};
}

FitResult fit_alpha(std::span<const std::pair<double, double>> scc_data, const RateSet& rates,
                    const LaserConfig& scc_lasers, double round_us) {
  if (scc_data.empty()) throw ValidationError("no data");
  if (!(round_us > 0.0)) throw ValidationError("round duration must be > 0");
  std::vector<int> rounds;
  int max_rounds = 0;
  for (const auto& [d, p] : scc_data) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("population data outside [0,1]");
    const long n = std::lround(d / round_us);
    if (n < 0 || std::abs(n * round_us - d) > 1e-9 * std::max(1.0, d)) {
      throw ValidationError("SCC durations must be nonnegative multiples of the round duration");
    }
    rounds.push_back(static_cast<int>(n));
    max_rounds = std::max(max_rounds, static_cast<int>(n));
  }
  auto residuals = [&](double alpha) {
    RateSet r = rates;
    r.alpha = alpha;
    const auto curve = scc_curves(r, scc_lasers, max_rounds, round_us, true);
    Eigen::VectorXd res(static_cast<Eigen::Index>(scc_data.size()));
    for (std::size_t i = 0; i < scc_data.size(); ++i) {
      res(static_cast<Eigen::Index>(i)) = curve[static_cast<std::size_t>(rounds[i])].nv_minus_0 - scc_data[i].second;
    }
    return res;
  };
  auto fit = scalar_least_squares(residuals, 0.0, 1.0, "alpha");
  if (!fit.converged) throw ConvergenceError("alpha fit did not converge");
  return fit;
}

std::pair<double, double> calibrate_collection_efficiency(const RateSet& rates, const LaserConfig& lasers,
                                                          const PopulationState& start, const DetectorModel& det,
                                                          double plateau_kctps, double search_us) {
  const Generator g = build_generator(rates, lasers);
  auto flux = [&](double t) { return emission_flux_mhz(rates, propagate(start, g, t)); };
  const auto peak = bounded_scalar_minimize([&](double t) { return -flux(t); }, 0.0, search_us, 401);
  const double flux_kctps = flux(peak.x) / kKctpsToMHz;
  if (!(flux_kctps > 0.0)) throw ValidationError("no emission to calibrate against");
  const double signal = plateau_kctps - det.background_mhz(lasers) / kKctpsToMHz;
  if (!(signal > 0.0)) throw ValidationError("plateau at or below background");
  const double eff = signal / flux_kctps;
  if (eff > 1.0) throw ValidationError("plateau requires collection efficiency above 1");
  return {eff, peak.x};
}

}  // namespace sccsim
