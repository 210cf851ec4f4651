#pragma once

// Parameter estimation: double-exponential PL fits, model-based scalar fits
// of Γ_ion and α, the zero-intercept power-coefficient fit and the
// saturation / background arithmetic.
//
// Multi-parameter fits use Levenberg-Marquardt with forward-difference
// Jacobians; scalar fits use a grid bracket followed by golden-section
// search. Both stop at relative step < 1e-8 or 500 iterations. The 1σ
// uncertainties come from (J^T J)^-1 scaled by RSS / (n - p).

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sccsim/model.hpp"

namespace sccsim {

struct FitParameter {
  std::string name;
  double estimate = 0.0;
  double sigma = 0.0;
};

struct FitResult {
  std::vector<FitParameter> parameters;
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;

  const FitParameter& at(std::string_view name) const;
};

struct LmOptions {
  int max_iterations = 500;
  double rel_step_tol = 1e-8;
  double initial_lambda = 1e-3;
};

/// Minimizes sum(residuals(x)^2) from x0.
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
struct LmResult {
  Eigen::VectorXd x;
  Eigen::MatrixXd covariance;  // scaled by RSS / (n - p)
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;
};
LmResult levenberg_marquardt(const ResidualFn& residuals, const Eigen::VectorXd& x0, const LmOptions& opts = {});

struct ScalarFitResult {
  double x = 0.0;
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Minimizes cost on [lo, hi]: scan `grid_points` evenly spaced points, then
/// golden-section inside the bracket around the best one.
ScalarFitResult bounded_scalar_minimize(const std::function<double(double)>& cost, double lo, double hi,
                                        int grid_points = 41, const LmOptions& opts = {});

/// y = A1 exp(-t/tau1) + A2 exp(-t/tau2) + C with tau1 <= tau2. Parameters
/// "A1", "tau1", "A2", "tau2", "C", and derived "initial" (A1 + A2 + C) and
/// "final" (C). Needs >= 6 points with increasing t. Constant data returns
/// A1 = A2 = 0. Throws ConvergenceError if no start converges.
FitResult fit_double_exponential(std::span<const double> t_us, std::span<const double> y_kctps);

/// Γ_ex,0 = PL / (PL_sat - PL) Γ. Throws ValidationError unless 0 <= pl < pl_sat.
double excitation_rate_from_saturation(double pl_kctps, double pl_sat_kctps, double gamma_mhz);

/// Zero-intercept least squares y = slope x; slope = Σxy / Σx².
/// Parameter "slope". Throws ValidationError if every x is zero.
FitResult fit_linear_origin(std::span<const double> x, std::span<const double> y);

/// Single-parameter fit of ionization_curve to NV- populations; Γ_ion
/// searched on [0, max_gamma_ion]. Parameter "gamma_ion".
FitResult fit_ionization_rate(std::span<const double> durations_us, std::span<const double> nv_minus_pop,
                              const RateSet& rates, double max_gamma_ion = 20.0);

struct ResidualPopulation {
  double fraction = 0.0;
  double sigma = 0.0;
  double init_fidelity() const { return 1.0 - fraction; }
};

/// 1σ uncertainties of the four count rates, propagated to first order.
struct CountRateSigmas {
  double c_eq = 0.0;
  double c_bg = 0.0;
  double c_bright = 0.0;
  double c_bright_bg = 0.0;
};

/// (c_eq - c_bg) / (c_bright - c_bright_bg). Throws ValidationError when the
/// bright reference is at or below its background.
ResidualPopulation residual_population(double c_eq, double c_bg, double c_bright, double c_bright_bg,
                                       const CountRateSigmas& sigmas = {});

/// Single-parameter fit of α in [0, 1] against the AUX-corrected |0> SCC
/// curve (P(NV-) vs duration, durations multiples of round_us).
FitResult fit_alpha(std::span<const std::pair<double, double>> scc_data, const RateSet& rates,
                    const LaserConfig& scc_lasers, double round_us = 2.0);

/// Collection efficiency that makes the peak of the PL trace from `start`
/// equal `plateau_kctps`. Returns (efficiency, time of the peak in µs).
std::pair<double, double> calibrate_collection_efficiency(const RateSet& rates, const LaserConfig& lasers,
                                                          const PopulationState& start, const DetectorModel& det,
                                                          double plateau_kctps, double search_us = 2.0);

}  // namespace sccsim
