#pragma once

// Charge-state discrimination from photon counts and the resonance
// fluorescence spin-readout baseline.

#include <cstdint>
#include <span>
#include <vector>

#include "sccsim/model.hpp"
#include "sccsim/parallel.hpp"
#include "sccsim/stochastic.hpp"

namespace sccsim {

enum class ChargeState { NVMinus, NV0 };

/// Dual-laser (E_y + E_1,2) charge readout. NV- emits at bright_kctps until
/// it converts to NV0 with the phenomenological lifetime; NV0 shows only
/// background.
struct ChargeReadoutModel {
  // Bright rate at which the 500 µs window reaches F = 0.9996 (2.5 kctps
  // dark, 400.7 ms lifetime); threshold 7 is optimal there.
  double bright_kctps = 42.1;
  double dark_kctps = 2.5;
  double nv_minus_lifetime_ms = 400.7;
  double window_us = 500.0;
  std::uint64_t threshold = 7;

  friend bool operator==(const ChargeReadoutModel&, const ChargeReadoutModel&) = default;
};

void validate(const ChargeReadoutModel& model);

/// 1 - exp(-window / lifetime). Throws ValidationError for lifetime <= 0.
double charge_flip_probability(double window_us, double lifetime_ms);

/// Normalized photon-count pmf. NV0: Poisson(dark w). NV-: survivors
/// Poisson(bright w) plus conversions at t ~ Exp(lifetime) with
/// Poisson(bright t + dark (w - t)), integrated over t by composite
/// Gauss-Legendre quadrature. Truncated where the tail mass is < 1e-13.
PhotonDistribution analytic_count_distribution(const ChargeReadoutModel& model, ChargeState charge);

struct ThresholdResult {
  std::uint64_t threshold = 0;  // n >= threshold classifies as bright
  double f_bright = 0.0;
  double f_dark = 0.0;
  double f_avg = 0.0;
};

/// Fidelities of a fixed threshold.
ThresholdResult threshold_fidelity(std::span<const double> bright, std::span<const double> dark,
                                   std::uint64_t threshold);

/// Threshold maximizing (P(n >= k | bright) + P(n < k | dark)) / 2 over
/// k in [0, max support + 1]; ties (within 1e-14) go to the smaller k. Throws
/// ValidationError for an empty distribution.
ThresholdResult optimize_threshold(std::span<const double> bright, std::span<const double> dark);

/// Half the L1 distance between two pmfs (missing tails count as zero).
double total_variation(std::span<const double> a, std::span<const double> b);

struct ChargeFidelityCell {
  double bright_kctps = 0.0;
  double lifetime_ms = 0.0;
  double window_us = 0.0;
  std::uint64_t threshold = 0;
  double fidelity = 0.0;
};

/// Best threshold fidelity over a window sweep for one (rate, lifetime).
ChargeFidelityCell best_charge_readout(double bright_kctps, double lifetime_ms, double dark_kctps,
                                       std::span<const double> window_grid_us);

/// Default window sweep: 25 µs to 5 ms.
std::vector<double> default_window_grid();

/// Surface over bright_grid x lifetime_grid, row-major [rate][lifetime].
std::vector<ChargeFidelityCell> charge_fidelity_map(std::span<const double> bright_grid_kctps,
                                                    std::span<const double> lifetime_grid_ms, double dark_kctps,
                                                    std::span<const double> window_grid_us,
                                                    Execution exec = Execution::Parallel);

/// Bright rate whose window-optimized fidelity equals `target` (bisection).
double locate_operating_point(double target_fidelity, double dark_kctps, double lifetime_ms,
                              std::span<const double> window_grid_us, double lo_kctps = 1.0,
                              double hi_kctps = 1000.0);

TwoStateEmitter two_state_emitter(const ChargeReadoutModel& model);

/// Monte Carlo counts from the two-state jump process.
PhotonHistogram sample_charge_histogram(const ChargeReadoutModel& model, ChargeState charge, std::uint64_t shots,
                                        std::uint64_t master_seed, Execution exec = Execution::Parallel);

struct ResonanceFluorescenceResult {
  double window_us = 0.0;
  std::uint64_t threshold = 0;
  double f0 = 0.0;
  double f1 = 0.0;
  double favg = 0.0;
  std::vector<ThresholdResult> per_window;  // aligned with the window grid
};

/// Spin readout by counting E_y fluorescence: |0> cycles until a spin flip
/// ends emission, |1> = |+1> stays dark. Photon statistics come from the
/// jump process; the optimum is taken over windows and thresholds.
ResonanceFluorescenceResult resonance_fluorescence_fidelity(const RateSet& rates, const DetectorModel& det,
                                                            std::span<const double> window_grid_us,
                                                            std::uint64_t shots, std::uint64_t master_seed,
                                                            Execution exec = Execution::Parallel);

}  // namespace sccsim
