#pragma once

// Pulse sequences for the full SCC experiment and the end-to-end fidelity
// budget.
//
// Budget algebra for a prepared spin s with SCC result P_s(NV0):
//   D_s  = P_s(NV0) * F_dark + (1 - P_s(NV0)) * (1 - F_bright)   P(read dark | s)
//   F_0  = f_0 * D_0 + (1 - f_0) * D_0err
//   F_1  = f_1 * (1 - D_1) + (1 - f_1) * (1 - D_1err)
//   F    = (F_0 + F_1) / 2
// where f_s are the initialization fidelities, F_bright / F_dark come from
// charge_read_probabilities(), and the *err terms use the state a failed
// preparation leaves behind (|+-1> mixture for |0>, |0>/|-1> mixture for |1>).

#include <cstdint>
#include <utility>
#include <vector>

#include "sccsim/budget.hpp"
#include "sccsim/dynamics.hpp"
#include "sccsim/model.hpp"
#include "sccsim/parallel.hpp"
#include "sccsim/readout.hpp"

namespace sccsim {

struct PulseSequence {
  std::vector<PulseSegment> segments;

  double total_duration_us() const;
  friend bool operator==(const PulseSequence&, const PulseSequence&) = default;
};

void validate(const PulseSequence& seq);

/// n rounds of [E_y + NIR for round_us], each followed by a GroundMinus1 <->
/// Ground0 swap when aux_correction is set. Throws ValidationError for n < 1.
PulseSequence build_scc_sequence(int n_rounds, double round_us, const LaserConfig& scc_lasers, bool aux_correction,
                                 double rotation_fraction = 1.0);

/// Propagates segment by segment and applies each segment's swap.
PopulationState run_sequence(const PulseSequence& seq, const RateSet& rates, const PopulationState& start);

/// Population left by a failed preparation of |0> (equal |+1>, |-1>) and of
/// |1> (equal |0>, |-1>).
PopulationState failed_init_state_0();
PopulationState failed_init_state_1();

struct SccCurvePoint {
  int rounds = 0;
  double duration_us = 0.0;
  double nv_minus_0 = 1.0;  // P(NV-) for init |0>
  double nv_minus_1 = 1.0;  // P(NV-) for init |1> = |+1>
};

/// P(NV-) vs SCC duration for pure |0> and |+1> starts, n = 0..max_rounds.
/// initial_nv_minus scales both curves (1 with charge post-selection).
std::vector<SccCurvePoint> scc_curves(const RateSet& rates, const LaserConfig& scc_lasers, int max_rounds,
                                      double round_us, bool aux_correction, double initial_nv_minus = 1.0);

struct FidelityPoint {
  double duration_us = 0.0;
  double f0 = 0.0;
  double f1 = 0.0;
  double favg = 0.0;
};

struct FidelityCurve {
  std::vector<FidelityPoint> points;
  std::size_t argmax = 0;         // index of the largest favg (earliest on ties)
  std::size_t optimum = 0;        // earliest index within plateau_tolerance of the max
  double plateau_tolerance = 0.0;

  const FidelityPoint& best() const { return points.at(argmax); }
  const FidelityPoint& optimal() const { return points.at(optimum); }
};

/// Fidelity from P(NV0) for the correct and the failed-preparation start of
/// each hypothesis, composed per the budget algebra above.
FidelityPoint compose_fidelity(double nv0_given_0, double nv0_given_0_failed, double nv0_given_1,
                               double nv0_given_1_failed, const ErrorBudget& budget);

inline constexpr double kDefaultPlateauTolerance = 0.002;

/// F_avg over n = 0..max_rounds SCC rounds.
FidelityCurve average_fidelity_vs_duration(const RateSet& rates, const LaserConfig& scc_lasers,
                                           const ErrorBudget& budget, bool aux_correction, int max_rounds = 15,
                                           double round_us = 2.0,
                                           double plateau_tolerance = kDefaultPlateauTolerance);

/// Charge initialization before the spin preparation.
struct ChargeInit {
  double nv_minus_probability = 0.78;  // 532 nm reset
  bool post_select = true;             // measurement-based post-selection forces NV-
};

struct ShotHistograms {
  PhotonHistogram init_0;
  PhotonHistogram init_1;
};

/// Monte Carlo single-shot pipeline: imperfect preparation (Bernoulli per
/// budget), stochastic SCC trajectory through `seq`, then a charge-readout
/// photon count from `charge_model`. Deterministic for a fixed seed under
/// any execution plan.
ShotHistograms simulate_shot(const RateSet& rates, const PulseSequence& seq, const ErrorBudget& budget,
                             const DetectorModel& det, const ChargeReadoutModel& charge_model,
                             std::uint64_t master_seed, std::uint64_t shots, const ChargeInit& charge_init = {},
                             Execution exec = Execution::Parallel);

/// Initialization fidelities simulated from the preparation pulses instead
/// of taken as constants: 20 µs E_1,2 from a uniform ground mixture for |0>,
/// 200 µs E_y with an MW_AUX swap every `swap_interval_us` for |+1>.
ErrorBudget simulate_initialization_budget(const RateSet& rates, const ErrorBudget& base,
                                           double init0_us = 20.0, double init1_us = 200.0,
                                           double swap_interval_us = 1.0);

}  // namespace sccsim
