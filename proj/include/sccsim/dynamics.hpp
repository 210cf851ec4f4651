#pragma once

// Deterministic propagation of the seven-level rate equations.
//
// Channels (rate, from -> to), each active only under the stated condition:
//   Γ_ex,0              Ground0 -> ExcitedEy                 E_y on
//   Γ_ex,±1             Ground±1 -> ExcitedE12 (each)        E_1,2 on
//   Γ                   ExcitedEy -> Ground0                 radiative
//   Γ/2, Γ/2            ExcitedE12 -> Ground+1, Ground-1     radiative
//   α Γ_flip,Ey         ExcitedEy -> Ground+1
//   (1-α) Γ_flip,Ey     ExcitedEy -> Ground-1
//   Γ_flip,E12          ExcitedE12 -> Ground0
//   Γ_isc,Ey            ExcitedEy -> Singlet
//   Γ_isc,E12           ExcitedE12 -> Singlet
//   Γ_S · branching     Singlet -> Ground+1, Ground-1, Ground0
//   Γ_ion               ExcitedEy -> IonizedNV0               E_y on
//
// Every loss term is the negative of the matching gain term, so the
// generator conserves probability and NV0 is absorbing.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "sccsim/budget.hpp"
#include "sccsim/model.hpp"
#include "sccsim/parallel.hpp"

namespace sccsim {

struct Channel {
  Level from;
  Level to;
  double rate;      // MHz
  bool radiative;   // emits a photon that may be detected
};

/// Active channels with strictly positive rate, in a fixed order.
std::vector<Channel> transition_channels(const RateSet& rates, const LaserConfig& lasers);

using RateMatrix = Eigen::Matrix<double, 7, 7>;

/// Column convention: m(i, j) is the rate j -> i, diagonal is minus the
/// column's outgoing total. dp/dt = m p.
class Generator {
 public:
  Generator() : m_(RateMatrix::Zero()) {}
  explicit Generator(const RateMatrix& m);

  const RateMatrix& matrix() const { return m_; }
  double rate(Level to, Level from) const { return m_(index(to), index(from)); }
  double outgoing(Level from) const { return -m_(index(from), index(from)); }

 private:
  RateMatrix m_;
};

Generator build_generator(const RateSet& rates, const LaserConfig& lasers);

/// exp(g t) p0. Throws ValidationError for t < 0.
PopulationState propagate(const PopulationState& p0, const Generator& g, double t_us);

/// Cached exp(g t) for repeated application (SCC rounds, grids).
class Propagator {
 public:
  Propagator(const Generator& g, double t_us);
  PopulationState apply(const PopulationState& p) const;
  const RateMatrix& matrix() const { return e_; }

 private:
  RateMatrix e_;
};

/// Total radiative emission rate Γ (P_Ey + P_E12) in MHz.
double emission_flux_mhz(const RateSet& rates, const PopulationState& p);

/// Detected count rate (kctps) at each time of a nondecreasing grid:
/// η Γ (P_Ey + P_E12) plus the active-laser backgrounds.
std::vector<double> pl_trace(const RateSet& rates, const LaserConfig& lasers, const PopulationState& p0,
                             const DetectorModel& det, std::span<const double> t_grid_us);

/// NV- population 1 - P_NV0(t) from |0> under E_y + NIR with the given
/// ionization rate.
std::vector<double> ionization_curve(const RateSet& rates, double gamma_ion, std::span<const double> durations_us);

/// SCC schedule used by the efficiency and fidelity maps.
struct SccSchedule {
  int n_rounds = 10;
  double round_us = 2.0;
  bool aux_correction = true;
};

/// P(NV0) after the SCC schedule starting from |0>, NV-. gamma_flip
/// replaces rates.gamma_flip_ey.
double scc_efficiency(double gamma_ion, double gamma_flip, const RateSet& rates, bool use_aux_correction,
                      int n_rounds, double round_us);

/// Average spin-readout fidelity for each Γ_ion. Non-swept rates come
/// from `rates`.
std::vector<double> fidelity_map(double gamma_flip, std::span<const double> gamma_ion_grid_mhz,
                                 const ErrorBudget& budget, const RateSet& rates = {},
                                 const SccSchedule& schedule = {}, Execution exec = Execution::Parallel);

/// SCC efficiency surface, row-major [flip][ion].
std::vector<double> efficiency_map(std::span<const double> gamma_flip_grid_mhz,
                                   std::span<const double> gamma_ion_grid_mhz, const RateSet& rates = {},
                                   const SccSchedule& schedule = {}, Execution exec = Execution::Parallel);

}  // namespace sccsim
