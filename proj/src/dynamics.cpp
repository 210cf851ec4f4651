#include "sccsim/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "sccsim/protocol.hpp"

namespace sccsim {

std::vector<Channel> transition_channels(const RateSet& r, const LaserConfig& lasers) {
  using L = Level;
  const double flip_plus = r.alpha * r.gamma_flip_ey;
  const double flip_minus = (1.0 - r.alpha) * r.gamma_flip_ey;
  const auto& b = r.singlet_branching;
  const double ion = lasers.gamma_ion();

  std::vector<Channel> all = {
      {L::Ground0, L::ExcitedEy, lasers.ey_on ? r.gamma_ex_0 : 0.0, false},
      {L::GroundPlus1, L::ExcitedE12, lasers.e12_on ? r.gamma_ex_pm1 : 0.0, false},
      {L::GroundMinus1, L::ExcitedE12, lasers.e12_on ? r.gamma_ex_pm1 : 0.0, false},
      {L::ExcitedEy, L::Ground0, r.gamma_emission, true},
      {L::ExcitedE12, L::GroundPlus1, 0.5 * r.gamma_emission, true},
      {L::ExcitedE12, L::GroundMinus1, 0.5 * r.gamma_emission, true},
      {L::ExcitedEy, L::GroundPlus1, flip_plus, false},
      {L::ExcitedEy, L::GroundMinus1, flip_minus, false},
      {L::ExcitedE12, L::Ground0, r.gamma_flip_e12, false},
      {L::ExcitedEy, L::Singlet, r.gamma_isc_ey, false},
      {L::ExcitedE12, L::Singlet, r.gamma_isc_e12, false},
      {L::Singlet, L::GroundPlus1, r.gamma_singlet_total * b.to_plus1, false},
      {L::Singlet, L::GroundMinus1, r.gamma_singlet_total * b.to_minus1, false},
      {L::Singlet, L::Ground0, r.gamma_singlet_total * b.to_0, false},
      {L::ExcitedEy, L::IonizedNV0, ion, false},
  };
  std::erase_if(all, [](const Channel& c) { return !(c.rate > 0.0); });
  return all;
}

Generator::Generator(const RateMatrix& m) : m_(m) {}

Generator build_generator(const RateSet& rates, const LaserConfig& lasers) {
  validate(rates);
  validate(lasers);
  RateMatrix m = RateMatrix::Zero();
  for (const auto& c : transition_channels(rates, lasers)) {
    m(index(c.to), index(c.from)) += c.rate;
    m(index(c.from), index(c.from)) -= c.rate;
  }
  return Generator(m);
}

namespace {

PopulationState apply_matrix(const RateMatrix& e, const PopulationState& p) {
  Eigen::Matrix<double, 7, 1> v;
  for (std::size_t i = 0; i < kNumLevels; ++i) v(static_cast<Eigen::Index>(i)) = p.values()[i];
  const Eigen::Matrix<double, 7, 1> out = e * v;
  PopulationState::Storage s{};
  for (std::size_t i = 0; i < kNumLevels; ++i) s[i] = out(static_cast<Eigen::Index>(i));
  return PopulationState::from_numeric(s);
}

}  // namespace

Propagator::Propagator(const Generator& g, double t_us) {
  if (!(t_us >= 0.0) || !std::isfinite(t_us)) throw ValidationError("propagation time must be >= 0");
  if (t_us == 0.0) {
    e_ = RateMatrix::Identity();
    return;
  }
  const RateMatrix scaled = g.matrix() * t_us;
  e_ = scaled.exp();
}

PopulationState Propagator::apply(const PopulationState& p) const { return apply_matrix(e_, p); }

PopulationState propagate(const PopulationState& p0, const Generator& g, double t_us) {
  return Propagator(g, t_us).apply(p0);
}

double emission_flux_mhz(const RateSet& rates, const PopulationState& p) {
  return rates.gamma_emission * (p[Level::ExcitedEy] + p[Level::ExcitedE12]);
}

std::vector<double> pl_trace(const RateSet& rates, const LaserConfig& lasers, const PopulationState& p0,
                             const DetectorModel& det, std::span<const double> t_grid_us) {
  if (t_grid_us.empty()) throw ValidationError("empty time grid");
  if (!std::is_sorted(t_grid_us.begin(), t_grid_us.end())) throw ValidationError("time grid must be nondecreasing");
  if (t_grid_us.front() < 0.0) throw ValidationError("negative time in grid");
  validate(det);
  const Generator g = build_generator(rates, lasers);
  const double bg_kctps = det.background_mhz(lasers) / kKctpsToMHz;
  std::vector<double> out;
  out.reserve(t_grid_us.size());
  // Step between grid points so long traces stay well conditioned.
  PopulationState p = p0;
  double t_prev = 0.0;
  for (double t : t_grid_us) {
    p = propagate(p, g, t - t_prev);
    t_prev = t;
    out.push_back(det.collection_efficiency * emission_flux_mhz(rates, p) / kKctpsToMHz + bg_kctps);
  }
  return out;
}

std::vector<double> ionization_curve(const RateSet& rates, double gamma_ion, std::span<const double> durations_us) {
  if (!(gamma_ion >= 0.0)) throw ValidationError("negative rate: gamma_ion");
  const Generator g = build_generator(rates, LaserConfig::scc(gamma_ion));
  const auto p0 = PopulationState::pure(Level::Ground0);
  std::vector<double> out;
  out.reserve(durations_us.size());
  for (double t : durations_us) {
    if (t < 0.0) throw ValidationError("negative duration");
    out.push_back(propagate(p0, g, t).nv_minus());
  }
  return out;
}

double scc_efficiency(double gamma_ion, double gamma_flip, const RateSet& rates, bool use_aux_correction,
                      int n_rounds, double round_us) {
  RateSet r = rates;
  r.gamma_flip_ey = gamma_flip;
  const auto seq = build_scc_sequence(n_rounds, round_us, LaserConfig::scc(gamma_ion), use_aux_correction);
  return 1.0 - run_sequence(seq, r, PopulationState::pure(Level::Ground0)).nv_minus();
}

namespace {

double fidelity_at(double gamma_ion, double gamma_flip, const ErrorBudget& budget, const RateSet& rates,
                   const SccSchedule& s) {
  RateSet r = rates;
  r.gamma_flip_ey = gamma_flip;
  const auto seq = build_scc_sequence(s.n_rounds, s.round_us, LaserConfig::scc(gamma_ion), s.aux_correction);
  auto nv0 = [&](const PopulationState& start) { return 1.0 - run_sequence(seq, r, start).nv_minus(); };
  return compose_fidelity(nv0(PopulationState::pure(Level::Ground0)), nv0(failed_init_state_0()),
                          nv0(PopulationState::pure(Level::GroundPlus1)), nv0(failed_init_state_1()), budget)
      .favg;
}

}  // namespace

std::vector<double> fidelity_map(double gamma_flip, std::span<const double> gamma_ion_grid_mhz,
                                 const ErrorBudget& budget, const RateSet& rates, const SccSchedule& schedule,
                                 Execution exec) {
  validate(budget);
  validate(rates);
  const auto n = static_cast<std::ptrdiff_t>(gamma_ion_grid_mhz.size());
  std::vector<double> out(gamma_ion_grid_mhz.size());
  if (exec == Execution::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[i] = fidelity_at(gamma_ion_grid_mhz[i], gamma_flip, budget, rates, schedule);
    }
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[i] = fidelity_at(gamma_ion_grid_mhz[i], gamma_flip, budget, rates, schedule);
    }
  }
  return out;
}

std::vector<double> efficiency_map(std::span<const double> gamma_flip_grid_mhz,
                                   std::span<const double> gamma_ion_grid_mhz, const RateSet& rates,
                                   const SccSchedule& s, Execution exec) {
  validate(rates);
  const std::size_t nf = gamma_flip_grid_mhz.size();
  const std::size_t ni = gamma_ion_grid_mhz.size();
  const auto cells = static_cast<std::ptrdiff_t>(nf * ni);
  std::vector<double> out(nf * ni);
  auto cell = [&](std::ptrdiff_t c) {
    const auto f = static_cast<std::size_t>(c) / ni;
    const auto i = static_cast<std::size_t>(c) % ni;
    out[static_cast<std::size_t>(c)] = scc_efficiency(gamma_ion_grid_mhz[i], gamma_flip_grid_mhz[f], rates,
                                                      s.aux_correction, s.n_rounds, s.round_us);
  };
  if (exec == Execution::Serial) {
    for (std::ptrdiff_t c = 0; c < cells; ++c) cell(c);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < cells; ++c) cell(c);
  }
  return out;
}

}  // namespace sccsim
