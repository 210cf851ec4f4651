#include "sccsim/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "sccsim/stochastic.hpp"
#include "shot_loop.hpp"

namespace sccsim {

double PulseSequence::total_duration_us() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration_us;
  return t;
}

void validate(const PulseSequence& seq) {
  for (const auto& s : seq.segments) validate(s);
}

PulseSequence build_scc_sequence(int n_rounds, double round_us, const LaserConfig& scc_lasers, bool aux_correction,
                                 double rotation_fraction) {
  if (n_rounds < 1) throw ValidationError("n_rounds must be >= 1");
  PulseSegment round{round_us, scc_lasers, std::nullopt};
  if (aux_correction) round.mw_swap = MicrowaveSwap{Level::GroundMinus1, Level::Ground0, rotation_fraction};
  validate(round);
  return PulseSequence{std::vector<PulseSegment>(static_cast<std::size_t>(n_rounds), round)};
}

PopulationState run_sequence(const PulseSequence& seq, const RateSet& rates, const PopulationState& start) {
  validate(rates);
  validate(seq);
  PopulationState p = start;
  // Consecutive identical segments reuse one matrix exponential.
  const PulseSegment* cached_for = nullptr;
  std::optional<Propagator> prop;
  for (const auto& seg : seq.segments) {
    if (!cached_for || cached_for->lasers != seg.lasers || cached_for->duration_us != seg.duration_us) {
      prop.emplace(build_generator(rates, seg.lasers), seg.duration_us);
      cached_for = &seg;
    }
    p = prop->apply(p);
    if (seg.mw_swap) p = p.swapped(*seg.mw_swap);
  }
  return p;
}

PopulationState failed_init_state_0() {
  PopulationState::Storage s{};
  s[index(Level::GroundPlus1)] = 0.5;
  s[index(Level::GroundMinus1)] = 0.5;
  return PopulationState(s);
}

PopulationState failed_init_state_1() {
  PopulationState::Storage s{};
  s[index(Level::Ground0)] = 0.5;
  s[index(Level::GroundMinus1)] = 0.5;
  return PopulationState(s);
}

std::vector<SccCurvePoint> scc_curves(const RateSet& rates, const LaserConfig& scc_lasers, int max_rounds,
                                      double round_us, bool aux_correction, double initial_nv_minus) {
  if (max_rounds < 0) throw ValidationError("n grid must be nonempty");
  if (!(initial_nv_minus >= 0.0 && initial_nv_minus <= 1.0)) throw ValidationError("initial NV- out of range");
  const auto one_round = build_scc_sequence(1, round_us, scc_lasers, aux_correction);
  auto p0 = PopulationState::pure(Level::Ground0);
  auto p1 = PopulationState::pure(Level::GroundPlus1);
  std::vector<SccCurvePoint> out;
  out.push_back({0, 0.0, initial_nv_minus, initial_nv_minus});
  const Propagator prop(build_generator(rates, scc_lasers), round_us);
  const auto& swap = one_round.segments.front().mw_swap;
  for (int n = 1; n <= max_rounds; ++n) {
    p0 = prop.apply(p0);
    p1 = prop.apply(p1);
    if (swap) {
      p0 = p0.swapped(*swap);
      p1 = p1.swapped(*swap);
    }
    out.push_back({n, n * round_us, initial_nv_minus * p0.nv_minus(), initial_nv_minus * p1.nv_minus()});
  }
  return out;
}

FidelityPoint compose_fidelity(double nv0_given_0, double nv0_given_0_failed, double nv0_given_1,
                               double nv0_given_1_failed, const ErrorBudget& budget) {
  const auto read = charge_read_probabilities(budget);
  auto read_dark = [&](double nv0) { return nv0 * read.dark_as_dark + (1.0 - nv0) * (1.0 - read.bright_as_bright); };
  FidelityPoint f;
  f.f0 = budget.init_fidelity_0 * read_dark(nv0_given_0) + (1.0 - budget.init_fidelity_0) * read_dark(nv0_given_0_failed);
  f.f1 = budget.init_fidelity_1 * (1.0 - read_dark(nv0_given_1)) +
         (1.0 - budget.init_fidelity_1) * (1.0 - read_dark(nv0_given_1_failed));
  f.favg = 0.5 * (f.f0 + f.f1);
  return f;
}

FidelityCurve average_fidelity_vs_duration(const RateSet& rates, const LaserConfig& scc_lasers,
                                           const ErrorBudget& budget, bool aux_correction, int max_rounds,
                                           double round_us, double plateau_tolerance) {
  validate(budget);
  validate(rates);
  if (max_rounds < 1) throw ValidationError("max_rounds must be >= 1");
  const Propagator prop(build_generator(rates, scc_lasers), round_us);
  const std::optional<MicrowaveSwap> swap =
      aux_correction ? std::optional(MicrowaveSwap{Level::GroundMinus1, Level::Ground0, 1.0}) : std::nullopt;

  std::array<PopulationState, 4> p = {PopulationState::pure(Level::Ground0), failed_init_state_0(),
                                      PopulationState::pure(Level::GroundPlus1), failed_init_state_1()};
  auto nv0 = [](const PopulationState& s) { return s[Level::IonizedNV0]; };

  FidelityCurve curve;
  curve.plateau_tolerance = plateau_tolerance;
  for (int n = 0; n <= max_rounds; ++n) {
    if (n > 0) {
      for (auto& s : p) {
        s = prop.apply(s);
        if (swap) s = s.swapped(*swap);
      }
    }
    auto f = compose_fidelity(nv0(p[0]), nv0(p[1]), nv0(p[2]), nv0(p[3]), budget);
    f.duration_us = n * round_us;
    curve.points.push_back(f);
  }
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (curve.points[i].favg > curve.points[curve.argmax].favg) curve.argmax = i;
  }
  const double fmax = curve.points[curve.argmax].favg;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (curve.points[i].favg >= fmax - plateau_tolerance) {
      curve.optimum = i;
      break;
    }
  }
  return curve;
}

namespace {

// Level a failed preparation leaves behind, chosen with equal weights.
Level failed_level(bool prepare_one, ShotRng& rng) {
  const bool first = rng.bernoulli(0.5);
  if (prepare_one) return first ? Level::Ground0 : Level::GroundMinus1;
  return first ? Level::GroundPlus1 : Level::GroundMinus1;
}

}  // namespace

ShotHistograms simulate_shot(const RateSet& rates, const PulseSequence& seq, const ErrorBudget& budget,
                             const DetectorModel& det, const ChargeReadoutModel& charge_model,
                             std::uint64_t master_seed, std::uint64_t shots, const ChargeInit& charge_init,
                             Execution exec) {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  validate(rates);
  validate(seq);
  validate(budget);
  validate(det);
  validate(charge_model);
  std::vector<JumpTable> tables;
  tables.reserve(seq.segments.size());
  for (const auto& s : seq.segments) tables.emplace_back(rates, s.lasers);
  const TwoStateEmitter emitter = two_state_emitter(charge_model);

  auto one_shot = [&](bool prepare_one, std::uint64_t i) -> std::uint64_t {
    ShotRng rng(master_seed, prepare_one ? 1 : 0, i);
    bool nv_minus = charge_init.post_select || rng.bernoulli(charge_init.nv_minus_probability);
    if (nv_minus) {
      const double f_init = prepare_one ? budget.init_fidelity_1 : budget.init_fidelity_0;
      Level start = prepare_one ? Level::GroundPlus1 : Level::Ground0;
      if (!rng.bernoulli(f_init)) start = failed_level(prepare_one, rng);
      nv_minus = run_segments_stochastic(seq.segments, tables, start, rng) != Level::IonizedNV0;
    }
    return sample_two_state_count(emitter, nv_minus, charge_model.window_us, rng);
  };

  ShotHistograms out;
  out.init_0 = detail::histogram_over_shots(shots, exec, [&](std::uint64_t i) { return one_shot(false, i); });
  out.init_1 = detail::histogram_over_shots(shots, exec, [&](std::uint64_t i) { return one_shot(true, i); });
  return out;
}

ErrorBudget simulate_initialization_budget(const RateSet& rates, const ErrorBudget& base, double init0_us,
                                           double init1_us, double swap_interval_us) {
  if (!(swap_interval_us > 0.0)) throw ValidationError("swap interval must be > 0");
  PopulationState::Storage mix{};
  mix[index(Level::Ground0)] = mix[index(Level::GroundPlus1)] = mix[index(Level::GroundMinus1)] = 1.0 / 3.0;
  const PopulationState ground_mixture(mix);

  ErrorBudget b = base;
  const auto after_e12 = propagate(ground_mixture, build_generator(rates, LaserConfig::e12_only()), init0_us);
  b.init_fidelity_0 = after_e12[Level::Ground0];

  const int rounds = std::max(1, static_cast<int>(std::lround(init1_us / swap_interval_us)));
  PulseSegment seg{init1_us / rounds, LaserConfig::ey_only(), MicrowaveSwap{}};
  const PulseSequence pump{std::vector<PulseSegment>(static_cast<std::size_t>(rounds), seg)};
  b.init_fidelity_1 = run_sequence(pump, rates, ground_mixture)[Level::GroundPlus1];
  return b;
}

}  // namespace sccsim
