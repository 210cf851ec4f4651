#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sccsim/config.hpp"
#include "sccsim/protocol.hpp"

using namespace sccsim;

TEST_SUITE("protocol") {

TEST_CASE("SCC sequence construction") {
  const auto lasers = LaserConfig::scc(2.79);
  const auto one = build_scc_sequence(1, 2.0, lasers, false);
  REQUIRE(one.segments.size() == 1);
  CHECK_FALSE(one.segments[0].mw_swap.has_value());

  const auto five = build_scc_sequence(5, 2.0, lasers, true);
  CHECK(five.segments.size() == 5);
  for (const auto& s : five.segments) {
    REQUIRE(s.mw_swap.has_value());
    CHECK(s.mw_swap->a == Level::GroundMinus1);
    CHECK(s.mw_swap->b == Level::Ground0);
    CHECK(s.lasers.ey_on);
  }
  CHECK(five.total_duration_us() == doctest::Approx(10.0));
  CHECK_THROWS_AS(build_scc_sequence(0, 2.0, lasers, true), ValidationError);

  const auto round_trip = sequence_from_json(to_json(five));
  CHECK(round_trip == five);
}

TEST_CASE("run_sequence basics") {
  const RateSet r;
  const auto start = PopulationState({0.4, 0.3, 0.3, 0, 0, 0, 0});
  CHECK(run_sequence(PulseSequence{}, r, start).values() == start.values());

  const auto lasers = LaserConfig::scc(2.79);
  const auto one = build_scc_sequence(1, 2.0, lasers, false);
  const auto via_seq = run_sequence(one, r, PopulationState::pure(Level::Ground0));
  const auto direct = propagate(PopulationState::pure(Level::Ground0), build_generator(r, lasers), 2.0);
  for (int i = 0; i < 7; ++i) CHECK(via_seq.values()[i] == doctest::Approx(direct.values()[i]).epsilon(1e-12));

  for (bool aux : {false, true}) {
    const auto p1 = run_sequence(build_scc_sequence(15, 2.0, lasers, aux), r, PopulationState::pure(Level::GroundPlus1));
    CHECK(p1[Level::IonizedNV0] < 0.01);
  }
}

TEST_CASE("run_sequence preserves trace for random sequences") {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    PulseSequence seq;
    const int n = 1 + trial % 6;
    for (int s = 0; s < n; ++s) {
      PulseSegment seg{5.0 * u(gen), LaserConfig{u(gen) < 0.5, u(gen) < 0.5, 60.0 * u(gen)}, std::nullopt};
      if (u(gen) < 0.5) seg.mw_swap = MicrowaveSwap{Level::GroundMinus1, u(gen) < 0.5 ? Level::Ground0 : Level::GroundPlus1, u(gen)};
      seq.segments.push_back(seg);
    }
    const auto p = run_sequence(seq, RateSet{}, PopulationState({0.5, 0.25, 0.25, 0, 0, 0, 0}));
    CHECK(std::abs(p.trace() - 1.0) < 1e-9);
  }
}

TEST_CASE("SCC curves") {
  const RateSet r;
  const auto lasers = LaserConfig::scc(2.79);
  const auto with = scc_curves(r, lasers, 15, 2.0, true);
  const auto without = scc_curves(r, lasers, 15, 2.0, false);
  CHECK(with[0].nv_minus_0 == 1.0);
  CHECK(with[0].nv_minus_1 == 1.0);
  CHECK(scc_curves(r, lasers, 3, 2.0, true, 0.78)[0].nv_minus_0 == 0.78);

  for (std::size_t n = 1; n < with.size(); ++n) {
    // P(NV0 | |0>) is nondecreasing with and without correction.
    CHECK(with[n].nv_minus_0 <= with[n - 1].nv_minus_0 + 1e-15);
    CHECK(without[n].nv_minus_0 <= without[n - 1].nv_minus_0 + 1e-15);
    if (n >= 3) CHECK(with[n].nv_minus_0 < without[n].nv_minus_0);
    CHECK(with[n].nv_minus_1 == doctest::Approx(without[n].nv_minus_1).epsilon(1e-9));
  }
  CHECK(1.0 - with.back().nv_minus_0 > 1.0 - without.back().nv_minus_0 + 0.05);

  // |1> curve: at most a small linear loss. E_y does not excite |+1>, so in
  // the rate model the curve is flat.
  const double slope = (with.back().nv_minus_1 - with[1].nv_minus_1) / (with.back().duration_us - with[1].duration_us);
  CHECK(slope <= 0.0);
  CHECK(slope > -1e-3);
  for (std::size_t n = 1; n < with.size(); ++n) {
    const double line = with[1].nv_minus_1 + slope * (with[n].duration_us - with[1].duration_us);
    CHECK(std::abs(with[n].nv_minus_1 - line) < 1e-4);
  }
}

TEST_CASE("fidelity composition") {
  const auto perfect = compose_fidelity(0.9, 0.0, 0.05, 1.0, ErrorBudget::perfect());
  CHECK(perfect.f0 == doctest::Approx(0.9));
  CHECK(perfect.f1 == doctest::Approx(0.95));
  CHECK(perfect.favg == doctest::Approx(0.925));

  const auto none = compose_fidelity(0.0, 0.0, 0.0, 0.0, ErrorBudget{});
  CHECK(none.favg == doctest::Approx(0.5).epsilon(1e-12));

  // Hand-expanded budget algebra for the default budget.
  const ErrorBudget b;
  const auto read = charge_read_probabilities(b);
  CHECK(read.bright_as_bright == doctest::Approx(0.9992));
  CHECK(read.dark_as_dark == doctest::Approx(1.0));
  const double d0 = 0.9 * read.dark_as_dark + 0.1 * (1 - read.bright_as_bright);
  const double d0e = 0.2 * read.dark_as_dark + 0.8 * (1 - read.bright_as_bright);
  const auto f = compose_fidelity(0.9, 0.2, 0.0, 0.0, b);
  CHECK(f.f0 == doctest::Approx(0.9982 * d0 + 0.0018 * d0e));
  CHECK(f.f1 == doctest::Approx(read.bright_as_bright));
}

TEST_CASE("average fidelity anchors") {
  const RateSet r;
  const auto lasers = LaserConfig::scc(2.79);
  const auto with = average_fidelity_vs_duration(r, lasers, ErrorBudget{}, true);
  CHECK(with.points.front().favg == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(with.best().favg == doctest::Approx(0.954).epsilon(0.02 / 0.954));
  CHECK(with.optimal().duration_us >= 6.0);
  CHECK(with.optimal().duration_us <= 14.0);
  CHECK(with.optimal().favg >= with.best().favg - with.plateau_tolerance);

  const auto without = average_fidelity_vs_duration(r, lasers, ErrorBudget{}, false);
  CHECK(without.best().favg == doctest::Approx(0.891).epsilon(0.02 / 0.891));

  // With ideal preparation F_1 does not see the correction pulse.
  const auto ideal_with = average_fidelity_vs_duration(r, lasers, ErrorBudget::readout_only(), true);
  const auto ideal_without = average_fidelity_vs_duration(r, lasers, ErrorBudget::readout_only(), false);
  for (std::size_t i = 0; i < ideal_with.points.size(); ++i)
    CHECK(ideal_with.points[i].f1 == doctest::Approx(ideal_without.points[i].f1).epsilon(1e-9));

  RateSet ideal = r;
  ideal.gamma_flip_ey = 0.0;
  const auto best = average_fidelity_vs_duration(ideal, lasers, ErrorBudget::perfect(), true, 60);
  CHECK(best.best().favg > 0.99);
}

TEST_CASE("Monte Carlo shots agree with the deterministic budget") {
  const RateSet r;
  const auto seq = build_scc_sequence(5, 2.0, LaserConfig::scc(2.79), true);
  const ChargeReadoutModel charge;
  const ErrorBudget budget;
  const std::uint64_t shots = 20000;
  const auto h = simulate_shot(r, seq, budget, DetectorModel{}, charge, 42, shots);
  CHECK(h.init_0.shots() == shots);
  CHECK(h.init_1.shots() == shots);
  CHECK(h.init_1.mean() > 3.0 * h.init_0.mean());

  std::uint64_t dark0 = 0, bright1 = 0;
  for (const auto& [k, n] : h.init_0.bins()) dark0 += k < charge.threshold ? n : 0;
  for (const auto& [k, n] : h.init_1.bins()) bright1 += k >= charge.threshold ? n : 0;

  // Oracle: deterministic NV0 populations composed with the exact threshold
  // fidelities of the charge readout distributions.
  const auto th = threshold_fidelity(analytic_count_distribution(charge, ChargeState::NVMinus),
                                     analytic_count_distribution(charge, ChargeState::NV0), charge.threshold);
  auto read_dark = [&](double nv0) { return nv0 * th.f_dark + (1 - nv0) * (1 - th.f_bright); };
  auto nv0 = [&](const PopulationState& s) { return run_sequence(seq, r, s)[Level::IonizedNV0]; };
  const double f0 = budget.init_fidelity_0 * read_dark(nv0(PopulationState::pure(Level::Ground0))) +
                    (1 - budget.init_fidelity_0) * read_dark(nv0(failed_init_state_0()));
  const double f1 = budget.init_fidelity_1 * (1 - read_dark(nv0(PopulationState::pure(Level::GroundPlus1)))) +
                    (1 - budget.init_fidelity_1) * (1 - read_dark(nv0(failed_init_state_1())));
  CHECK(oracle::within_binomial(static_cast<double>(dark0) / shots, f0, shots));
  CHECK(oracle::within_binomial(static_cast<double>(bright1) / shots, f1, shots));
}

TEST_CASE("ideal conversion collapses |0> to the dark mode") {
  const auto seq = build_scc_sequence(5, 2.0, LaserConfig::scc(500.0), true);
  ChargeReadoutModel charge;
  charge.dark_kctps = 0.0;
  const auto h = simulate_shot(RateSet{}, seq, ErrorBudget::perfect(), DetectorModel{}, charge, 1, 2000);
  CHECK(h.init_0.bins().size() == 1);
  CHECK(h.init_0.bins().begin()->first == 0);
}

TEST_CASE("shot pipeline is deterministic under any execution plan") {
  const auto seq = build_scc_sequence(5, 2.0, LaserConfig::scc(2.79), true);
  const ChargeInit no_post{0.78, false};
  const auto a = simulate_shot(RateSet{}, seq, ErrorBudget{}, DetectorModel{}, ChargeReadoutModel{}, 7, 4000, no_post,
                               Execution::Serial);
  const auto b = simulate_shot(RateSet{}, seq, ErrorBudget{}, DetectorModel{}, ChargeReadoutModel{}, 7, 4000, no_post,
                               Execution::Parallel);
  CHECK(a.init_0 == b.init_0);
  CHECK(a.init_1 == b.init_1);
  CHECK_THROWS_AS(simulate_shot(RateSet{}, seq, ErrorBudget{}, DetectorModel{}, ChargeReadoutModel{}, 7, 0),
                  ValidationError);
}

TEST_CASE("simulated initialization budget") {
  const auto b = simulate_initialization_budget(RateSet{}, ErrorBudget{});
  // 20 µs of E_1,2 leaves about 1.4 % parked in the singlet.
  CHECK(b.init_fidelity_0 > 0.98);
  CHECK(simulate_initialization_budget(RateSet{}, ErrorBudget{}, 100.0).init_fidelity_0 > 0.9999);
  CHECK(b.init_fidelity_0 <= 1.0);
  CHECK(b.init_fidelity_1 > 0.95);
  CHECK(b.init_fidelity_1 <= 1.0);
  CHECK(b.charge_readout_fidelity == ErrorBudget{}.charge_readout_fidelity);
}

}  // TEST_SUITE
