#include <doctest.h>

#include <random>

#include "sccsim/model.hpp"

using namespace sccsim;

TEST_SUITE("model") {

TEST_CASE("level order is fixed") {
  CHECK(kNumLevels == 7);
  CHECK(index(Level::Ground0) == 0);
  CHECK(index(Level::GroundPlus1) == 1);
  CHECK(index(Level::GroundMinus1) == 2);
  CHECK(index(Level::ExcitedEy) == 3);
  CHECK(index(Level::ExcitedE12) == 4);
  CHECK(index(Level::Singlet) == 5);
  CHECK(index(Level::IonizedNV0) == 6);
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    const auto l = static_cast<Level>(i);
    CHECK(level_from_string(to_string(l)) == l);
  }
  CHECK_THROWS_AS(level_from_string("Excited"), ValidationError);
  CHECK(is_ground(Level::GroundMinus1));
  CHECK_FALSE(is_ground(Level::Singlet));
}

TEST_CASE("default rates are accepted") {
  const RateSet r;
  CHECK(&validate(r) == &r);
  CHECK(r.gamma_ex_0 == 54.906);
  CHECK(r.alpha == 0.275);
}

TEST_CASE("rate validation names the first violation") {
  RateSet r;
  r.gamma_emission = -1;
  CHECK_THROWS_WITH_AS(validate(r), doctest::Contains("negative rate"), ValidationError);

  r = {};
  r.alpha = 1.5;
  CHECK_THROWS_WITH_AS(validate(r), "alpha out of range", ValidationError);

  r = {};
  r.singlet_branching = {0.1, 0.1, 0.7};
  CHECK_THROWS_WITH_AS(validate(r), "singlet branching not normalized", ValidationError);

  r = {};
  r.singlet_branching = {0.1, 0.1, 0.8 + 5e-13};
  CHECK_NOTHROW(validate(r));
}

TEST_CASE("laser config derives the ionization rate only under E_y") {
  LaserConfig l{true, false, 45.0, 0.0620};
  CHECK(l.gamma_ion() == doctest::Approx(2.79).epsilon(1e-12));
  l.ey_on = false;
  CHECK(l.gamma_ion() == 0.0);
  const auto scc = LaserConfig::scc(2.79);
  CHECK(scc.ey_on);
  CHECK_FALSE(scc.e12_on);
  CHECK(scc.gamma_ion() == doctest::Approx(2.79).epsilon(1e-14));
  CHECK_THROWS_AS(validate(LaserConfig{true, false, -1.0}), ValidationError);
}

TEST_CASE("segments only swap ground levels") {
  PulseSegment s{1.0, LaserConfig::ey_only(), MicrowaveSwap{Level::ExcitedEy, Level::Ground0, 1.0}};
  CHECK_THROWS_AS(validate(s), ValidationError);
  s.mw_swap = MicrowaveSwap{Level::GroundMinus1, Level::Ground0, 1.5};
  CHECK_THROWS_AS(validate(s), ValidationError);
  s.mw_swap = MicrowaveSwap{};
  CHECK_NOTHROW(validate(s));
  s.duration_us = -1.0;
  CHECK_THROWS_AS(validate(s), ValidationError);
}

TEST_CASE("detector backgrounds follow the active lasers") {
  const DetectorModel det;
  CHECK(det.background_mhz(LaserConfig::dark()) == 0.0);
  CHECK(det.background_mhz(LaserConfig::ey_only()) == doctest::Approx(0.5e-3));
  CHECK(det.background_mhz(LaserConfig::e12_only()) == doctest::Approx(2.8e-3));
  CHECK(det.background_mhz(LaserConfig::dual()) == doctest::Approx(3.3e-3));
  DetectorModel bad;
  bad.collection_efficiency = 1.2;
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("population state invariants") {
  CHECK(PopulationState::pure(Level::Singlet)[Level::Singlet] == 1.0);
  CHECK(PopulationState::pure(Level::IonizedNV0).nv_minus() == 0.0);
  CHECK_THROWS_AS(PopulationState({0.5, 0.6, 0, 0, 0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(PopulationState({1.5, -0.5, 0, 0, 0, 0, 0}), ValidationError);
  CHECK_NOTHROW(PopulationState({0.5, 0.5 + 5e-10, 0, 0, 0, 0, 0}));

  const auto clamped = PopulationState::from_numeric({1.0 + 1e-13, -1e-13, 0, 0, 0, 0, 0});
  CHECK(clamped[Level::Ground0] == 1.0);
  CHECK(clamped[Level::GroundPlus1] == 0.0);
  CHECK_THROWS_AS(PopulationState::from_numeric({1.1, -0.1, 0, 0, 0, 0, 0}), ValidationError);
}

TEST_CASE("pi swap twice is the identity") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    PopulationState::Storage p{};
    double sum = 0.0;
    for (auto& v : p) sum += (v = std::uniform_real_distribution<>(0.0, 1.0)(gen));
    for (auto& v : p) v /= sum;
    const auto s = PopulationState::from_numeric(p);
    const MicrowaveSwap pi{};
    const auto once = s.swapped(pi);
    CHECK(once[Level::Ground0] == s[Level::GroundMinus1]);
    CHECK(once[Level::GroundMinus1] == s[Level::Ground0]);
    CHECK(once.swapped(pi).values() == s.values());
  }
}

TEST_CASE("partial swap moves a fraction of the population difference") {
  const auto s = PopulationState::pure(Level::GroundMinus1).swapped({Level::GroundMinus1, Level::Ground0, 0.3});
  CHECK(s[Level::Ground0] == doctest::Approx(0.3));
  CHECK(s[Level::GroundMinus1] == doctest::Approx(0.7));
  CHECK(s.trace() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("photon histogram bookkeeping") {
  PhotonHistogram h;
  h.add(3);
  h.add(0, 2);
  h.add(3);
  CHECK(h.shots() == 4);
  CHECK(h.bins().at(3) == 2);
  CHECK(h.mean() == doctest::Approx(1.5));
  const auto pmf = h.normalized();
  REQUIRE(pmf.size() == 4);
  CHECK(pmf[0] == 0.5);
  CHECK(pmf[1] == 0.0);
  CHECK(pmf[3] == 0.5);

  PhotonHistogram g;
  g.add(1);
  g.merge(h);
  std::uint64_t total = 0;
  for (const auto& [k, n] : g.bins()) total += n;
  CHECK(total == g.shots());
  CHECK(g.shots() == 5);
}

}  // TEST_SUITE
