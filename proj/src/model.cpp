#include "sccsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sccsim {

namespace {

constexpr std::array<std::string_view, kNumLevels> kLevelNames = {
    "Ground0", "GroundPlus1", "GroundMinus1", "ExcitedEy", "ExcitedE12", "Singlet", "IonizedNV0"};

void require_rate(double value, const char* name) {
  if (!std::isfinite(value)) throw ValidationError(std::string("non-finite rate: ") + name);
  if (value < 0.0) throw ValidationError(std::string("negative rate: ") + name);
}

}  // namespace

std::string_view to_string(Level l) { return kLevelNames[index(l)]; }

Level level_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    if (kLevelNames[i] == name) return static_cast<Level>(i);
  }
  throw ValidationError("unknown level: " + std::string(name));
}

const RateSet& validate(const RateSet& r) {
  require_rate(r.gamma_emission, "gamma_emission");
  require_rate(r.gamma_ex_0, "gamma_ex_0");
  require_rate(r.gamma_ex_pm1, "gamma_ex_pm1");
  require_rate(r.gamma_flip_ey, "gamma_flip_ey");
  require_rate(r.gamma_flip_e12, "gamma_flip_e12");
  require_rate(r.gamma_isc_ey, "gamma_isc_ey");
  require_rate(r.gamma_isc_e12, "gamma_isc_e12");
  require_rate(r.gamma_singlet_total, "gamma_singlet_total");
  require_rate(r.gamma_ion, "gamma_ion");
  if (!(r.alpha >= 0.0 && r.alpha <= 1.0)) throw ValidationError("alpha out of range");
  const auto& b = r.singlet_branching;
  if (!(b.to_plus1 >= 0.0 && b.to_minus1 >= 0.0 && b.to_0 >= 0.0)) {
    throw ValidationError("singlet branching negative");
  }
  if (std::abs(b.to_plus1 + b.to_minus1 + b.to_0 - 1.0) > 1e-12) {
    throw ValidationError("singlet branching not normalized");
  }
  return r;
}

LaserConfig LaserConfig::scc(double gamma_ion, double coefficient) {
  if (!(coefficient > 0.0)) throw ValidationError("ion coefficient must be positive");
  if (!(gamma_ion >= 0.0)) throw ValidationError("negative rate: gamma_ion");
  return LaserConfig{true, false, gamma_ion / coefficient, coefficient};
}

void validate(const LaserConfig& lasers) {
  if (!(lasers.nir_power_mw >= 0.0) || !std::isfinite(lasers.nir_power_mw)) {
    throw ValidationError("nir_power_mw must be finite and >= 0");
  }
  if (!(lasers.ion_coefficient >= 0.0) || !std::isfinite(lasers.ion_coefficient)) {
    throw ValidationError("ion_coefficient must be finite and >= 0");
  }
}

void validate(const PulseSegment& segment) {
  if (!(segment.duration_us >= 0.0) || !std::isfinite(segment.duration_us)) {
    throw ValidationError("segment duration must be finite and >= 0");
  }
  validate(segment.lasers);
  if (segment.mw_swap) {
    const auto& s = *segment.mw_swap;
    if (!is_ground(s.a) || !is_ground(s.b)) throw ValidationError("mw_swap levels must be ground levels");
    if (!(s.fraction >= 0.0 && s.fraction <= 1.0)) throw ValidationError("mw_swap fraction out of range");
  }
}

double DetectorModel::background_mhz(const LaserConfig& lasers) const {
  double bg = 0.0;
  if (lasers.ey_on) bg += bg_ey_kctps;
  if (lasers.e12_on) bg += bg_e12_kctps;
  return bg * kKctpsToMHz;
}

void validate(const DetectorModel& det) {
  if (!(det.collection_efficiency >= 0.0 && det.collection_efficiency <= 1.0)) {
    throw ValidationError("collection_efficiency out of range");
  }
  if (!(det.bg_ey_kctps >= 0.0) || !(det.bg_e12_kctps >= 0.0)) throw ValidationError("negative background");
  if (!(det.window_us >= 0.0) || !std::isfinite(det.window_us)) throw ValidationError("window must be >= 0");
}

PopulationState::PopulationState(const Storage& p) : p_(p) {
  for (double v : p_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("population entry outside [0,1]");
  }
  if (std::abs(trace() - 1.0) > 1e-9) throw ValidationError("population trace differs from 1");
}

PopulationState PopulationState::pure(Level l) {
  Storage p{};
  p[index(l)] = 1.0;
  return PopulationState(p);
}

PopulationState PopulationState::from_numeric(Storage p) {
  for (double& v : p) {
    if (v < 0.0 && v > -1e-12) v = 0.0;
    if (v > 1.0 && v < 1.0 + 1e-12) v = 1.0;
  }
  return PopulationState(p);
}

double PopulationState::trace() const { return std::accumulate(p_.begin(), p_.end(), 0.0); }

PopulationState PopulationState::swapped(const MicrowaveSwap& swap) const {
  PopulationState out = *this;
  const double pa = p_[index(swap.a)];
  const double pb = p_[index(swap.b)];
  if (swap.fraction == 1.0) {
    out.p_[index(swap.a)] = pb;
    out.p_[index(swap.b)] = pa;
  } else {
    out.p_[index(swap.a)] = (1.0 - swap.fraction) * pa + swap.fraction * pb;
    out.p_[index(swap.b)] = (1.0 - swap.fraction) * pb + swap.fraction * pa;
  }
  return out;
}

void PhotonHistogram::add(std::uint64_t photons, std::uint64_t occurrences) {
  if (occurrences == 0) return;
  bins_[photons] += occurrences;
  shots_ += occurrences;
}

void PhotonHistogram::merge(const PhotonHistogram& other) {
  for (const auto& [k, n] : other.bins_) add(k, n);
}

double PhotonHistogram::mean() const {
  if (shots_ == 0) return 0.0;
  double s = 0.0;
  for (const auto& [k, n] : bins_) s += static_cast<double>(k) * static_cast<double>(n);
  return s / static_cast<double>(shots_);
}

std::vector<double> PhotonHistogram::normalized() const {
  if (shots_ == 0) return {};
  std::vector<double> pmf(bins_.rbegin()->first + 1, 0.0);
  for (const auto& [k, n] : bins_) pmf[k] = static_cast<double>(n) / static_cast<double>(shots_);
  return pmf;
}

}  // namespace sccsim
