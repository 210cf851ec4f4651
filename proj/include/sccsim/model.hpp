#pragma once

// Shared domain types for the spin-to-charge conversion simulator.
//
// Unit conventions used throughout the library:
//   rates        MHz   (1/µs)
//   times        µs
//   count rates  kctps at interfaces, MHz internally (1 kctps = 1e-3 MHz)
//   NIR power    mW
//   lifetimes    ms where the name says so (charge readout), µs otherwise

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sccsim {

/// Raised when a value violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative numerical method fails to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kKctpsToMHz = 1e-3;
inline constexpr double kMsToUs = 1e3;

/// Model levels. The index order is part of the public contract:
///   0 Ground0       m_S = 0, qubit |0>
///   1 GroundPlus1   m_S = +1, qubit |1>
///   2 GroundMinus1  m_S = -1, the AUX level
///   3 ExcitedEy     excited state of the m_S = 0 cycling transition
///   4 ExcitedE12    excited state of the m_S = +-1 transition
///   5 Singlet       metastable singlet
///   6 IonizedNV0    neutral charge state (dark, absorbing)
enum class Level : std::uint8_t {
  Ground0 = 0,
  GroundPlus1 = 1,
  GroundMinus1 = 2,
  ExcitedEy = 3,
  ExcitedE12 = 4,
  Singlet = 5,
  IonizedNV0 = 6,
};

inline constexpr std::size_t kNumLevels = 7;

constexpr std::size_t index(Level l) { return static_cast<std::size_t>(l); }
constexpr bool is_ground(Level l) {
  return l == Level::Ground0 || l == Level::GroundPlus1 || l == Level::GroundMinus1;
}

std::string_view to_string(Level l);
/// Parses the enumerator name (e.g. "GroundMinus1"); throws ValidationError.
Level level_from_string(std::string_view name);

/// Branching of singlet decay into (|+1>, |-1>, |0>).
struct SingletBranching {
  double to_plus1 = 0.1;
  double to_minus1 = 0.1;
  double to_0 = 0.8;

  friend bool operator==(const SingletBranching&, const SingletBranching&) = default;
};

/// Transition rates (MHz) and branching parameters of the seven-level model.
/// Defaults are the 8 K literature values plus the fitted parameter table.
struct RateSet {
  double gamma_emission = 77.0;
  double gamma_ex_0 = 54.906;
  double gamma_ex_pm1 = 1.209;
  double gamma_flip_ey = 0.752;
  // Poorly constrained (reported uncertainty 4.277 MHz exceeds the value).
  double gamma_flip_e12 = 2.010;
  double gamma_isc_ey = 0.132;
  double gamma_isc_e12 = 52.760;
  double gamma_singlet_total = 0.3;
  SingletBranching singlet_branching{};
  double alpha = 0.275;
  // Reference ionization rate at the highest measured NIR power. The
  // generator reads Γ_ion from LaserConfig; this value seeds default schedules.
  double gamma_ion = 2.79;

  friend bool operator==(const RateSet&, const RateSet&) = default;
};

/// Returns `rates` unchanged if every invariant holds, otherwise throws
/// ValidationError naming the first violation ("negative rate: ...",
/// "alpha out of range", "singlet branching not normalized").
const RateSet& validate(const RateSet& rates);

inline constexpr double kDefaultIonCoefficient = 0.0670;  // MHz/mW

/// Illumination during one piecewise-constant segment.
struct LaserConfig {
  bool ey_on = false;
  bool e12_on = false;
  double nir_power_mw = 0.0;
  double ion_coefficient = kDefaultIonCoefficient;  // MHz/mW

  /// Ionization rate out of |E_y>; zero unless E_y is on.
  double gamma_ion() const { return ey_on ? ion_coefficient * nir_power_mw : 0.0; }

  /// E_y + NIR tuned so that gamma_ion() equals `gamma_ion` at `coefficient`.
  static LaserConfig scc(double gamma_ion, double coefficient = kDefaultIonCoefficient);
  static LaserConfig ey_only() { return LaserConfig{true, false, 0.0}; }
  static LaserConfig e12_only() { return LaserConfig{false, true, 0.0}; }
  static LaserConfig dual() { return LaserConfig{true, true, 0.0}; }
  static LaserConfig dark() { return LaserConfig{}; }

  friend bool operator==(const LaserConfig&, const LaserConfig&) = default;
};

void validate(const LaserConfig& lasers);

/// Instantaneous microwave rotation between two ground levels. fraction = 1
/// is a perfect pi pulse (full population exchange).
struct MicrowaveSwap {
  Level a = Level::GroundMinus1;
  Level b = Level::Ground0;
  double fraction = 1.0;

  friend bool operator==(const MicrowaveSwap&, const MicrowaveSwap&) = default;
};

struct PulseSegment {
  double duration_us = 0.0;
  LaserConfig lasers{};
  std::optional<MicrowaveSwap> mw_swap{};  // applied at segment end

  friend bool operator==(const PulseSegment&, const PulseSegment&) = default;
};

void validate(const PulseSegment& segment);

/// Photon detection model. Backgrounds are added for whichever resonant
/// laser is on.
struct DetectorModel {
  // PL_sat / Γ from the saturation curve: 1157 kctps / 77 MHz.
  double collection_efficiency = 1.157 / 77.0;
  double bg_ey_kctps = 0.5;
  double bg_e12_kctps = 2.8;
  double window_us = 500.0;

  /// Background in MHz for the given illumination.
  double background_mhz(const LaserConfig& lasers) const;

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

void validate(const DetectorModel& det);

/// Probability vector over the seven levels. Construction enforces range
/// [0,1] per entry and unit trace within 1e-9.
class PopulationState {
 public:
  using Storage = std::array<double, kNumLevels>;

  /// Throws ValidationError if the invariants do not hold.
  explicit PopulationState(const Storage& p);
  static PopulationState pure(Level l);

  /// Adopts a numerically propagated vector: entries in (-1e-12, 0) are
  /// clamped to 0 and entries in (1, 1 + 1e-12) to 1 before validation.
  static PopulationState from_numeric(Storage p);

  double operator[](Level l) const { return p_[index(l)]; }
  const Storage& values() const { return p_; }
  double trace() const;
  /// 1 - P(NV0).
  double nv_minus() const { return 1.0 - p_[index(Level::IonizedNV0)]; }

  /// Population exchange between two ground levels, scaled by fraction.
  PopulationState swapped(const MicrowaveSwap& swap) const;

 private:
  PopulationState() = default;
  Storage p_{};
};

/// Photon-number histogram from repeated shots.
class PhotonHistogram {
 public:
  PhotonHistogram() = default;

  void add(std::uint64_t photons, std::uint64_t occurrences = 1);
  void merge(const PhotonHistogram& other);

  const std::map<std::uint64_t, std::uint64_t>& bins() const { return bins_; }
  std::uint64_t shots() const { return shots_; }
  double mean() const;

  /// Dense probability mass function over [0, max photons].
  std::vector<double> normalized() const;

  friend bool operator==(const PhotonHistogram&, const PhotonHistogram&) = default;

 private:
  std::map<std::uint64_t, std::uint64_t> bins_;
  std::uint64_t shots_ = 0;
};

/// Dense normalized photon-number distribution (pmf[k] = P(n = k)).
using PhotonDistribution = std::vector<double>;

}  // namespace sccsim
