#pragma once

// JSON run configuration.
//
// Top-level keys (all optional, unknown keys rejected at every level):
//   "rates"        RateSet fields in MHz; "singlet_branching" is
//                  {"to_plus1", "to_minus1", "to_0"}
//   "detector"     {"collection_efficiency", "bg_ey_kctps", "bg_e12_kctps", "window_us"}
//   "charge_model" {"bright_kctps", "dark_kctps", "nv_minus_lifetime_ms", "window_us", "threshold"}
//   "budget"       {"init_fidelity_0", "init_fidelity_1", "charge_readout_fidelity", "charge_flip_error"}
//   "sequence"     SCC and PL experiment settings, see SequenceConfig
//   "sweep"        grids, see SweepConfig
//   "seed"         unsigned integer master seed
//   "output"       output path ("" or absent: stdout)

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sccsim/budget.hpp"
#include "sccsim/model.hpp"
#include "sccsim/protocol.hpp"
#include "sccsim/readout.hpp"

namespace sccsim {

/// Invalid or unreadable configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SequenceConfig {
  int n_rounds = 5;
  double round_us = 2.0;
  int max_rounds = 15;               // length of the curve / fidelity sweeps
  std::optional<double> nir_power_mw;  // default: rates.gamma_ion / ion_coefficient
  double ion_coefficient = kDefaultIonCoefficient;
  bool aux_correction = true;
  double rotation_fraction = 1.0;
  double plateau_tolerance = kDefaultPlateauTolerance;
  std::uint64_t shots = 20000;
  ChargeInit charge_init{};
  // Explicit segments replace the generated SCC schedule for histogram runs.
  std::optional<PulseSequence> segments;
  // PL experiment.
  LaserConfig pl_lasers = LaserConfig::ey_only();
  Level pl_start = Level::Ground0;

  LaserConfig scc_lasers(const RateSet& rates) const;
  PulseSequence scc_sequence(const RateSet& rates) const;
};

struct SweepConfig {
  std::vector<double> t_us;               // PL grid
  std::vector<double> durations_us;       // ionization curve grid
  std::vector<double> powers_mw;          // ionization powers
  std::vector<double> gamma_ion_mhz;      // ionization rate per power
  std::vector<double> map_gamma_ion_mhz;  // efficiency / fidelity map ion axis
  std::vector<double> gamma_flip_mhz;     // efficiency / fidelity map flip axis
  std::vector<double> bright_kctps;       // charge map rate axis
  std::vector<double> lifetime_ms;        // charge map lifetime axis
  std::vector<double> windows_us;         // window sweep (charge map)

  static SweepConfig defaults();
};

struct RunConfig {
  RateSet rates{};
  DetectorModel detector{};
  ChargeReadoutModel charge_model{};
  ErrorBudget budget{};
  SequenceConfig sequence{};
  SweepConfig sweep = SweepConfig::defaults();
  std::uint64_t seed = 20210501;
  std::string output;

  /// Throws ConfigError on the first invalid field.
  void validate() const;
};

/// Parses and validates; throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& config);

// Component serializers, used for round trips and sequence files.
nlohmann::json to_json(const RateSet& rates);
RateSet rates_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LaserConfig& lasers);
LaserConfig lasers_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PulseSequence& seq);
PulseSequence sequence_from_json(const nlohmann::json& j);

}  // namespace sccsim
