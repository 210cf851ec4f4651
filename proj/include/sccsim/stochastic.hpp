#pragma once

// Kinetic Monte Carlo (Gillespie direct method) over the seven-level model.
//
// Waiting times out of the current level are Exp(total outgoing rate); the
// channel is chosen proportionally to its rate. Radiative jumps are detected
// with probability collection_efficiency (thinning). Background photons form
// an independent homogeneous Poisson process at the active-laser rate.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sccsim/dynamics.hpp"
#include "sccsim/model.hpp"
#include "sccsim/parallel.hpp"
#include "sccsim/rng.hpp"

namespace sccsim {

/// Outgoing channels per level, precomputed for one illumination setting.
class JumpTable {
 public:
  struct Out {
    Level to;
    double rate;
    bool radiative;
  };

  JumpTable(const RateSet& rates, const LaserConfig& lasers);

  double total_rate(Level from) const { return total_[index(from)]; }
  std::span<const Out> outgoing(Level from) const { return out_[index(from)]; }

  /// Picks a channel out of `from` (total_rate(from) must be > 0).
  const Out& choose(Level from, ShotRng& rng) const;

 private:
  std::array<std::vector<Out>, kNumLevels> out_;
  std::array<double, kNumLevels> total_{};
};

struct JumpEvent {
  double t_us;
  Level from;
  Level to;
};

struct Trajectory {
  Level start = Level::Ground0;
  std::vector<JumpEvent> events;     // strictly increasing times
  std::vector<double> photons_us;     // detected emission photons, at radiative jump times
  std::vector<double> background_us;  // detected background photons, sorted
  Level final_level = Level::Ground0;
  std::uint64_t seed = 0;

  /// Level occupied at time t (after any jump at exactly t).
  Level level_at(double t_us) const;
  std::size_t detected_count() const { return photons_us.size() + background_us.size(); }
};

/// One trajectory, deterministic in `seed`.
Trajectory sample_trajectory(const RateSet& rates, const LaserConfig& lasers, Level start, double duration_us,
                             const DetectorModel& det, std::uint64_t seed);

/// Runs the jump process for `duration_us` and returns the final level.
/// `on_jump(t, out)` is called for every jump. No background photons.
template <class OnJump>
Level run_jumps(const JumpTable& table, Level start, double duration_us, ShotRng& rng, OnJump&& on_jump) {
  Level level = start;
  double t = 0.0;
  while (true) {
    const double total = table.total_rate(level);
    if (!(total > 0.0)) break;
    t += rng.exponential(total);
    if (t >= duration_us) break;
    const auto& out = table.choose(level, rng);
    on_jump(t, out);
    level = out.to;
  }
  return level;
}

/// Emitted-photon count over one shot of `duration_us` (detected emission
/// plus background), and the final level.
struct ShotCount {
  std::uint64_t photons = 0;
  Level final_level = Level::Ground0;
};

ShotCount sample_shot_count(const JumpTable& table, double collection_efficiency, double background_mhz, Level start,
                            double duration_us, ShotRng& rng);

/// Detected photon arrival times over [0, duration_us), sorted.
std::vector<double> sample_photon_times(const JumpTable& table, double collection_efficiency, double background_mhz,
                                        Level start, double duration_us, ShotRng& rng);

/// Photon-count histogram over `shots` independent shots. Shot i draws from
/// ShotRng(master_seed, stream, i); the result is bit-identical for every
/// execution plan.
PhotonHistogram sample_histogram(const RateSet& rates, const LaserConfig& lasers, Level start, double window_us,
                                 const DetectorModel& det, std::uint64_t shots, std::uint64_t master_seed,
                                 Execution exec = Execution::Parallel, std::uint64_t stream = 0);

/// Coarse-grained charge-readout emitter: photons at bright_mhz while NV-,
/// a one-way NV- -> NV0 switch at switch_mhz, photons at dark_mhz after.
struct TwoStateEmitter {
  double bright_mhz = 0.0;
  double dark_mhz = 0.0;
  double switch_mhz = 0.0;
};

/// Gillespie run of the two-state emitter (photon emissions are self-jumps)
/// for `window_us`, starting bright (NV-) or dark (NV0).
std::uint64_t sample_two_state_count(const TwoStateEmitter& emitter, bool start_bright, double window_us,
                                     ShotRng& rng);

PhotonHistogram sample_two_state_histogram(const TwoStateEmitter& emitter, bool start_bright, double window_us,
                                           std::uint64_t shots, std::uint64_t master_seed,
                                           Execution exec = Execution::Parallel, std::uint64_t stream = 0);

/// Stochastic pass through a pulse sequence: per segment jump process, then
/// the segment's MW swap (taken with probability = rotation fraction when
/// the current level is one of the swapped pair).
Level run_segments_stochastic(std::span<const PulseSegment> segments, std::span<const JumpTable> tables, Level start,
                              ShotRng& rng);

}  // namespace sccsim
