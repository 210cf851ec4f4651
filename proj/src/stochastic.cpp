#include "sccsim/stochastic.hpp"

#include <algorithm>
#include <stdexcept>

#include "shot_loop.hpp"

namespace sccsim {

JumpTable::JumpTable(const RateSet& rates, const LaserConfig& lasers) {
  validate(rates);
  validate(lasers);
  for (const auto& c : transition_channels(rates, lasers)) {
    out_[index(c.from)].push_back({c.to, c.rate, c.radiative});
    total_[index(c.from)] += c.rate;
  }
}

const JumpTable::Out& JumpTable::choose(Level from, ShotRng& rng) const {
  const auto& outs = out_[index(from)];
  double target = rng.uniform() * total_[index(from)];
  for (const auto& o : outs) {
    if (target < o.rate) return o;
    target -= o.rate;
  }
  return outs.back();
}

Level Trajectory::level_at(double t_us) const {
  auto it = std::upper_bound(events.begin(), events.end(), t_us,
                             [](double t, const JumpEvent& e) { return t < e.t_us; });
  if (it == events.begin()) return start;
  return std::prev(it)->to;
}

namespace {

void add_background_times(double background_mhz, double duration_us, ShotRng& rng, std::vector<double>& times) {
  const std::uint64_t n = poisson(rng, background_mhz * duration_us);
  for (std::uint64_t k = 0; k < n; ++k) times.push_back(rng.uniform() * duration_us);
}

}  // namespace

Trajectory sample_trajectory(const RateSet& rates, const LaserConfig& lasers, Level start, double duration_us,
                             const DetectorModel& det, std::uint64_t seed) {
  if (!(duration_us >= 0.0)) throw ValidationError("negative duration");
  validate(det);
  const JumpTable table(rates, lasers);
  ShotRng rng(seed);
  Trajectory traj;
  traj.start = start;
  traj.seed = seed;
  Level from = start;
  traj.final_level = run_jumps(table, start, duration_us, rng, [&](double t, const JumpTable::Out& out) {
    traj.events.push_back({t, from, out.to});
    if (out.radiative && rng.bernoulli(det.collection_efficiency)) traj.photons_us.push_back(t);
    from = out.to;
  });
  add_background_times(det.background_mhz(lasers), duration_us, rng, traj.background_us);
  std::sort(traj.background_us.begin(), traj.background_us.end());
  return traj;
}

ShotCount sample_shot_count(const JumpTable& table, double collection_efficiency, double background_mhz, Level start,
                            double duration_us, ShotRng& rng) {
  ShotCount shot;
  shot.final_level = run_jumps(table, start, duration_us, rng, [&](double, const JumpTable::Out& out) {
    if (out.radiative && rng.bernoulli(collection_efficiency)) ++shot.photons;
  });
  shot.photons += poisson(rng, background_mhz * duration_us);
  return shot;
}

std::vector<double> sample_photon_times(const JumpTable& table, double collection_efficiency, double background_mhz,
                                        Level start, double duration_us, ShotRng& rng) {
  std::vector<double> times;
  run_jumps(table, start, duration_us, rng, [&](double t, const JumpTable::Out& out) {
    if (out.radiative && rng.bernoulli(collection_efficiency)) times.push_back(t);
  });
  add_background_times(background_mhz, duration_us, rng, times);
  std::sort(times.begin(), times.end());
  return times;
}

PhotonHistogram sample_histogram(const RateSet& rates, const LaserConfig& lasers, Level start, double window_us,
                                 const DetectorModel& det, std::uint64_t shots, std::uint64_t master_seed,
                                 Execution exec, std::uint64_t stream) {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  if (!(window_us >= 0.0)) throw ValidationError("negative window");
  validate(det);
  const JumpTable table(rates, lasers);
  const double bg = det.background_mhz(lasers);
  return detail::histogram_over_shots(shots, exec, [&](std::uint64_t i) {
    ShotRng rng(master_seed, stream, i);
    return sample_shot_count(table, det.collection_efficiency, bg, start, window_us, rng).photons;
  });
}

std::uint64_t sample_two_state_count(const TwoStateEmitter& e, bool start_bright, double window_us, ShotRng& rng) {
  bool bright = start_bright;
  std::uint64_t photons = 0;
  double t = 0.0;
  while (true) {
    const double emit = bright ? e.bright_mhz : e.dark_mhz;
    const double sw = bright ? e.switch_mhz : 0.0;
    const double total = emit + sw;
    if (!(total > 0.0)) break;
    t += rng.exponential(total);
    if (t >= window_us) break;
    if (rng.uniform() * total < emit) {
      ++photons;
    } else {
      bright = false;
    }
  }
  return photons;
}

PhotonHistogram sample_two_state_histogram(const TwoStateEmitter& emitter, bool start_bright, double window_us,
                                           std::uint64_t shots, std::uint64_t master_seed, Execution exec,
                                           std::uint64_t stream) {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  return detail::histogram_over_shots(shots, exec, [&](std::uint64_t i) {
    ShotRng rng(master_seed, stream, i);
    return sample_two_state_count(emitter, start_bright, window_us, rng);
  });
}

Level run_segments_stochastic(std::span<const PulseSegment> segments, std::span<const JumpTable> tables, Level start,
                              ShotRng& rng) {
  if (segments.size() != tables.size()) throw std::invalid_argument("one jump table per segment required");
  Level level = start;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    level = run_jumps(tables[s], level, segments[s].duration_us, rng, [](double, const JumpTable::Out&) {});
    if (const auto& swap = segments[s].mw_swap; swap && (level == swap->a || level == swap->b)) {
      if (swap->fraction >= 1.0 || rng.bernoulli(swap->fraction)) level = (level == swap->a) ? swap->b : swap->a;
    }
  }
  return level;
}

}  // namespace sccsim
