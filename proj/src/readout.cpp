#include "sccsim/readout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shot_loop.hpp"

namespace sccsim {

namespace {

struct GaussLegendre {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

GaussLegendre gauss_legendre(int n) {
  GaussLegendre gl{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    gl.x[i] = -z;
    gl.x[n - 1 - i] = z;
    gl.w[i] = gl.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return gl;
}

const GaussLegendre& gl20() {
  static const GaussLegendre gl = gauss_legendre(20);
  return gl;
}

/// Adds scale * Poisson(k; mean) to out[k] for k < out.size().
void add_poisson(std::vector<double>& out, double mean, double scale) {
  if (!(mean > 0.0)) {
    out[0] += scale;
    return;
  }
  // Mass outside mean +- (12 sqrt(mean) + 20) is below 1e-30.
  const double reach = 12.0 * std::sqrt(mean) + 20.0;
  const auto kmin = static_cast<std::size_t>(std::max(0.0, std::floor(mean - reach)));
  const auto kmax = std::min(out.size(), static_cast<std::size_t>(std::ceil(mean + reach)) + 1);
  if (kmin >= kmax) return;
  const double k0 = static_cast<double>(kmin);
  double p = std::exp(-mean + k0 * std::log(mean) - std::lgamma(k0 + 1.0));
  for (std::size_t k = kmin; k < kmax; ++k) {
    out[k] += scale * p;
    p *= mean / static_cast<double>(k + 1);
  }
}

std::size_t support_size(double max_mean) {
  return static_cast<std::size_t>(std::ceil(max_mean + 15.0 * std::sqrt(max_mean) + 40.0));
}

}  // namespace

void validate(const ChargeReadoutModel& m) {
  if (!(m.dark_kctps >= 0.0)) throw ValidationError("dark rate must be >= 0");
  if (!(m.bright_kctps > m.dark_kctps)) throw ValidationError("bright rate must exceed dark rate");
  if (!(m.nv_minus_lifetime_ms > 0.0)) throw ValidationError("lifetime must be > 0");
  if (!(m.window_us >= 0.0) || !std::isfinite(m.window_us)) throw ValidationError("window must be >= 0");
}

double charge_flip_probability(double window_us, double lifetime_ms) {
  if (!(lifetime_ms > 0.0)) throw ValidationError("lifetime must be > 0");
  if (!(window_us >= 0.0)) throw ValidationError("window must be >= 0");
  return -std::expm1(-window_us / (lifetime_ms * kMsToUs));
}

PhotonDistribution analytic_count_distribution(const ChargeReadoutModel& m, ChargeState charge) {
  validate(m);
  const double w = m.window_us;
  const double bright = m.bright_kctps * kKctpsToMHz;
  const double dark = m.dark_kctps * kKctpsToMHz;
  if (charge == ChargeState::NV0) {
    std::vector<double> pmf(support_size(dark * w), 0.0);
    add_poisson(pmf, dark * w, 1.0);
    return pmf;
  }
  const double tau = m.nv_minus_lifetime_ms * kMsToUs;
  std::vector<double> pmf(support_size(bright * w), 0.0);
  add_poisson(pmf, bright * w, std::exp(-w / tau));
  if (w == 0.0) return pmf;

  // Conversion at t: mean = bright t + dark (w - t), density exp(-t/tau)/tau.
  // Beyond 40 tau the remaining weight is below 1e-17 and is dropped.
  const double span = std::min(w, 40.0 * tau);
  const double span_mean = (bright - dark) * span;
  const int panels = std::max({4, static_cast<int>(std::ceil(3.0 * span_mean / std::sqrt(std::max(span_mean, 1.0)))),
                               static_cast<int>(std::ceil(2.0 * span / tau))});
  const double h = span / panels;
  const auto& gl = gl20();
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t q = 0; q < gl.x.size(); ++q) {
      const double t = mid + 0.5 * h * gl.x[q];
      const double weight = 0.5 * h * gl.w[q] * std::exp(-t / tau) / tau;
      add_poisson(pmf, bright * t + dark * (w - t), weight);
    }
  }
  return pmf;
}

ThresholdResult threshold_fidelity(std::span<const double> bright, std::span<const double> dark,
                                   std::uint64_t threshold) {
  double below_bright = 0.0;
  double below_dark = 0.0;
  for (std::size_t k = 0; k < threshold && k < bright.size(); ++k) below_bright += bright[k];
  for (std::size_t k = 0; k < threshold && k < dark.size(); ++k) below_dark += dark[k];
  double total_bright = 0.0;
  for (double v : bright) total_bright += v;
  ThresholdResult r;
  r.threshold = threshold;
  r.f_bright = total_bright - below_bright;
  r.f_dark = below_dark;
  r.f_avg = 0.5 * (r.f_bright + r.f_dark);
  return r;
}

ThresholdResult optimize_threshold(std::span<const double> bright, std::span<const double> dark) {
  if (bright.empty() || dark.empty()) throw ValidationError("empty histogram");
  const std::size_t kmax = std::max(bright.size(), dark.size()) + 1;
  double total_bright = 0.0;
  for (double v : bright) total_bright += v;
  ThresholdResult best;
  best.f_avg = -1.0;
  double below_bright = 0.0;
  double below_dark = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double fb = total_bright - below_bright;
    const double fd = below_dark;
    const double favg = 0.5 * (fb + fd);
    if (favg > best.f_avg + 1e-14) best = {k, fb, fd, favg};  // rounding-level ties keep the smaller k
    if (k < bright.size()) below_bright += bright[k];
    if (k < dark.size()) below_dark += dark[k];
  }
  return best;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = k < a.size() ? a[k] : 0.0;
    const double y = k < b.size() ? b[k] : 0.0;
    s += std::abs(x - y);
  }
  return 0.5 * s;
}

ChargeFidelityCell best_charge_readout(double bright_kctps, double lifetime_ms, double dark_kctps,
                                       std::span<const double> window_grid_us) {
  if (window_grid_us.empty()) throw ValidationError("empty window grid");
  ChargeFidelityCell best{bright_kctps, lifetime_ms, 0.0, 0, -1.0};
  for (double w : window_grid_us) {
    const ChargeReadoutModel m{bright_kctps, dark_kctps, lifetime_ms, w, 0};
    const auto r = optimize_threshold(analytic_count_distribution(m, ChargeState::NVMinus),
                                      analytic_count_distribution(m, ChargeState::NV0));
    if (r.f_avg > best.fidelity) {
      best.window_us = w;
      best.threshold = r.threshold;
      best.fidelity = r.f_avg;
    }
  }
  return best;
}

std::vector<double> default_window_grid() {
  std::vector<double> grid;
  for (double w = 25.0; w <= 5000.0 * (1.0 + 1e-12); w *= std::pow(200.0, 1.0 / 39.0)) grid.push_back(w);
  return grid;
}

std::vector<ChargeFidelityCell> charge_fidelity_map(std::span<const double> bright_grid_kctps,
                                                    std::span<const double> lifetime_grid_ms, double dark_kctps,
                                                    std::span<const double> window_grid_us, Execution exec) {
  for (double b : bright_grid_kctps) {
    if (!(b > dark_kctps)) throw ValidationError("bright grid must exceed the dark rate");
  }
  for (double l : lifetime_grid_ms) {
    if (!(l > 0.0)) throw ValidationError("lifetime grid must be positive");
  }
  const std::size_t nl = lifetime_grid_ms.size();
  const auto cells = static_cast<std::ptrdiff_t>(bright_grid_kctps.size() * nl);
  std::vector<ChargeFidelityCell> out(static_cast<std::size_t>(cells));
  auto cell = [&](std::ptrdiff_t c) {
    const auto idx = static_cast<std::size_t>(c);
    out[idx] = best_charge_readout(bright_grid_kctps[idx / nl], lifetime_grid_ms[idx % nl], dark_kctps,
                                   window_grid_us);
  };
  if (exec == Execution::Serial) {
    for (std::ptrdiff_t c = 0; c < cells; ++c) cell(c);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < cells; ++c) cell(c);
  }
  return out;
}

double locate_operating_point(double target_fidelity, double dark_kctps, double lifetime_ms,
                              std::span<const double> window_grid_us, double lo, double hi) {
  auto f = [&](double b) { return best_charge_readout(b, lifetime_ms, dark_kctps, window_grid_us).fidelity; };
  lo = std::max(lo, dark_kctps * (1.0 + 1e-9) + 1e-12);
  if (f(lo) > target_fidelity || f(hi) < target_fidelity) {
    throw ValidationError("target fidelity not bracketed by the bright-rate search interval");
  }
  for (int it = 0; it < 60 && hi - lo > 1e-6 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target_fidelity ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TwoStateEmitter two_state_emitter(const ChargeReadoutModel& m) {
  validate(m);
  return {m.bright_kctps * kKctpsToMHz, m.dark_kctps * kKctpsToMHz, 1.0 / (m.nv_minus_lifetime_ms * kMsToUs)};
}

PhotonHistogram sample_charge_histogram(const ChargeReadoutModel& model, ChargeState charge, std::uint64_t shots,
                                        std::uint64_t master_seed, Execution exec) {
  return sample_two_state_histogram(two_state_emitter(model), charge == ChargeState::NVMinus, model.window_us, shots,
                                    master_seed, exec, charge == ChargeState::NVMinus ? 0 : 1);
}

ResonanceFluorescenceResult resonance_fluorescence_fidelity(const RateSet& rates, const DetectorModel& det,
                                                            std::span<const double> window_grid_us,
                                                            std::uint64_t shots, std::uint64_t master_seed,
                                                            Execution exec) {
  if (window_grid_us.empty()) throw ValidationError("empty window grid");
  if (shots < 1) throw ValidationError("shots must be >= 1");
  validate(det);
  const double max_window = *std::max_element(window_grid_us.begin(), window_grid_us.end());
  const LaserConfig lasers = LaserConfig::ey_only();
  const JumpTable table(rates, lasers);
  const double bg = det.background_mhz(lasers);
  const std::size_t nw = window_grid_us.size();

  // counts[state][shot * nw + window]
  std::array<std::vector<std::uint32_t>, 2> counts;
  for (auto& c : counts) c.assign(shots * nw, 0);
  const std::array<Level, 2> starts = {Level::Ground0, Level::GroundPlus1};
  const auto n = static_cast<std::int64_t>(shots);
  for (std::size_t s = 0; s < 2; ++s) {
    auto shot = [&](std::int64_t i) {
      ShotRng rng(master_seed, s, static_cast<std::uint64_t>(i));
      const auto times = sample_photon_times(table, det.collection_efficiency, bg, starts[s], max_window, rng);
      for (std::size_t j = 0; j < nw; ++j) {
        const auto c = std::lower_bound(times.begin(), times.end(), window_grid_us[j]) - times.begin();
        counts[s][static_cast<std::size_t>(i) * nw + j] = static_cast<std::uint32_t>(c);
      }
    };
    if (exec == Execution::Serial) {
      for (std::int64_t i = 0; i < n; ++i) shot(i);
    } else {
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < n; ++i) shot(i);
    }
  }

  ResonanceFluorescenceResult result;
  result.favg = -1.0;
  for (std::size_t j = 0; j < nw; ++j) {
    std::array<PhotonHistogram, 2> h;
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::uint64_t i = 0; i < shots; ++i) h[s].add(counts[s][i * nw + j]);
    }
    // |0> is the bright hypothesis for fluorescence readout.
    const auto r = optimize_threshold(h[0].normalized(), h[1].normalized());
    result.per_window.push_back(r);
    if (r.f_avg > result.favg) {
      result.window_us = window_grid_us[j];
      result.threshold = r.threshold;
      result.f0 = r.f_bright;
      result.f1 = r.f_dark;
      result.favg = r.f_avg;
    }
  }
  return result;
}

}  // namespace sccsim
