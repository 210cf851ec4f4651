// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sccsim/dynamics.hpp"
#include "sccsim/fitting.hpp"
#include "sccsim/protocol.hpp"
#include "sccsim/readout.hpp"
#include "sccsim/stochastic.hpp"

using namespace sccsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = limit_s <= 0.0 || secs < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s  %2d  %-32s %s  (%.3f s%s)\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
              in_time ? "" : ", over time limit");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const std::vector<double> kPowers{7.0, 12.0, 18.4, 28.0, 39.8, 45.0};
const std::vector<double> kIonRates{0.52, 0.81, 1.23, 2.21, 2.67, 2.79};

}  // namespace

int main() {
  const RateSet rates;

  criterion(1, "power coefficient", 1.0, [] {
    const double slope = fit_linear_origin(kPowers, kIonRates).at("slope").estimate;
    return Outcome{std::abs(slope - 0.0670) <= 0.001, fmt("slope=%.6f MHz/mW", slope)};
  });

  criterion(2, "charge-flip error", 1.0, [] {
    const double p = charge_flip_probability(500.0, 400.7);
    return Outcome{std::abs(p - 0.00125) <= 0.00001, fmt("p=%.7f", p)};
  });

  criterion(3, "excitation-rate estimate", 1.0, [] {
    const double g = excitation_rate_from_saturation(480.0, 1157.0, 77.0);
    return Outcome{std::abs(g - 54.6) <= 0.1, fmt("gamma_ex0=%.4f MHz", g)};
  });

  const auto scc_lasers = LaserConfig::scc(2.79);

  criterion(4, "SCC fidelity with AUX correction", 10.0, [&] {
    const auto c = average_fidelity_vs_duration(rates, scc_lasers, ErrorBudget{}, true);
    const double f = c.best().favg, t = c.optimal().duration_us;
    return Outcome{f >= 0.934 && f <= 0.974 && t >= 6.0 && t <= 14.0,
                   fmt("max F_avg=%.5f, plateau onset %.0f us (F_avg=%.5f)", f, t, c.optimal().favg)};
  });

  criterion(5, "SCC fidelity without correction", 10.0, [&] {
    const auto c = average_fidelity_vs_duration(rates, scc_lasers, ErrorBudget{}, false);
    const double f = c.best().favg;
    return Outcome{f >= 0.871 && f <= 0.911, fmt("max F_avg=%.5f", f)};
  });

  criterion(6, "resonance-fluorescence baseline", 120.0, [&] {
    std::vector<double> windows;
    for (int i = 1; i <= 80; ++i) windows.push_back(0.25 * i);
    const auto r = resonance_fluorescence_fidelity(rates, DetectorModel{}, windows, 100000, 20210501);
    return Outcome{r.favg >= 0.766 && r.favg <= 0.826,
                   fmt("F_avg=%.5f at window %.2f us, threshold %.0f", r.favg, r.window_us,
                       static_cast<double>(r.threshold))};
  });

  criterion(7, "fault-tolerance crossing", 30.0, [&] {
    std::vector<double> ion;
    for (int i = 0; i <= 134; ++i) ion.push_back(0.5 * i);
    const auto f02 = fidelity_map(0.2, ion, ErrorBudget::readout_only(), rates);
    double crossing = -1.0;
    for (std::size_t i = 0; i < ion.size(); ++i) {
      if (f02[i] >= 0.999) {
        crossing = ion[i];
        break;
      }
    }
    std::vector<double> low;
    for (int i = 0; i <= 60; ++i) low.push_back(0.05 * i);
    const auto f075 = fidelity_map(0.75, low, ErrorBudget::readout_only(), rates);
    double max075 = 0.0;
    for (double v : f075) max075 = std::max(max075, v);
    return Outcome{crossing >= 0.0 && max075 < 0.999,
                   fmt("0.999 crossed at gamma_ion=%.1f MHz (flip 0.2); max %.5f at flip 0.75, gamma_ion<=3", crossing,
                       max075)};
  });

  criterion(8, "Gillespie vs propagate", 120.0, [&] {
    const auto lasers = LaserConfig::ey_only();
    const JumpTable table(rates, lasers);
    const std::array<double, 5> checkpoints{0.1, 0.5, 1.0, 2.0, 5.0};
    const int n = 100000;
    std::array<std::array<long, kNumLevels>, 5> counts{};
    for (int i = 0; i < n; ++i) {
      ShotRng rng(20210501, 8, static_cast<std::uint64_t>(i));
      std::size_t next = 0;
      Level current = Level::Ground0;
      const Level final_level = run_jumps(table, Level::Ground0, checkpoints.back(), rng,
                                          [&](double t, const JumpTable::Out& out) {
                                            while (next < checkpoints.size() && checkpoints[next] < t)
                                              ++counts[next++][index(current)];
                                            current = out.to;
                                          });
      while (next < checkpoints.size()) ++counts[next++][index(final_level)];
    }
    const auto g = build_generator(rates, lasers);
    double worst = 0.0;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      const auto p = propagate(PopulationState::pure(Level::Ground0), g, checkpoints[c]);
      for (std::size_t l = 0; l < kNumLevels; ++l) {
        const double q = p.values()[l];
        const double sigma = std::sqrt(std::max(q * (1.0 - q), 1.0 / n) / n);
        worst = std::max(worst, std::abs(static_cast<double>(counts[c][l]) / n - q) / sigma);
      }
    }
    return Outcome{worst <= 3.0, fmt("largest deviation %.2f sigma over 5 checkpoints x 7 levels", worst)};
  });

  criterion(9, "analytic vs sampled histogram", 120.0, [] {
    const ChargeReadoutModel m;
    const auto analytic = analytic_count_distribution(m, ChargeState::NVMinus);
    const auto sampled = sample_charge_histogram(m, ChargeState::NVMinus, 100000, 20210501).normalized();
    const double tv = total_variation(analytic, sampled);
    return Outcome{tv < 0.01, fmt("TV=%.5f", tv)};
  });

  criterion(10, "self-consistency fits", 60.0, [&] {
    std::vector<double> d;
    for (int i = 0; i <= 40; ++i) d.push_back(0.5 * i);
    double worst = 0.0;
    for (double g : kIonRates) {
      const double est = fit_ionization_rate(d, ionization_curve(rates, g, d), rates).at("gamma_ion").estimate;
      worst = std::max(worst, std::abs(est - g) / g);
    }
    std::vector<std::pair<double, double>> data;
    for (const auto& p : scc_curves(rates, scc_lasers, 15, 2.0, true)) data.emplace_back(p.duration_us, p.nv_minus_0);
    RateSet start = rates;
    start.alpha = 0.5;
    const double alpha = fit_alpha(data, start, scc_lasers).at("alpha").estimate;
    const double alpha_err = std::abs(alpha - 0.275) / 0.275;
    return Outcome{worst <= 0.005 && alpha_err <= 0.005,
                   fmt("worst gamma_ion error %.2e, alpha=%.6f (error %.2e)", worst, alpha, alpha_err)};
  });

  criterion(11, "determinism across threads", 0.0, [] {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("sccsim_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto a = (dir / "serial.csv").string(), b = (dir / "parallel.csv").string();
    const std::string base = std::string(SCCSIM_CLI) + " scc --mode histogram --seed 20210501 ";
    const int ra = std::system((base + "--threads 1 --out " + a).c_str());
    const int rb = std::system((base + "--threads 4 --out " + b).c_str());
    auto slurp = [](const std::string& p) {
      std::ifstream f(p, std::ios::binary);
      std::stringstream ss;
      ss << f.rdbuf();
      return ss.str();
    };
    const std::string sa = slurp(a), sb = slurp(b);
    fs::remove_all(dir);
    const bool ok = ra == 0 && rb == 0 && !sa.empty() && sa == sb;
    return Outcome{ok, fmt("%.0f bytes, identical=%.0f", static_cast<double>(sa.size()), sa == sb ? 1.0 : 0.0)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
