#include "sccsim/commands.hpp"

#include <sstream>

#include "sccsim/csv.hpp"
#include "sccsim/dynamics.hpp"
#include "sccsim/fitting.hpp"
#include "sccsim/protocol.hpp"
#include "sccsim/readout.hpp"

namespace sccsim {

namespace {

void fit_row(CsvWriter& w, const std::string& name, const FitParameter& p, const FitResult& fit) {
  w.field(name).field(p.estimate).field(p.sigma).field(fit.rss).field(fit.converged ? "true" : "false");
  w.end_row();
}

constexpr const char* kFitHeader = "parameter,estimate,sigma,residual,converged";

}  // namespace

CommandOutput cmd_pl(const RunConfig& c) {
  const auto& seq = c.sequence;
  const auto trace = pl_trace(c.rates, seq.pl_lasers, PopulationState::pure(seq.pl_start), c.detector, c.sweep.t_us);
  CommandOutput out;
  CsvWriter w(out.csv);
  w.header("t_us,kctps");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    w.field(c.sweep.t_us[i]).field(trace[i]);
    w.end_row();
  }
  return out;
}

CommandOutput cmd_ionize(const RunConfig& c) {
  const auto& s = c.sweep;
  CommandOutput out;
  CsvWriter w(out.csv);
  w.header("power_mw,t_us,nv_minus");
  CsvWriter f(out.fit_report);
  f.header(kFitHeader);
  std::vector<double> fitted;
  for (std::size_t k = 0; k < s.powers_mw.size(); ++k) {
    const auto curve = ionization_curve(c.rates, s.gamma_ion_mhz[k], s.durations_us);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      w.field(s.powers_mw[k]).field(s.durations_us[i]).field(curve[i]);
      w.end_row();
    }
    const auto fit = fit_ionization_rate(s.durations_us, curve, c.rates);
    fitted.push_back(fit.at("gamma_ion").estimate);
    std::ostringstream name;
    name << "gamma_ion@" << s.powers_mw[k] << "mW";
    fit_row(f, name.str(), fit.at("gamma_ion"), fit);
  }
  if (!s.powers_mw.empty()) {
    const auto line = fit_linear_origin(s.powers_mw, fitted);
    fit_row(f, "ion_coefficient_mhz_per_mw", line.at("slope"), line);
  }
  return out;
}

CommandOutput cmd_scc(const RunConfig& c, SccMode mode, Execution exec) {
  const auto& seq = c.sequence;
  const LaserConfig lasers = seq.scc_lasers(c.rates);
  CommandOutput out;
  CsvWriter w(out.csv);
  switch (mode) {
    case SccMode::Curves: {
      const double nv_minus0 = seq.charge_init.post_select ? 1.0 : seq.charge_init.nv_minus_probability;
      w.header("duration_us,nv_minus_0,nv_minus_1");
      for (const auto& p : scc_curves(c.rates, lasers, seq.max_rounds, seq.round_us, seq.aux_correction, nv_minus0)) {
        w.field(p.duration_us).field(p.nv_minus_0).field(p.nv_minus_1);
        w.end_row();
      }
      break;
    }
    case SccMode::Fidelity: {
      const auto curve = average_fidelity_vs_duration(c.rates, lasers, c.budget, seq.aux_correction, seq.max_rounds,
                                                      seq.round_us, seq.plateau_tolerance);
      w.header("duration_us,f0,f1,favg");
      for (const auto& p : curve.points) {
        w.field(p.duration_us).field(p.f0).field(p.f1).field(p.favg);
        w.end_row();
      }
      CsvWriter f(out.fit_report);
      f.header(kFitHeader);
      f.field("max_favg").field(curve.best().favg).field(0.0).field(0.0).field("true");
      f.end_row();
      f.field("plateau_onset_us").field(curve.optimal().duration_us).field(0.0).field(0.0).field("true");
      f.end_row();
      break;
    }
    case SccMode::Histogram: {
      const auto hist = simulate_shot(c.rates, seq.scc_sequence(c.rates), c.budget, c.detector, c.charge_model,
                                      c.seed, seq.shots, seq.charge_init, exec);
      w.header("state,photons,occurrences");
      for (const auto& [label, h] : {std::pair{"0", &hist.init_0}, std::pair{"1", &hist.init_1}}) {
        for (const auto& [k, n] : h->bins()) {
          w.field(label).field(k).field(n);
          w.end_row();
        }
      }
      break;
    }
  }
  return out;
}

CommandOutput cmd_map(const RunConfig& c, MapKind kind, Execution exec, bool include_init) {
  const auto& s = c.sweep;
  const SccSchedule schedule{c.sequence.max_rounds, c.sequence.round_us, c.sequence.aux_correction};
  CommandOutput out;
  CsvWriter w(out.csv);
  switch (kind) {
    case MapKind::Efficiency: {
      const auto surface = efficiency_map(s.gamma_flip_mhz, s.map_gamma_ion_mhz, c.rates, schedule, exec);
      w.header("gamma_flip_mhz,gamma_ion_mhz,efficiency");
      for (std::size_t f = 0; f < s.gamma_flip_mhz.size(); ++f) {
        for (std::size_t i = 0; i < s.map_gamma_ion_mhz.size(); ++i) {
          w.field(s.gamma_flip_mhz[f]).field(s.map_gamma_ion_mhz[i]).field(surface[f * s.map_gamma_ion_mhz.size() + i]);
          w.end_row();
        }
      }
      break;
    }
    case MapKind::Fidelity: {
      ErrorBudget budget = c.budget;
      if (!include_init) budget.init_fidelity_0 = budget.init_fidelity_1 = 1.0;
      w.header("gamma_flip_mhz,gamma_ion_mhz,fidelity");
      for (double flip : s.gamma_flip_mhz) {
        const auto row = fidelity_map(flip, s.map_gamma_ion_mhz, budget, c.rates, schedule, exec);
        for (std::size_t i = 0; i < row.size(); ++i) {
          w.field(flip).field(s.map_gamma_ion_mhz[i]).field(row[i]);
          w.end_row();
        }
      }
      break;
    }
    case MapKind::Charge: {
      const auto cells =
          charge_fidelity_map(s.bright_kctps, s.lifetime_ms, c.charge_model.dark_kctps, s.windows_us, exec);
      w.header("bright_kctps,lifetime_ms,window_us,threshold,fidelity");
      for (const auto& cell : cells) {
        w.field(cell.bright_kctps).field(cell.lifetime_ms).field(cell.window_us).field(cell.threshold).field(cell.fidelity);
        w.end_row();
      }
      break;
    }
  }
  return out;
}

}  // namespace sccsim
