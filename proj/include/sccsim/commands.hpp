#pragma once

// Subcommand bodies of the sccsim CLI. Each renders its CSV into memory so
// nothing is written unless the whole computation succeeds.

#include <string>

#include "sccsim/config.hpp"
#include "sccsim/parallel.hpp"

namespace sccsim {

struct CommandOutput {
  std::string csv;
  std::string fit_report;  // "parameter,estimate,sigma,residual,converged"; empty if none
};

enum class SccMode { Curves, Fidelity, Histogram };
enum class MapKind { Efficiency, Fidelity, Charge };

/// "t_us,kctps"
CommandOutput cmd_pl(const RunConfig& config);

/// "power_mw,t_us,nv_minus" for each configured power, plus a fit report with the
/// refitted Γ_ion per power and the zero-intercept power coefficient.
CommandOutput cmd_ionize(const RunConfig& config);

/// Curves: "duration_us,nv_minus_0,nv_minus_1"
/// Fidelity: "duration_us,f0,f1,favg" (fit report carries the maximum and
/// the plateau-onset duration)
/// Histogram: "state,photons,occurrences" for init |0> and |1>
CommandOutput cmd_scc(const RunConfig& config, SccMode mode, Execution exec);

/// Efficiency: "gamma_flip_mhz,gamma_ion_mhz,efficiency"
/// Fidelity: "gamma_flip_mhz,gamma_ion_mhz,fidelity"
/// Charge: "bright_kctps,lifetime_ms,window_us,threshold,fidelity"
/// The fidelity map uses ideal initialization unless include_init is set.
CommandOutput cmd_map(const RunConfig& config, MapKind kind, Execution exec, bool include_init = false);

}  // namespace sccsim
