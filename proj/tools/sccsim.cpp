// sccsim: PL decay, ionization, SCC readout and parameter-map runs.
//
//   sccsim pl     [--config F] [--out F]
//   sccsim ionize [--config F] [--out F]
//   sccsim scc    [--config F] [--mode curves|fidelity|histogram] [--seed N] [--shots N] [--threads N] [--out F]
//   sccsim map    [--config F] [--kind efficiency|fidelity|charge] [--include-init] [--threads N] [--out F]
//
// Exit codes: 0 ok, 2 invalid config or arguments, 3 numerical non-convergence.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sccsim/commands.hpp"
#include "sccsim/config.hpp"
#include "sccsim/model.hpp"
#include "sccsim/parallel.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> shots;
  std::string out;
  int threads = 0;  // 0: OpenMP default
  sccsim::SccMode mode = sccsim::SccMode::Curves;
  sccsim::MapKind kind = sccsim::MapKind::Efficiency;
  bool include_init = false;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output CSV (default: config 'output', else stdout)");
}

void add_parallel(CLI::App* sub, Options& o) {
  sub->add_option("--threads", o.threads, "worker threads; 1 runs the serial path")->check(CLI::NonNegativeNumber);
}

// Writes to a temporary file first so a failed write leaves any previous output intact.
void write_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp);
    f << text;
    if (!f.flush()) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot rename to " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV single-shot spin readout simulator"};
  app.require_subcommand(1);
  Options o;

  auto* pl = app.add_subcommand("pl", "PL decay trace");
  add_common(pl, o);

  auto* ionize = app.add_subcommand("ionize", "NIR ionization curves and rate fits");
  add_common(ionize, o);

  auto* scc = app.add_subcommand("scc", "spin-to-charge conversion curves, fidelity or shot histograms");
  add_common(scc, o);
  add_parallel(scc, o);
  scc->add_option("--seed", o.seed, "master seed (overrides config)");
  scc->add_option("--shots", o.shots, "Monte Carlo shots per initial state");
  const std::map<std::string, sccsim::SccMode> modes{
      {"curves", sccsim::SccMode::Curves}, {"fidelity", sccsim::SccMode::Fidelity},
      {"histogram", sccsim::SccMode::Histogram}};
  scc->add_option("--mode", o.mode, "curves | fidelity | histogram")->transform(CLI::CheckedTransformer(modes));

  auto* map = app.add_subcommand("map", "efficiency, fidelity or charge-readout surfaces");
  add_common(map, o);
  add_parallel(map, o);
  const std::map<std::string, sccsim::MapKind> kinds{
      {"efficiency", sccsim::MapKind::Efficiency}, {"fidelity", sccsim::MapKind::Fidelity},
      {"charge", sccsim::MapKind::Charge}};
  map->add_option("--kind", o.kind, "efficiency | fidelity | charge")->transform(CLI::CheckedTransformer(kinds));
  map->add_flag("--include-init", o.include_init, "fidelity map: include the preparation errors of the budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "sccsim: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    sccsim::RunConfig config = o.config.empty() ? sccsim::RunConfig{} : sccsim::load_config(o.config);
    if (o.seed) config.seed = *o.seed;
    if (o.shots) config.sequence.shots = *o.shots;
    if (!o.out.empty()) config.output = o.out;
    config.validate();

    const auto exec = o.threads == 1 ? sccsim::Execution::Serial : sccsim::Execution::Parallel;
    if (o.threads > 1) sccsim::set_parallel_threads(o.threads);

    sccsim::CommandOutput result;
    if (*pl) {
      result = sccsim::cmd_pl(config);
    } else if (*ionize) {
      result = sccsim::cmd_ionize(config);
    } else if (*scc) {
      result = sccsim::cmd_scc(config, o.mode, exec);
    } else {
      result = sccsim::cmd_map(config, o.kind, exec, o.include_init);
    }

    if (config.output.empty()) {
      std::cout << result.csv;
      if (!result.fit_report.empty()) std::cout << '\n' << result.fit_report;
    } else {
      write_file(config.output, result.csv);
      if (!result.fit_report.empty()) write_file(config.output + ".fit.csv", result.fit_report);
    }
    return 0;
  } catch (const sccsim::ConfigError& e) {
    std::cerr << "sccsim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sccsim::ValidationError& e) {
    std::cerr << "sccsim: invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sccsim::ConvergenceError& e) {
    std::cerr << "sccsim: did not converge: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "sccsim: " << e.what() << '\n';
    return 1;
  }
}
