#include "sccsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>

namespace sccsim {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void read_number(const json& j, const char* key, double& out, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  out = j.at(key).get<double>();
}

void read_list(const json& j, const char* key, std::vector<double>& out, const std::string& where) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  out.clear();
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
}

template <class F>
auto rethrow_as_config(F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

}  // namespace

json to_json(const RateSet& r) {
  return json{{"gamma_emission", r.gamma_emission},
              {"gamma_ex_0", r.gamma_ex_0},
              {"gamma_ex_pm1", r.gamma_ex_pm1},
              {"gamma_flip_ey", r.gamma_flip_ey},
              {"gamma_flip_e12", r.gamma_flip_e12},
              {"gamma_isc_ey", r.gamma_isc_ey},
              {"gamma_isc_e12", r.gamma_isc_e12},
              {"gamma_singlet_total", r.gamma_singlet_total},
              {"singlet_branching",
               {{"to_plus1", r.singlet_branching.to_plus1},
                {"to_minus1", r.singlet_branching.to_minus1},
                {"to_0", r.singlet_branching.to_0}}},
              {"alpha", r.alpha},
              {"gamma_ion", r.gamma_ion}};
}

RateSet rates_from_json(const json& j) {
  const std::string w = "rates";
  reject_unknown(j,
                 {"gamma_emission", "gamma_ex_0", "gamma_ex_pm1", "gamma_flip_ey", "gamma_flip_e12", "gamma_isc_ey",
                  "gamma_isc_e12", "gamma_singlet_total", "singlet_branching", "alpha", "gamma_ion"},
                 w);
  RateSet r;
  read_number(j, "gamma_emission", r.gamma_emission, w);
  read_number(j, "gamma_ex_0", r.gamma_ex_0, w);
  read_number(j, "gamma_ex_pm1", r.gamma_ex_pm1, w);
  read_number(j, "gamma_flip_ey", r.gamma_flip_ey, w);
  read_number(j, "gamma_flip_e12", r.gamma_flip_e12, w);
  read_number(j, "gamma_isc_ey", r.gamma_isc_ey, w);
  read_number(j, "gamma_isc_e12", r.gamma_isc_e12, w);
  read_number(j, "gamma_singlet_total", r.gamma_singlet_total, w);
  read_number(j, "alpha", r.alpha, w);
  read_number(j, "gamma_ion", r.gamma_ion, w);
  if (j.contains("singlet_branching")) {
    const auto& b = j.at("singlet_branching");
    const std::string wb = w + ".singlet_branching";
    reject_unknown(b, {"to_plus1", "to_minus1", "to_0"}, wb);
    read_number(b, "to_plus1", r.singlet_branching.to_plus1, wb);
    read_number(b, "to_minus1", r.singlet_branching.to_minus1, wb);
    read_number(b, "to_0", r.singlet_branching.to_0, wb);
  }
  rethrow_as_config([&] { return validate(r); });
  return r;
}

json to_json(const LaserConfig& l) {
  return json{{"ey_on", l.ey_on}, {"e12_on", l.e12_on}, {"nir_power_mw", l.nir_power_mw},
              {"ion_coefficient", l.ion_coefficient}};
}

LaserConfig lasers_from_json(const json& j) {
  const std::string w = "lasers";
  reject_unknown(j, {"ey_on", "e12_on", "nir_power_mw", "ion_coefficient"}, w);
  LaserConfig l;
  read(j, "ey_on", l.ey_on, w);
  read(j, "e12_on", l.e12_on, w);
  read_number(j, "nir_power_mw", l.nir_power_mw, w);
  read_number(j, "ion_coefficient", l.ion_coefficient, w);
  rethrow_as_config([&] {
    validate(l);
    return 0;
  });
  return l;
}

json to_json(const PulseSequence& seq) {
  json arr = json::array();
  for (const auto& s : seq.segments) {
    json seg{{"duration_us", s.duration_us}, {"lasers", to_json(s.lasers)}};
    if (s.mw_swap) {
      seg["mw_swap"] = {{"a", std::string(to_string(s.mw_swap->a))},
                        {"b", std::string(to_string(s.mw_swap->b))},
                        {"fraction", s.mw_swap->fraction}};
    }
    arr.push_back(std::move(seg));
  }
  return arr;
}

PulseSequence sequence_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("segments: expected an array");
  PulseSequence seq;
  for (const auto& item : j) {
    const std::string w = "segments[" + std::to_string(seq.segments.size()) + "]";
    reject_unknown(item, {"duration_us", "lasers", "mw_swap"}, w);
    PulseSegment s;
    read_number(item, "duration_us", s.duration_us, w);
    if (item.contains("lasers")) s.lasers = lasers_from_json(item.at("lasers"));
    if (item.contains("mw_swap")) {
      const auto& m = item.at("mw_swap");
      reject_unknown(m, {"a", "b", "fraction"}, w + ".mw_swap");
      MicrowaveSwap swap;
      std::string a = std::string(to_string(swap.a));
      std::string b = std::string(to_string(swap.b));
      read(m, "a", a, w + ".mw_swap");
      read(m, "b", b, w + ".mw_swap");
      read_number(m, "fraction", swap.fraction, w + ".mw_swap");
      rethrow_as_config([&] {
        swap.a = level_from_string(a);
        swap.b = level_from_string(b);
        return 0;
      });
      s.mw_swap = swap;
    }
    rethrow_as_config([&] {
      validate(s);
      return 0;
    });
    seq.segments.push_back(s);
  }
  return seq;
}

LaserConfig SequenceConfig::scc_lasers(const RateSet& rates) const {
  LaserConfig l{true, false, 0.0, ion_coefficient};
  l.nir_power_mw = nir_power_mw ? *nir_power_mw : (ion_coefficient > 0.0 ? rates.gamma_ion / ion_coefficient : 0.0);
  return l;
}

PulseSequence SequenceConfig::scc_sequence(const RateSet& rates) const {
  if (segments) return *segments;
  return build_scc_sequence(n_rounds, round_us, scc_lasers(rates), aux_correction, rotation_fraction);
}

SweepConfig SweepConfig::defaults() {
  SweepConfig s;
  s.t_us = linspace(0.0, 20.0, 201);
  s.durations_us = linspace(0.0, 20.0, 41);
  s.powers_mw = {7.0, 12.0, 18.4, 28.0, 39.8, 45.0};
  s.gamma_ion_mhz = {0.52, 0.81, 1.23, 2.21, 2.67, 2.79};
  s.map_gamma_ion_mhz = linspace(0.0, 100.0, 201);
  s.gamma_flip_mhz = {0.2, 0.75};
  s.bright_kctps = {10.0, 20.0, 30.0, 42.1, 60.0, 100.0};
  s.lifetime_ms = {10.0, 100.0, 400.7, 1000.0};
  s.windows_us = default_window_grid();
  return s;
}

void RunConfig::validate() const {
  rethrow_as_config([&] {
    sccsim::validate(rates);
    sccsim::validate(detector);
    sccsim::validate(charge_model);
    sccsim::validate(budget);
    sccsim::validate(sequence.pl_lasers);
    return 0;
  });
  if (sequence.n_rounds < 1) throw ConfigError("sequence.n_rounds must be >= 1");
  if (sequence.max_rounds < 1) throw ConfigError("sequence.max_rounds must be >= 1");
  if (!(sequence.round_us > 0.0)) throw ConfigError("sequence.round_us must be > 0");
  if (sequence.nir_power_mw && !(*sequence.nir_power_mw >= 0.0)) throw ConfigError("sequence.nir_power_mw must be >= 0");
  if (!(sequence.ion_coefficient > 0.0)) throw ConfigError("sequence.ion_coefficient must be > 0");
  if (!(sequence.rotation_fraction >= 0.0 && sequence.rotation_fraction <= 1.0)) {
    throw ConfigError("sequence.rotation_fraction must be in [0,1]");
  }
  if (!(sequence.plateau_tolerance >= 0.0)) throw ConfigError("sequence.plateau_tolerance must be >= 0");
  if (sequence.shots < 1) throw ConfigError("sequence.shots must be >= 1");
  const auto& ci = sequence.charge_init;
  if (!(ci.nv_minus_probability >= 0.0 && ci.nv_minus_probability <= 1.0)) {
    throw ConfigError("sequence.charge_init.nv_minus_probability must be in [0,1]");
  }
  if (sweep.powers_mw.size() != sweep.gamma_ion_mhz.size()) {
    throw ConfigError("sweep.powers_mw and sweep.gamma_ion_mhz must have equal length");
  }
  auto nonneg = [](const std::vector<double>& v, const char* name) {
    for (double x : v) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError(std::string("sweep.") + name + ": values must be >= 0");
    }
  };
  nonneg(sweep.t_us, "t_us");
  nonneg(sweep.durations_us, "durations_us");
  nonneg(sweep.powers_mw, "powers_mw");
  nonneg(sweep.gamma_ion_mhz, "gamma_ion_mhz");
  nonneg(sweep.map_gamma_ion_mhz, "map_gamma_ion_mhz");
  nonneg(sweep.gamma_flip_mhz, "gamma_flip_mhz");
  nonneg(sweep.windows_us, "windows_us");
  if (!std::is_sorted(sweep.t_us.begin(), sweep.t_us.end())) throw ConfigError("sweep.t_us must be nondecreasing");
  for (double b : sweep.bright_kctps) {
    if (!(b > charge_model.dark_kctps)) throw ConfigError("sweep.bright_kctps must exceed charge_model.dark_kctps");
  }
  for (double l : sweep.lifetime_ms) {
    if (!(l > 0.0)) throw ConfigError("sweep.lifetime_ms must be > 0");
  }
}

RunConfig parse_config(const json& j) {
  reject_unknown(j, {"rates", "detector", "charge_model", "budget", "sequence", "sweep", "seed", "output"}, "config");
  RunConfig c;
  if (j.contains("rates")) c.rates = rates_from_json(j.at("rates"));
  if (j.contains("detector")) {
    const auto& d = j.at("detector");
    const std::string w = "detector";
    reject_unknown(d, {"collection_efficiency", "bg_ey_kctps", "bg_e12_kctps", "window_us"}, w);
    read_number(d, "collection_efficiency", c.detector.collection_efficiency, w);
    read_number(d, "bg_ey_kctps", c.detector.bg_ey_kctps, w);
    read_number(d, "bg_e12_kctps", c.detector.bg_e12_kctps, w);
    read_number(d, "window_us", c.detector.window_us, w);
  }
  if (j.contains("charge_model")) {
    const auto& m = j.at("charge_model");
    const std::string w = "charge_model";
    reject_unknown(m, {"bright_kctps", "dark_kctps", "nv_minus_lifetime_ms", "window_us", "threshold"}, w);
    read_number(m, "bright_kctps", c.charge_model.bright_kctps, w);
    read_number(m, "dark_kctps", c.charge_model.dark_kctps, w);
    read_number(m, "nv_minus_lifetime_ms", c.charge_model.nv_minus_lifetime_ms, w);
    read_number(m, "window_us", c.charge_model.window_us, w);
    read(m, "threshold", c.charge_model.threshold, w);
  }
  if (j.contains("budget")) {
    const auto& b = j.at("budget");
    const std::string w = "budget";
    reject_unknown(b, {"init_fidelity_0", "init_fidelity_1", "charge_readout_fidelity", "charge_flip_error"}, w);
    read_number(b, "init_fidelity_0", c.budget.init_fidelity_0, w);
    read_number(b, "init_fidelity_1", c.budget.init_fidelity_1, w);
    read_number(b, "charge_readout_fidelity", c.budget.charge_readout_fidelity, w);
    read_number(b, "charge_flip_error", c.budget.charge_flip_error, w);
  }
  if (j.contains("sequence")) {
    const auto& s = j.at("sequence");
    const std::string w = "sequence";
    reject_unknown(s,
                   {"n_rounds", "round_us", "max_rounds", "nir_power_mw", "ion_coefficient", "aux_correction",
                    "rotation_fraction", "plateau_tolerance", "shots", "charge_init", "segments", "pl_lasers",
                    "pl_start"},
                   w);
    auto& q = c.sequence;
    read(s, "n_rounds", q.n_rounds, w);
    read_number(s, "round_us", q.round_us, w);
    read(s, "max_rounds", q.max_rounds, w);
    if (s.contains("nir_power_mw")) {
      double p = 0.0;
      read_number(s, "nir_power_mw", p, w);
      q.nir_power_mw = p;
    }
    read_number(s, "ion_coefficient", q.ion_coefficient, w);
    read(s, "aux_correction", q.aux_correction, w);
    read_number(s, "rotation_fraction", q.rotation_fraction, w);
    read_number(s, "plateau_tolerance", q.plateau_tolerance, w);
    read(s, "shots", q.shots, w);
    if (s.contains("charge_init")) {
      const auto& ci = s.at("charge_init");
      reject_unknown(ci, {"nv_minus_probability", "post_select"}, w + ".charge_init");
      read_number(ci, "nv_minus_probability", q.charge_init.nv_minus_probability, w + ".charge_init");
      read(ci, "post_select", q.charge_init.post_select, w + ".charge_init");
    }
    if (s.contains("segments")) q.segments = sequence_from_json(s.at("segments"));
    if (s.contains("pl_lasers")) q.pl_lasers = lasers_from_json(s.at("pl_lasers"));
    if (s.contains("pl_start")) {
      std::string name;
      read(s, "pl_start", name, w);
      q.pl_start = rethrow_as_config([&] { return level_from_string(name); });
    }
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    const std::string w = "sweep";
    reject_unknown(s,
                   {"t_us", "durations_us", "powers_mw", "gamma_ion_mhz", "map_gamma_ion_mhz", "gamma_flip_mhz",
                    "bright_kctps", "lifetime_ms", "windows_us"},
                   w);
    read_list(s, "t_us", c.sweep.t_us, w);
    read_list(s, "durations_us", c.sweep.durations_us, w);
    read_list(s, "powers_mw", c.sweep.powers_mw, w);
    read_list(s, "gamma_ion_mhz", c.sweep.gamma_ion_mhz, w);
    read_list(s, "map_gamma_ion_mhz", c.sweep.map_gamma_ion_mhz, w);
    read_list(s, "gamma_flip_mhz", c.sweep.gamma_flip_mhz, w);
    read_list(s, "bright_kctps", c.sweep.bright_kctps, w);
    read_list(s, "lifetime_ms", c.sweep.lifetime_ms, w);
    read_list(s, "windows_us", c.sweep.windows_us, w);
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed: expected an unsigned integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  read(j, "output", c.output, "config");
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json seq{{"n_rounds", c.sequence.n_rounds},
           {"round_us", c.sequence.round_us},
           {"max_rounds", c.sequence.max_rounds},
           {"ion_coefficient", c.sequence.ion_coefficient},
           {"aux_correction", c.sequence.aux_correction},
           {"rotation_fraction", c.sequence.rotation_fraction},
           {"plateau_tolerance", c.sequence.plateau_tolerance},
           {"shots", c.sequence.shots},
           {"charge_init",
            {{"nv_minus_probability", c.sequence.charge_init.nv_minus_probability},
             {"post_select", c.sequence.charge_init.post_select}}},
           {"pl_lasers", to_json(c.sequence.pl_lasers)},
           {"pl_start", std::string(to_string(c.sequence.pl_start))}};
  if (c.sequence.nir_power_mw) seq["nir_power_mw"] = *c.sequence.nir_power_mw;
  if (c.sequence.segments) seq["segments"] = to_json(*c.sequence.segments);
  return json{
      {"rates", to_json(c.rates)},
      {"detector",
       {{"collection_efficiency", c.detector.collection_efficiency},
        {"bg_ey_kctps", c.detector.bg_ey_kctps},
        {"bg_e12_kctps", c.detector.bg_e12_kctps},
        {"window_us", c.detector.window_us}}},
      {"charge_model",
       {{"bright_kctps", c.charge_model.bright_kctps},
        {"dark_kctps", c.charge_model.dark_kctps},
        {"nv_minus_lifetime_ms", c.charge_model.nv_minus_lifetime_ms},
        {"window_us", c.charge_model.window_us},
        {"threshold", c.charge_model.threshold}}},
      {"budget",
       {{"init_fidelity_0", c.budget.init_fidelity_0},
        {"init_fidelity_1", c.budget.init_fidelity_1},
        {"charge_readout_fidelity", c.budget.charge_readout_fidelity},
        {"charge_flip_error", c.budget.charge_flip_error}}},
      {"sequence", seq},
      {"sweep",
       {{"t_us", c.sweep.t_us},
        {"durations_us", c.sweep.durations_us},
        {"powers_mw", c.sweep.powers_mw},
        {"gamma_ion_mhz", c.sweep.gamma_ion_mhz},
        {"map_gamma_ion_mhz", c.sweep.map_gamma_ion_mhz},
        {"gamma_flip_mhz", c.sweep.gamma_flip_mhz},
        {"bright_kctps", c.sweep.bright_kctps},
        {"lifetime_ms", c.sweep.lifetime_ms},
        {"windows_us", c.sweep.windows_us}}},
      {"seed", c.seed},
      {"output", c.output}};
}

}  // namespace sccsim
