// Copyright 2026 The gawqed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. `run` parses arguments, loads the JSON config,
// executes one experiment and writes its artifact. Exit codes: 0 success,
// 2 invalid input, 3 numerical failure. Errors go to stderr as one JSON
// object per line; a one-line summary goes to stdout.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gawqed/calibration.hpp"
#include "gawqed/core.hpp"
#include "gawqed/device.hpp"
#include "gawqed/dynamics.hpp"
#include "gawqed/estimation.hpp"
#include "gawqed/io.hpp"
#include "gawqed/reference_devices.hpp"
#include "gawqed/sequences.hpp"
#include "gawqed/spectra.hpp"

namespace gawqed::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> list{"spectra", "df",       "t1",        "chevron", "crossing",
                                             "sequence", "tomography", "calibrate", "fit",     "synth"};
  return list;
}

struct RunConfig {
  std::string command;
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool dry_run = false;
};

namespace detail {

struct Context {
  RunConfig run;
  json config;
  std::filesystem::path base_dir;
  std::ostream& out;
  std::ostream& err;

  std::string resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base_dir / path).string();
  }
  std::uint64_t seed() const {
    if (run.seed) return *run.seed;
    if (config.contains("seed")) {
      const json& s = config.at("seed");
      if (!s.is_number_unsigned()) throw ValidationError("config: 'seed' must be a non-negative integer");
      return s.get<std::uint64_t>();
    }
    return 0;
  }
};

inline const json& section(const Context& ctx, const char* name) {
  if (!ctx.config.contains(name) || !ctx.config.at(name).is_object()) {
    throw ValidationError(std::string("config: missing object '") + name + "' for command " + ctx.run.command);
  }
  return ctx.config.at(name);
}

inline double num(const json& j, const char* name, const std::string& where) { return io::detail::number(j, name, where); }
inline double num_or(const json& j, const char* name, double fallback, const std::string& where) {
  return io::detail::number_or(j, name, fallback, where);
}

inline std::size_t count(const json& j, const char* name, const std::string& where) {
  const double v = num(j, name, where);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e7) {
    throw ValidationError(where + ": '" + std::string(name) + "' must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

inline std::vector<double> linspace(double start, double stop, std::size_t points, const std::string& where) {
  if (!std::isfinite(start) || !std::isfinite(stop)) throw ValidationError(where + ": grid bounds must be finite");
  if (points > 1 && !(stop > start)) throw ValidationError(where + ": grid stop must exceed start");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = points == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

/// {"<prefix>start_hz", "<prefix>stop_hz", "<prefix>points"} or an explicit list "<prefix>values_hz".
inline std::vector<double> grid_hz(const json& j, const std::string& prefix, const std::string& where) {
  const std::string list = prefix + "values_hz";
  if (j.contains(list)) {
    const json& v = j.at(list);
    if (!v.is_array() || v.empty()) throw ValidationError(where + ": '" + list + "' must be a non-empty array");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ValidationError(where + ": '" + list + "' entries must be numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  const std::string a = prefix + "start_hz", b = prefix + "stop_hz", n = prefix + "points";
  return linspace(num(j, a.c_str(), where), num(j, b.c_str(), where), count(j, n.c_str(), where), where);
}

inline std::vector<double> time_grid(const json& j, const std::string& where) {
  const double t_max = num(j, "t_max_s", where);
  if (!(t_max > 0.0)) throw ValidationError(where + ": t_max_s must be positive");
  return linspace(num_or(j, "t_min_s", 0.0, where), t_max, count(j, "t_points", where), where);
}

inline std::vector<double> to_angular(std::vector<double> hz) {
  for (double& f : hz) f = angular(f);
  return hz;
}

inline void require_positive_grid(const std::vector<double>& grid, const std::string& where) {
  for (double f : grid) {
    if (!(f > 0.0)) throw ValidationError(where + ": frequencies must be positive");
  }
}

/// "braided" devices are built from phase parameters:
///   {"kind": "two_point", "gamma_hz", "phi_ref", "f_ref_hz"}
///   {"kind": "three_point", "gamma1_hz", "gamma2_hz", "ratio", "f_ref_hz",
///    "phi2_ref" | "winding"}
/// Both accept "gamma_nr_hz" and a per-atom "lifetimes": {id: {"t1_s", "t2_star_s"}}.
inline DeviceLayout braided_device(const json& j) {
  const std::string where = "device.braided";
  const std::string kind = io::detail::text(j, "kind", where);
  const double f_ref = num(j, "f_ref_hz", where);
  if (!(f_ref > 0.0)) throw ValidationError(where + ": f_ref_hz must be positive");
  const double gamma_nr = angular(num_or(j, "gamma_nr_hz", 0.0, where));
  DeviceLayout layout;
  if (kind == "two_point") {
    layout = braided_two_point(angular(num(j, "gamma_hz", where)), num(j, "phi_ref", where), angular(f_ref), gamma_nr);
  } else if (kind == "three_point") {
    const double g1 = num(j, "gamma1_hz", where);
    const double g2 = num(j, "gamma2_hz", where);
    const double ratio = num(j, "ratio", where);
    const double ratio3 = num_or(j, "ratio3", ratio, where);
    double phi2 = 0.0;
    if (j.contains("phi2_ref")) {
      phi2 = num(j, "phi2_ref", where);
    } else {
      const double w = num(j, "winding", where);
      if (w < 0.0 || w != std::floor(w)) throw ValidationError(where + ": winding must be a non-negative integer");
      if (ratio3 != ratio) throw ValidationError(where + ": winding needs ratio3 == ratio; give phi2_ref instead");
      phi2 = three_point_df_phase_sum(g1, g2, static_cast<int>(w)) / (1.0 + ratio);
      if (!std::isfinite(phi2)) throw ValidationError(where + ": no decoherence-free solution for these strengths");
    }
    layout = braided_three_point(angular(g1), angular(g2), phi2, ratio, ratio3, angular(f_ref), gamma_nr);
  } else {
    throw ValidationError(where + ": kind must be two_point or three_point");
  }
  if (j.contains("lifetimes")) {
    for (const auto& [id, t] : j.at("lifetimes").items()) {
      std::size_t k = 0;
      try {
        k = layout.atom_index(id);
      } catch (const DomainError&) {
        throw ValidationError(where + ".lifetimes: unknown atom '" + id + "'");
      }
      try {
        const auto dec = reference::decoherence_from_times(num(t, "t1_s", where), num(t, "t2_star_s", where));
        layout.atoms[k].gamma_nr = dec.gamma_nr;
        layout.atoms[k].gamma_phi = dec.gamma_phi;
      } catch (const DomainError& e) {
        throw ValidationError(where + ".lifetimes." + id + ": " + e.what());
      }
    }
  }
  return layout;
}

inline io::DeviceConfig load_device(const Context& ctx) {
  if (!ctx.config.contains("device")) throw ValidationError("config: missing 'device'");
  const json& d = ctx.config.at("device");
  io::DeviceConfig cfg;
  if (d.is_string()) {
    cfg = io::parse_device(io::read_json(ctx.resolve(d.get<std::string>())));
  } else if (d.is_object() && d.contains("braided")) {
    try {
      cfg.layout = checked(braided_device(d.at("braided")));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("device: ") + e.what());
    }
    cfg.diagnostics = validate(cfg.layout);
    cfg.g_parasitic = angular(num_or(d, "parasitic_g_hz", 0.0, "device"));
    if (cfg.g_parasitic < 0.0) throw ValidationError("device: parasitic_g_hz must be >= 0");
  } else if (d.is_object()) {
    cfg = io::parse_device(d);
  } else {
    throw ValidationError("config: 'device' must be an object or a path");
  }
  for (const auto& diag : cfg.diagnostics) {
    if (diag.severity == Severity::kWarning) {
      ctx.err << json{{"warning", {{"code", diag.code}, {"message", diag.message}}}}.dump() << "\n";
    }
  }
  return cfg;
}

inline std::size_t atom_ref(const DeviceLayout& layout, const json& j, const char* name, std::size_t fallback,
                            const std::string& where) {
  if (!j.contains(name)) return fallback;
  const std::string id = io::detail::text(j, name, where);
  try {
    return layout.atom_index(id);
  } catch (const DomainError&) {
    throw ValidationError(where + ": unknown atom '" + id + "'");
  }
}

inline std::string fmt(double v) { return io::format_double(v); }

inline void emit(const Context& ctx, const std::string& text) { io::write_text(ctx.run.out_path, text); }

// ------------------------------------------------------------- commands

inline std::string cmd_spectra(const Context& ctx) {
  const auto dev = load_device(ctx);
  const json& s = section(ctx, "sweep");
  const auto grid = grid_hz(s, "f_", "sweep");
  require_positive_grid(grid, "sweep");
  if (ctx.run.dry_run) return "spectra: dry run ok, " + std::to_string(grid.size()) + " grid points";
  const auto samples = sweep(dev.layout, to_angular(grid), ctx.run.threads, dev.g_parasitic);
  emit(ctx, io::sweep_csv(dev.layout, samples));
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].gamma[0] < samples[best].gamma[0]) best = i;
  }
  return "spectra: " + std::to_string(samples.size()) + " points, min gamma_" + dev.layout.atoms[0].id + " at " +
         fmt(grid[best]) + " Hz";
}

inline std::string cmd_df(const Context& ctx) {
  const auto dev = load_device(ctx);
  const json& s = section(ctx, "df");
  const double lo = num(s, "f_lo_hz", "df"), hi = num(s, "f_hi_hz", "df");
  if (!(lo > 0.0) || !(hi > lo)) throw ValidationError("df: need 0 < f_lo_hz < f_hi_hz");
  const double tol = num_or(s, "tol_hz", 1.0, "df");
  if (!(tol > 0.0)) throw ValidationError("df: tol_hz must be positive");
  const auto points = s.contains("grid_points") ? count(s, "grid_points", "df") : std::size_t{4001};
  if (ctx.run.dry_run) return "df: dry run ok";
  std::string csv = "atom,f_hz,residual_hz\n";
  std::string summary = "df:";
  for (std::size_t j = 0; j < dev.layout.atoms.size(); ++j) {
    const auto found = find_df_frequencies(dev.layout, j, angular(lo), angular(hi), angular(tol), points);
    for (const auto& f : found) {
      csv += f.atom_id + "," + fmt(cyclic(f.omega)) + "," + fmt(cyclic(f.residual)) + "\n";
      summary += " " + f.atom_id + "@" + fmt(cyclic(f.omega)) + "Hz";
    }
  }
  emit(ctx, csv);
  return summary == "df:" ? "df: none found" : summary;
}

inline std::string cmd_t1(const Context& ctx) {
  const auto dev = load_device(ctx);
  const json& s = section(ctx, "t1");
  const std::size_t j = atom_ref(dev.layout, s, "atom", 0, "t1");
  const auto freqs = grid_hz(s, "f_", "t1");
  require_positive_grid(freqs, "t1");
  const auto times = time_grid(s, "t1");
  if (ctx.run.dry_run) return "t1: dry run ok";
  ModelOptions opts;
  opts.g_parasitic = dev.g_parasitic;
  const auto rows = parallel_map(freqs.size(), ctx.run.threads, [&](std::size_t i) {
    return t1_experiment(dev.layout, j, angular(freqs[i]), times, opts);
  });
  std::string csv = "f_hz,t1_s,gamma_fit_hz,gamma_model_hz,fit_ok\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const double model = gamma_general(dev.layout, j, angular(freqs[i]));
    csv += fmt(freqs[i]) + "," + fmt(rows[i].fitted_t1) + "," + fmt(cyclic(rows[i].fitted_rate)) + "," +
           fmt(cyclic(model)) + "," + (rows[i].fit_ok ? "1" : "0") + "\n";
    if (model > 0.0) worst = std::max(worst, std::abs(rows[i].fitted_rate - model) / model);
  }
  emit(ctx, csv);
  return "t1: " + std::to_string(freqs.size()) + " frequencies, max relative fit deviation " + fmt(worst);
}

inline std::string cmd_chevron(const Context& ctx) {
  const auto dev = load_device(ctx);
  const json& s = section(ctx, "chevron");
  const double f_df = num(s, "f_df_hz", "chevron");
  if (!(f_df > 0.0)) throw ValidationError("chevron: f_df_hz must be positive");
  const auto deltas = grid_hz(s, "delta_", "chevron");
  const auto times = time_grid(s, "chevron");
  const std::size_t first = atom_ref(dev.layout, s, "first", 0, "chevron");
  const std::size_t second = atom_ref(dev.layout, s, "second", 1, "chevron");
  if (first == second) throw ValidationError("chevron: first and second must differ");
  for (double d : deltas) {
    if (!(f_df + d > 0.0)) throw ValidationError("chevron: detuned frequency must stay positive");
  }
  if (ctx.run.dry_run) return "chevron: dry run ok";
  ModelOptions opts;
  opts.g_parasitic = dev.g_parasitic;
  const auto map = chevron_experiment(dev.layout, angular(f_df), to_angular(deltas), times, opts, first, second,
                                      ctx.run.threads);
  emit(ctx, io::chevron_csv(map));
  const double g = rates_at(sub_layout(dev.layout, {first, second}), {angular(f_df), angular(f_df)}, opts).g(0, 1);
  return "chevron: " + std::to_string(deltas.size()) + "x" + std::to_string(times.size()) + " map, g=" +
         fmt(cyclic(g)) + " Hz, swap time pi/g=" + fmt(std::abs(kPi / g)) + " s";
}

inline std::string cmd_crossing(const Context& ctx) {
  const auto dev = load_device(ctx);
  const json& s = section(ctx, "crossing");
  const std::size_t a = atom_ref(dev.layout, s, "swept", 0, "crossing");
  const std::size_t b = atom_ref(dev.layout, s, "fixed", 1, "crossing");
  if (a == b) throw ValidationError("crossing: swept and fixed atoms must differ");
  const double f_fixed = num(s, "f_fixed_hz", "crossing");
  if (!(f_fixed > 0.0)) throw ValidationError("crossing: f_fixed_hz must be positive");
  const auto grid = grid_hz(s, "f_", "crossing");
  require_positive_grid(grid, "crossing");
  if (ctx.run.dry_run) return "crossing: dry run ok";
  std::string csv = "f_swept_hz,f_fixed_hz,g_hz,upper_hz,lower_hz\n";
  double min_split = std::numeric_limits<double>::infinity();
  double at = 0.0;
  for (double f : grid) {
    const double mean = 0.5 * angular(f + f_fixed);
    const double g = with_parasitic(g_general(dev.layout, a, b, mean), dev.g_parasitic);
    const auto [up, down] = avoided_crossing_branches(angular(f), angular(f_fixed), g);
    csv += fmt(f) + "," + fmt(f_fixed) + "," + fmt(cyclic(g)) + "," + fmt(cyclic(up)) + "," + fmt(cyclic(down)) + "\n";
    if (up - down < min_split) {
      min_split = up - down;
      at = f;
    }
  }
  emit(ctx, csv);
  return "crossing: minimum splitting " + fmt(cyclic(min_split)) + " Hz at " + fmt(at) + " Hz";
}

/// Moves `f_hz` onto the nearest decoherence-free frequency of atom `j`
/// within +-window; returns it unchanged when none is found.
inline double snap_df(const DeviceLayout& layout, std::size_t j, double f_hz, double window_hz) {
  const double lo = std::max(f_hz - window_hz, 0.5 * f_hz);
  const auto found = find_df_frequencies(layout, j, angular(lo), angular(f_hz + window_hz), angular(1.0), 2001);
  double best = f_hz;
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& f : found) {
    const double d = std::abs(cyclic(f.omega) - f_hz);
    if (d < dist) {
      dist = d;
      best = cyclic(f.omega);
    }
  }
  return best;
}

struct ProtocolSetup {
  double df1_hz = 0.0;
  double df2_hz = 0.0;
  EntanglingOptions options;
};

inline ProtocolSetup protocol_setup(const Context& ctx, const io::DeviceConfig& dev, const json& s) {
  const std::string where = "sequence";
  ProtocolSetup p;
  p.df1_hz = num(s, "f_df1_hz", where);
  p.df2_hz = num(s, "f_df2_hz", where);
  if (!(p.df1_hz > 0.0) || !(p.df2_hz > 0.0)) throw ValidationError(where + ": DF frequencies must be positive");
  if (dev.layout.atoms.size() != 2) throw ValidationError(where + ": the entangling protocol needs two atoms");
  if (s.contains("g_eff_hz")) p.options.g_eff = angular(num(s, "g_eff_hz", where));
  p.options.idle_before = num_or(s, "idle_before_s", p.options.idle_before, where);
  p.options.idle_after = num_or(s, "idle_after_s", p.options.idle_after, where);
  if (p.options.idle_before < 0.0 || p.options.idle_after < 0.0) throw ValidationError(where + ": idle times must be >= 0");
  p.options.run.model.g_parasitic = dev.g_parasitic;
  p.options.run.samples_per_segment = s.contains("samples_per_segment") ? count(s, "samples_per_segment", where) : 1;
  const double shots = num_or(s, "shots", 0.0, where);
  if (shots < 0.0 || shots != std::floor(shots)) throw ValidationError(where + ": shots must be a non-negative integer");
  p.options.shots = static_cast<std::uint64_t>(shots);
  p.options.seed = ctx.seed();
  const double window = num_or(s, "snap_window_hz", 20e6, where);
  if (window > 0.0 && !ctx.run.dry_run) {
    p.df1_hz = snap_df(dev.layout, 0, p.df1_hz, window);
    p.df2_hz = snap_df(dev.layout, 0, p.df2_hz, window);
  }
  return p;
}

inline DensityMatrix initial_state(const std::string& bits, std::size_t atoms) {
  if (bits.size() != atoms) throw ValidationError("sequence: 'initial' needs one 0/1 per atom");
  std::size_t idx = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ValidationError("sequence: 'initial' must contain only 0 and 1");
    idx = (idx << 1) | static_cast<std::size_t>(c == '1');
  }
  return DensityMatrix::basis_state(atoms, idx);
}

inline std::string cmd_sequence(const Context& ctx, bool tomography_only) {
  const auto dev = load_device(ctx);
  const json& s = section(ctx, "sequence");
  const std::string name = tomography_only ? "tomography" : "sequence";
  const std::string protocol = s.contains("protocol") ? io::detail::text(s, "protocol", "sequence") : "";
  if (protocol == "entangling") {
    const auto setup = protocol_setup(ctx, dev, s);
    if (ctx.run.dry_run) return name + ": dry run ok";
    const auto res = entangling_protocol(dev.layout, angular(setup.df1_hz), angular(setup.df2_hz), setup.options);
    emit(ctx, tomography_only ? io::tomography_csv(res.tomography.expectations) : io::trajectory_csv(dev.layout, res.run));
    return name + ": fidelity " + fmt(res.tomography.fidelity) + ", g_eff " + fmt(cyclic(res.g_eff)) +
           " Hz, interaction " + fmt(res.interaction_time) + " s, DF1 " + fmt(setup.df1_hz) + " Hz, DF2 " +
           fmt(setup.df2_hz) + " Hz";
  }
  if (!protocol.empty()) throw ValidationError("sequence: unknown protocol '" + protocol + "'");

  if (!s.contains("schedule")) throw ValidationError("sequence: need 'schedule' or 'protocol'");
  const json& sj = s.at("schedule");
  const PulseSchedule schedule =
      io::parse_schedule(sj.is_string() ? io::read_json(ctx.resolve(sj.get<std::string>())) : sj, dev.layout);
  const std::size_t n = dev.layout.atoms.size();
  const DensityMatrix rho0 =
      initial_state(s.contains("initial") ? io::detail::text(s, "initial", "sequence") : std::string(n, '0'), n);
  std::optional<DensityMatrix> target;
  if (s.contains("target")) {
    const std::string t = io::detail::text(s, "target", "sequence");
    if (t != "sqrt_iswap") throw ValidationError("sequence: target must be 'sqrt_iswap'");
    if (n != 2) throw ValidationError("sequence: the sqrt_iswap target needs two atoms");
    target = sqrt_iswap_target();
  }
  if (tomography_only && n != 2) throw ValidationError("tomography: needs a two-atom device");
  RunOptions opts;
  opts.model.g_parasitic = dev.g_parasitic;
  opts.samples_per_segment = s.contains("samples_per_segment") ? count(s, "samples_per_segment", "sequence") : 1;
  const double shots = num_or(s, "shots", 0.0, "sequence");
  if (shots < 0.0 || shots != std::floor(shots)) throw ValidationError("sequence: shots must be a non-negative integer");
  if (ctx.run.dry_run) return name + ": dry run ok";

  const auto run = run_schedule(dev.layout, schedule, rho0, opts);
  std::string summary = name + ": " + std::to_string(schedule.segments.size()) + " segments";
  if (tomography_only) {
    const auto tomo = tomography(run.final_state(), target.value_or(sqrt_iswap_target()),
                                 static_cast<std::uint64_t>(shots), ctx.seed());
    emit(ctx, io::tomography_csv(tomo.expectations));
    summary += ", fidelity " + fmt(tomo.fidelity);
  } else {
    emit(ctx, io::trajectory_csv(dev.layout, run));
    if (target) summary += ", fidelity " + fmt(fidelity(run.final_state(), *target));
  }
  for (const auto& m : run.measurements) summary += ", <" + m.basis + ">=" + fmt(m.expectation);
  return summary;
}

inline std::string cmd_calibrate(const Context& ctx) {
  if (!ctx.config.contains("calibration")) throw ValidationError("config: missing 'calibration'");
  const json& cj = ctx.config.at("calibration");
  const auto cal = io::parse_calibration(cj.is_string() ? io::read_json(ctx.resolve(cj.get<std::string>())) : cj);
  for (const auto& d : cal.diagnostics) {
    ctx.err << json{{"warning", {{"code", d.code}, {"message", d.message}}}}.dump() << "\n";
  }
  const json& targets_json = io::detail::field(ctx.config, "targets_hz", "config");
  std::vector<double> targets;
  for (const auto& q : cal.qubits) {
    if (!targets_json.contains(q.id)) throw ValidationError("targets_hz: no target for qubit '" + q.id + "'");
    targets.push_back(targets_json.at(q.id).get<double>());
  }
  std::vector<double> fluxes;
  for (std::size_t i = 0; i < cal.qubits.size(); ++i) {
    try {
      fluxes.push_back(nearest_flux_for_frequency(cal.qubits[i], targets[i]));
    } catch (const DomainError& e) {
      throw ValidationError(std::string("targets_hz: ") + e.what());
    }
  }
  if (ctx.run.dry_run) return "calibrate: dry run ok";
  const Eigen::VectorXd volts = voltages_for_targets(cal.qubits, cal.crosstalk, targets);
  const auto achieved = frequencies_for_voltages(cal.qubits, cal.crosstalk, volts);
  std::string csv = "id,target_hz,flux_fq,voltage_v,achieved_hz\n";
  std::string summary = "calibrate:";
  for (std::size_t i = 0; i < cal.qubits.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    csv += cal.qubits[i].id + "," + fmt(targets[i]) + "," + fmt(fluxes[i]) + "," + fmt(volts(ii)) + "," +
           fmt(achieved[i]) + "\n";
    summary += " " + cal.qubits[i].id + "=" + fmt(volts(ii)) + "V";
  }
  emit(ctx, csv);
  return summary + ", cond(S)=" + fmt(condition_number(cal.crosstalk));
}

inline Params params_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object of numbers");
  Params p;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw ValidationError(where + "." + k + " must be a number");
    p[k] = v.get<double>();
  }
  return p;
}

inline SpectralModel model_from(const Context& ctx, const json& s, const std::string& where) {
  SpectralModel m;
  m.kind = parse_model_kind(io::detail::text(s, "model", where));
  if (m.kind == ModelKind::kGeneral) m.base = load_device(ctx).layout;
  return m;
}

inline std::string cmd_fit(const Context& ctx) {
  const json& s = section(ctx, "fit");
  const SpectralModel model = model_from(ctx, s, "fit");
  const SpectrumDataset data = io::parse_dataset_csv(io::read_text(ctx.resolve(io::detail::text(s, "dataset", "fit"))));
  const Params init = params_from(io::detail::field(s, "init", "fit"), "fit.init");
  Bounds bounds;
  for (const auto& [k, v] : io::detail::field(s, "bounds", "fit").items()) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ValidationError("fit.bounds." + k + " must be [lo, hi]");
    }
    bounds[k] = {v[0].get<double>(), v[1].get<double>()};
  }
  FitOptions opts;
  opts.seed = ctx.seed();
  opts.threads = ctx.run.threads;
  if (s.contains("restarts")) opts.restarts = static_cast<int>(count(s, "restarts", "fit"));
  if (s.contains("max_evaluations")) opts.max_evaluations = static_cast<int>(count(s, "max_evaluations", "fit"));
  if (data.rows.size() < bounds.size()) {
    throw ValidationError("fit: dataset has fewer points than free parameters");
  }
  if (ctx.run.dry_run) return "fit: dry run ok, " + std::to_string(data.rows.size()) + " rows";
  const FitResult r = fit(data, model, init, bounds, opts);
  emit(ctx, io::fit_to_json(r).dump(2) + "\n");
  std::string summary = "fit: rms " + fmt(r.residual_rms) + " Hz, " + (r.converged ? "converged" : "not converged");
  for (const auto& [k, v] : bounds) summary += ", " + k + "=" + fmt(r.params.at(k));
  return summary;
}

inline std::string cmd_synth(const Context& ctx) {
  const json& s = section(ctx, "synth");
  const SpectralModel model = model_from(ctx, s, "synth");
  const Params params = params_from(io::detail::field(s, "params", "synth"), "synth.params");
  const auto grid = grid_hz(s, "f_", "synth");
  require_positive_grid(grid, "synth");
  std::vector<Channel> channels;
  if (s.contains("channels")) {
    for (const auto& c : s.at("channels")) {
      channels.push_back({parse_row_kind(io::detail::text(c, "kind", "synth.channels")),
                          c.contains("label") ? io::detail::text(c, "label", "synth.channels") : ""});
    }
  } else {
    channels = {{RowKind::kGamma, "a"}, {RowKind::kG, "a:b"}};
  }
  const double noise = num_or(s, "noise_sigma_hz", 0.0, "synth");
  if (noise < 0.0) throw ValidationError("synth: noise_sigma_hz must be >= 0");
  for (const auto& ch : channels) model_predict(model, params, ch.kind, ch.label, grid.front());
  if (ctx.run.dry_run) return "synth: dry run ok";
  const auto data = synthesize(model, params, grid, channels, noise, ctx.seed());
  emit(ctx, io::dataset_csv(data));
  return "synth: " + std::to_string(data.rows.size()) + " rows, seed " + std::to_string(ctx.seed());
}

inline std::string dispatch(const Context& ctx) {
  const std::string& c = ctx.run.command;
  if (c == "spectra") return cmd_spectra(ctx);
  if (c == "df") return cmd_df(ctx);
  if (c == "t1") return cmd_t1(ctx);
  if (c == "chevron") return cmd_chevron(ctx);
  if (c == "crossing") return cmd_crossing(ctx);
  if (c == "sequence") return cmd_sequence(ctx, false);
  if (c == "tomography") return cmd_sequence(ctx, true);
  if (c == "calibrate") return cmd_calibrate(ctx);
  if (c == "fit") return cmd_fit(ctx);
  if (c == "synth") return cmd_synth(ctx);
  throw ValidationError("unknown command '" + c + "'");
}

inline void report(std::ostream& err, const char* code, const std::string& message) {
  err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
}

inline unsigned threads_from_env() {
  const char* env = std::getenv("GAWQED_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0 || v > 1024) throw ValidationError("GAWQED_THREADS must be a positive integer");
  return static_cast<unsigned>(v);
}

}  // namespace detail

/// Parses `argv` into a RunConfig; returns nullopt after printing help.
inline std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Giant-atom waveguide QED simulator and fitter", "gawqed"};
  RunConfig cfg;
  std::optional<unsigned> threads;
  app.add_option("command", cfg.command, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(commands()));
  app.add_option("--config", cfg.config_path, "JSON config file")->required();
  app.add_option("--out", cfg.out_path, "Artifact path (default <command>.csv or .json)");
  app.add_option("--seed", cfg.seed, "64-bit seed for stochastic steps");
  app.add_option("--threads", threads, "Worker threads (default $GAWQED_THREADS or 1)")->check(CLI::Range(1u, 1024u));
  app.add_flag("--dry-run", cfg.dry_run, "Validate inputs without computing");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ValidationError(e.what());
  }
  cfg.threads = threads ? *threads : detail::threads_from_env();
  if (cfg.out_path.empty()) cfg.out_path = cfg.command + (cfg.command == "fit" ? ".json" : ".csv");
  return cfg;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    const auto cfg = parse_args(argc, argv, out);
    if (!cfg) return kExitOk;
    const std::filesystem::path config_path(cfg->config_path);
    detail::Context ctx{*cfg, io::read_json(cfg->config_path), config_path.parent_path(), out, err};
    if (!ctx.config.is_object()) throw ValidationError("config must be a JSON object");
    out << detail::dispatch(ctx) << "\n";
    return kExitOk;
  } catch (const NumericalError& e) {
    detail::report(err, "numerical", e.what());
    return kExitNumerical;
  } catch (const ValidationError& e) {
    detail::report(err, "validation", e.what());
    return kExitValidation;
  } catch (const DomainError& e) {
    detail::report(err, "validation", e.what());
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    detail::report(err, "validation", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    detail::report(err, "numerical", e.what());
    return kExitNumerical;
  }
}

}  // namespace gawqed::cli
