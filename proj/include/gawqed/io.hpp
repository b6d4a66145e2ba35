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

// JSON configuration readers and CSV writers. Everything crossing this
// boundary is in cyclic units (Hz); conversion to rad/s happens here.

#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "gawqed/calibration.hpp"
#include "gawqed/core.hpp"
#include "gawqed/device.hpp"
#include "gawqed/dynamics.hpp"
#include "gawqed/estimation.hpp"
#include "gawqed/sequences.hpp"
#include "gawqed/spectra.hpp"

namespace gawqed::io {

using json = nlohmann::json;

/// Shortest decimal text that round-trips, independent of the locale.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw NumericalError("could not format number");
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text, const std::string& what) {
  std::size_t begin = text.find_first_not_of(" \t\r");
  std::size_t end = text.find_last_not_of(" \t\r");
  if (begin == std::string::npos) throw ValidationError(what + " is empty");
  double v = 0.0;
  const char* first = text.data() + begin;
  const char* last = text.data() + end + 1;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw ValidationError(what + " is not a number: '" + text + "'");
  return v;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("failed while writing '" + path + "'");
}

namespace detail {

inline const json& field(const json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) throw ValidationError(where + ": missing field '" + name + "'");
  return j.at(name);
}

inline double number(const json& j, const char* name, const std::string& where) {
  const json& v = field(j, name, where);
  if (!v.is_number()) throw ValidationError(where + ": field '" + std::string(name) + "' must be a number");
  return v.get<double>();
}

inline double number_or(const json& j, const char* name, double fallback, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) return fallback;
  return number(j, name, where);
}

inline std::string text(const json& j, const char* name, const std::string& where) {
  const json& v = field(j, name, where);
  if (!v.is_string()) throw ValidationError(where + ": field '" + std::string(name) + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

// ---------------------------------------------------------------- device

struct DeviceConfig {
  DeviceLayout layout;
  double g_parasitic = 0.0;  // rad/s
  std::vector<Diagnostic> diagnostics;
};

/// {"omega_ref_hz", "atoms": [{"id", "gamma_nr_hz", "gamma_phi_hz",
///  "points": [{"delay_s", "gamma_ref_hz"}]}], "parasitic_g_hz"?}
inline DeviceConfig parse_device(const json& j) {
  DeviceConfig cfg;
  cfg.layout.omega_ref = angular(detail::number(j, "omega_ref_hz", "device"));
  const json& atoms = detail::field(j, "atoms", "device");
  if (!atoms.is_array()) throw ValidationError("device: 'atoms' must be an array");
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const std::string where = "device.atoms[" + std::to_string(a) + "]";
    const json& ja = atoms[a];
    GiantAtom atom;
    atom.id = detail::text(ja, "id", where);
    atom.gamma_nr = angular(detail::number_or(ja, "gamma_nr_hz", 0.0, where));
    atom.gamma_phi = angular(detail::number_or(ja, "gamma_phi_hz", 0.0, where));
    const json& pts = detail::field(ja, "points", where);
    if (!pts.is_array()) throw ValidationError(where + ": 'points' must be an array");
    for (std::size_t p = 0; p < pts.size(); ++p) {
      const std::string pw = where + ".points[" + std::to_string(p) + "]";
      atom.points.push_back({detail::number(pts[p], "delay_s", pw), angular(detail::number(pts[p], "gamma_ref_hz", pw))});
    }
    cfg.layout.atoms.push_back(std::move(atom));
  }
  cfg.g_parasitic = angular(detail::number_or(j, "parasitic_g_hz", 0.0, "device"));
  if (cfg.g_parasitic < 0.0) throw ValidationError("device: parasitic_g_hz must be >= 0");
  try {
    cfg.layout = checked(std::move(cfg.layout));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("device: ") + e.what());
  }
  cfg.diagnostics = validate(cfg.layout);
  return cfg;
}

inline json device_to_json(const DeviceLayout& layout, double g_parasitic = 0.0) {
  json j;
  j["omega_ref_hz"] = cyclic(layout.omega_ref);
  j["atoms"] = json::array();
  for (const auto& atom : layout.atoms) {
    json ja;
    ja["id"] = atom.id;
    ja["gamma_nr_hz"] = cyclic(atom.gamma_nr);
    ja["gamma_phi_hz"] = cyclic(atom.gamma_phi);
    ja["points"] = json::array();
    for (const auto& p : atom.points) ja["points"].push_back({{"delay_s", p.delay}, {"gamma_ref_hz", cyclic(p.gamma_ref)}});
    j["atoms"].push_back(std::move(ja));
  }
  if (g_parasitic != 0.0) j["parasitic_g_hz"] = cyclic(g_parasitic);
  return j;
}

// -------------------------------------------------------------- schedule

/// {"segments": [{"duration_s", "frequencies_hz": {id: f}}],
///  "gates": [{"after_segment", "atom", "axis", "angle_rad"}],
///  "measurements"?: [{"after_segment", "basis"}], "frame_hz"?}
inline PulseSchedule parse_schedule(const json& j, const DeviceLayout& layout) {
  PulseSchedule s;
  const json& segs = detail::field(j, "segments", "schedule");
  if (!segs.is_array()) throw ValidationError("schedule: 'segments' must be an array");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string where = "schedule.segments[" + std::to_string(i) + "]";
    Segment seg;
    seg.duration = detail::number(segs[i], "duration_s", where);
    const json& freqs = detail::field(segs[i], "frequencies_hz", where);
    if (!freqs.is_object()) throw ValidationError(where + ": 'frequencies_hz' must map atom id to Hz");
    seg.frequencies.assign(layout.atoms.size(), 0.0);
    std::vector<bool> seen(layout.atoms.size(), false);
    for (const auto& [id, value] : freqs.items()) {
      std::size_t k = 0;
      try {
        k = layout.atom_index(id);
      } catch (const DomainError&) {
        throw ValidationError(where + ": unknown atom '" + id + "'");
      }
      if (!value.is_number()) throw ValidationError(where + ": frequency of '" + id + "' must be a number");
      seg.frequencies[k] = angular(value.get<double>());
      seen[k] = true;
    }
    for (std::size_t k = 0; k < seen.size(); ++k) {
      if (!seen[k]) throw ValidationError(where + ": no frequency for atom '" + layout.atoms[k].id + "'");
    }
    s.segments.push_back(std::move(seg));
  }
  if (j.contains("gates")) {
    const json& gates = j.at("gates");
    if (!gates.is_array()) throw ValidationError("schedule: 'gates' must be an array");
    for (std::size_t i = 0; i < gates.size(); ++i) {
      const std::string where = "schedule.gates[" + std::to_string(i) + "]";
      GateOp g;
      const double after = detail::number(gates[i], "after_segment", where);
      if (after < 0.0 || after != std::floor(after)) throw ValidationError(where + ": after_segment must be a non-negative integer");
      g.after_segment = static_cast<std::size_t>(after);
      try {
        g.atom = layout.atom_index(detail::text(gates[i], "atom", where));
        g.axis = parse_axis(detail::text(gates[i], "axis", where));
      } catch (const DomainError& e) {
        throw ValidationError(where + ": " + e.what());
      }
      g.angle = detail::number(gates[i], "angle_rad", where);
      s.gates.push_back(g);
    }
  }
  if (j.contains("measurements")) {
    for (std::size_t i = 0; i < j.at("measurements").size(); ++i) {
      const std::string where = "schedule.measurements[" + std::to_string(i) + "]";
      const json& m = j.at("measurements")[i];
      const double after = detail::number(m, "after_segment", where);
      if (after < 0.0 || after != std::floor(after)) throw ValidationError(where + ": after_segment must be a non-negative integer");
      s.measurements.push_back({static_cast<std::size_t>(after), detail::text(m, "basis", where)});
    }
  }
  if (j.contains("frame_hz")) s.frame_omega = angular(detail::number(j, "frame_hz", "schedule"));
  validate_schedule(s, layout.atoms.size());
  return s;
}

// ----------------------------------------------------------- calibration

struct CalibrationConfig {
  std::vector<TransmonFluxModel> qubits;
  CrosstalkMatrix crosstalk;
  std::vector<Diagnostic> diagnostics;
};

/// {"qubits": [{"id", "f_max_hz", "d", "phi0_rad"}], "S_fq_per_volt": [[...]]}
inline CalibrationConfig parse_calibration(const json& j) {
  CalibrationConfig cfg;
  const json& qs = detail::field(j, "qubits", "calibration");
  if (!qs.is_array() || qs.empty()) throw ValidationError("calibration: 'qubits' must be a non-empty array");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const std::string where = "calibration.qubits[" + std::to_string(i) + "]";
    TransmonFluxModel m;
    m.id = detail::text(qs[i], "id", where);
    m.f_max = detail::number(qs[i], "f_max_hz", where);
    m.d = detail::number(qs[i], "d", where);
    m.phi0_offset = detail::number_or(qs[i], "phi0_rad", 0.0, where);
    cfg.qubits.push_back(m);
  }
  const json& s = detail::field(j, "S_fq_per_volt", "calibration");
  const auto n = static_cast<Eigen::Index>(cfg.qubits.size());
  if (!s.is_array() || static_cast<Eigen::Index>(s.size()) != n) {
    throw ValidationError("calibration: S_fq_per_volt must be a square matrix with one row per qubit");
  }
  cfg.crosstalk.s.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = s[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw ValidationError("calibration: S_fq_per_volt must be a square matrix with one row per qubit");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw ValidationError("calibration: S entries must be numbers");
      cfg.crosstalk.s(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& m = cfg.qubits[static_cast<std::size_t>(i)];
    m.v0 = cfg.crosstalk.s(i, i) != 0.0 ? 1.0 / cfg.crosstalk.s(i, i) : 0.0;
    validate(m);
  }
  cfg.diagnostics = validate(cfg.crosstalk);
  for (const auto& d : cfg.diagnostics) {
    if (d.severity == Severity::kError) throw ValidationError("calibration: " + d.message);
  }
  return cfg;
}

// --------------------------------------------------------------- dataset

inline SpectrumDataset parse_dataset_csv(const std::string& text) {
  SpectrumDataset data;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (header) {
      header = false;
      if (cells.size() < 4 || cells[0] != "kind" || cells[1] != "label" || cells[2] != "f_hz" || cells[3] != "value_hz") {
        throw ValidationError("dataset: header must be kind,label,f_hz,value_hz,sigma_hz");
      }
      continue;
    }
    const std::string where = "dataset line " + std::to_string(line_no);
    if (cells.size() < 4 || cells.size() > 5) throw ValidationError(where + ": expected 4 or 5 columns");
    DataRow row;
    try {
      row.kind = parse_row_kind(cells[0]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    row.label = cells[1];
    row.f_hz = parse_double(cells[2], where + " f_hz");
    row.value_hz = parse_double(cells[3], where + " value_hz");
    if (cells.size() == 5 && cells[4].find_first_not_of(" \t") != std::string::npos) {
      row.sigma_hz = parse_double(cells[4], where + " sigma_hz");
    }
    data.rows.push_back(std::move(row));
  }
  if (header) throw ValidationError("dataset: file is empty");
  validate(data);
  return data;
}

inline std::string dataset_csv(const SpectrumDataset& data) {
  std::string out = "kind,label,f_hz,value_hz,sigma_hz\n";
  for (const auto& r : data.rows) {
    out += to_string(r.kind) + "," + r.label + "," + format_double(r.f_hz) + "," + format_double(r.value_hz) + ",";
    if (r.sigma_hz) out += format_double(*r.sigma_hz);
    out += "\n";
  }
  return out;
}

// ------------------------------------------------------------ CSV output

inline std::string sweep_csv(const DeviceLayout& layout, const std::vector<SpectrumSample>& samples) {
  const std::size_t n = layout.atoms.size();
  std::string out = "f_hz";
  for (const auto& a : layout.atoms) out += ",gamma_" + a.id + "_hz";
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) out += ",g_" + layout.atoms[j].id + "_" + layout.atoms[k].id + "_hz";
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      out += ",gamma_coll_" + layout.atoms[j].id + "_" + layout.atoms[k].id + "_hz";
    }
  }
  out += "\n";
  for (const auto& s : samples) {
    out += format_double(cyclic(s.omega));
    for (double g : s.gamma) out += "," + format_double(cyclic(g));
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        out += "," + format_double(cyclic(s.g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k))));
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        out += "," + format_double(cyclic(s.gamma_coll(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k))));
      }
    }
    out += "\n";
  }
  return out;
}

/// t_s, pop_<id>..., re_<i><j>, im_<i><j> for the upper-triangle coherences
/// of the qubit-frame density matrix (basis index in binary, atom 0 first).
inline std::string trajectory_csv(const DeviceLayout& layout, const ScheduleRun& run) {
  const std::size_t n = layout.atoms.size();
  const std::size_t d = hilbert_dim(n);
  auto bits = [&](std::size_t idx) {
    std::string s;
    for (std::size_t k = 0; k < n; ++k) s += ((idx >> (n - 1 - k)) & 1u) ? '1' : '0';
    return s;
  };
  std::string out = "t_s,event";
  for (const auto& a : layout.atoms) out += ",pop_" + a.id;
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = r + 1; c < d; ++c) out += ",re_" + bits(r) + "_" + bits(c) + ",im_" + bits(r) + "_" + bits(c);
  }
  out += "\n";
  for (const auto& p : run.trajectory) {
    out += format_double(p.time) + "," + p.event;
    for (std::size_t j = 0; j < n; ++j) out += "," + format_double(p.qubit_state.population(j));
    const CMatrix& m = p.qubit_state.matrix();
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = r + 1; c < d; ++c) {
        const Complex z = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        out += "," + format_double(z.real()) + "," + format_double(z.imag());
      }
    }
    out += "\n";
  }
  return out;
}

inline std::string chevron_csv(const ChevronMap& map) {
  std::string out = "delta_hz,t_s,population\n";
  for (std::size_t i = 0; i < map.deltas.size(); ++i) {
    for (std::size_t k = 0; k < map.times.size(); ++k) {
      out += format_double(cyclic(map.deltas[i])) + "," + format_double(map.times[k]) + "," +
             format_double(map.population[i][k]) + "\n";
    }
  }
  return out;
}

inline std::string tomography_csv(const PauliExpectations& e) {
  std::string out = "pauli_label,expectation\n";
  const auto& labels = pauli_labels();
  for (std::size_t i = 0; i < labels.size(); ++i) out += labels[i] + "," + format_double(e[i]) + "\n";
  return out;
}

inline json fit_to_json(const FitResult& r) {
  json j;
  j["params"] = json::object();
  for (const auto& [k, v] : r.params) j["params"][k] = v;
  j["uncertainty"] = json::object();
  for (const auto& [k, v] : r.uncertainty) j["uncertainty"][k] = v;
  j["residual_rms_hz"] = r.residual_rms;
  j["objective"] = r.objective;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  return j;
}

}  // namespace gawqed::io
