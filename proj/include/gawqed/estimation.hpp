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

// Spectral model fitting: forward models for relaxation and exchange spectra,
// synthetic data, and a bounded multi-start Nelder-Mead least-squares fit.
//
// Parameters and data are in cyclic units (Hz); phases in radians. Phases
// scale linearly with frequency and coupling strengths quadratically, both
// relative to the reference frequency f_ref_hz.
//
// Parameter names per model kind:
//   two_point:   gamma0_hz, phi_ref, f_ref_hz, [gamma_nr_hz], [g_p_hz]
//   three_point: gamma1_hz, gamma2_hz, phi2_ref, ratio, [ratio3], f_ref_hz,
//                [gamma_nr_hz], [g_p_hz]       (phi1 = ratio phi2, phi3 = ratio3 phi2)
//   general:     delay_scale, gamma_scale, [gamma_nr_hz], [g_p_hz]
//                (applied to a base layout)

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gawqed/core.hpp"
#include "gawqed/device.hpp"
#include "gawqed/parallel.hpp"
#include "gawqed/spectra.hpp"

namespace gawqed {

enum class RowKind { kGamma, kG };
enum class ModelKind { kTwoPoint, kThreePoint, kGeneral };

inline std::string to_string(RowKind k) { return k == RowKind::kGamma ? "gamma" : "g"; }

inline RowKind parse_row_kind(const std::string& s) {
  if (s == "gamma") return RowKind::kGamma;
  if (s == "g") return RowKind::kG;
  throw ValidationError("unknown data kind '" + s + "' (expected gamma or g)");
}

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kTwoPoint: return "two_point";
    case ModelKind::kThreePoint: return "three_point";
    case ModelKind::kGeneral: return "general";
  }
  return "unknown";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "two_point") return ModelKind::kTwoPoint;
  if (s == "three_point") return ModelKind::kThreePoint;
  if (s == "general") return ModelKind::kGeneral;
  throw ValidationError("unknown model kind '" + s + "' (expected two_point, three_point or general)");
}

struct DataRow {
  RowKind kind = RowKind::kGamma;
  std::string label;  // atom id for gamma rows, "a:b" for g rows
  double f_hz = 0.0;
  double value_hz = 0.0;
  std::optional<double> sigma_hz;
};

struct SpectrumDataset {
  std::vector<DataRow> rows;
};

inline void validate(const SpectrumDataset& data) {
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& r = data.rows[i];
    if (!(r.f_hz > 0.0) || !std::isfinite(r.f_hz)) throw ValidationError("row " + std::to_string(i) + ": f_hz must be positive");
    if (!std::isfinite(r.value_hz)) throw ValidationError("row " + std::to_string(i) + ": value_hz must be finite");
    if (r.sigma_hz && !(*r.sigma_hz > 0.0)) throw ValidationError("row " + std::to_string(i) + ": sigma_hz must be positive");
  }
}

using Params = std::map<std::string, double>;

struct SpectralModel {
  ModelKind kind = ModelKind::kTwoPoint;
  std::optional<DeviceLayout> base;  // required for kGeneral
};

inline double require_param(const Params& p, const std::string& name) {
  const auto it = p.find(name);
  if (it == p.end()) throw ValidationError("missing model parameter '" + name + "'");
  return it->second;
}

inline double optional_param(const Params& p, const std::string& name, double fallback) {
  const auto it = p.find(name);
  return it == p.end() ? fallback : it->second;
}

namespace detail {

inline std::pair<std::size_t, std::size_t> pair_from_label(const DeviceLayout& layout, const std::string& label) {
  if (label.empty()) return {0, 1};
  const auto colon = label.find(':');
  if (colon == std::string::npos) throw ValidationError("pair label '" + label + "' must look like 'a:b'");
  return {layout.atom_index(label.substr(0, colon)), layout.atom_index(label.substr(colon + 1))};
}

inline DeviceLayout scaled_layout(const DeviceLayout& base, const Params& p) {
  DeviceLayout out = base;
  const double delay_scale = require_param(p, "delay_scale");
  const double gamma_scale = require_param(p, "gamma_scale");
  const auto nr = p.find("gamma_nr_hz");
  for (auto& atom : out.atoms) {
    for (auto& point : atom.points) {
      point.delay *= delay_scale;
      point.gamma_ref *= gamma_scale;
    }
    if (nr != p.end()) atom.gamma_nr = angular(nr->second);
  }
  return out;
}

}  // namespace detail

/// Predicted Gamma/2pi or g/2pi (Hz) at f_hz for one data row.
inline double model_predict(const SpectralModel& model, const Params& p, RowKind kind, const std::string& label,
                            double f_hz) {
  if (!(f_hz > 0.0)) throw DomainError("prediction frequency must be positive");
  switch (model.kind) {
    case ModelKind::kTwoPoint: {
      const double gamma0 = require_param(p, "gamma0_hz");
      const double phi_ref = require_param(p, "phi_ref");
      const double f_ref = require_param(p, "f_ref_hz");
      const double s = f_hz / f_ref;
      const double gamma = gamma0 * s * s;
      const double phi = phi_ref * s;
      if (kind == RowKind::kGamma) return two_point_gamma(gamma, phi, optional_param(p, "gamma_nr_hz", 0.0));
      return with_parasitic(two_point_g(gamma, phi), optional_param(p, "g_p_hz", 0.0));
    }
    case ModelKind::kThreePoint: {
      const double gamma1_ref = require_param(p, "gamma1_hz");
      const double gamma2_ref = require_param(p, "gamma2_hz");
      const double phi2_ref = require_param(p, "phi2_ref");
      const double ratio = require_param(p, "ratio");
      const double ratio3 = optional_param(p, "ratio3", ratio);
      const double f_ref = require_param(p, "f_ref_hz");
      const double s = f_hz / f_ref;
      const double g1 = gamma1_ref * s * s;
      const double g2 = gamma2_ref * s * s;
      const double phi2 = phi2_ref * s;
      const double phi1 = ratio * phi2;
      const double phi3 = ratio3 * phi2;
      if (kind == RowKind::kGamma) {
        return three_point_gamma(g1, g2, phi1, phi2, phi3, optional_param(p, "gamma_nr_hz", 0.0));
      }
      return with_parasitic(three_point_g(g1, g2, phi1, phi2, phi3), optional_param(p, "g_p_hz", 0.0));
    }
    case ModelKind::kGeneral: {
      if (!model.base) throw ValidationError("general model needs a base layout");
      const DeviceLayout layout = detail::scaled_layout(*model.base, p);
      const double omega = angular(f_hz);
      if (kind == RowKind::kGamma) {
        const std::size_t j = label.empty() ? 0 : layout.atom_index(label);
        return cyclic(gamma_general(layout, j, omega));
      }
      const auto [j, k] = detail::pair_from_label(layout, label);
      return with_parasitic(cyclic(g_general(layout, j, k, omega)), optional_param(p, "g_p_hz", 0.0));
    }
  }
  throw ValidationError("unknown model kind");
}

inline double row_weight(const DataRow& r) { return r.sigma_hz ? 1.0 / (*r.sigma_hz * *r.sigma_hz) : 1.0; }

/// Weighted sum of squared residuals.
inline double objective(const SpectrumDataset& data, const SpectralModel& model, const Params& p) {
  double sum = 0.0;
  for (const auto& r : data.rows) {
    const double resid = model_predict(model, p, r.kind, r.label, r.f_hz) - r.value_hz;
    sum += row_weight(r) * resid * resid;
  }
  return sum;
}

struct Channel {
  RowKind kind = RowKind::kGamma;
  std::string label;
};

/// Forward model on `f_grid` for every channel, plus optional Gaussian noise.
/// When noise is requested each row carries sigma_hz = noise_sigma_hz.
inline SpectrumDataset synthesize(const SpectralModel& model, const Params& p, const std::vector<double>& f_grid,
                                  const std::vector<Channel>& channels, double noise_sigma_hz, std::uint64_t seed) {
  if (noise_sigma_hz < 0.0) throw DomainError("noise sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  SpectrumDataset out;
  for (const auto& ch : channels) {
    for (double f : f_grid) {
      DataRow row{ch.kind, ch.label, f, model_predict(model, p, ch.kind, ch.label, f), std::nullopt};
      if (noise_sigma_hz > 0.0) {
        row.value_hz += noise_sigma_hz * noise(rng);
        row.sigma_hz = noise_sigma_hz;
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

using Bounds = std::map<std::string, std::pair<double, double>>;

struct FitOptions {
  int restarts = 32;
  std::uint64_t seed = 0;
  int max_evaluations = 20000;  // per restart
  double tolerance = 1e-10;     // relative spread of the simplex objective
  unsigned threads = 1;
};

struct FitResult {
  Params params;
  Params uncertainty;  // one standard deviation, free parameters only
  double objective = 0.0;
  double residual_rms = 0.0;  // Hz, unweighted
  int iterations = 0;         // objective evaluations over all restarts
  bool converged = false;
};

namespace detail {

struct SimplexOutcome {
  Eigen::VectorXd best;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead on the unit cube; points are clamped into [0, 1] before evaluation.
template <typename F>
SimplexOutcome nelder_mead(F&& f, Eigen::VectorXd start, int max_evaluations, double tolerance) {
  const Eigen::Index n = start.size();
  auto clamp01 = [](Eigen::VectorXd x) { return x.cwiseMax(0.0).cwiseMin(1.0).eval(); };
  SimplexOutcome out;
  std::vector<Eigen::VectorXd> pts(n + 1);
  std::vector<double> vals(n + 1);
  auto eval = [&](const Eigen::VectorXd& x) {
    ++out.evaluations;
    return f(x);
  };

  auto build = [&](const Eigen::VectorXd& origin) {
    pts[0] = clamp01(origin);
    vals[0] = eval(pts[0]);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd x = pts[0];
      x(i) += (x(i) > 0.5) ? -0.05 : 0.05;
      pts[i + 1] = x;
      vals[i + 1] = eval(x);
    }
  };
  build(start);

  bool stalled = false;
  double stall_value = 0.0;
  while (out.evaluations < max_evaluations) {
    std::vector<Eigen::Index> order(n + 1);
    for (Eigen::Index i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (Eigen::Index i = 0; i <= n; ++i) {
      p2[i] = pts[order[i]];
      v2[i] = vals[order[i]];
    }
    pts.swap(p2);
    vals.swap(v2);

    double diameter = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i) diameter = std::max(diameter, (pts[i] - pts[0]).cwiseAbs().maxCoeff());
    const double spread = vals[n] - vals[0];
    if (spread <= tolerance * std::abs(vals[0]) || diameter < 1e-10) {
      // Rebuild around the incumbent to guard against a collapsed simplex and
      // stop once a rebuild no longer improves on it.
      if (stalled && vals[0] >= stall_value - tolerance * std::abs(stall_value)) {
        out.converged = true;
        break;
      }
      stalled = true;
      stall_value = vals[0];
      build(pts[0]);
      continue;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = clamp01(centroid + (centroid - pts[n]));
    const double fr = eval(reflected);
    if (fr < vals[0]) {
      const Eigen::VectorXd expanded = clamp01(centroid + 2.0 * (centroid - pts[n]));
      const double fe = eval(expanded);
      if (fe < fr) {
        pts[n] = expanded;
        vals[n] = fe;
      } else {
        pts[n] = reflected;
        vals[n] = fr;
      }
      continue;
    }
    if (fr < vals[n - 1]) {
      pts[n] = reflected;
      vals[n] = fr;
      continue;
    }
    const bool outside = fr < vals[n];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid)) : Eigen::VectorXd(centroid + 0.5 * (pts[n] - centroid));
    const double fc = eval(contracted);
    if (fc < (outside ? fr : vals[n])) {
      pts[n] = contracted;
      vals[n] = fc;
      continue;
    }
    for (Eigen::Index i = 1; i <= n; ++i) {
      pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
      vals[i] = eval(pts[i]);
    }
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (vals[i] < vals[best]) best = i;
  }
  out.best = pts[best];
  out.value = vals[best];
  return out;
}

}  // namespace detail

/// Bounded least-squares fit. Parameters named in `bounds` are free; all
/// other entries of `init` are held fixed. Restart 0 starts from `init`, the
/// others from seeded uniform draws inside the bounds; the best is returned.
inline FitResult fit(const SpectrumDataset& data, const SpectralModel& model, const Params& init, const Bounds& bounds,
                     const FitOptions& options = {}) {
  validate(data);
  std::vector<std::string> names;
  std::vector<double> lo, hi;
  for (const auto& [name, range] : bounds) {
    if (!(range.second > range.first)) throw ValidationError("bounds for '" + name + "' are empty");
    names.push_back(name);
    lo.push_back(range.first);
    hi.push_back(range.second);
  }
  const std::size_t n_free = names.size();
  if (n_free == 0) throw ValidationError("no free parameters: give bounds for at least one");
  if (data.rows.size() < n_free) {
    throw ValidationError("dataset has " + std::to_string(data.rows.size()) + " points but " +
                          std::to_string(n_free) + " parameters are free");
  }
  if (options.restarts < 1) throw ValidationError("need at least one restart");

  auto to_params = [&](const Eigen::VectorXd& u) {
    Params p = init;
    for (std::size_t i = 0; i < n_free; ++i) {
      const double t = std::clamp(u(static_cast<Eigen::Index>(i)), 0.0, 1.0);
      p[names[i]] = lo[i] + (hi[i] - lo[i]) * t;
    }
    return p;
  };
  // Fail early, with the parameter name, if the model is incomplete.
  objective(data, model, to_params(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_free), 0.5)));

  Eigen::VectorXd start0(static_cast<Eigen::Index>(n_free));
  for (std::size_t i = 0; i < n_free; ++i) {
    const auto it = init.find(names[i]);
    const double x = it == init.end() ? 0.5 * (lo[i] + hi[i]) : it->second;
    start0(static_cast<Eigen::Index>(i)) = std::clamp((x - lo[i]) / (hi[i] - lo[i]), 0.0, 1.0);
  }

  auto run_one = [&](std::size_t r) {
    Eigen::VectorXd start = start0;
    if (r > 0) {
      std::mt19937_64 rng(options.seed + 0x9E3779B97F4A7C15ULL * r);
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      for (Eigen::Index i = 0; i < start.size(); ++i) start(i) = uni(rng);
    }
    return detail::nelder_mead([&](const Eigen::VectorXd& u) { return objective(data, model, to_params(u)); }, start,
                               options.max_evaluations, options.tolerance);
  };
  const auto outcomes = parallel_map(static_cast<std::size_t>(options.restarts), options.threads, run_one);

  FitResult result;
  std::size_t best = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    result.iterations += outcomes[r].evaluations;
    if (outcomes[r].value < outcomes[best].value) best = r;
  }
  result.params = to_params(outcomes[best].best);
  result.objective = outcomes[best].value;
  result.converged = outcomes[best].converged;

  double ss = 0.0;
  for (const auto& row : data.rows) {
    const double resid = model_predict(model, result.params, row.kind, row.label, row.f_hz) - row.value_hz;
    ss += resid * resid;
  }
  result.residual_rms = std::sqrt(ss / static_cast<double>(data.rows.size()));

  // Covariance (J^T W J)^-1 from a central-difference Jacobian; rescaled by
  // the reduced chi-square when the data carry no uncertainties.
  const std::size_t n_rows = data.rows.size();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_free));
  bool all_sigma = true;
  for (const auto& row : data.rows) all_sigma = all_sigma && row.sigma_hz.has_value();
  for (std::size_t i = 0; i < n_free; ++i) {
    const double x = result.params[names[i]];
    const double h = 1e-6 * std::max(std::abs(x), 1e-3 * (hi[i] - lo[i]));
    Params up = result.params, down = result.params;
    up[names[i]] = x + h;
    down[names[i]] = x - h;
    for (std::size_t k = 0; k < n_rows; ++k) {
      const auto& row = data.rows[k];
      const double w = std::sqrt(row_weight(row));
      const double dv = model_predict(model, up, row.kind, row.label, row.f_hz) -
                        model_predict(model, down, row.kind, row.label, row.f_hz);
      jac(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = w * dv / (2.0 * h);
    }
  }
  const Eigen::MatrixXd info = jac.transpose() * jac;
  Eigen::MatrixXd cov = info.completeOrthogonalDecomposition().pseudoInverse();
  if (!all_sigma) {
    const double dof = static_cast<double>(n_rows) - static_cast<double>(n_free);
    cov *= dof > 0.0 ? result.objective / dof : 0.0;
  }
  for (std::size_t i = 0; i < n_free; ++i) {
    result.uncertainty[names[i]] = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
  }
  return result;
}

}  // namespace gawqed
