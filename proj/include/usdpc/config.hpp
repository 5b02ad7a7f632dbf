/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 the usdpc authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef USDPC_CONFIG_HPP
#define USDPC_CONFIG_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "usdpc/core.hpp"
#include "usdpc/dpc.hpp"
#include "usdpc/errors.hpp"
#include "usdpc/io.hpp"
#include "usdpc/phantom.hpp"
#include "usdpc/simulate.hpp"

namespace usdpc {

/**
 * Experiment definition parsed from a JSON document. Geometry keys carry a
 * _mm / _mhz / _us suffix and are converted to SI on load; unknown keys are
 * rejected so typos cannot silently fall back to defaults.
 */
struct RunConfig {
  ProbeGeometry probe;
  TransmitPulse pulse;
  SimulationConfig sim;
  std::vector<double> angles;
  std::uint64_t seed = 0;

  // Phantom: either a preset name or an inline description.
  std::string phantom_preset;
  std::optional<Region> phantom_region;
  double phantom_density = 0.0;  // [1/m^2]
  double phantom_background_sos = 1540.0;
  std::vector<DiskInclusion> phantom_inclusions;
  std::optional<std::uint64_t> phantom_seed;

  DpcParams dpc;
  bool has_dpc_grid = false;

  std::vector<std::string> soscal_types = {"I", "II", "III", "IV"};
  double soscal_band_halfwidth = 1e-3;  // [m]
  bool soscal_detrend = true;

  Phantom build_phantom() const {
    if (!phantom_preset.empty()) return standard_phantom(phantom_preset);
    if (!phantom_region) throw ValidationError("config: no phantom defined");
    Phantom p;
    p.medium.sos = phantom_background_sos;
    p.region = *phantom_region;
    p.seed = phantom_seed.value_or(seed);
    p.scatterers = generate_scatterers(p.region, phantom_density, p.seed);
    p.inclusions = phantom_inclusions;
    p.validate();
    return p;
  }
};

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  if (!obj.is_object())
    throw DataError("config: " + where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw DataError("config: unknown key \"" + it.key() + "\" in " + where);
}

inline double get_number(const nlohmann::json& obj, const std::string& key,
                         double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw DataError("config: " + key + " must be a number");
  return obj[key].get<double>();
}

inline bool get_bool(const nlohmann::json& obj, const std::string& key,
                     bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean())
    throw DataError("config: " + key + " must be a boolean");
  return obj[key].get<bool>();
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& root) {
  detail::require_keys(root, "top level",
                       {"seed", "probe", "pulse", "phantom", "angles",
                        "simulation", "dpc", "soscal"});
  RunConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(
      detail::get_number(root, "seed", 0.0));

  if (root.contains("probe")) {
    const auto& p = root["probe"];
    detail::require_keys(p, "probe",
                         {"n_elements", "pitch_mm", "center_frequency_mhz",
                          "sampling_frequency_mhz"});
    cfg.probe.n_elements = static_cast<int>(
        detail::get_number(p, "n_elements", cfg.probe.n_elements));
    cfg.probe.pitch =
        detail::get_number(p, "pitch_mm", cfg.probe.pitch * 1e3) * 1e-3;
    cfg.probe.center_frequency =
        detail::get_number(p, "center_frequency_mhz",
                           cfg.probe.center_frequency * 1e-6) * 1e6;
    cfg.probe.sampling_frequency =
        detail::get_number(p, "sampling_frequency_mhz",
                           cfg.probe.sampling_frequency * 1e-6) * 1e6;
  }
  cfg.probe.validate();

  cfg.pulse.center_frequency = cfg.probe.center_frequency;
  if (root.contains("pulse")) {
    const auto& p = root["pulse"];
    detail::require_keys(p, "pulse", {"fractional_bandwidth", "amplitude"});
    cfg.pulse.fractional_bandwidth = detail::get_number(
        p, "fractional_bandwidth", cfg.pulse.fractional_bandwidth);
    cfg.pulse.amplitude =
        detail::get_number(p, "amplitude", cfg.pulse.amplitude);
  }
  cfg.pulse.validate();

  if (root.contains("phantom")) {
    const auto& p = root["phantom"];
    detail::require_keys(p, "phantom",
                         {"preset", "region_mm", "background_sos",
                          "density_per_mm2", "inclusions", "seed"});
    if (p.contains("preset")) {
      if (p.size() != 1)
        throw DataError(
            "config: phantom preset excludes inline phantom keys");
      cfg.phantom_preset = p["preset"].get<std::string>();
    } else {
      if (!p.contains("region_mm") || !p.contains("density_per_mm2"))
        throw DataError(
            "config: inline phantom needs region_mm and density_per_mm2");
      const auto& r = p["region_mm"];
      detail::require_keys(r, "phantom.region_mm",
                           {"x_min", "x_max", "z_min", "z_max"});
      Region region;
      region.x_min = detail::get_number(r, "x_min", 0.0) * 1e-3;
      region.x_max = detail::get_number(r, "x_max", 0.0) * 1e-3;
      region.z_min = detail::get_number(r, "z_min", 0.0) * 1e-3;
      region.z_max = detail::get_number(r, "z_max", 0.0) * 1e-3;
      region.validate();
      cfg.phantom_region = region;
      cfg.phantom_density =
          detail::get_number(p, "density_per_mm2", 0.0) * 1e6;
      cfg.phantom_background_sos =
          detail::get_number(p, "background_sos", 1540.0);
      if (p.contains("seed"))
        cfg.phantom_seed = static_cast<std::uint64_t>(
            detail::get_number(p, "seed", 0.0));
      if (p.contains("inclusions")) {
        if (!p["inclusions"].is_array())
          throw DataError("config: phantom.inclusions must be an array");
        for (const auto& inc : p["inclusions"]) {
          detail::require_keys(inc, "phantom.inclusions[]",
                               {"x_mm", "z_mm", "radius_mm", "sos"});
          DiskInclusion d;
          d.x = detail::get_number(inc, "x_mm", 0.0) * 1e-3;
          d.z = detail::get_number(inc, "z_mm", 0.0) * 1e-3;
          d.radius = detail::get_number(inc, "radius_mm", 0.0) * 1e-3;
          d.sos = detail::get_number(inc, "sos", 0.0);
          d.validate();
          cfg.phantom_inclusions.push_back(d);
        }
      }
    }
  }

  if (root.contains("angles")) {
    const auto& a = root["angles"];
    detail::require_keys(a, "angles",
                         {"count", "min_rad", "max_rad", "list_rad"});
    if (a.contains("list_rad")) {
      if (!a["list_rad"].is_array() || a["list_rad"].empty())
        throw DataError("config: angles.list_rad must be a non-empty array");
      for (const auto& v : a["list_rad"]) cfg.angles.push_back(v.get<double>());
    } else {
      const int count = static_cast<int>(detail::get_number(a, "count", 0.0));
      if (count < 1) throw DataError("config: angles.count must be >= 1");
      const double lo = detail::get_number(a, "min_rad", 0.0);
      const double hi = detail::get_number(a, "max_rad", 0.0);
      if (count == 1) {
        cfg.angles.push_back(lo);
      } else {
        for (int i = 0; i < count; ++i)
          cfg.angles.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(count - 1));
      }
    }
  }

  if (root.contains("simulation")) {
    const auto& s = root["simulation"];
    detail::require_keys(s, "simulation",
                         {"duration_us", "spreading", "directivity",
                          "noise_rms", "seed", "fail_on_truncation"});
    cfg.sim.duration = detail::get_number(s, "duration_us", 0.0) * 1e-6;
    cfg.sim.include_spreading = detail::get_bool(s, "spreading", true);
    cfg.sim.include_directivity = detail::get_bool(s, "directivity", true);
    cfg.sim.noise_rms = detail::get_number(s, "noise_rms", 0.0);
    cfg.sim.seed = static_cast<std::uint64_t>(detail::get_number(
        s, "seed", static_cast<double>(cfg.seed)));
    cfg.sim.fail_on_truncation =
        detail::get_bool(s, "fail_on_truncation", true);
  } else {
    cfg.sim.seed = cfg.seed;
  }

  if (root.contains("dpc")) {
    const auto& d = root["dpc"];
    detail::require_keys(d, "dpc",
                         {"T_periods", "m", "na", "gaussian_sigma_mm",
                          "compounding", "grid_mm"});
    if (d.contains("T_periods")) {
      if (!d["T_periods"].is_array() || d["T_periods"].empty())
        throw DataError("config: dpc.T_periods must be a non-empty array");
      cfg.dpc.T_list.clear();
      for (const auto& v : d["T_periods"])
        cfg.dpc.T_list.push_back(v.get<double>());
    }
    cfg.dpc.m = static_cast<int>(detail::get_number(d, "m", cfg.dpc.m));
    cfg.dpc.na = detail::get_number(d, "na", cfg.dpc.na);
    cfg.dpc.gaussian_sigma =
        detail::get_number(d, "gaussian_sigma_mm",
                           cfg.dpc.gaussian_sigma * 1e3) * 1e-3;
    if (d.contains("compounding")) {
      const std::string mode = d["compounding"].get<std::string>();
      if (mode == "mean-of-angles")
        cfg.dpc.compounding = DpcCompounding::kMeanOfAngles;
      else if (mode == "arg-of-mean-product")
        cfg.dpc.compounding = DpcCompounding::kArgOfMeanProduct;
      else
        throw DataError("config: unknown dpc.compounding \"" + mode + "\"");
    }
    if (d.contains("grid_mm")) {
      const auto& g = d["grid_mm"];
      detail::require_keys(g, "dpc.grid_mm",
                           {"x_min", "x_max", "z_min", "z_max",
                            "pixel_pitch"});
      cfg.dpc.grid.x_min = detail::get_number(g, "x_min", 0.0) * 1e-3;
      cfg.dpc.grid.x_max = detail::get_number(g, "x_max", 0.0) * 1e-3;
      cfg.dpc.grid.z_min = detail::get_number(g, "z_min", 0.0) * 1e-3;
      cfg.dpc.grid.z_max = detail::get_number(g, "z_max", 0.0) * 1e-3;
      cfg.dpc.grid.pixel_pitch =
          detail::get_number(g, "pixel_pitch", 0.0) * 1e-3;
      cfg.dpc.grid.validate();
      cfg.has_dpc_grid = true;
    }
  }

  if (root.contains("soscal")) {
    const auto& s = root["soscal"];
    detail::require_keys(s, "soscal",
                         {"types", "band_halfwidth_mm", "detrend"});
    if (s.contains("types")) {
      if (!s["types"].is_array() || s["types"].empty())
        throw DataError("config: soscal.types must be a non-empty array");
      cfg.soscal_types.clear();
      for (const auto& t : s["types"])
        cfg.soscal_types.push_back(t.get<std::string>());
    }
    cfg.soscal_band_halfwidth =
        detail::get_number(s, "band_halfwidth_mm",
                           cfg.soscal_band_halfwidth * 1e3) * 1e-3;
    cfg.soscal_detrend = detail::get_bool(s, "detrend", true);
  }

  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  const std::string text = detail::read_file(path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("config: JSON parse error in " + path + ": " + e.what());
  }
  try {
    return parse_run_config(root);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config: " + path + ": " + e.what());
  }
}

}  // namespace usdpc

#endif /* USDPC_CONFIG_HPP */
