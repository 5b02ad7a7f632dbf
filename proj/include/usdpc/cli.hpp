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

#ifndef USDPC_CLI_HPP
#define USDPC_CLI_HPP

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "usdpc/beamform.hpp"
#include "usdpc/config.hpp"
#include "usdpc/dpc.hpp"
#include "usdpc/errors.hpp"
#include "usdpc/io.hpp"
#include "usdpc/memory_effect.hpp"
#include "usdpc/simulate.hpp"
#include "usdpc/sos_analysis.hpp"
#include "usdpc/version.hpp"

namespace usdpc {
namespace cli {

inline ImageFormat format_from_path(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm")
    return ImageFormat::kPgm16;
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return ImageFormat::kCsv;
  throw UsageError("output image path must end in .pgm or .csv: " + path);
}

inline BeamformGrid parse_grid_mm(const std::string& text) {
  std::vector<double> v;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    const std::string cell = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      v.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw UsageError("bad --grid value: " + text);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (v.size() != 4 && v.size() != 5)
    throw UsageError(
        "--grid expects x_min,x_max,z_min,z_max[,pixel_pitch] in mm");
  BeamformGrid g;
  g.x_min = v[0] * 1e-3;
  g.x_max = v[1] * 1e-3;
  g.z_min = v[2] * 1e-3;
  g.z_max = v[3] * 1e-3;
  g.pixel_pitch = v.size() == 5 ? v[4] * 1e-3 : 0.0;
  return g;
}

/// Grid spanning the central aperture and the depth range the record can
/// support; pixel pitch defaults to a quarter wavelength.
inline BeamformGrid default_grid(const RFDataSet& ds, double max_T_periods) {
  const ProbeGeometry probe = ds.probe();
  BeamformGrid g;
  const double half = 0.45 * probe.aperture_width();
  g.x_min = -half;
  g.x_max = half;
  const double duration =
      static_cast<double>(ds.n_samples()) / ds.sampling_frequency;
  const double usable =
      0.45 * ds.c0 * (duration - max_T_periods / ds.sampling_frequency);
  g.z_min = 5e-3;
  g.z_max = std::max(g.z_min + 5e-3, std::min(usable, 50e-3));
  g.pixel_pitch = 0.25 * probe.wavelength(ds.c0);
  return g;
}

inline void finalize_grid(BeamformGrid& grid, const RFDataSet& ds) {
  if (grid.pixel_pitch <= 0.0)
    grid.pixel_pitch = 0.25 * ds.probe().wavelength(ds.c0);
  grid.validate();
}

inline nlohmann::json base_manifest(const std::string& subcommand,
                                    const std::vector<std::string>& argv) {
  nlohmann::json m;
  m["tool"] = "usdpc";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["argv"] = argv;
  return m;
}

struct CommonOptions {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
};

inline int run_simulate(const std::string& config_path,
                        const std::string& out_path,
                        const CommonOptions& common,
                        const std::vector<std::string>& argv) {
  RunConfig cfg = load_run_config(config_path);
  if (common.seed) {
    cfg.seed = *common.seed;
    cfg.sim.seed = *common.seed;
    cfg.phantom_seed = *common.seed;
  }
  cfg.sim.threads = common.threads;
  if (cfg.angles.empty())
    throw ValidationError("simulate: config defines no angles");

  const Phantom phantom = cfg.build_phantom();
  const double min_density = 5.0 / (phantom.medium.sos / cfg.probe.center_frequency *
                                    phantom.medium.sos / cfg.probe.center_frequency);
  if (phantom.scatterers.size() > 10 &&
      phantom.scatterer_density() < min_density)
    std::fprintf(stderr,
                 "warning: scatterer density %.1f/mm^2 below the fully "
                 "developed speckle guideline %.1f/mm^2\n",
                 phantom.scatterer_density() * 1e-6, min_density * 1e-6);

  SimStats stats;
  const RFDataSet ds = simulate_sequence(phantom, cfg.probe, cfg.pulse,
                                         cfg.angles, cfg.sim, &stats);
  write_rf(ds, out_path);

  nlohmann::json m = base_manifest("simulate", argv);
  m["config"] = config_path;
  m["output"] = out_path;
  m["seed"] = cfg.sim.seed;
  m["n_transmits"] = ds.n_transmits();
  m["n_elements"] = ds.n_elements;
  m["n_samples"] = ds.n_samples();
  m["clipped_tail_samples"] = stats.clipped_tail_samples;
  write_manifest(out_path, m);
  std::printf("wrote %s: %zu transmits x %d elements x %zu samples\n",
              out_path.c_str(), ds.n_transmits(), ds.n_elements,
              ds.n_samples());
  return 0;
}

inline int run_bmode(const std::string& rf_path, double na,
                     const std::string& out_path, const std::string& grid_spec,
                     const CommonOptions& common,
                     const std::vector<std::string>& argv) {
  const ImageFormat format = format_from_path(out_path);
  const RFDataSet ds = read_rf(rf_path);
  BeamformGrid grid =
      grid_spec.empty() ? default_grid(ds, 0.0) : parse_grid_mm(grid_spec);
  finalize_grid(grid, ds);

  const RealImage image =
      bmode(ds, ds.probe(), grid, ds.c0, na, common.threads);
  export_image(image, out_path, format);

  nlohmann::json m = base_manifest("bmode", argv);
  m["input"] = rf_path;
  m["output"] = out_path;
  m["na"] = na;
  m["grid_mm"] = {grid.x_min * 1e3, grid.x_max * 1e3, grid.z_min * 1e3,
                  grid.z_max * 1e3, grid.pixel_pitch * 1e3};
  write_manifest(out_path, m);
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

inline int run_dpc(const std::string& rf_path, const std::vector<double>& T,
                   int m_index, double na, double sigma_mm,
                   const std::string& mode, const std::string& out_path,
                   const std::string& grid_spec, const CommonOptions& common,
                   const std::vector<std::string>& argv) {
  const ImageFormat format = format_from_path(out_path);
  const RFDataSet ds = read_rf(rf_path);

  DpcParams params;
  params.T_list = T;
  params.m = m_index;
  params.na = na;
  params.gaussian_sigma = sigma_mm * 1e-3;
  params.threads = common.threads;
  if (mode == "mean-of-angles")
    params.compounding = DpcCompounding::kMeanOfAngles;
  else if (mode == "arg-of-mean-product")
    params.compounding = DpcCompounding::kArgOfMeanProduct;
  else
    throw UsageError("unknown --mode \"" + mode + "\"");

  double max_T = 0.0;
  for (double t : T) max_T = std::max(max_T, t);
  params.grid = grid_spec.empty() ? default_grid(ds, max_T)
                                  : parse_grid_mm(grid_spec);
  finalize_grid(params.grid, ds);

  const DPCImage image = dpc_pipeline(ds, ds.probe(), ds.c0, params);
  RealImage real;
  real.grid = image.grid;
  real.values = image.values;
  export_image(real, out_path, format);

  nlohmann::json m = base_manifest("dpc", argv);
  m["input"] = rf_path;
  m["output"] = out_path;
  m["T_periods"] = params.T_list;
  m["m"] = params.m;
  m["na"] = params.na;
  m["gaussian_sigma_mm"] = sigma_mm;
  m["compounding"] = to_string(params.compounding);
  m["n_pairs"] = image.pairs.size();
  m["delta_x_effective_mm"] = image.delta_x_effective * 1e3;
  m["grid_mm"] = {params.grid.x_min * 1e3, params.grid.x_max * 1e3,
                  params.grid.z_min * 1e3, params.grid.z_max * 1e3,
                  params.grid.pixel_pitch * 1e3};
  write_manifest(out_path, m);
  std::printf("wrote %s (%zu pair images compounded, shear %.4f mm)\n",
              out_path.c_str(), image.pairs.size(),
              image.delta_x_effective * 1e3);
  return 0;
}

inline int run_memory(const std::string& rf_path, const std::string& out_path,
                      const WindowGridSpec& spec,
                      const std::vector<std::string>& argv) {
  const RFDataSet ds = read_rf(rf_path);
  const MemoryEffectReport report = validate_memory_effect(ds, spec);

  std::string csv =
      "theta_rad,x0_mm,t0_us,valid,rho,dx_meas_mm,dt_meas_us,dx_pred_mm,"
      "dt_pred_us\n";
  char line[256];
  for (const auto& tr : report.tracks) {
    std::snprintf(line, sizeof(line),
                  "%.9g,%.9g,%.9g,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", tr.theta,
                  tr.window.x0 * 1e3, tr.window.t0 * 1e6, tr.valid ? 1 : 0,
                  tr.rho, tr.dx_measured * 1e3, tr.dt_measured * 1e6,
                  tr.dx_predicted * 1e3, tr.dt_predicted * 1e6);
    csv += line;
  }
  detail::write_file(out_path, csv);

  nlohmann::json m = base_manifest("memory", argv);
  m["input"] = rf_path;
  m["output"] = out_path;
  nlohmann::json angles = nlohmann::json::array();
  for (const auto& a : report.angles) {
    angles.push_back({{"theta_rad", a.theta},
                      {"n_windows", a.n_windows},
                      {"n_qualified", a.n_qualified},
                      {"mean_rho", a.mean_rho},
                      {"rms_dev_x_mm", a.rms_dev_x * 1e3},
                      {"rms_dev_t_us", a.rms_dev_t * 1e6},
                      {"pass_fraction", a.pass_fraction}});
    std::printf(
        "theta %+6.4f rad: %3zu windows, %3zu with rho>=%.2f, mean rho "
        "%.3f, rms dev %.4f mm / %.4f us, pass %.1f%%\n",
        a.theta, a.n_windows, a.n_qualified, report.spec.rho_min, a.mean_rho,
        a.rms_dev_x * 1e3, a.rms_dev_t * 1e6, 100.0 * a.pass_fraction);
  }
  m["angles"] = angles;
  m["pooled_pass_fraction"] = report.pooled_pass_fraction();
  write_manifest(out_path, m);
  std::printf("pooled pass fraction: %.3f\n", report.pooled_pass_fraction());
  return 0;
}

inline int run_soscal(const std::string& config_path,
                      const std::string& out_path,
                      const CommonOptions& common,
                      const std::vector<std::string>& argv) {
  RunConfig cfg = load_run_config(config_path);
  if (common.seed) {
    cfg.seed = *common.seed;
    cfg.sim.seed = *common.seed;
  }
  cfg.sim.threads = common.threads;
  cfg.dpc.threads = common.threads;
  if (cfg.angles.empty())
    throw ValidationError("soscal: config defines no angles");
  if (!cfg.has_dpc_grid)
    throw ValidationError("soscal: config must define dpc.grid_mm");

  std::string csv = "type,sos_m_per_s,delta_sos_m_per_s,excursion_rad\n";
  std::vector<std::pair<double, double>> points;
  for (const std::string& type : cfg.soscal_types) {
    const Phantom phantom = standard_phantom("sphere049:" + type);
    if (phantom.inclusions.size() != 1)
      throw ValidationError("soscal: preset must contain one inclusion");
    const DiskInclusion& inc = phantom.inclusions.front();

    const RFDataSet ds = simulate_sequence(phantom, cfg.probe, cfg.pulse,
                                           cfg.angles, cfg.sim);
    const DPCImage image = dpc_pipeline(ds, cfg.probe, ds.c0, cfg.dpc);
    PhaseProfile profile =
        integrate_transverse(image, inc.z, cfg.soscal_band_halfwidth);
    if (cfg.soscal_detrend) profile = detrend_profile(profile);
    const double exc = excursion(profile);
    const double dsos = inc.sos - phantom.medium.sos;
    points.emplace_back(dsos, exc);
    char line[160];
    std::snprintf(line, sizeof(line), "%s,%.9g,%.9g,%.9g\n", type.c_str(),
                  inc.sos, dsos, exc);
    csv += line;
    std::printf("type %-4s delta_sos %+6.1f m/s -> excursion %+.4f rad\n",
                type.c_str(), dsos, exc);
  }

  const LinearityFit fit = linearity_fit(points);
  detail::write_file(out_path, csv);

  nlohmann::json m = base_manifest("soscal", argv);
  m["config"] = config_path;
  m["output"] = out_path;
  m["slope_rad_per_m_per_s"] = fit.slope;
  m["intercept_rad"] = fit.intercept;
  m["r_squared"] = fit.r_squared;
  write_manifest(out_path, m);
  std::printf("fit: slope %.5g rad/(m/s), intercept %.5g rad, r^2 %.4f\n",
              fit.slope, fit.intercept, fit.r_squared);
  return 0;
}

}  // namespace cli

/**
 * Entry point shared by the usdpc binary and the test suites. Exit codes:
 * 0 success, 1 usage error, 2 data/format error, 3 numerical/validation
 * failure. Identical inputs produce identical outputs.
 */
inline int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"plane-wave ultrasound simulation and differential phase "
               "contrast toolkit"};
  app.require_subcommand(1);

  cli::CommonOptions common;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value,
                                  "override the config seed everywhere");
  app.add_option("--threads", common.threads,
                 "worker threads (1 guarantees bit-exact runs; results are "
                 "thread-count invariant by construction)");

  std::string config_path, rf_path, out_path, grid_spec;
  double na = 0.5;
  std::vector<double> T_list = {800.0};
  int m_index = 1;
  double sigma_mm = 0.0;
  std::string mode = "mean-of-angles";
  WindowGridSpec window_spec;
  double window_x_mm = 3.0, window_t_us = 3.0;

  auto* sim = app.add_subcommand("simulate",
                                 "synthesize an RF dataset from a config");
  sim->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  sim->add_option("--out", out_path, "output RF container path")->required();

  auto* bm = app.add_subcommand("bmode", "standard pulse-echo image");
  bm->add_option("--rf", rf_path, "input RF container")->required();
  bm->add_option("--na", na, "receive numerical aperture")->required();
  bm->add_option("--out", out_path, "output image (.pgm or .csv)")
      ->required();
  bm->add_option("--grid", grid_spec,
                 "x_min,x_max,z_min,z_max[,pixel_pitch] in mm");

  auto* dpc = app.add_subcommand("dpc", "differential phase contrast image");
  dpc->add_option("--rf", rf_path, "input RF container")->required();
  dpc->add_option("--T", T_list, "pre-delays in sampling periods")
      ->delimiter(',');
  dpc->add_option("--m", m_index, "inter-angle separation index");
  dpc->add_option("--na", na, "receive numerical aperture")->required();
  dpc->add_option("--sigma", sigma_mm, "Gaussian smoothing sigma in mm");
  dpc->add_option("--mode", mode,
                  "compounding: mean-of-angles | arg-of-mean-product");
  dpc->add_option("--out", out_path, "output image (.pgm or .csv)")
      ->required();
  dpc->add_option("--grid", grid_spec,
                  "x_min,x_max,z_min,z_max[,pixel_pitch] in mm");

  auto* mem = app.add_subcommand("memory",
                                 "verify the speckle trajectory law");
  mem->add_option("--rf", rf_path, "input RF container")->required();
  mem->add_option("--out", out_path, "output report CSV")->required();
  mem->add_option("--window-x", window_x_mm, "window width in mm");
  mem->add_option("--window-t", window_t_us, "window width in us");

  auto* cal = app.add_subcommand("soscal",
                                 "sound-speed linearity sweep over the "
                                 "standard inclusion types");
  cal->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  cal->add_option("--out", out_path, "output table CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);  // CLI11's vector overload expects reversed args
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (seed_opt->count() > 0) common.seed = seed_value;

  try {
    std::vector<std::string> argv_copy = args;
    if (sim->parsed())
      return cli::run_simulate(config_path, out_path, common, argv_copy);
    if (bm->parsed())
      return cli::run_bmode(rf_path, na, out_path, grid_spec, common,
                            argv_copy);
    if (dpc->parsed())
      return cli::run_dpc(rf_path, T_list, m_index, na, sigma_mm, mode,
                          out_path, grid_spec, common, argv_copy);
    if (mem->parsed()) {
      window_spec.width_x = window_x_mm * 1e-3;
      window_spec.width_t = window_t_us * 1e-6;
      return cli::run_memory(rf_path, out_path, window_spec, argv_copy);
    }
    if (cal->parsed())
      return cli::run_soscal(config_path, out_path, common, argv_copy);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

inline int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args);
}

}  // namespace usdpc

#endif /* USDPC_CLI_HPP */
