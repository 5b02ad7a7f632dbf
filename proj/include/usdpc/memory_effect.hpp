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

#ifndef USDPC_MEMORY_EFFECT_HPP
#define USDPC_MEMORY_EFFECT_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "usdpc/core.hpp"
#include "usdpc/dataset.hpp"
#include "usdpc/errors.hpp"
#include "usdpc/frame.hpp"

namespace usdpc {

/**
 * Mirror-reflection trajectory of a speckle grain: a grain received at
 * (x0, t0) under normal incidence is received at the returned coordinates
 * when the transmit is tilted by theta.
 */
inline std::pair<double, double> predict_shift(double x0, double t0,
                                               double theta, double c) {
  if (!(std::abs(theta) < std::numbers::pi / 2.0))
    throw ValidationError("predict_shift: |theta| must be < pi/2");
  const double x_t = x0 + 0.5 * c * t0 * std::tan(theta);
  const double t_t =
      0.5 * t0 * (std::cos(theta) + 1.0 / std::cos(theta)) +
      x0 / c * std::sin(theta);
  return {x_t, t_t};
}

/// Rectangular patch of raw channel data, centered at element coordinate x0
/// and receive time t0 with full extents (width_x, width_t).
struct SpeckleWindow {
  double x0 = 0.0;      // [m]
  double t0 = 0.0;      // [s]
  double width_x = 3e-3;  // [m]
  double width_t = 3e-6;  // [s]

  void validate() const {
    if (!(width_x > 0.0) || !(width_t > 0.0))
      throw ValidationError("SpeckleWindow: extents must be positive");
  }
};

struct CorrelationTrack {
  SpeckleWindow window;
  double theta = 0.0;
  bool valid = false;   // false when the window/search left frame bounds
  double dx_measured = 0.0;   // [m]
  double dt_measured = 0.0;   // [s]
  double dx_predicted = 0.0;  // [m]
  double dt_predicted = 0.0;  // [s]
  double rho = 0.0;           // peak normalized cross-correlation
};

namespace detail {

/// Pearson correlation of two equally shaped patches.
inline double zncc(const Grid2D<double>& a, int ae0, int ak0,
                   const Grid2D<double>& b, int be0, int bk0, int ne,
                   int nk) {
  double sa = 0.0, sb = 0.0;
  const auto n = static_cast<double>(ne) * static_cast<double>(nk);
  for (int e = 0; e < ne; ++e)
    for (int k = 0; k < nk; ++k) {
      sa += a(static_cast<std::size_t>(ae0 + e),
              static_cast<std::size_t>(ak0 + k));
      sb += b(static_cast<std::size_t>(be0 + e),
              static_cast<std::size_t>(bk0 + k));
    }
  const double ma = sa / n, mb = sb / n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (int e = 0; e < ne; ++e)
    for (int k = 0; k < nk; ++k) {
      const double va = a(static_cast<std::size_t>(ae0 + e),
                          static_cast<std::size_t>(ak0 + k)) - ma;
      const double vb = b(static_cast<std::size_t>(be0 + e),
                          static_cast<std::size_t>(bk0 + k)) - mb;
      num += va * vb;
      da += va * va;
      db += vb * vb;
    }
  if (da <= 0.0 || db <= 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

/// Offset of the parabola vertex through (-1,ym) (0,y0) (+1,yp), clamped to
/// [-0.5, 0.5].
inline double quadratic_peak_offset(double ym, double y0, double yp) {
  const double denom = ym - 2.0 * y0 + yp;
  if (denom >= 0.0) return 0.0;  // not a local maximum
  double d = 0.5 * (ym - yp) / denom;
  if (d > 0.5) d = 0.5;
  if (d < -0.5) d = -0.5;
  return d;
}

}  // namespace detail

/**
 * Windowed speckle tracking between a reference frame (theta = 0) and a
 * tilted frame. Per window, a 2D normalized cross-correlation is searched
 * over a region centered on the memory-effect prediction, with sub-sample
 * peak localization by separable quadratic fit. Windows whose data or
 * search region leaves the frame are returned with valid = false.
 */
inline std::vector<CorrelationTrack> track_speckle(
    const RFFrame& frame_ref, const RFFrame& frame_tilt,
    const ProbeGeometry& probe, double c,
    const std::vector<SpeckleWindow>& windows, int search_elements = 10,
    int search_samples = 10) {
  frame_ref.validate();
  frame_tilt.validate();
  probe.validate();
  if (frame_ref.n_elements() != frame_tilt.n_elements() ||
      frame_ref.n_samples() != frame_tilt.n_samples() ||
      frame_ref.sampling_frequency != frame_tilt.sampling_frequency ||
      frame_ref.time_origin != frame_tilt.time_origin)
    throw ValidationError("track_speckle: frames must share metadata");

  const double fs = frame_ref.sampling_frequency;
  const double pitch = probe.pitch;
  const double el_offset = 0.5 * static_cast<double>(probe.n_elements - 1);
  const auto n_el = static_cast<int>(frame_ref.n_elements());
  const auto n_samp = static_cast<int>(frame_ref.n_samples());
  const double theta = frame_tilt.tilt_angle;

  std::vector<CorrelationTrack> tracks;
  tracks.reserve(windows.size());

  for (const SpeckleWindow& win : windows) {
    win.validate();
    CorrelationTrack track;
    track.window = win;
    track.theta = theta;
    const auto [xp, tp] = predict_shift(win.x0, win.t0, theta, c);
    track.dx_predicted = xp - win.x0;
    track.dt_predicted = tp - win.t0;

    const int ec = static_cast<int>(std::lround(win.x0 / pitch + el_offset));
    const int kc = static_cast<int>(
        std::lround((win.t0 - frame_ref.time_origin) * fs));
    const int he = static_cast<int>(std::lround(0.5 * win.width_x / pitch));
    const int hk = static_cast<int>(std::lround(0.5 * win.width_t * fs));
    const int base_le =
        static_cast<int>(std::lround(track.dx_predicted / pitch));
    const int base_lk =
        static_cast<int>(std::lround(track.dt_predicted * fs));

    const int ne = 2 * he + 1;
    const int nk = 2 * hk + 1;
    const bool ref_ok = (ec - he >= 0) && (ec + he < n_el) &&
                        (kc - hk >= 0) && (kc + hk < n_samp);
    const bool tilt_ok =
        (ec - he + base_le - search_elements >= 0) &&
        (ec + he + base_le + search_elements < n_el) &&
        (kc - hk + base_lk - search_samples >= 0) &&
        (kc + hk + base_lk + search_samples < n_samp);
    if (!ref_ok || !tilt_ok) {
      tracks.push_back(track);
      continue;
    }

    // Skip silent windows (no scatterer echoes in range).
    double energy = 0.0;
    for (int e = -he; e <= he; ++e)
      for (int k = -hk; k <= hk; ++k) {
        const double v = frame_ref.samples(
            static_cast<std::size_t>(ec + e), static_cast<std::size_t>(kc + k));
        energy += v * v;
      }
    if (energy <= 0.0) {
      tracks.push_back(track);
      continue;
    }

    const int nle = 2 * search_elements + 1;
    const int nlk = 2 * search_samples + 1;
    Grid2D<double> corr(static_cast<std::size_t>(nle),
                        static_cast<std::size_t>(nlk));
    int best_le = 0, best_lk = 0;
    double best = -2.0;
    for (int le = -search_elements; le <= search_elements; ++le)
      for (int lk = -search_samples; lk <= search_samples; ++lk) {
        const double rho = detail::zncc(
            frame_ref.samples, ec - he, kc - hk, frame_tilt.samples,
            ec - he + base_le + le, kc - hk + base_lk + lk, ne, nk);
        corr(static_cast<std::size_t>(le + search_elements),
             static_cast<std::size_t>(lk + search_samples)) = rho;
        if (rho > best) {
          best = rho;
          best_le = le;
          best_lk = lk;
        }
      }

    double fe = 0.0, fk = 0.0;
    const int pe = best_le + search_elements;
    const int pk = best_lk + search_samples;
    if (pe > 0 && pe + 1 < nle)
      fe = detail::quadratic_peak_offset(
          corr(static_cast<std::size_t>(pe - 1), static_cast<std::size_t>(pk)),
          corr(static_cast<std::size_t>(pe), static_cast<std::size_t>(pk)),
          corr(static_cast<std::size_t>(pe + 1),
               static_cast<std::size_t>(pk)));
    if (pk > 0 && pk + 1 < nlk)
      fk = detail::quadratic_peak_offset(
          corr(static_cast<std::size_t>(pe), static_cast<std::size_t>(pk - 1)),
          corr(static_cast<std::size_t>(pe), static_cast<std::size_t>(pk)),
          corr(static_cast<std::size_t>(pe),
               static_cast<std::size_t>(pk + 1)));

    track.valid = true;
    track.rho = best;
    track.dx_measured =
        (static_cast<double>(base_le + best_le) + fe) * pitch;
    track.dt_measured = (static_cast<double>(base_lk + best_lk) + fk) / fs;
    tracks.push_back(track);
  }
  return tracks;
}

/// Tiling parameters and acceptance thresholds for validate_memory_effect.
struct WindowGridSpec {
  double width_x = 3e-3;        // [m]
  double width_t = 3e-6;        // [s]
  double overlap = 0.5;         // fraction of window size
  double central_fraction = 0.8;  // lateral portion of the aperture tiled
  double rho_min = 0.5;
  double tol_x = 0.15e-3;       // [m]
  double tol_t_periods = 3.0;   // in sampling periods
  int search_elements = 10;
  int search_samples = 10;

  void validate() const {
    if (!(width_x > 0.0) || !(width_t > 0.0))
      throw ValidationError("WindowGridSpec: window extents must be positive");
    if (overlap < 0.0 || overlap >= 1.0)
      throw ValidationError("WindowGridSpec: overlap must be in [0, 1)");
    if (!(central_fraction > 0.0) || central_fraction > 1.0)
      throw ValidationError(
          "WindowGridSpec: central_fraction must be in (0, 1]");
  }
};

struct AngleSummary {
  double theta = 0.0;
  std::size_t n_windows = 0;    // tracked (valid) windows
  std::size_t n_qualified = 0;  // rho >= rho_min
  std::size_t n_passing = 0;    // qualified and within tolerances
  double mean_rho = 0.0;        // over tracked windows
  double rms_dev_x = 0.0;       // [m], over qualified windows
  double rms_dev_t = 0.0;       // [s], over qualified windows
  double pass_fraction = 0.0;   // n_passing / n_qualified
};

struct MemoryEffectReport {
  WindowGridSpec spec;
  std::vector<AngleSummary> angles;  // one per non-reference frame
  std::vector<CorrelationTrack> tracks;  // all angles, in frame order

  /// Pass fraction pooled over every tracked angle.
  double pooled_pass_fraction() const {
    std::size_t q = 0, p = 0;
    for (const auto& a : angles) {
      q += a.n_qualified;
      p += a.n_passing;
    }
    return q == 0 ? 0.0 : static_cast<double>(p) / static_cast<double>(q);
  }
};

/**
 * Tiles speckle windows over the dataset's theta = 0 frame and tracks them
 * in every other frame, aggregating deviations from the trajectory law per
 * angle. The dataset must contain a theta = 0 reference.
 */
inline MemoryEffectReport validate_memory_effect(
    const RFDataSet& dataset, const WindowGridSpec& spec = {}) {
  dataset.validate();
  spec.validate();

  std::size_t ref_index = dataset.n_transmits();
  for (std::size_t i = 0; i < dataset.n_transmits(); ++i)
    if (dataset.angles[i] == 0.0) {
      ref_index = i;
      break;
    }
  if (ref_index == dataset.n_transmits())
    throw ValidationError(
        "validate_memory_effect: dataset lacks a theta=0 reference frame");

  const ProbeGeometry probe = dataset.probe();
  const RFFrame ref = dataset.frame_rf(ref_index);
  const double half_span =
      0.5 * spec.central_fraction * probe.aperture_width();
  const double step_x = spec.width_x * (1.0 - spec.overlap);
  const double step_t = spec.width_t * (1.0 - spec.overlap);
  const double t_begin = dataset.time_origin + 0.5 * spec.width_t;
  const double t_end = dataset.time_origin +
                       static_cast<double>(dataset.n_samples()) /
                           dataset.sampling_frequency -
                       0.5 * spec.width_t;

  std::vector<SpeckleWindow> windows;
  for (double x = -half_span; x <= half_span + 1e-12; x += step_x)
    for (double t = t_begin; t <= t_end; t += step_t)
      windows.push_back({x, t, spec.width_x, spec.width_t});

  MemoryEffectReport report;
  report.spec = spec;
  const double tol_t = spec.tol_t_periods / dataset.sampling_frequency;

  for (std::size_t i = 0; i < dataset.n_transmits(); ++i) {
    if (i == ref_index) continue;
    const RFFrame tilt = dataset.frame_rf(i);
    const auto tracks =
        track_speckle(ref, tilt, probe, dataset.c0, windows,
                      spec.search_elements, spec.search_samples);

    AngleSummary summary;
    summary.theta = dataset.angles[i];
    double rho_sum = 0.0, ssx = 0.0, sst = 0.0;
    for (const auto& tr : tracks) {
      if (!tr.valid) continue;
      summary.n_windows++;
      rho_sum += tr.rho;
      if (tr.rho < spec.rho_min) continue;
      summary.n_qualified++;
      const double devx = tr.dx_measured - tr.dx_predicted;
      const double devt = tr.dt_measured - tr.dt_predicted;
      ssx += devx * devx;
      sst += devt * devt;
      if (std::abs(devx) <= spec.tol_x && std::abs(devt) <= tol_t)
        summary.n_passing++;
    }
    if (summary.n_windows > 0)
      summary.mean_rho = rho_sum / static_cast<double>(summary.n_windows);
    if (summary.n_qualified > 0) {
      summary.rms_dev_x =
          std::sqrt(ssx / static_cast<double>(summary.n_qualified));
      summary.rms_dev_t =
          std::sqrt(sst / static_cast<double>(summary.n_qualified));
      summary.pass_fraction = static_cast<double>(summary.n_passing) /
                              static_cast<double>(summary.n_qualified);
    }
    report.angles.push_back(summary);
    report.tracks.insert(report.tracks.end(), tracks.begin(), tracks.end());
  }
  return report;
}

}  // namespace usdpc

#endif /* USDPC_MEMORY_EFFECT_HPP */
