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

#ifndef USDPC_SOS_ANALYSIS_HPP
#define USDPC_SOS_ANALYSIS_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "usdpc/dpc.hpp"
#include "usdpc/errors.hpp"

namespace usdpc {

/// Laterally integrated phase along one axial band of a DPC image.
struct PhaseProfile {
  std::vector<double> x;      // [m]
  std::vector<double> phase;  // [rad]; phase[0] == 0 by construction
  double band_center = 0.0;     // [m]
  double band_halfwidth = 0.0;  // [m]
};

/**
 * Averages the DPC image axially over [z - hw, z + hw] and accumulates the
 * result along x, scaled by pixel_pitch / delta_x_effective so the output
 * approximates the one-sided propagation phase relative to the left edge
 * (assumed background).
 */
inline PhaseProfile integrate_transverse(const DPCImage& image,
                                         double band_center_z,
                                         double band_halfwidth) {
  image.grid.validate();
  if (image.delta_x_effective == 0.0)
    throw ValidationError(
        "integrate_transverse: image metadata lacks an effective shear");
  if (!(band_halfwidth >= 0.0))
    throw ValidationError("integrate_transverse: negative band half-width");
  if (band_center_z - band_halfwidth < image.grid.z_min - 1e-12 ||
      band_center_z + band_halfwidth > image.grid.z_max + 1e-12)
    throw ValidationError("integrate_transverse: band outside grid");

  const std::size_t nx = image.values.rows();
  const std::size_t nz = image.values.cols();
  std::size_t j_lo = nz, j_hi = 0;
  for (std::size_t j = 0; j < nz; ++j) {
    const double z = image.grid.z(j);
    if (z >= band_center_z - band_halfwidth - 1e-12 &&
        z <= band_center_z + band_halfwidth + 1e-12) {
      j_lo = std::min(j_lo, j);
      j_hi = std::max(j_hi, j);
    }
  }
  if (j_lo > j_hi)
    throw ValidationError("integrate_transverse: band contains no pixels");

  PhaseProfile profile;
  profile.band_center = band_center_z;
  profile.band_halfwidth = band_halfwidth;
  profile.x.resize(nx);
  profile.phase.resize(nx);

  std::vector<double> gradient(nx, 0.0);
  for (std::size_t i = 0; i < nx; ++i) {
    profile.x[i] = image.grid.x(i);
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
      if (!image.counts(i, j)) continue;
      sum += image.values(i, j);
      cnt++;
    }
    gradient[i] = cnt ? sum / static_cast<double>(cnt) : 0.0;
  }

  const double scale = image.grid.pixel_pitch / image.delta_x_effective;
  profile.phase[0] = 0.0;
  for (std::size_t i = 1; i < nx; ++i)
    profile.phase[i] = profile.phase[i - 1] + gradient[i] * scale;
  return profile;
}

/// Removes the straight line through the profile's end points, anchoring
/// both lateral edges to zero.
inline PhaseProfile detrend_profile(const PhaseProfile& profile) {
  if (profile.phase.size() < 2)
    throw ValidationError("detrend_profile: profile too short");
  PhaseProfile out = profile;
  const double x0 = profile.x.front();
  const double x1 = profile.x.back();
  const double slope = (profile.phase.back() - profile.phase.front()) /
                       (x1 - x0);
  for (std::size_t i = 0; i < out.phase.size(); ++i)
    out.phase[i] -= profile.phase.front() + slope * (profile.x[i] - x0);
  return out;
}

/// Signed value of the largest-magnitude phase in the profile.
inline double excursion(const PhaseProfile& profile) {
  if (profile.phase.empty())
    throw ValidationError("excursion: empty profile");
  double best = 0.0;
  for (double v : profile.phase)
    if (std::abs(v) > std::abs(best)) best = v;
  return best;
}

struct LinearityFit {
  std::vector<std::pair<double, double>> points;  // (delta_sos, excursion)
  double slope = 0.0;      // [rad per m/s]
  double intercept = 0.0;  // [rad]
  double r_squared = 0.0;
};

/// Ordinary least-squares line through (delta_sos, excursion) points.
inline LinearityFit linearity_fit(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw ValidationError("linearity_fit: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0)
    throw ValidationError("linearity_fit: degenerate abscissa");

  LinearityFit fit;
  fit.points = points;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

/// One-way straight-ray phase accumulated across a chord of deviating
/// sound speed: 2 pi f0 chord (1/c_inc - 1/c0).
inline double sos_forward_phase(double chord, double f0, double c0,
                                double c_inc) {
  return 2.0 * std::numbers::pi * f0 * chord * (1.0 / c_inc - 1.0 / c0);
}

/**
 * Inverts the one-way straight-ray model for the inclusion sound speed and
 * returns the difference to background. Model-dependent calibration: its
 * absolute scale is validated only through the linearity of excursion
 * versus known sound-speed contrasts.
 */
inline double phase_to_delta_sos(double excursion_rad, double chord, double f0,
                                 double c0) {
  if (!(chord > 0.0))
    throw ValidationError("phase_to_delta_sos: chord must be > 0");
  if (!(f0 > 0.0) || !(c0 > 0.0))
    throw ValidationError("phase_to_delta_sos: need f0 > 0 and c0 > 0");
  const double inv_cinc =
      excursion_rad / (2.0 * std::numbers::pi * f0 * chord) + 1.0 / c0;
  if (!(inv_cinc > 0.0))
    throw ValidationError(
        "phase_to_delta_sos: excursion implies non-physical sound speed");
  return 1.0 / inv_cinc - c0;
}

}  // namespace usdpc

#endif /* USDPC_SOS_ANALYSIS_HPP */
