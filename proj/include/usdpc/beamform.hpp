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

#ifndef USDPC_BEAMFORM_HPP
#define USDPC_BEAMFORM_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "usdpc/analytic.hpp"
#include "usdpc/core.hpp"
#include "usdpc/dataset.hpp"
#include "usdpc/errors.hpp"
#include "usdpc/frame.hpp"
#include "usdpc/grid2d.hpp"
#include "usdpc/parallel.hpp"

namespace usdpc {

/// Cartesian reconstruction grid. Pixel (i, j) sits at
/// (x_min + i * pixel_pitch, z_min + j * pixel_pitch).
struct BeamformGrid {
  double x_min = 0.0, x_max = 0.0;  // [m]
  double z_min = 0.0, z_max = 0.0;  // [m]
  double pixel_pitch = 0.0;         // [m]

  void validate() const {
    if (!(x_max > x_min))
      throw ValidationError("BeamformGrid: x_max must exceed x_min");
    if (!(z_max > z_min) || !(z_min > 0.0))
      throw ValidationError("BeamformGrid: need z_max > z_min > 0");
    if (!(pixel_pitch > 0.0))
      throw ValidationError("BeamformGrid: pixel_pitch must be > 0");
  }

  std::size_t nx() const {
    return static_cast<std::size_t>(
               std::floor((x_max - x_min) / pixel_pitch + 0.5)) + 1;
  }
  std::size_t nz() const {
    return static_cast<std::size_t>(
               std::floor((z_max - z_min) / pixel_pitch + 0.5)) + 1;
  }
  double x(std::size_t i) const {
    return x_min + static_cast<double>(i) * pixel_pitch;
  }
  double z(std::size_t j) const {
    return z_min + static_cast<double>(j) * pixel_pitch;
  }

  friend bool operator==(const BeamformGrid& a, const BeamformGrid& b) {
    return a.x_min == b.x_min && a.x_max == b.x_max && a.z_min == b.z_min &&
           a.z_max == b.z_max && a.pixel_pitch == b.pixel_pitch;
  }
};

/// Beamformed complex field B(x, z); values(i, j) indexes (x_i, z_j).
struct ComplexImage {
  BeamformGrid grid;
  double theta = 0.0;       // [rad] source transmit angle
  double predelay_T = 0.0;  // [s] user pre-delay applied before beamforming
  Grid2D<std::complex<double>> values;
  std::size_t out_of_range = 0;  // pixel/element pairs past the record
};

/// Real-valued image on the same grid convention (e.g. a dB map).
struct RealImage {
  BeamformGrid grid;
  Grid2D<double> values;
};

/// Half width of the receive aperture accepted at depth z for a given
/// numerical aperture (na = sin of the receive half-angle).
inline double aperture_halfwidth(double z, double na) {
  if (na >= 1.0) return std::numeric_limits<double>::infinity();
  return z * na / std::sqrt(1.0 - na * na);
}

/**
 * Delay-and-sum beamforming of one analytic frame onto a Cartesian grid.
 *
 * Per pixel, elements within |x_e - x| <= z tan(asin(na)) are summed with
 * Hann apodization across the accepted aperture, renormalized per pixel.
 * Sub-sample delays use carrier-aligned linear interpolation on the complex
 * samples: both neighbors are rotated onto the carrier phase of the target
 * delay before blending, which is exact at the center frequency and leaves
 * only the slowly varying envelope to the linear blend. Element/pixel pairs
 * whose delay lies outside the record contribute zero and are counted in
 * out_of_range.
 */
inline ComplexImage das_beamform(const AnalyticFrame& frame,
                                 const ProbeGeometry& probe,
                                 const BeamformGrid& grid, double c, double na,
                                 unsigned threads = 1) {
  grid.validate();
  probe.validate();
  if (!(na > 0.0) || na > 1.0)
    throw ValidationError("das_beamform: na must be in (0, 1]");
  if (!(c > 0.0)) throw ValidationError("das_beamform: c must be > 0");
  if (frame.n_elements() != static_cast<std::size_t>(probe.n_elements))
    throw ValidationError("das_beamform: frame/probe element count mismatch");

  const std::size_t nx = grid.nx();
  const std::size_t nz = grid.nz();
  const double fs = frame.sampling_frequency;
  const double t0 = frame.time_origin;
  const double theta = frame.tilt_angle;
  const double sin_t = std::sin(theta);
  const double cos_t = std::cos(theta);
  const auto n_samp = static_cast<long long>(frame.n_samples());
  const double el_offset = 0.5 * static_cast<double>(probe.n_elements - 1);
  // carrier advance per sample, for phase-aligned interpolation
  const double omega =
      2.0 * std::numbers::pi * probe.center_frequency / fs;
  const std::complex<double> carrier_back(std::cos(omega), -std::sin(omega));

  ComplexImage img;
  img.grid = grid;
  img.theta = theta;
  img.predelay_T = frame.predelay_T;
  img.values = Grid2D<std::complex<double>>(nx, nz);

  std::vector<std::size_t> oor_per_col(nx, 0);

  parallel_for(nx, threads, [&](std::size_t i) {
    const double x = grid.x(i);
    std::size_t oor = 0;
    for (std::size_t j = 0; j < nz; ++j) {
      const double z = grid.z(j);
      const double half_ap = aperture_halfwidth(z, na);
      int e_lo = 0;
      int e_hi = probe.n_elements - 1;
      if (std::isfinite(half_ap)) {
        e_lo = std::max(
            e_lo, static_cast<int>(
                      std::ceil((x - half_ap) / probe.pitch + el_offset)));
        e_hi = std::min(
            e_hi, static_cast<int>(
                      std::floor((x + half_ap) / probe.pitch + el_offset)));
      }
      const double tau_tx = (z * cos_t + x * sin_t) / c;
      std::complex<double> acc = 0.0;
      double weight_sum = 0.0;
      for (int e = e_lo; e <= e_hi; ++e) {
        const double xe = probe.element_position(e);
        const double dx = x - xe;
        const double tau_rx = std::sqrt(z * z + dx * dx) / c;
        double w = 1.0;
        if (std::isfinite(half_ap)) {
          const double u = (xe - x) / half_ap;
          w = 0.5 * (1.0 + std::cos(std::numbers::pi * u));
        }
        weight_sum += w;
        const double sidx = (tau_tx + tau_rx - t0) * fs;
        const auto k = static_cast<long long>(std::floor(sidx));
        if (k < 0 || k + 1 >= n_samp) {
          ++oor;
          continue;
        }
        const double f = sidx - static_cast<double>(k);
        const std::complex<double>* row =
            frame.samples.row(static_cast<std::size_t>(e));
        const std::complex<double> rot(std::cos(omega * f),
                                       std::sin(omega * f));
        acc += (w) * (rot * ((1.0 - f) * row[k] +
                             f * (row[k + 1] * carrier_back)));
      }
      img.values(i, j) = weight_sum > 0.0 ? acc / weight_sum
                                          : std::complex<double>(0.0);
    }
    oor_per_col[i] = oor;
  });

  for (std::size_t v : oor_per_col) img.out_of_range += v;
  return img;
}

/// Pixel-wise complex sum of images sharing one grid.
inline ComplexImage compound_coherent(const std::vector<ComplexImage>& images) {
  if (images.empty())
    throw ValidationError("compound_coherent: empty image list");
  ComplexImage out = images.front();
  for (std::size_t n = 1; n < images.size(); ++n) {
    const ComplexImage& im = images[n];
    if (!(im.grid == out.grid) || !im.values.same_shape(out.values))
      throw ValidationError("compound_coherent: grid mismatch");
    for (std::size_t k = 0; k < out.values.size(); ++k)
      out.values.data()[k] += im.values.data()[k];
    out.out_of_range += im.out_of_range;
  }
  if (images.size() > 1) {
    out.theta = 0.0;  // compound has no single source angle
  }
  return out;
}

/**
 * Standard pulse-echo image: per-angle delay-and-sum, coherent compound,
 * log-compressed envelope normalized to 0 dB at the peak.
 */
inline RealImage bmode(const RFDataSet& dataset, const ProbeGeometry& probe,
                       const BeamformGrid& grid, double c, double na,
                       unsigned threads = 1) {
  dataset.validate();
  std::vector<ComplexImage> images;
  images.reserve(dataset.n_transmits());
  for (std::size_t n = 0; n < dataset.n_transmits(); ++n) {
    const AnalyticFrame an = analytic_signal(dataset.frame_rf(n), threads);
    images.push_back(das_beamform(an, probe, grid, c, na, threads));
  }
  const ComplexImage comp = compound_coherent(images);

  RealImage out;
  out.grid = grid;
  out.values = Grid2D<double>(comp.values.rows(), comp.values.cols());
  double peak = 0.0;
  for (std::size_t k = 0; k < comp.values.size(); ++k)
    peak = std::max(peak, std::abs(comp.values.data()[k]));
  if (peak == 0.0) return out;  // all-zero input stays at 0 dB
  const double floor_db = -140.0;
  for (std::size_t k = 0; k < comp.values.size(); ++k) {
    const double a = std::abs(comp.values.data()[k]) / peak;
    out.values.data()[k] =
        a > 0.0 ? std::max(20.0 * std::log10(a), floor_db) : floor_db;
  }
  return out;
}

}  // namespace usdpc

#endif /* USDPC_BEAMFORM_HPP */
