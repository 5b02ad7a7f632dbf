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

#ifndef USDPC_DPC_HPP
#define USDPC_DPC_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "usdpc/analytic.hpp"
#include "usdpc/beamform.hpp"
#include "usdpc/dataset.hpp"
#include "usdpc/errors.hpp"
#include "usdpc/frame.hpp"
#include "usdpc/grid2d.hpp"

namespace usdpc {

enum class DpcCompounding {
  kMeanOfAngles,      // arithmetic mean of per-pair phase images
  kArgOfMeanProduct,  // arg of the summed complex pair products
};

inline std::string to_string(DpcCompounding mode) {
  return mode == DpcCompounding::kMeanOfAngles ? "mean-of-angles"
                                               : "arg-of-mean-product";
}

struct DpcParams {
  std::vector<double> T_list = {800.0};  // pre-delays in sampling periods
  int m = 1;                             // inter-angle separation index
  double na = 0.5;
  BeamformGrid grid;
  double gaussian_sigma = 0.0;  // [m]; 0 disables smoothing
  DpcCompounding compounding = DpcCompounding::kMeanOfAngles;
  unsigned threads = 1;

  void validate() const {
    if (T_list.empty()) throw ValidationError("DpcParams: empty T list");
    for (double T : T_list)
      if (!(T > 0.0)) throw ValidationError("DpcParams: every T must be > 0");
    if (m < 1) throw ValidationError("DpcParams: m must be >= 1");
    grid.validate();
    if (gaussian_sigma < 0.0)
      throw ValidationError("DpcParams: gaussian_sigma must be >= 0");
  }
};

/// One contributing transmit pair of a compounded DPC image.
struct DpcPairMeta {
  int n_a = 0;
  int n_b = 0;
  double T_periods = 0.0;
  double delta_x = 0.0;  // [m]
};

/**
 * Phase-difference map in radians. values(i, j) is in [-pi, pi]; counts
 * records how many (pair, T) contributions were valid per pixel, 0 marking
 * pixels excluded everywhere (value 0 there).
 */
struct DPCImage {
  BeamformGrid grid;
  Grid2D<double> values;
  Grid2D<std::uint32_t> counts;
  std::vector<DpcPairMeta> pairs;
  double delta_x_effective = 0.0;  // [m] mean shear over contributions
  DpcCompounding compounding = DpcCompounding::kMeanOfAngles;
  double gaussian_sigma = 0.0;  // [m]
};

/// Complex image plus a validity mask produced by lateral registration.
struct RegisteredImage {
  ComplexImage image;
  Grid2D<std::uint8_t> valid;
};

/**
 * Advances the raw RF record by T*cos(theta) sampling periods:
 * out(x, t) = in(x, t + T cos(theta)). Sub-sample shifts use band-limited
 * (frequency-domain) interpolation, which keeps the carrier phase exact;
 * samples needing data beyond the record become zero. Sampling metadata
 * (time_origin) is preserved, the applied user delay is recorded in
 * predelay_T.
 */
inline RFFrame predelay_frame(const RFFrame& frame, double T_periods,
                              double theta) {
  frame.validate();
  if (T_periods < 0.0)
    throw ValidationError("predelay_frame: T must be >= 0");
  const double shift = T_periods * std::cos(theta);  // in sampling periods
  const auto n = static_cast<long long>(frame.n_samples());
  if (shift >= static_cast<double>(n))
    throw ValidationError("predelay_frame: shift exceeds record length");

  RFFrame out;
  out.samples = Grid2D<double>(frame.n_elements(), frame.n_samples());
  out.sampling_frequency = frame.sampling_frequency;
  out.time_origin = frame.time_origin;
  out.tilt_angle = frame.tilt_angle;
  out.predelay_T = frame.predelay_T + T_periods / frame.sampling_frequency;

  const auto n_invalid = static_cast<long long>(std::ceil(shift));
  const auto k0 = static_cast<long long>(std::floor(shift));

  if (shift == static_cast<double>(k0)) {
    for (std::size_t e = 0; e < frame.n_elements(); ++e) {
      const double* src = frame.samples.row(e);
      double* dst = out.samples.row(e);
      for (long long k = 0; k < n; ++k)
        dst[k] = (k + k0 < n) ? src[k + k0] : 0.0;
    }
    return out;
  }

  // Spectral phase ramp exp(i 2 pi f shift / fs); the Nyquist bin keeps
  // only its real factor so the output stays real.
  std::vector<std::complex<double>> ramp(static_cast<std::size_t>(n));
  for (long long k = 0; k < n; ++k) {
    if (n % 2 == 0 && k == n / 2) {
      ramp[static_cast<std::size_t>(k)] =
          std::cos(std::numbers::pi * shift);
      continue;
    }
    const long long kk = k <= n / 2 ? k : k - n;
    const double ph = 2.0 * std::numbers::pi * static_cast<double>(kk) *
                      shift / static_cast<double>(n);
    ramp[static_cast<std::size_t>(k)] = {std::cos(ph), std::sin(ph)};
  }

  detail::FftPlanPair plans(static_cast<int>(n));
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t e = 0; e < frame.n_elements(); ++e) {
    const double* src = frame.samples.row(e);
    double* dst = out.samples.row(e);
    for (long long k = 0; k < n; ++k)
      buf[static_cast<std::size_t>(k)] = src[k];
    plans.forward(buf.data());
    for (long long k = 0; k < n; ++k)
      buf[static_cast<std::size_t>(k)] *= ramp[static_cast<std::size_t>(k)];
    plans.backward(buf.data());
    for (long long k = 0; k < n; ++k)
      dst[k] = (k < n - n_invalid)
                   ? buf[static_cast<std::size_t>(k)].real() * inv_n
                   : 0.0;  // would read beyond the record
  }
  return out;
}

/// Lateral shear between the registered halves of a transmit pair:
/// (c T / 2) (tan a - tan b), with T given in sampling periods.
inline double shear_offset(double T_periods, double theta_a, double theta_b,
                           double c, double fs) {
  return 0.5 * c * T_periods / fs * (std::tan(theta_a) - std::tan(theta_b));
}

/**
 * Shifts a pair of beamformed images onto the common midpoint frame:
 * a is resampled at x - dx/2, b at x + dx/2 (linear interpolation along x).
 * Pixels whose source column falls outside the grid are flagged invalid.
 */
inline std::pair<RegisteredImage, RegisteredImage> register_pair(
    const ComplexImage& image_a, const ComplexImage& image_b, double delta_x) {
  if (!(image_a.grid == image_b.grid) ||
      !image_a.values.same_shape(image_b.values))
    throw ValidationError("register_pair: images must share one grid");
  const BeamformGrid& grid = image_a.grid;
  if (std::abs(delta_x) >= grid.x_max - grid.x_min)
    throw ValidationError("register_pair: |delta_x| exceeds grid width");

  const auto resample = [&grid](const ComplexImage& src,
                                double offset) -> RegisteredImage {
    const std::size_t nx = src.values.rows();
    const std::size_t nz = src.values.cols();
    RegisteredImage out;
    out.image = src;
    out.valid = Grid2D<std::uint8_t>(nx, nz, 1);
    const double shift_px = offset / grid.pixel_pitch;  // source offset
    for (std::size_t i = 0; i < nx; ++i) {
      const double sidx = static_cast<double>(i) + shift_px;
      const auto k = static_cast<long long>(std::floor(sidx));
      const double f = sidx - static_cast<double>(k);
      const bool exact = (f == 0.0);
      const bool ok = exact
                          ? (k >= 0 && k < static_cast<long long>(nx))
                          : (k >= 0 && k + 1 < static_cast<long long>(nx));
      for (std::size_t j = 0; j < nz; ++j) {
        if (!ok) {
          out.image.values(i, j) = 0.0;
          out.valid(i, j) = 0;
        } else if (exact) {
          out.image.values(i, j) =
              src.values(static_cast<std::size_t>(k), j);
        } else {
          out.image.values(i, j) =
              (1.0 - f) * src.values(static_cast<std::size_t>(k), j) +
              f * src.values(static_cast<std::size_t>(k) + 1, j);
        }
      }
    }
    return out;
  };

  // B_a samples x - dx/2, B_b samples x + dx/2.
  return {resample(image_a, -0.5 * delta_x), resample(image_b, 0.5 * delta_x)};
}

/// Per-pixel phase difference arg(a conj(b)) of one registered pair.
struct DpcPairImage {
  BeamformGrid grid;
  Grid2D<double> phase;
  Grid2D<std::uint8_t> valid;
};

inline DpcPairImage dpc_pair(const RegisteredImage& a,
                             const RegisteredImage& b) {
  if (!(a.image.grid == b.image.grid) ||
      !a.image.values.same_shape(b.image.values))
    throw ValidationError("dpc_pair: images must share one grid");
  DpcPairImage out;
  out.grid = a.image.grid;
  const std::size_t n = a.image.values.size();
  out.phase = Grid2D<double>(a.image.values.rows(), a.image.values.cols());
  out.valid =
      Grid2D<std::uint8_t>(a.image.values.rows(), a.image.values.cols());
  for (std::size_t k = 0; k < n; ++k) {
    if (!a.valid.data()[k] || !b.valid.data()[k]) continue;
    const std::complex<double> va = a.image.values.data()[k];
    const std::complex<double> vb = b.image.values.data()[k];
    // arg(va * conj(vb)), spelled out so that swapping the pair negates the
    // result bit-exactly.
    const double re = va.real() * vb.real() + va.imag() * vb.imag();
    const double im = va.imag() * vb.real() - va.real() * vb.imag();
    out.phase.data()[k] = std::atan2(im, re);
    out.valid.data()[k] = 1;
  }
  return out;
}

/**
 * Separable Gaussian smoothing with a truncated (3 sigma) kernel,
 * renormalized over in-bounds, valid pixels. Pixels with count 0 stay
 * excluded. sigma = 0 returns the image unchanged.
 */
inline DPCImage gaussian_smooth(const DPCImage& image, double sigma) {
  if (sigma < 0.0) throw ValidationError("gaussian_smooth: sigma must be >= 0");
  DPCImage out = image;
  if (sigma == 0.0) return out;

  const double sigma_px = sigma / image.grid.pixel_pitch;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_px)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int k = -radius; k <= radius; ++k)
    kernel[static_cast<std::size_t>(k + radius)] =
        std::exp(-0.5 * static_cast<double>(k) * static_cast<double>(k) /
                 (sigma_px * sigma_px));

  const auto nx = static_cast<long long>(image.values.rows());
  const auto nz = static_cast<long long>(image.values.cols());
  const auto pass = [&](const Grid2D<double>& src, Grid2D<double>& dst,
                        bool along_x) {
    for (long long i = 0; i < nx; ++i) {
      for (long long j = 0; j < nz; ++j) {
        if (!image.counts(static_cast<std::size_t>(i),
                          static_cast<std::size_t>(j))) {
          dst(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 0.0;
          continue;
        }
        double acc = 0.0, wsum = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const long long ii = along_x ? i + k : i;
          const long long jj = along_x ? j : j + k;
          if (ii < 0 || ii >= nx || jj < 0 || jj >= nz) continue;
          if (!image.counts(static_cast<std::size_t>(ii),
                            static_cast<std::size_t>(jj)))
            continue;
          const double w = kernel[static_cast<std::size_t>(k + radius)];
          acc += w * src(static_cast<std::size_t>(ii),
                         static_cast<std::size_t>(jj));
          wsum += w;
        }
        dst(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
            wsum > 0.0 ? acc / wsum : 0.0;
      }
    }
  };

  Grid2D<double> tmp(image.values.rows(), image.values.cols());
  pass(image.values, tmp, true);
  pass(tmp, out.values, false);
  out.gaussian_sigma = sigma;
  return out;
}

/**
 * Full DPC reconstruction: for every pre-delay T and every transmit pair
 * (n, n+m), delay the raw RF by T cos(theta_n), convert to the analytic
 * signal, beamform, register the pair across the inter-angle shear, and
 * extract the pairwise phase. Contributions are compounded per
 * params.compounding with count-weighted handling of registration-invalid
 * pixels, then optionally Gaussian smoothed.
 *
 * Sign convention: with the transmit delay (z cos t + x sin t)/c used by
 * the beamformer, the pre-delayed speckle field translates toward +x as
 * the tilt grows (the raw-data trajectory law), so the pair is registered
 * with dx = shear_offset(T, theta_{n+m}, theta_n), positive for ascending
 * angle pairs. The applied dx is recorded per pair and its mean drives the
 * transverse-integration scaling downstream.
 */
inline DPCImage dpc_pipeline(const RFDataSet& dataset,
                             const ProbeGeometry& probe, double c,
                             const DpcParams& params) {
  dataset.validate();
  params.validate();
  const auto n_angles = static_cast<int>(dataset.n_transmits());
  if (params.m >= n_angles)
    throw ValidationError("dpc_pipeline: m must be < number of angles");

  const std::size_t nx = params.grid.nx();
  const std::size_t nz = params.grid.nz();
  Grid2D<double> phase_sum(nx, nz);
  Grid2D<std::complex<double>> product_sum(nx, nz);
  Grid2D<std::uint32_t> counts(nx, nz);

  DPCImage out;
  out.grid = params.grid;
  out.compounding = params.compounding;

  double shear_sum = 0.0;
  for (double T : params.T_list) {
    // Beamform every angle once per T; pairs reference these images.
    std::vector<ComplexImage> images;
    images.reserve(static_cast<std::size_t>(n_angles));
    for (int n = 0; n < n_angles; ++n) {
      const RFFrame rf = dataset.frame_rf(static_cast<std::size_t>(n));
      const RFFrame delayed = predelay_frame(rf, T, rf.tilt_angle);
      const AnalyticFrame an = analytic_signal(delayed, params.threads);
      images.push_back(das_beamform(an, probe, params.grid, c, params.na,
                                    params.threads));
    }
    for (int n = 0; n + params.m < n_angles; ++n) {
      const int nb = n + params.m;
      const double dx =
          shear_offset(T, dataset.angles[static_cast<std::size_t>(nb)],
                       dataset.angles[static_cast<std::size_t>(n)], c,
                       dataset.sampling_frequency);
      const auto [reg_a, reg_b] = register_pair(
          images[static_cast<std::size_t>(n)],
          images[static_cast<std::size_t>(nb)], dx);
      out.pairs.push_back({n, nb, T, dx});
      shear_sum += dx;

      if (params.compounding == DpcCompounding::kMeanOfAngles) {
        const DpcPairImage pair = dpc_pair(reg_a, reg_b);
        for (std::size_t k = 0; k < pair.phase.size(); ++k) {
          if (!pair.valid.data()[k]) continue;
          phase_sum.data()[k] += pair.phase.data()[k];
          counts.data()[k]++;
        }
      } else {
        for (std::size_t k = 0; k < product_sum.size(); ++k) {
          if (!reg_a.valid.data()[k] || !reg_b.valid.data()[k]) continue;
          product_sum.data()[k] += reg_a.image.values.data()[k] *
                                   std::conj(reg_b.image.values.data()[k]);
          counts.data()[k]++;
        }
      }
    }
  }

  if (out.pairs.empty())
    throw ValidationError("dpc_pipeline: no transmit pairs available");

  out.values = Grid2D<double>(nx, nz);
  out.counts = counts;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (!counts.data()[k]) continue;
    if (params.compounding == DpcCompounding::kMeanOfAngles)
      out.values.data()[k] =
          phase_sum.data()[k] / static_cast<double>(counts.data()[k]);
    else
      out.values.data()[k] = std::arg(product_sum.data()[k]);
  }
  out.delta_x_effective = shear_sum / static_cast<double>(out.pairs.size());

  if (params.gaussian_sigma > 0.0)
    out = gaussian_smooth(out, params.gaussian_sigma);
  return out;
}

}  // namespace usdpc

#endif /* USDPC_DPC_HPP */
