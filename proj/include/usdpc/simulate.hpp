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

#ifndef USDPC_SIMULATE_HPP
#define USDPC_SIMULATE_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "usdpc/core.hpp"
#include "usdpc/dataset.hpp"
#include "usdpc/errors.hpp"
#include "usdpc/frame.hpp"
#include "usdpc/parallel.hpp"
#include "usdpc/phantom.hpp"
#include "usdpc/rng.hpp"

namespace usdpc {

struct SimulationConfig {
  double duration = 0.0;         // [s]; <= 0 selects the automatic bound
  bool include_spreading = true; // 1/sqrt(distance) receive amplitude
  bool include_directivity = true;  // cosine element factor
  double noise_rms = 0.0;           // additive Gaussian noise, sample units
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool fail_on_truncation = true;  // throw when an echo peak falls outside
};

/// Accounting for contributions lost to the finite record.
struct SimStats {
  std::size_t truncated_peaks = 0;        // echo centers outside the record
  std::size_t clipped_tail_samples = 0;   // pulse tail samples dropped
};

/**
 * Record length that covers the round trip to the deepest phantom corner
 * plus the pulse support, for tilt angles up to max_abs_angle, plus any
 * pre-delay the downstream processing intends to consume.
 */
inline double auto_duration(const Phantom& phantom, const ProbeGeometry& probe,
                            const TransmitPulse& pulse, double max_abs_angle,
                            double max_predelay = 0.0) {
  const Region& r = phantom.region;
  const double x_far = std::max(std::abs(r.x_min), std::abs(r.x_max));
  const double s = std::sin(std::abs(max_abs_angle));
  const double tx_max = (r.z_max + x_far * s) / phantom.medium.sos;
  const double half_ap = 0.5 * probe.aperture_width();
  const double rx_max =
      std::hypot(r.z_max, x_far + half_ap) / phantom.medium.sos;
  // Straight-ray excess delays are orders of magnitude below this margin.
  return tx_max + rx_max + pulse.support_halfwidth() + max_predelay + 2e-6;
}

/**
 * Single-scattering synthesis of one plane-wave transmit.
 *
 * Each scatterer contributes a pulse at the sum of: plane-wave transmit
 * arrival (z cos t + x sin t)/c0 plus the straight transmit-ray excess
 * delay, and the element return dist/c0 plus the scatterer-to-element
 * excess delay. Amplitude factors (spreading, cosine directivity) follow
 * the config. Element rows are independent work units, so results are
 * bit-identical for any thread count.
 */
inline RFFrame simulate_rf(const Phantom& phantom, const ProbeGeometry& probe,
                           const TransmitPulse& pulse, double theta,
                           const SimulationConfig& config,
                           SimStats* stats = nullptr) {
  phantom.validate();
  probe.validate();
  pulse.validate();
  if (!(std::abs(theta) < std::numbers::pi / 4.0))
    throw ValidationError("simulate_rf: |theta| must be < pi/4");
  if (!(config.duration > 0.0))
    throw ValidationError("simulate_rf: duration must be > 0 (see auto_duration)");

  const double fs = probe.sampling_frequency;
  const double c0 = phantom.medium.sos;
  const auto n_samples =
      static_cast<std::size_t>(std::ceil(config.duration * fs));
  if (n_samples < 2)
    throw ValidationError("simulate_rf: record shorter than 2 samples");

  RFFrame frame;
  frame.samples =
      Grid2D<double>(static_cast<std::size_t>(probe.n_elements), n_samples);
  frame.sampling_frequency = fs;
  frame.time_origin = 0.0;
  frame.tilt_angle = theta;

  const std::size_t n_sc = phantom.scatterers.size();
  const double sin_t = std::sin(theta);
  const double cos_t = std::cos(theta);
  const double tan_t = sin_t / cos_t;

  // Transmit-leg delay (geometric + aberration) per scatterer, shared by
  // all elements.
  std::vector<double> tx_delay(n_sc);
  const bool has_inclusions = !phantom.inclusions.empty();
  for (std::size_t i = 0; i < n_sc; ++i) {
    const Scatterer& s = phantom.scatterers[i];
    double d = (s.z * cos_t + s.x * sin_t) / c0;
    if (has_inclusions)
      d += ray_excess_delay(phantom, s.x - s.z * tan_t, 0.0, s.x, s.z);
    tx_delay[i] = d;
  }

  const double sigma = pulse.sigma();
  const double halfwidth = pulse.support_halfwidth();
  const double omega = 2.0 * std::numbers::pi * pulse.center_frequency;
  const double dt = 1.0 / fs;
  // Constant per-step factors of the envelope/carrier recurrences.
  const double env_ratio = std::exp(-dt * dt / (sigma * sigma));
  const double rot_c = std::cos(omega * dt);
  const double rot_s = std::sin(omega * dt);

  std::vector<SimStats> per_element(
      static_cast<std::size_t>(probe.n_elements));

  parallel_for(
      static_cast<std::size_t>(probe.n_elements), config.threads,
      [&](std::size_t e) {
        double* out = frame.samples.row(e);
        const double xe = probe.element_position(static_cast<int>(e));
        SimStats& st = per_element[e];
        for (std::size_t i = 0; i < n_sc; ++i) {
          const Scatterer& s = phantom.scatterers[i];
          const double dx = s.x - xe;
          const double dist = std::sqrt(dx * dx + s.z * s.z);
          double rx = dist / c0;
          if (has_inclusions)
            rx += ray_excess_delay(phantom, s.x, s.z, xe, 0.0);
          const double tau = tx_delay[i] + rx;

          if (tau < 0.0 || tau >= config.duration) {
            st.truncated_peaks++;
            continue;
          }

          double amp = s.reflectivity * pulse.amplitude;
          if (config.include_spreading) amp /= std::sqrt(dist);
          if (config.include_directivity) amp *= s.z / dist;

          const auto lo_unclamped =
              static_cast<long long>(std::ceil((tau - halfwidth) * fs));
          const auto hi_unclamped =
              static_cast<long long>(std::floor((tau + halfwidth) * fs));
          const long long lo = std::max(lo_unclamped, 0LL);
          const long long hi = std::min(
              hi_unclamped, static_cast<long long>(n_samples) - 1LL);
          st.clipped_tail_samples += static_cast<std::size_t>(
              (lo - lo_unclamped) + (hi_unclamped - hi));
          if (hi < lo) continue;

          // Incremental evaluation of amp * exp(-u^2/2s^2) * cos(w u) at
          // u = k/fs - tau; exact delays, no sample rounding.
          const double u0 = static_cast<double>(lo) * dt - tau;
          double env = std::exp(-0.5 * u0 * u0 / (sigma * sigma));
          double env_step =
              std::exp(-(u0 * dt + 0.5 * dt * dt) / (sigma * sigma));
          double carrier_c = std::cos(omega * u0);
          double carrier_s = std::sin(omega * u0);
          for (long long k = lo; k <= hi; ++k) {
            out[k] += amp * env * carrier_c;
            env *= env_step;
            env_step *= env_ratio;
            const double nc = carrier_c * rot_c - carrier_s * rot_s;
            carrier_s = carrier_c * rot_s + carrier_s * rot_c;
            carrier_c = nc;
          }
        }

        if (config.noise_rms > 0.0) {
          Rng rng(mix_seed(
              mix_seed(config.seed, std::bit_cast<std::uint64_t>(theta)), e));
          for (std::size_t k = 0; k < n_samples; ++k)
            out[k] += config.noise_rms * rng.normal();
        }
      });

  SimStats total;
  for (const auto& st : per_element) {
    total.truncated_peaks += st.truncated_peaks;
    total.clipped_tail_samples += st.clipped_tail_samples;
  }
  if (stats) *stats = total;
  if (config.fail_on_truncation && total.truncated_peaks > 0)
    throw ValidationError(
        "simulate_rf: record duration too short, " +
        std::to_string(total.truncated_peaks) + " echo peaks truncated");
  return frame;
}

/**
 * One frame per transmit angle over the same frozen phantom realization.
 * duration <= 0 resolves the automatic bound once for the whole sequence.
 */
inline RFDataSet simulate_sequence(const Phantom& phantom,
                                   const ProbeGeometry& probe,
                                   const TransmitPulse& pulse,
                                   const std::vector<double>& angles,
                                   const SimulationConfig& config,
                                   SimStats* stats = nullptr) {
  if (angles.empty())
    throw ValidationError("simulate_sequence: need at least one angle");
  SimulationConfig cfg = config;
  if (cfg.duration <= 0.0) {
    double max_abs = 0.0;
    for (double a : angles) max_abs = std::max(max_abs, std::abs(a));
    cfg.duration = auto_duration(phantom, probe, pulse, max_abs);
  }

  RFDataSet ds;
  ds.n_elements = probe.n_elements;
  ds.pitch = probe.pitch;
  ds.center_frequency = probe.center_frequency;
  ds.sampling_frequency = probe.sampling_frequency;
  ds.c0 = phantom.medium.sos;
  ds.time_origin = 0.0;
  ds.angles = angles;

  SimStats total;
  for (double theta : angles) {
    SimStats st;
    ds.frames.push_back(
        quantize_frame(simulate_rf(phantom, probe, pulse, theta, cfg, &st)));
    total.truncated_peaks += st.truncated_peaks;
    total.clipped_tail_samples += st.clipped_tail_samples;
  }
  if (stats) *stats = total;
  ds.validate();
  return ds;
}

}  // namespace usdpc

#endif /* USDPC_SIMULATE_HPP */
