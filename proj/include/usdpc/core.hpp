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

#ifndef USDPC_CORE_HPP
#define USDPC_CORE_HPP

#include <cmath>
#include <numbers>
#include <vector>

#include "usdpc/errors.hpp"

// All quantities are SI unless a name says otherwise: lengths in meters,
// times in seconds, frequencies in Hz, sound speeds in m/s.

namespace usdpc {

/// Homogeneous background medium.
struct Medium {
  double sos = 1540.0;  // [m/s]

  void validate() const {
    if (!(sos > 0.0)) throw ValidationError("Medium: sos must be > 0");
  }
};

/**
 * Linear-array transducer description. Element k sits at lateral position
 * (k - (n_elements-1)/2) * pitch, so the aperture is centered on x = 0 and
 * elements lie in the z = 0 plane looking down the +z axis.
 */
struct ProbeGeometry {
  int n_elements = 192;
  double pitch = 0.23e-3;               // [m]
  double center_frequency = 5.3e6;      // [Hz]
  double sampling_frequency = 21.2e6;   // [Hz]

  void validate() const {
    if (n_elements < 2)
      throw ValidationError("ProbeGeometry: n_elements must be >= 2");
    if (!(pitch > 0.0))
      throw ValidationError("ProbeGeometry: pitch must be > 0");
    if (!(center_frequency > 0.0))
      throw ValidationError("ProbeGeometry: center_frequency must be > 0");
    if (!(sampling_frequency >= 2.0 * center_frequency))
      throw ValidationError(
          "ProbeGeometry: sampling_frequency must be >= 2x center_frequency");
  }

  double element_position(int k) const {
    return (static_cast<double>(k) -
            0.5 * static_cast<double>(n_elements - 1)) *
           pitch;
  }

  double aperture_width() const {
    return static_cast<double>(n_elements - 1) * pitch;
  }

  double wavelength(double sos) const { return sos / center_frequency; }
};

/// Lateral element coordinates, symmetric about x = 0.
inline std::vector<double> element_positions(const ProbeGeometry& probe) {
  probe.validate();
  std::vector<double> xs(static_cast<std::size_t>(probe.n_elements));
  for (int k = 0; k < probe.n_elements; ++k)
    xs[static_cast<std::size_t>(k)] = probe.element_position(k);
  return xs;
}

/**
 * Gaussian-modulated cosine transmit pulse, peak at t = 0.
 * fractional_bandwidth is the -6 dB (half-amplitude) spectral full width
 * relative to center_frequency. The envelope is truncated where it falls
 * below 1e-3 of its peak, making the waveform strictly time-limited.
 */
struct TransmitPulse {
  double center_frequency = 5.3e6;   // [Hz]
  double fractional_bandwidth = 0.6; // (0, 1]
  double amplitude = 1.0;

  void validate() const {
    if (!(center_frequency > 0.0))
      throw ValidationError("TransmitPulse: center_frequency must be > 0");
    if (!(fractional_bandwidth > 0.0) || fractional_bandwidth > 1.0)
      throw ValidationError(
          "TransmitPulse: fractional_bandwidth must be in (0, 1]");
  }

  /// Envelope standard deviation in time. Derived from the -6 dB width of
  /// the Gaussian amplitude spectrum: exp(-2 pi^2 sigma^2 f^2) = 1/2 at
  /// f = fractional_bandwidth * f0 / 2.
  double sigma() const {
    return std::sqrt(2.0 * std::numbers::ln2) /
           (std::numbers::pi * fractional_bandwidth * center_frequency);
  }

  /// Half width of the truncated support (envelope = 1e-3 of peak).
  double support_halfwidth() const {
    return sigma() * std::sqrt(2.0 * std::log(1e3));
  }
};

/// Pulse amplitude at time t (0 outside the truncated support).
inline double pulse_waveform(const TransmitPulse& pulse, double t) {
  const double sg = pulse.sigma();
  if (std::abs(t) > pulse.support_halfwidth()) return 0.0;
  const double env = std::exp(-0.5 * t * t / (sg * sg));
  return pulse.amplitude * env *
         std::cos(2.0 * std::numbers::pi * pulse.center_frequency * t);
}

}  // namespace usdpc

#endif /* USDPC_CORE_HPP */
