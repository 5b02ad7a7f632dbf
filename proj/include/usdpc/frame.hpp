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

#ifndef USDPC_FRAME_HPP
#define USDPC_FRAME_HPP

#include <complex>
#include <cstddef>

#include "usdpc/errors.hpp"
#include "usdpc/grid2d.hpp"

namespace usdpc {

/**
 * Raw channel data for one plane-wave transmit: samples(element, k) holds
 * the echo at time t = time_origin + k / sampling_frequency.
 */
struct RFFrame {
  Grid2D<double> samples;          // [element][time sample]
  double sampling_frequency = 0.0; // [Hz]
  double time_origin = 0.0;        // [s], time of sample 0 after trigger
  double tilt_angle = 0.0;         // [rad]
  double predelay_T = 0.0;         // [s], user pre-delay T already applied

  std::size_t n_elements() const { return samples.rows(); }
  std::size_t n_samples() const { return samples.cols(); }
  double time_at(std::size_t k) const {
    return time_origin + static_cast<double>(k) / sampling_frequency;
  }

  void validate() const {
    if (samples.rows() < 1 || samples.cols() < 1)
      throw ValidationError("RFFrame: empty sample array");
    if (!(sampling_frequency > 0.0))
      throw ValidationError("RFFrame: sampling_frequency must be > 0");
    if (time_origin < 0.0)
      throw ValidationError("RFFrame: time_origin must be >= 0");
  }
};

/// Complex (one-sided spectrum) counterpart of an RFFrame; real part equals
/// the originating samples.
struct AnalyticFrame {
  Grid2D<std::complex<double>> samples;
  double sampling_frequency = 0.0;
  double time_origin = 0.0;
  double tilt_angle = 0.0;
  double predelay_T = 0.0;

  std::size_t n_elements() const { return samples.rows(); }
  std::size_t n_samples() const { return samples.cols(); }
};

}  // namespace usdpc

#endif /* USDPC_FRAME_HPP */
