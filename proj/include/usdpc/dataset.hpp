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

#ifndef USDPC_DATASET_HPP
#define USDPC_DATASET_HPP

#include <cstddef>
#include <vector>

#include "usdpc/core.hpp"
#include "usdpc/errors.hpp"
#include "usdpc/frame.hpp"
#include "usdpc/grid2d.hpp"

namespace usdpc {

/**
 * Multi-angle acquisition: one raw channel frame per transmit angle, all
 * sharing probe, sampling and background sound speed metadata. Samples are
 * stored as f32 (the container payload type), so a round trip through disk
 * is bit-exact.
 */
struct RFDataSet {
  int n_elements = 0;
  double pitch = 0.0;               // [m]
  double center_frequency = 0.0;    // [Hz]
  double sampling_frequency = 0.0;  // [Hz]
  double c0 = 0.0;                  // [m/s]
  double time_origin = 0.0;         // [s]
  std::vector<double> angles;       // [rad], acquisition order
  std::vector<Grid2D<float>> frames;

  std::size_t n_transmits() const { return frames.size(); }
  std::size_t n_samples() const {
    return frames.empty() ? 0 : frames[0].cols();
  }

  ProbeGeometry probe() const {
    return ProbeGeometry{n_elements, pitch, center_frequency,
                         sampling_frequency};
  }

  void validate() const {
    if (frames.empty()) throw ValidationError("RFDataSet: no frames");
    if (angles.size() != frames.size())
      throw ValidationError("RFDataSet: angles/frames size mismatch");
    for (const auto& f : frames) {
      if (f.rows() != static_cast<std::size_t>(n_elements) ||
          f.cols() != n_samples())
        throw ValidationError("RFDataSet: inconsistent frame dimensions");
    }
    probe().validate();
    if (!(c0 > 0.0)) throw ValidationError("RFDataSet: c0 must be > 0");
    if (time_origin < 0.0)
      throw ValidationError("RFDataSet: time_origin must be >= 0");
  }

  /// Frame i widened to the double-precision working type.
  RFFrame frame_rf(std::size_t i) const {
    const Grid2D<float>& src = frames.at(i);
    RFFrame out;
    out.samples = Grid2D<double>(src.rows(), src.cols());
    for (std::size_t r = 0; r < src.rows(); ++r) {
      const float* in = src.row(r);
      double* dst = out.samples.row(r);
      for (std::size_t c = 0; c < src.cols(); ++c) dst[c] = in[c];
    }
    out.sampling_frequency = sampling_frequency;
    out.time_origin = time_origin;
    out.tilt_angle = angles.at(i);
    return out;
  }
};

/// Narrow a working frame to the dataset storage type.
inline Grid2D<float> quantize_frame(const RFFrame& frame) {
  Grid2D<float> out(frame.samples.rows(), frame.samples.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const double* in = frame.samples.row(r);
    float* dst = out.row(r);
    for (std::size_t c = 0; c < out.cols(); ++c)
      dst[c] = static_cast<float>(in[c]);
  }
  return out;
}

}  // namespace usdpc

#endif /* USDPC_DATASET_HPP */
