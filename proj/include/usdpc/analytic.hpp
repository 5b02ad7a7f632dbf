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

#ifndef USDPC_ANALYTIC_HPP
#define USDPC_ANALYTIC_HPP

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "usdpc/errors.hpp"
#include "usdpc/frame.hpp"
#include "usdpc/parallel.hpp"

namespace usdpc {

namespace detail {

// FFTW plan creation is not thread safe; execution via fftw_execute_dft on
// caller-owned buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlanPair {
 public:
  explicit FftPlanPair(int n) : n_(n) {
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n));
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~FftPlanPair() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FftPlanPair(const FftPlanPair&) = delete;
  FftPlanPair& operator=(const FftPlanPair&) = delete;

  void forward(std::complex<double>* buf) const {
    auto* p = reinterpret_cast<fftw_complex*>(buf);
    fftw_execute_dft(fwd_, p, p);
  }
  void backward(std::complex<double>* buf) const {
    auto* p = reinterpret_cast<fftw_complex*>(buf);
    fftw_execute_dft(bwd_, p, p);
  }
  int n() const { return n_; }

 private:
  int n_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

/// In-place analytic conversion of one channel already loaded into buf.
inline void analytic_channel(const FftPlanPair& plans,
                             std::complex<double>* buf) {
  const int n = plans.n();
  plans.forward(buf);
  // One-sided spectrum: keep DC (and Nyquist for even n), double positive
  // frequencies, zero negative ones.
  const int half = n / 2;
  for (int i = 1; i < (n + 1) / 2; ++i) buf[i] *= 2.0;
  for (int i = half + 1; i < n; ++i) buf[i] = 0.0;
  plans.backward(buf);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) buf[i] *= inv_n;
}

}  // namespace detail

/**
 * Per-element analytic signal via a full-length frequency-domain one-sided
 * filter. No demodulation: the carrier is retained, so downstream phase
 * comparisons are at RF.
 */
inline AnalyticFrame analytic_signal(const RFFrame& frame,
                                     unsigned threads = 1) {
  frame.validate();
  if (frame.n_samples() < 2)
    throw ValidationError("analytic_signal: need at least 2 time samples");

  const std::size_t n_el = frame.n_elements();
  const std::size_t n_t = frame.n_samples();

  AnalyticFrame out;
  out.samples = Grid2D<std::complex<double>>(n_el, n_t);
  out.sampling_frequency = frame.sampling_frequency;
  out.time_origin = frame.time_origin;
  out.tilt_angle = frame.tilt_angle;
  out.predelay_T = frame.predelay_T;

  detail::FftPlanPair plans(static_cast<int>(n_t));
  parallel_for(n_el, threads, [&](std::size_t e) {
    std::complex<double>* row = out.samples.row(e);
    const double* src = frame.samples.row(e);
    for (std::size_t k = 0; k < n_t; ++k) row[k] = src[k];
    detail::analytic_channel(plans, row);
  });
  return out;
}

}  // namespace usdpc

#endif /* USDPC_ANALYTIC_HPP */
