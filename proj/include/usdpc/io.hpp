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

#ifndef USDPC_IO_HPP
#define USDPC_IO_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "usdpc/beamform.hpp"
#include "usdpc/dataset.hpp"
#include "usdpc/errors.hpp"

namespace usdpc {

// RF container layout (all integers and floats little-endian):
//   magic   8 bytes  "USDPCRF1"
//   version u16      currently 1
//   n_transmits u32, n_elements u32, n_samples u32
//   sampling_frequency f64 [Hz], center_frequency f64 [Hz],
//   pitch f64 [m], c0 f64 [m/s], time_origin f64 [s]
//   angles  f64 * n_transmits [rad], acquisition order
//   payload f32 * n_transmits * n_elements * n_samples,
//           ordered [transmit][element][sample]
inline constexpr char kRfMagic[8] = {'U', 'S', 'D', 'P', 'C', 'R', 'F', '1'};
inline constexpr std::uint16_t kRfVersion = 1;

namespace detail {

inline void put_bytes(std::string& buf, const void* p, std::size_t n) {
  buf.append(static_cast<const char*>(p), n);
}

template <typename T>
void put_le(std::string& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  put_bytes(buf, bytes, sizeof(T));
}

class ByteReader {
 public:
  ByteReader(const char* data, std::size_t size) : data_(data), size_(size) {}

  template <typename T>
  T get_le() {
    if (pos_ + sizeof(T) > size_)
      throw DataError("RF container: truncated payload");
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, data_ + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
        std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }

  void get_raw(void* dst, std::size_t n) {
    if (pos_ + n > size_) throw DataError("RF container: truncated payload");
    std::memcpy(dst, data_ + pos_, n);
    pos_ += n;
  }

  std::size_t remaining() const { return size_ - pos_; }

 private:
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace detail

inline void write_rf(const RFDataSet& dataset, const std::string& path) {
  dataset.validate();
  std::string buf;
  const std::size_t payload =
      dataset.n_transmits() * static_cast<std::size_t>(dataset.n_elements) *
      dataset.n_samples() * sizeof(float);
  buf.reserve(64 + dataset.n_transmits() * 8 + payload);

  detail::put_bytes(buf, kRfMagic, sizeof(kRfMagic));
  detail::put_le<std::uint16_t>(buf, kRfVersion);
  detail::put_le<std::uint32_t>(
      buf, static_cast<std::uint32_t>(dataset.n_transmits()));
  detail::put_le<std::uint32_t>(
      buf, static_cast<std::uint32_t>(dataset.n_elements));
  detail::put_le<std::uint32_t>(
      buf, static_cast<std::uint32_t>(dataset.n_samples()));
  detail::put_le<double>(buf, dataset.sampling_frequency);
  detail::put_le<double>(buf, dataset.center_frequency);
  detail::put_le<double>(buf, dataset.pitch);
  detail::put_le<double>(buf, dataset.c0);
  detail::put_le<double>(buf, dataset.time_origin);
  for (double a : dataset.angles) detail::put_le<double>(buf, a);
  for (const auto& frame : dataset.frames)
    for (std::size_t k = 0; k < frame.size(); ++k)
      detail::put_le<float>(buf, frame.data()[k]);

  detail::write_file(path, buf);
}

inline RFDataSet read_rf(const std::string& path) {
  const std::string content = detail::read_file(path);
  detail::ByteReader reader(content.data(), content.size());

  char magic[8];
  reader.get_raw(magic, sizeof(magic));
  if (std::memcmp(magic, kRfMagic, sizeof(magic)) != 0)
    throw DataError("RF container: bad magic");
  const auto version = reader.get_le<std::uint16_t>();
  if (version != kRfVersion)
    throw DataError("RF container: unsupported version " +
                    std::to_string(version));

  const auto n_transmits = reader.get_le<std::uint32_t>();
  const auto n_elements = reader.get_le<std::uint32_t>();
  const auto n_samples = reader.get_le<std::uint32_t>();
  if (n_transmits == 0 || n_elements < 2 || n_samples == 0)
    throw DataError("RF container: dimension mismatch");

  RFDataSet ds;
  ds.n_elements = static_cast<int>(n_elements);
  ds.sampling_frequency = reader.get_le<double>();
  ds.center_frequency = reader.get_le<double>();
  ds.pitch = reader.get_le<double>();
  ds.c0 = reader.get_le<double>();
  ds.time_origin = reader.get_le<double>();
  ds.angles.resize(n_transmits);
  for (auto& a : ds.angles) a = reader.get_le<double>();

  const std::size_t per_frame =
      static_cast<std::size_t>(n_elements) * n_samples;
  const std::size_t expected_payload =
      static_cast<std::size_t>(n_transmits) * per_frame * sizeof(float);
  if (reader.remaining() < expected_payload)
    throw DataError("RF container: truncated payload");
  if (reader.remaining() > expected_payload)
    throw DataError("RF container: payload size mismatch");

  ds.frames.reserve(n_transmits);
  for (std::uint32_t t = 0; t < n_transmits; ++t) {
    Grid2D<float> frame(n_elements, n_samples);
    if constexpr (std::endian::native == std::endian::little) {
      reader.get_raw(frame.data(), per_frame * sizeof(float));
    } else {
      for (std::size_t k = 0; k < per_frame; ++k)
        frame.data()[k] = reader.get_le<float>();
    }
    ds.frames.push_back(std::move(frame));
  }

  try {
    ds.validate();
  } catch (const ValidationError& e) {
    throw DataError(std::string("RF container: invalid header: ") + e.what());
  }
  return ds;
}

enum class ImageFormat { kPgm16, kCsv };

namespace detail {

inline void check_finite(const RealImage& image) {
  for (std::size_t i = 0; i < image.values.rows(); ++i)
    for (std::size_t j = 0; j < image.values.cols(); ++j)
      if (!std::isfinite(image.values(i, j)))
        throw ValidationError("export_image: non-finite value at (" +
                              std::to_string(i) + ", " + std::to_string(j) +
                              ")");
}

inline std::string format_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/**
 * Writes a real image either as 16-bit binary PGM (linear [min, max] ->
 * [0, 65535] scaling, recorded in a "<path>.scale.txt" sidecar) or as CSV
 * with x/z axes (mm) and full-precision values.
 */
inline void export_image(const RealImage& image, const std::string& path,
                         ImageFormat format) {
  image.grid.validate();
  detail::check_finite(image);
  const std::size_t nx = image.values.rows();
  const std::size_t nz = image.values.cols();

  if (format == ImageFormat::kPgm16) {
    double lo = image.values.data()[0], hi = image.values.data()[0];
    for (std::size_t k = 0; k < image.values.size(); ++k) {
      lo = std::min(lo, image.values.data()[k]);
      hi = std::max(hi, image.values.data()[k]);
    }
    std::string buf;
    buf += "P5\n" + std::to_string(nx) + " " + std::to_string(nz) + "\n65535\n";
    const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;
    for (std::size_t j = 0; j < nz; ++j)       // raster rows = depth
      for (std::size_t i = 0; i < nx; ++i) {   // raster cols = lateral
        const auto q = static_cast<std::uint16_t>(
            std::lround((image.values(i, j) - lo) * scale));
        buf += static_cast<char>(q >> 8);  // PGM samples are big-endian
        buf += static_cast<char>(q & 0xff);
      }
    detail::write_file(path, buf);
    std::string sidecar = "min " + detail::format_full(lo) + "\nmax " +
                          detail::format_full(hi) + "\n";
    detail::write_file(path + ".scale.txt", sidecar);
    return;
  }

  std::string buf = "x_mm\\z_mm";
  for (std::size_t j = 0; j < nz; ++j)
    buf += "," + detail::format_full(image.grid.z(j) * 1e3);
  buf += "\n";
  for (std::size_t i = 0; i < nx; ++i) {
    buf += detail::format_full(image.grid.x(i) * 1e3);
    for (std::size_t j = 0; j < nz; ++j)
      buf += "," + detail::format_full(image.values(i, j));
    buf += "\n";
  }
  detail::write_file(path, buf);
}

/// Reads back an image written by export_image(..., kCsv).
inline RealImage import_image_csv(const std::string& path) {
  const std::string content = detail::read_file(path);
  std::vector<std::vector<double>> rows;
  std::vector<double> z_axis;
  std::vector<double> x_axis;

  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    const std::string line = content.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (header) {
      for (std::size_t k = 1; k < cells.size(); ++k)
        z_axis.push_back(std::stod(cells[k]) * 1e-3);
      header = false;
      continue;
    }
    if (cells.size() != z_axis.size() + 1)
      throw DataError("image CSV: ragged row in " + path);
    x_axis.push_back(std::stod(cells[0]) * 1e-3);
    std::vector<double> row;
    row.reserve(z_axis.size());
    for (std::size_t k = 1; k < cells.size(); ++k)
      row.push_back(std::stod(cells[k]));
    rows.push_back(std::move(row));
  }
  if (rows.empty() || z_axis.size() < 2 || x_axis.size() < 2)
    throw DataError("image CSV: too small to reconstruct a grid: " + path);

  RealImage out;
  out.grid.pixel_pitch = x_axis[1] - x_axis[0];
  out.grid.x_min = x_axis.front();
  out.grid.x_max = x_axis.back();
  out.grid.z_min = z_axis.front();
  out.grid.z_max = z_axis.back();
  out.values = Grid2D<double>(x_axis.size(), z_axis.size());
  for (std::size_t i = 0; i < x_axis.size(); ++i)
    for (std::size_t j = 0; j < z_axis.size(); ++j)
      out.values(i, j) = rows[i][j];
  return out;
}

/// Every CLI run records its inputs and parameters next to the outputs.
inline void write_manifest(const std::string& output_path,
                           const nlohmann::json& manifest) {
  detail::write_file(output_path + ".manifest.json", manifest.dump(2) + "\n");
}

}  // namespace usdpc

#endif /* USDPC_IO_HPP */
