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

#ifndef USDPC_PHANTOM_HPP
#define USDPC_PHANTOM_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "usdpc/core.hpp"
#include "usdpc/errors.hpp"
#include "usdpc/rng.hpp"

namespace usdpc {

/// Axis-aligned rectangular phantom extent in the imaging plane. z grows
/// away from the array face, which sits at z = 0.
struct Region {
  double x_min = 0.0, x_max = 0.0;  // [m]
  double z_min = 0.0, z_max = 0.0;  // [m]

  double width() const { return x_max - x_min; }
  double depth() const { return z_max - z_min; }
  double area() const { return width() * depth(); }

  void validate() const {
    if (!(x_max > x_min) || !(z_max > z_min))
      throw ValidationError("Region: empty or inverted extents");
    if (z_min < 0.0) throw ValidationError("Region: z_min must be >= 0");
  }

  bool contains(double x, double z) const {
    return x >= x_min && x <= x_max && z >= z_min && z <= z_max;
  }
};

/// Sub-resolution point scatterer.
struct Scatterer {
  double x = 0.0;            // [m]
  double z = 0.0;            // [m], > 0 (below the array face)
  double reflectivity = 1.0; // dimensionless
};

/// Disk-shaped region of deviating sound speed. Scattering and attenuation
/// inside match the background.
struct DiskInclusion {
  double x = 0.0;      // [m] center
  double z = 0.0;      // [m] center
  double radius = 0.0; // [m]
  double sos = 0.0;    // [m/s]

  void validate() const {
    if (!(radius > 0.0))
      throw ValidationError("DiskInclusion: radius must be > 0");
    if (!(sos > 0.0)) throw ValidationError("DiskInclusion: sos must be > 0");
  }
};

struct Phantom {
  Medium medium;
  Region region;
  std::vector<Scatterer> scatterers;
  std::vector<DiskInclusion> inclusions;
  std::uint64_t seed = 0;

  void validate() const {
    medium.validate();
    region.validate();
    for (const auto& s : scatterers)
      if (!(s.z > 0.0))
        throw ValidationError("Phantom: scatterer at or above array plane");
    for (const auto& inc : inclusions) {
      inc.validate();
      if (inc.x - inc.radius < region.x_min ||
          inc.x + inc.radius > region.x_max ||
          inc.z - inc.radius < region.z_min ||
          inc.z + inc.radius > region.z_max)
        throw ValidationError("Phantom: inclusion extends outside region");
    }
    for (std::size_t i = 0; i < inclusions.size(); ++i)
      for (std::size_t j = i + 1; j < inclusions.size(); ++j) {
        const double dx = inclusions[i].x - inclusions[j].x;
        const double dz = inclusions[i].z - inclusions[j].z;
        const double d = std::hypot(dx, dz);
        if (d < inclusions[i].radius + inclusions[j].radius)
          throw ValidationError("Phantom: overlapping inclusions");
      }
  }

  /// Scatterers per area [1/m^2].
  double scatterer_density() const {
    return static_cast<double>(scatterers.size()) / region.area();
  }
};

/**
 * Uniformly distributed scatterers with zero-mean unit-variance Gaussian
 * reflectivities. count = round(density * area); identical seeds give
 * identical lists.
 */
inline std::vector<Scatterer> generate_scatterers(const Region& region,
                                                  double density_per_m2,
                                                  std::uint64_t seed) {
  region.validate();
  if (!(density_per_m2 > 0.0))
    throw ValidationError("generate_scatterers: density must be > 0");
  const auto count =
      static_cast<std::size_t>(std::llround(density_per_m2 * region.area()));
  Rng rng(mix_seed(seed, 0x5ca77e7));
  std::vector<Scatterer> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Scatterer s;
    s.x = rng.uniform(region.x_min, region.x_max);
    s.z = rng.uniform(region.z_min, region.z_max);
    s.reflectivity = rng.normal();
    out.push_back(s);
  }
  return out;
}

/// Length of segment [p0, p1] inside the disk; 0 when disjoint or tangent.
inline double chord_length(const DiskInclusion& disk, double x0, double z0,
                           double x1, double z1) {
  const double dx = x1 - x0;
  const double dz = z1 - z0;
  const double len2 = dx * dx + dz * dz;
  if (!(len2 > 0.0))
    throw ValidationError("chord_length: degenerate segment");
  // Solve |p0 + t d - c|^2 = r^2 for t in [0, 1].
  const double fx = x0 - disk.x;
  const double fz = z0 - disk.z;
  const double b = fx * dx + fz * dz;
  const double c = fx * fx + fz * fz - disk.radius * disk.radius;
  const double disc = b * b - len2 * c;
  if (disc <= 0.0) return 0.0;
  const double sq = std::sqrt(disc);
  double t0 = (-b - sq) / len2;
  double t1 = (-b + sq) / len2;
  t0 = std::max(t0, 0.0);
  t1 = std::min(t1, 1.0);
  if (t1 <= t0) return 0.0;
  return (t1 - t0) * std::sqrt(len2);
}

/**
 * Straight-ray excess propagation delay of segment [p0, p1] through the
 * phantom's inclusions: sum of chord * (1/sos_inc - 1/c0). Negative for
 * inclusions faster than the background.
 */
inline double ray_excess_delay(const Phantom& phantom, double x0, double z0,
                               double x1, double z1) {
  double delay = 0.0;
  const double inv_c0 = 1.0 / phantom.medium.sos;
  for (const auto& inc : phantom.inclusions) {
    const double chord = chord_length(inc, x0, z0, x1, z1);
    if (chord > 0.0) delay += chord * (1.0 / inc.sos - inv_c0);
  }
  return delay;
}

/// Reference speckle density used by the standard phantoms: five scatterers
/// per squared wavelength at 5.3 MHz in 1540 m/s background.
inline double standard_speckle_density() {
  const double lambda = 1540.0 / 5.3e6;
  return 5.0 / (lambda * lambda);
}

namespace detail {

inline Phantom make_preset(const Region& region,
                           std::vector<DiskInclusion> inclusions,
                           std::uint64_t seed) {
  Phantom p;
  p.medium.sos = 1540.0;
  p.region = region;
  p.seed = seed;
  p.scatterers = generate_scatterers(region, standard_speckle_density(), seed);
  p.inclusions = std::move(inclusions);
  p.validate();
  return p;
}

}  // namespace detail

/**
 * Named phantom presets.
 *
 * "sphere049:I".."sphere049:IV": one 10 mm diameter disk whose top sits
 * 15 mm below the surface (center depth 20 mm), sound speeds 1530 / 1533 /
 * 1552 / 1572 m/s in a 1540 m/s background. All four share one scatterer
 * realization.
 *
 * "cylinders049A": disks of diameters 2.5, 4.1, 6.5, 10.4 mm with tops at
 * 30 mm depth, left to right; the same diameters in reversed order with
 * tops at 60 mm depth. All 1572 m/s.
 *
 * "homogeneous": the sphere049 geometry without any inclusion.
 */
inline std::map<std::string, Phantom> build_standard_phantoms() {
  std::map<std::string, Phantom> out;

  const Region sphere_region{-12e-3, 12e-3, 4e-3, 72e-3};
  const std::uint64_t sphere_seed = 490349;
  const double sphere_r = 5e-3;
  const double sphere_cz = 15e-3 + sphere_r;  // top 15 mm below surface
  const std::vector<std::pair<std::string, double>> types = {
      {"I", 1530.0}, {"II", 1533.0}, {"III", 1552.0}, {"IV", 1572.0}};
  for (const auto& [name, sos] : types) {
    out.emplace("sphere049:" + name,
                detail::make_preset(
                    sphere_region, {{0.0, sphere_cz, sphere_r, sos}},
                    sphere_seed));
  }
  out.emplace("homogeneous",
              detail::make_preset(sphere_region, {}, sphere_seed));

  const Region cyl_region{-22e-3, 22e-3, 4e-3, 75e-3};
  const std::vector<double> diam = {2.5e-3, 4.1e-3, 6.5e-3, 10.4e-3};
  const std::vector<double> cx = {-16e-3, -7e-3, 2e-3, 13e-3};
  std::vector<DiskInclusion> cyl;
  for (std::size_t i = 0; i < diam.size(); ++i)
    cyl.push_back({cx[i], 30e-3 + 0.5 * diam[i], 0.5 * diam[i], 1572.0});
  for (std::size_t i = 0; i < diam.size(); ++i) {
    const double d = diam[diam.size() - 1 - i];
    cyl.push_back({cx[i], 60e-3 + 0.5 * d, 0.5 * d, 1572.0});
  }
  out.emplace("cylinders049A",
              detail::make_preset(cyl_region, std::move(cyl), 49049));
  return out;
}

/// Look up one preset by name; throws ValidationError for unknown names.
inline Phantom standard_phantom(const std::string& name) {
  auto all = build_standard_phantoms();
  auto it = all.find(name);
  if (it == all.end())
    throw ValidationError("unknown phantom preset: " + name);
  return std::move(it->second);
}

}  // namespace usdpc

#endif /* USDPC_PHANTOM_HPP */
