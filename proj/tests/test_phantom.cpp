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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "usdpc/phantom.hpp"

using namespace usdpc;

TEST_CASE("generate_scatterers count, determinism, distribution") {
  const Region region{-10e-3, 10e-3, 10e-3, 50e-3};  // 20 x 40 mm

  SECTION("count equals density times area") {
    const auto sc = generate_scatterers(region, 2.0 * 1e6, 42);  // 2 / mm^2
    CHECK(sc.size() == 1600);
  }
  SECTION("identical seed, identical list") {
    const auto a = generate_scatterers(region, 1e6, 7);
    const auto b = generate_scatterers(region, 1e6, 7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].x == b[i].x);
      CHECK(a[i].z == b[i].z);
      CHECK(a[i].reflectivity == b[i].reflectivity);
    }
  }
  SECTION("different seeds differ") {
    const auto a = generate_scatterers(region, 1e6, 7);
    const auto b = generate_scatterers(region, 1e6, 8);
    CHECK(a[0].x != b[0].x);
  }
  SECTION("x positions are uniform (chi-squared, p > 0.01)") {
    const auto sc = generate_scatterers(region, 125e6, 99);  // 1e5 points
    REQUIRE(sc.size() == 100000);
    const int bins = 20;
    std::vector<double> counts(bins, 0.0);
    for (const auto& s : sc) {
      int b = static_cast<int>((s.x - region.x_min) / region.width() * bins);
      if (b == bins) b = bins - 1;
      counts[static_cast<std::size_t>(b)] += 1.0;
    }
    const double expected = 100000.0 / bins;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // chi-squared 99th percentile with 19 degrees of freedom
    CHECK(chi2 < 36.19);
  }
  SECTION("reflectivity is zero-mean") {
    const auto sc = generate_scatterers(region, 125e6, 99);
    double mean = 0.0;
    for (const auto& s : sc) mean += s.reflectivity;
    mean /= static_cast<double>(sc.size());
    CHECK(std::abs(mean) < 0.02);  // ~6 sigma for n = 1e5, unit variance
  }
  SECTION("bad inputs rejected") {
    CHECK_THROWS_AS(generate_scatterers(region, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(
        generate_scatterers({1e-3, 1e-3, 1e-3, 5e-3}, 1e6, 1),
        ValidationError);
  }
}

TEST_CASE("chord_length against closed-form geometry") {
  const DiskInclusion disk{0.0, 30e-3, 5e-3, 1540.0};

  SECTION("diametric segment yields 2r") {
    CHECK_THAT(chord_length(disk, 0.0, 0.0, 0.0, 60e-3),
               Catch::Matchers::WithinRel(10e-3, 1e-12));
  }
  SECTION("tangent segment yields 0") {
    CHECK(chord_length(disk, 5e-3, 0.0, 5e-3, 60e-3) == 0.0);
  }
  SECTION("3 mm lateral offset gives the 8 mm Pythagoras chord") {
    CHECK_THAT(chord_length(disk, 3e-3, 0.0, 3e-3, 60e-3),
               Catch::Matchers::WithinRel(8e-3, 1e-12));
  }
  SECTION("segment ending inside the disk is clipped") {
    CHECK_THAT(chord_length(disk, 0.0, 0.0, 0.0, 30e-3),
               Catch::Matchers::WithinRel(5e-3, 1e-12));
  }
  SECTION("disjoint segment yields 0") {
    CHECK(chord_length(disk, 20e-3, 0.0, 20e-3, 60e-3) == 0.0);
  }
  SECTION("degenerate segment rejected") {
    CHECK_THROWS_AS(chord_length(disk, 1e-3, 1e-3, 1e-3, 1e-3),
                    ValidationError);
  }
}

TEST_CASE("ray_excess_delay through inclusions") {
  Phantom phantom;
  phantom.medium.sos = 1540.0;
  phantom.region = {-20e-3, 20e-3, 1e-3, 60e-3};

  SECTION("no inclusions, zero delay") {
    CHECK(ray_excess_delay(phantom, 0.0, 0.0, 0.0, 50e-3) == 0.0);
  }
  SECTION("10 mm chord through a 1572 m/s disk: -132.2 ns") {
    phantom.inclusions = {{0.0, 30e-3, 5e-3, 1572.0}};
    const double expected = 10e-3 * (1.0 / 1572.0 - 1.0 / 1540.0);
    const double got = ray_excess_delay(phantom, 0.0, 0.0, 0.0, 60e-3);
    CHECK_THAT(got, Catch::Matchers::WithinRel(expected, 1e-12));
    CHECK_THAT(got * 1e9, Catch::Matchers::WithinAbs(-132.2, 0.05));
  }
  SECTION("10 mm chord through a 1530 m/s disk: +42.4 ns") {
    phantom.inclusions = {{0.0, 30e-3, 5e-3, 1530.0}};
    const double got = ray_excess_delay(phantom, 0.0, 0.0, 0.0, 60e-3);
    CHECK_THAT(got * 1e9, Catch::Matchers::WithinAbs(42.4, 0.05));
  }
  SECTION("additive over disjoint inclusions, symmetric under reversal") {
    phantom.inclusions = {{-5e-3, 15e-3, 3e-3, 1572.0},
                          {5e-3, 40e-3, 4e-3, 1500.0}};
    const double d1 = ray_excess_delay(phantom, -8e-3, 1e-3, 8e-3, 55e-3);
    const double d2 = ray_excess_delay(phantom, 8e-3, 55e-3, -8e-3, 1e-3);
    CHECK_THAT(d1, Catch::Matchers::WithinAbs(d2, 1e-18));

    Phantom only_a = phantom, only_b = phantom;
    only_a.inclusions = {phantom.inclusions[0]};
    only_b.inclusions = {phantom.inclusions[1]};
    const double da = ray_excess_delay(only_a, -8e-3, 1e-3, 8e-3, 55e-3);
    const double db = ray_excess_delay(only_b, -8e-3, 1e-3, 8e-3, 55e-3);
    CHECK_THAT(d1, Catch::Matchers::WithinAbs(da + db, 1e-18));
  }
  SECTION("sign follows c0 - sos for a nonzero chord") {
    phantom.inclusions = {{0.0, 30e-3, 5e-3, 1572.0}};
    CHECK(ray_excess_delay(phantom, 0.0, 0.0, 0.0, 60e-3) < 0.0);
    phantom.inclusions = {{0.0, 30e-3, 5e-3, 1530.0}};
    CHECK(ray_excess_delay(phantom, 0.0, 0.0, 0.0, 60e-3) > 0.0);
  }
}

TEST_CASE("standard phantom presets") {
  const auto presets = build_standard_phantoms();

  SECTION("sphere049 type IV carries one 1572 m/s disk") {
    const Phantom& p = presets.at("sphere049:IV");
    REQUIRE(p.inclusions.size() == 1);
    CHECK(p.inclusions[0].sos == 1572.0);
    CHECK_THAT(p.inclusions[0].radius, Catch::Matchers::WithinRel(5e-3, 1e-12));
    // top of the inclusion 15 mm below the surface, center at 20 mm
    CHECK_THAT(p.inclusions[0].z, Catch::Matchers::WithinRel(20e-3, 1e-12));
  }
  SECTION("all four type sound speeds") {
    CHECK(presets.at("sphere049:I").inclusions[0].sos == 1530.0);
    CHECK(presets.at("sphere049:II").inclusions[0].sos == 1533.0);
    CHECK(presets.at("sphere049:III").inclusions[0].sos == 1552.0);
    CHECK(presets.at("sphere049:IV").inclusions[0].sos == 1572.0);
  }
  SECTION("background sound speed is 1540 m/s") {
    for (const auto& [name, phantom] : presets)
      CHECK(phantom.medium.sos == 1540.0);
  }
  SECTION("cylinders049A shallow diameters increase, deep ones reverse") {
    const Phantom& p = presets.at("cylinders049A");
    REQUIRE(p.inclusions.size() == 8);
    const std::vector<double> expected = {2.5e-3, 4.1e-3, 6.5e-3, 10.4e-3};
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK_THAT(2.0 * p.inclusions[i].radius,
                 Catch::Matchers::WithinRel(expected[i], 1e-12));
      CHECK_THAT(2.0 * p.inclusions[i + 4].radius,
                 Catch::Matchers::WithinRel(expected[3 - i], 1e-12));
      // tops at 30 mm and 60 mm below the surface
      CHECK_THAT(p.inclusions[i].z - p.inclusions[i].radius,
                 Catch::Matchers::WithinRel(30e-3, 1e-12));
      CHECK_THAT(p.inclusions[i + 4].z - p.inclusions[i + 4].radius,
                 Catch::Matchers::WithinRel(60e-3, 1e-12));
    }
  }
  SECTION("sphere types share one scatterer realization") {
    const auto& a = presets.at("sphere049:I").scatterers;
    const auto& b = presets.at("sphere049:IV").scatterers;
    REQUIRE(a.size() == b.size());
    CHECK(a[100].x == b[100].x);
    CHECK(a[100].reflectivity == b[100].reflectivity);
  }
  SECTION("speckle density meets the fully developed threshold") {
    const Phantom& p = presets.at("homogeneous");
    CHECK(p.scatterer_density() >= standard_speckle_density() * 0.999);
  }
  SECTION("presets validate; unknown names rejected") {
    for (const auto& [name, phantom] : presets)
      CHECK_NOTHROW(phantom.validate());
    CHECK_THROWS_AS(standard_phantom("sphere049:V"), ValidationError);
  }
}

TEST_CASE("phantom validation rejects inconsistent geometry") {
  Phantom p;
  p.region = {-10e-3, 10e-3, 1e-3, 50e-3};

  SECTION("overlapping inclusions") {
    p.inclusions = {{0.0, 20e-3, 5e-3, 1540.0}, {3e-3, 20e-3, 5e-3, 1500.0}};
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }
  SECTION("inclusion outside the region") {
    p.inclusions = {{9e-3, 20e-3, 5e-3, 1500.0}};
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }
  SECTION("scatterer above the array plane") {
    p.scatterers = {{0.0, 0.0, 1.0}};
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }
}
