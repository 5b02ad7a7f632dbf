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

#include <filesystem>
#include <fstream>
#include <string>

#include "usdpc/cli.hpp"

using namespace usdpc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("usdpc_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

const char* kConfig = R"({
  "seed": 11,
  "probe": {"n_elements": 48, "pitch_mm": 0.23,
            "center_frequency_mhz": 5.3, "sampling_frequency_mhz": 21.2},
  "pulse": {"fractional_bandwidth": 0.6},
  "phantom": {"region_mm": {"x_min": -5, "x_max": 5, "z_min": 2, "z_max": 18},
              "density_per_mm2": 3.0, "background_sos": 1540,
              "inclusions": []},
  "angles": {"count": 3, "min_rad": -0.05, "max_rad": 0.05}
})";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out);
  out << content;
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(cli_main({"--definitely-not-a-flag"}) == 1);
  CHECK(cli_main({}) == 1);
  CHECK(cli_main({"simulate"}) == 1);         // missing required options
  CHECK(cli_main({"frobnicate", "--x"}) == 1);
  CHECK(cli_main({"--help"}) == 0);
}

TEST_CASE("simulate is deterministic and downstream commands run") {
  TempDir tmp;
  const std::string cfg = tmp.file("run.json");
  spit(cfg, kConfig);

  const std::string rf1 = tmp.file("a.rf");
  const std::string rf2 = tmp.file("b.rf");
  REQUIRE(cli_main({"simulate", "--config", cfg, "--out", rf1}) == 0);
  REQUIRE(cli_main({"simulate", "--config", cfg, "--out", rf2}) == 0);
  CHECK(slurp(rf1) == slurp(rf2));
  CHECK(fs::exists(rf1 + ".manifest.json"));

  SECTION("a different seed changes the bytes") {
    const std::string rf3 = tmp.file("c.rf");
    REQUIRE(cli_main({"--seed", "999", "simulate", "--config", cfg, "--out",
                      rf3}) == 0);
    CHECK(slurp(rf1) != slurp(rf3));
  }
  SECTION("bmode produces an image and a manifest") {
    const std::string img = tmp.file("b.pgm");
    REQUIRE(cli_main({"bmode", "--rf", rf1, "--na", "0.4", "--grid",
                      "-3,3,6,12", "--out", img}) == 0);
    CHECK(fs::exists(img));
    CHECK(fs::exists(img + ".scale.txt"));
    CHECK(fs::exists(img + ".manifest.json"));
  }
  SECTION("dpc runs deterministically and records its pairs") {
    const std::string i1 = tmp.file("d1.csv");
    const std::string i2 = tmp.file("d2.csv");
    const std::vector<std::string> base = {
        "dpc",  "--rf",  rf1,   "--T",    "50",       "--m", "1",
        "--na", "0.5",   "--grid", "-3,3,6,12"};
    auto args1 = base;
    args1.insert(args1.end(), {"--out", i1});
    auto args2 = base;
    args2.insert(args2.end(), {"--out", i2});
    REQUIRE(cli_main(args1) == 0);
    REQUIRE(cli_main(args2) == 0);
    CHECK(slurp(i1) == slurp(i2));
    const std::string manifest = slurp(i1 + ".manifest.json");
    CHECK(manifest.find("\"n_pairs\": 2") != std::string::npos);
  }
  SECTION("memory writes the per-window report") {
    const std::string rep = tmp.file("report.csv");
    REQUIRE(cli_main({"memory", "--rf", rf1, "--out", rep, "--window-x", "2",
                      "--window-t", "2"}) == 0);
    const std::string content = slurp(rep);
    CHECK(content.find("theta_rad") != std::string::npos);
    CHECK(fs::exists(rep + ".manifest.json"));
  }
}

TEST_CASE("data errors exit with code 2") {
  TempDir tmp;
  SECTION("missing RF file") {
    CHECK(cli_main({"bmode", "--rf", tmp.file("nope.rf"), "--na", "0.4",
                    "--out", tmp.file("x.pgm")}) == 2);
  }
  SECTION("config with an unknown key") {
    const std::string cfg = tmp.file("bad.json");
    spit(cfg, R"({"seed": 1, "probee": {}})");
    CHECK(cli_main({"simulate", "--config", cfg, "--out",
                    tmp.file("x.rf")}) == 2);
  }
  SECTION("config that is not JSON") {
    const std::string cfg = tmp.file("bad2.json");
    spit(cfg, "not json at all");
    CHECK(cli_main({"simulate", "--config", cfg, "--out",
                    tmp.file("x.rf")}) == 2);
  }
}

TEST_CASE("soscal sweeps the standard types end to end") {
  // reduced sweep: three types, five angles, one pre-delay
  TempDir tmp;
  const std::string cfg = tmp.file("cal.json");
  spit(cfg, R"({
    "seed": 3,
    "probe": {"n_elements": 128, "pitch_mm": 0.23,
              "center_frequency_mhz": 5.3, "sampling_frequency_mhz": 21.2},
    "angles": {"count": 5, "min_rad": -0.1, "max_rad": 0.1},
    "dpc": {"T_periods": [800], "m": 1, "na": 0.5,
            "grid_mm": {"x_min": -9, "x_max": 9, "z_min": 16, "z_max": 24,
                        "pixel_pitch": 0.1},
            "gaussian_sigma_mm": 0.5},
    "soscal": {"types": ["I", "III", "IV"], "band_halfwidth_mm": 1.0,
               "detrend": true}
  })");
  const std::string out = tmp.file("table.csv");
  REQUIRE(cli_main({"soscal", "--config", cfg, "--out", out}) == 0);

  const std::string csv = slurp(out);
  CHECK(csv.find("type,sos_m_per_s,delta_sos_m_per_s,excursion_rad") !=
        std::string::npos);
  CHECK(csv.find("\nI,1530,-10,") != std::string::npos);
  CHECK(csv.find("\nIII,1552,12,") != std::string::npos);
  CHECK(csv.find("\nIV,1572,32,") != std::string::npos);

  const std::string manifest = slurp(out + ".manifest.json");
  const auto m = nlohmann::json::parse(manifest);
  CHECK(m.contains("slope_rad_per_m_per_s"));
  CHECK(m.contains("r_squared"));

  // fast and slow inclusions flip the excursion sign
  double exc_i = 0.0, exc_iv = 0.0;
  for (const std::string& line : {std::string("\nI,"), std::string("\nIV,")}) {
    const std::size_t pos = csv.find(line);
    REQUIRE(pos != std::string::npos);
    const std::size_t last_comma = csv.find_last_of(
        ',', csv.find('\n', pos + 1));
    const double v = std::stod(csv.substr(last_comma + 1));
    (line == "\nI," ? exc_i : exc_iv) = v;
  }
  CHECK(exc_i * exc_iv < 0.0);
}

TEST_CASE("validation failures exit with code 3") {
  TempDir tmp;
  const std::string cfg = tmp.file("run.json");
  spit(cfg, kConfig);  // no dpc.grid_mm section
  CHECK(cli_main({"soscal", "--config", cfg, "--out",
                  tmp.file("t.csv")}) == 3);

  SECTION("bad image extension is a usage error instead") {
    const std::string rf = tmp.file("a.rf");
    REQUIRE(cli_main({"simulate", "--config", cfg, "--out", rf}) == 0);
    CHECK(cli_main({"bmode", "--rf", rf, "--na", "0.4", "--out",
                    tmp.file("img.bmp")}) == 1);
  }
}
