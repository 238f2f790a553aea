/*
 * Copyright 2026 The xrbias Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <fstream>
#include <string>

#include <doctest.h>

#include "test_support.hpp"
#include "xrbias/image.hpp"
#include "xrbias/rng.hpp"

using namespace xrbias;
using testsupport::TempDir;

namespace {

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_SUITE("imagekit") {

TEST_CASE("load_pgm scales 8-bit payloads by 255") {
    TempDir dir("xrbias_pgm8");
    write_bytes(dir.path / "a.pgm", std::string("P5\n2 2\n255\n") + '\x00' + '\xff' + '\x80' + '\x40');
    const GrayImage img = load_pgm(dir.path / "a.pgm");
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.data[0] == 0.0);
    CHECK(img.data[1] == 1.0);
    CHECK(img.data[2] == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
    CHECK(img.data[3] == doctest::Approx(64.0 / 255.0).epsilon(1e-15));
}

TEST_CASE("load_pgm single pixel and 16-bit big-endian") {
    TempDir dir("xrbias_pgm16");
    write_bytes(dir.path / "one.pgm", std::string("P5\n1 1\n255\n") + '\xff');
    CHECK(load_pgm(dir.path / "one.pgm").data[0] == 1.0);

    write_bytes(dir.path / "wide.pgm", std::string("P5\n1 1\n65535\n") + '\x80' + '\x00');
    CHECK(load_pgm(dir.path / "wide.pgm").data[0] ==
          doctest::Approx(32768.0 / 65535.0).epsilon(1e-15));
}

TEST_CASE("load_pgm skips header comments") {
    TempDir dir("xrbias_pgm_comment");
    write_bytes(dir.path / "c.pgm",
                std::string("P5\n# made by a scanner\n2 1\n# another note\n255\n") + '\x00' +
                    '\xff');
    const GrayImage img = load_pgm(dir.path / "c.pgm");
    CHECK(img.width == 2);
    CHECK(img.data[0] == 0.0);
    CHECK(img.data[1] == 1.0);
}

TEST_CASE("load_pgm rejects malformed input with distinct errors") {
    TempDir dir("xrbias_pgm_bad");
    write_bytes(dir.path / "ascii.pgm", "P2\n1 1\n255\n7\n");
    CHECK_THROWS_WITH_AS(load_pgm(dir.path / "ascii.pgm"),
                         doctest::Contains("unsupported magic"), PgmError);

    write_bytes(dir.path / "short.pgm", std::string("P5\n2 2\n255\n") + '\x01' + '\x02');
    CHECK_THROWS_WITH_AS(load_pgm(dir.path / "short.pgm"), doctest::Contains("truncated"),
                         PgmError);

    write_bytes(dir.path / "maxval.pgm", std::string("P5\n1 1\n1023\n") + '\x01' + '\x02');
    CHECK_THROWS_WITH_AS(load_pgm(dir.path / "maxval.pgm"),
                         doctest::Contains("unsupported maxval"), PgmError);

    write_bytes(dir.path / "header.pgm", "P5\ntwo 2\n255\n");
    CHECK_THROWS_WITH_AS(load_pgm(dir.path / "header.pgm"), doctest::Contains("malformed header"),
                         PgmError);

    CHECK_THROWS_AS(load_pgm(dir.path / "missing.pgm"), PgmError);
}

TEST_CASE("save_pgm quantization rounds halves up") {
    TempDir dir("xrbias_pgm_round");
    GrayImage img(2, 1);
    img.data = {1.0, 0.5};
    save_pgm(img, dir.path / "q.pgm");
    std::ifstream in(dir.path / "q.pgm", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // header "P5\n2 1\n255\n" = 11 bytes, then the payload
    REQUIRE(bytes.size() == 13);
    CHECK(static_cast<unsigned char>(bytes[11]) == 255);
    CHECK(static_cast<unsigned char>(bytes[12]) == 128);  // 127.5 rounds up
}

TEST_CASE("pgm round-trip error is bounded by the quantization half-step") {
    TempDir dir("xrbias_pgm_rt");
    // every 8-bit level reproduces exactly
    GrayImage levels(16, 16);
    for (int i = 0; i < 256; ++i) levels.data[i] = i / 255.0;
    save_pgm(levels, dir.path / "levels.pgm");
    const GrayImage levels_rt = load_pgm(dir.path / "levels.pgm");
    for (int i = 0; i < 256; ++i) CHECK(levels_rt.data[i] == levels.data[i]);

    // random image: within half a step, and identical to the in-memory quantizer
    SplitMix64 rng(5);
    GrayImage noise(16, 16);
    for (double& v : noise.data) v = rng.next_double();
    save_pgm(noise, dir.path / "noise.pgm");
    const GrayImage noise_rt = load_pgm(dir.path / "noise.pgm");
    const GrayImage noise_q = quantize8(noise);
    for (std::size_t i = 0; i < noise.size(); ++i) {
        CHECK(std::abs(noise_rt.data[i] - noise.data[i]) <= 1.0 / 510.0);
        CHECK(noise_rt.data[i] == noise_q.data[i]);
    }
}

TEST_CASE("to_log clamps to the floor and from_log clamps overshoot") {
    GrayImage img(3, 1);
    img.data = {1.0, 0.0, 0.25};
    const LogImage logged = to_log(img);
    CHECK(logged.data[0] == 0.0);
    CHECK(logged.data[1] == doctest::Approx(std::log(1.0 / 255.0)).epsilon(1e-15));
    CHECK(logged.data[2] == doctest::Approx(-1.386294).epsilon(1e-6));

    LogImage shifted{3, 1, {0.0, std::log(0.5), 0.3}};
    const GrayImage back = from_log(shifted);
    CHECK(back.data[0] == 1.0);
    CHECK(back.data[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(back.data[2] == 1.0);  // overshoot clamps

    CHECK_THROWS_AS(to_log(img, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(to_log(img, 1.0), std::invalid_argument);
}

TEST_CASE("log round-trip is the identity above the floor and monotone") {
    SplitMix64 rng(17);
    GrayImage img(8, 8);
    for (double& v : img.data) v = rng.uniform(kDefaultLogFloor, 1.0);
    const GrayImage back = from_log(to_log(img));
    for (std::size_t i = 0; i < img.size(); ++i) {
        CHECK(std::abs(back.data[i] - img.data[i]) <= 2e-16);
    }
    // below the floor everything maps to the floor
    GrayImage dark(2, 1);
    dark.data = {0.0, kDefaultLogFloor / 3.0};
    const GrayImage lifted = from_log(to_log(dark));
    CHECK(lifted.data[0] == doctest::Approx(kDefaultLogFloor).epsilon(1e-12));
    CHECK(lifted.data[1] == doctest::Approx(kDefaultLogFloor).epsilon(1e-12));

    // monotone in intensity
    double prev = -1e9;
    for (int i = 0; i <= 100; ++i) {
        GrayImage probe(2, 2);
        probe.data.assign(4, i / 100.0);
        const double value = to_log(probe).data[0];
        CHECK(value >= prev);
        prev = value;
    }
}

TEST_CASE("coord_grid maps corners and center as specified") {
    const CoordGrid g3 = coord_grid(3, 3);
    CHECK(g3.x[4] == 0.0);  // center pixel
    CHECK(g3.y[4] == 0.0);
    CHECK(g3.x[2] == 1.0);  // (col=2,row=0)
    CHECK(g3.y[2] == -1.0);

    const CoordGrid g5 = coord_grid(5, 5);
    const std::size_t i = 3 * 5 + 1;  // col=1,row=3
    CHECK(g5.x[i] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(g5.y[i] == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS_AS(coord_grid(1, 5), std::invalid_argument);
    CHECK_THROWS_AS(coord_grid(5, 1), std::invalid_argument);
}

TEST_CASE("coord_grid is bounded and strictly increasing along rows and columns") {
    const CoordGrid grid = coord_grid(7, 9);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(grid.x[i] >= -1.0);
        CHECK(grid.x[i] <= 1.0);
        CHECK(grid.y[i] >= -1.0);
        CHECK(grid.y[i] <= 1.0);
    }
    for (int row = 0; row < 9; ++row) {
        for (int col = 1; col < 7; ++col) {
            CHECK(grid.x[row * 7 + col] > grid.x[row * 7 + col - 1]);
        }
    }
    for (int col = 0; col < 7; ++col) {
        for (int row = 1; row < 9; ++row) {
            CHECK(grid.y[row * 7 + col] > grid.y[(row - 1) * 7 + col]);
        }
    }
}

}  // TEST_SUITE
