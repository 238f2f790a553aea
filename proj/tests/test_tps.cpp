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

#include <doctest.h>

#include "xrbias/rng.hpp"
#include "xrbias/tps.hpp"

using namespace xrbias;

namespace {

TpsDisplacement random_theta(SplitMix64& rng, std::size_t n, double scale) {
    TpsDisplacement theta = TpsDisplacement::zeros(n);
    for (std::size_t j = 0; j < n; ++j) {
        theta.dx[j] = rng.uniform(-scale, scale);
        theta.dy[j] = rng.uniform(-scale, scale);
    }
    return theta;
}

}  // namespace

TEST_SUITE("tps") {

TEST_CASE("corner control points influence corner pixels one-hot") {
    const CoordGrid coords = coord_grid(4, 4);
    const TpsBasis basis = build_tps(2, coords, 0.0);
    // pixel index of each corner, control index of the matching lattice node
    const std::size_t corner_pixels[4] = {0, 3, 12, 15};
    const std::size_t corner_controls[4] = {0, 1, 2, 3};
    for (int c = 0; c < 4; ++c) {
        for (std::size_t j = 0; j < basis.num_controls(); ++j) {
            const double expected = j == corner_controls[c] ? 1.0 : 0.0;
            CHECK(std::abs(basis.influence(corner_pixels[c], j) - expected) <= 1e-9);
        }
    }
}

TEST_CASE("zero displacement is the identity warp") {
    const CoordGrid coords = coord_grid(32, 32);
    const TpsBasis basis = build_tps(4, coords, 0.0);
    const WarpedCoords warped =
        apply_tps(basis, TpsDisplacement::zeros(basis.num_controls()), coords);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        CHECK(std::abs(warped.u[i] - coords.x[i]) <= 1e-9);
        CHECK(std::abs(warped.v[i] - coords.y[i]) <= 1e-9);
    }
}

TEST_CASE("warp displacement is linear in theta") {
    const CoordGrid coords = coord_grid(16, 12);
    const TpsBasis basis = build_tps(4, coords, 0.0);
    SplitMix64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const TpsDisplacement t1 = random_theta(rng, basis.num_controls(), 0.2);
        const TpsDisplacement t2 = random_theta(rng, basis.num_controls(), 0.2);
        const double alpha = rng.uniform(-2.0, 2.0);
        const double beta = rng.uniform(-2.0, 2.0);

        TpsDisplacement mix = TpsDisplacement::zeros(basis.num_controls());
        for (std::size_t j = 0; j < mix.size(); ++j) {
            mix.dx[j] = alpha * t1.dx[j] + beta * t2.dx[j];
            mix.dy[j] = alpha * t1.dy[j] + beta * t2.dy[j];
        }
        const WarpedCoords w1 = apply_tps(basis, t1, coords);
        const WarpedCoords w2 = apply_tps(basis, t2, coords);
        const WarpedCoords wm = apply_tps(basis, mix, coords);
        for (std::size_t i = 0; i < coords.size(); ++i) {
            const double expected_u =
                alpha * (w1.u[i] - coords.x[i]) + beta * (w2.u[i] - coords.x[i]);
            const double expected_v =
                alpha * (w1.v[i] - coords.y[i]) + beta * (w2.v[i] - coords.y[i]);
            CHECK(std::abs((wm.u[i] - coords.x[i]) - expected_u) <= 1e-9);
            CHECK(std::abs((wm.v[i] - coords.y[i]) - expected_v) <= 1e-9);
        }
    }
}

TEST_CASE("uniform displacement reproduces the constant everywhere") {
    const CoordGrid coords = coord_grid(20, 20);
    const TpsBasis basis = build_tps(4, coords, 0.0);
    TpsDisplacement theta = TpsDisplacement::zeros(basis.num_controls());
    const double c = 0.17;
    for (double& d : theta.dx) d = c;
    const WarpedCoords warped = apply_tps(basis, theta, coords);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        CHECK(std::abs(warped.u[i] - (coords.x[i] + c)) <= 1e-9);
        CHECK(std::abs(warped.v[i] - coords.y[i]) <= 1e-9);
    }
}

TEST_CASE("interpolation is exact at a control point coincident with a pixel") {
    // 5x5 grid with g=3: control lattice nodes coincide with pixels at
    // normalized {-1,0,1}.
    const CoordGrid coords = coord_grid(5, 5);
    const TpsBasis basis = build_tps(3, coords, 0.0);
    TpsDisplacement theta = TpsDisplacement::zeros(basis.num_controls());
    theta.dx[4] = 0.1;  // center control (0,0)
    const WarpedCoords warped = apply_tps(basis, theta, coords);
    const std::size_t center = 2 * 5 + 2;
    CHECK(std::abs(warped.u[center] - (coords.x[center] + 0.1)) <= 1e-9);
    CHECK(std::abs(warped.v[center] - coords.y[center]) <= 1e-9);
}

TEST_CASE("random displacements are reproduced exactly at the control lattice") {
    // A coordinate grid equal to the control lattice makes every pixel a
    // control point, so the influence matrix must be the identity.
    for (int g : {2, 3, 5}) {
        const CoordGrid coords = coord_grid(g, g);
        const TpsBasis basis = build_tps(g, coords, 0.0);
        SplitMix64 rng(g);
        const TpsDisplacement theta = random_theta(rng, basis.num_controls(), 0.5);
        const WarpedCoords warped = apply_tps(basis, theta, coords);
        for (std::size_t i = 0; i < coords.size(); ++i) {
            CHECK(std::abs(warped.u[i] - (coords.x[i] + theta.dx[i])) <= 1e-9);
            CHECK(std::abs(warped.v[i] - (coords.y[i] + theta.dy[i])) <= 1e-9);
        }
    }
}

TEST_CASE("affine displacement fields are reproduced by the polynomial part") {
    const CoordGrid coords = coord_grid(24, 16);
    const TpsBasis basis = build_tps(4, coords, 0.0);
    TpsDisplacement theta = TpsDisplacement::zeros(basis.num_controls());
    const double p = 0.05, q = -0.12, r = 0.08;
    for (std::size_t j = 0; j < basis.num_controls(); ++j) {
        theta.dx[j] = p + q * basis.control_x()[j] + r * basis.control_y()[j];
    }
    const WarpedCoords warped = apply_tps(basis, theta, coords);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const double expected = p + q * coords.x[i] + r * coords.y[i];
        CHECK(std::abs((warped.u[i] - coords.x[i]) - expected) <= 1e-9);
    }
}

TEST_CASE("argument validation") {
    const CoordGrid coords = coord_grid(8, 8);
    CHECK_THROWS_AS(build_tps(1, coords), std::invalid_argument);
    CHECK_THROWS_AS(build_tps(3, coords, -0.5), std::invalid_argument);

    const TpsBasis basis = build_tps(3, coords, 0.0);
    CHECK_THROWS_AS(apply_tps(basis, TpsDisplacement::zeros(4), coords), std::invalid_argument);
    const CoordGrid other = coord_grid(9, 9);
    CHECK_THROWS_AS(apply_tps(basis, TpsDisplacement::zeros(9), other), std::invalid_argument);
}

TEST_CASE("ridge regularisation keeps the system solvable and near-exact") {
    const CoordGrid coords = coord_grid(6, 6);
    const TpsBasis basis = build_tps(3, coords, 1e-8);
    const WarpedCoords warped =
        apply_tps(basis, TpsDisplacement::zeros(basis.num_controls()), coords);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        CHECK(std::abs(warped.u[i] - coords.x[i]) <= 1e-7);
    }
}

}  // TEST_SUITE
