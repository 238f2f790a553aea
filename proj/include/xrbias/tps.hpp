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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xrbias/image.hpp"

namespace xrbias {

/// Per-control-point displacements, in normalised-coordinate units. The
/// all-zero displacement is the identity warp.
struct TpsDisplacement {
    std::vector<double> dx;
    std::vector<double> dy;

    static TpsDisplacement zeros(std::size_t n) {
        return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    }
    std::size_t size() const { return dx.size(); }
};

/// Warped per-pixel coordinates (u_i, v_i); exactly linear in the
/// displacements and deliberately unclamped.
struct WarpedCoords {
    std::vector<double> u;
    std::vector<double> v;
};

/// Precomputed thin-plate-spline influence operator.
///
/// Control points sit on a fixed uniform grid_size x grid_size lattice over
/// [-1,1]^2 (row-major: index = row * grid_size + col). The interpolation
/// system with kernel U(r) = r^2 ln(r^2), U(0) = 0, plus affine terms is
/// solved once against that lattice; the resulting influence matrix maps a
/// per-control displacement channel to a per-pixel displacement channel:
///
///     warped = coords + influence * delta
///
/// so the warp is exactly linear in the displacements and the same matrix
/// serves both the x and y channels.
class TpsBasis {
public:
    int grid_size() const { return grid_size_; }
    double ridge() const { return ridge_; }
    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t num_pixels() const { return num_pixels_; }
    std::size_t num_controls() const { return ctrl_x_.size(); }

    std::span<const double> control_x() const { return ctrl_x_; }
    std::span<const double> control_y() const { return ctrl_y_; }

    /// Element (pixel, ctrl) of the logical (num_pixels x num_controls) matrix.
    double influence(std::size_t pixel, std::size_t ctrl) const {
        return columns_[ctrl * num_pixels_ + pixel];
    }

    /// One control point's influence over all pixels (contiguous).
    std::span<const double> influence_column(std::size_t ctrl) const {
        return {columns_.data() + ctrl * num_pixels_, num_pixels_};
    }

    /// out[i] += sum_j delta[j] * influence(i, j)
    void accumulate_displacement(std::span<const double> delta, std::span<double> out) const;

    friend TpsBasis build_tps(int grid_size, const CoordGrid& coords, double ridge);

private:
    TpsBasis() = default;

    int grid_size_ = 0;
    double ridge_ = 0.0;
    int width_ = 0;
    int height_ = 0;
    std::size_t num_pixels_ = 0;
    std::vector<double> ctrl_x_;
    std::vector<double> ctrl_y_;
    std::vector<double> columns_;  // column-major: [ctrl][pixel]
};

/// Solves the TPS system for the given coordinate grid. grid_size must be
/// >= 2 and ridge >= 0; ridge is added to the kernel diagonal. Throws
/// std::runtime_error if the bordered system is singular.
TpsBasis build_tps(int grid_size, const CoordGrid& coords, double ridge = 0.0);

/// warped_u = coords.x + influence * theta.dx, warped_v likewise for y.
WarpedCoords apply_tps(const TpsBasis& basis, const TpsDisplacement& theta,
                       const CoordGrid& coords);

}  // namespace xrbias
