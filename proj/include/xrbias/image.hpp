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

#include <filesystem>
#include <stdexcept>
#include <vector>

namespace xrbias {

/// Default intensity floor applied before taking logarithms: one 8-bit
/// quantisation level, so log-domain values stay finite.
inline constexpr double kDefaultLogFloor = 1.0 / 255.0;

/// 2-D grayscale raster, row-major, intensities in [0, 1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t size() const { return data.size(); }
    double& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

/// Row-major log-intensities. Values produced by to_log() lie in
/// [ln(floor), 0]; arithmetic downstream may push them outside that range.
struct LogImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;
};

/// Per-pixel normalised coordinates: corner (0,0) maps to (-1,-1) and corner
/// (width-1, height-1) maps to (1,1).
struct CoordGrid {
    int width = 0;
    int height = 0;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return x.size(); }
};

struct PgmError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reads a binary PGM (magic "P5", maxval 255 or 65535). Intensities are
/// scaled to [0, 1] by dividing by maxval. 16-bit payloads are big-endian.
GrayImage load_pgm(const std::filesystem::path& path);

/// Writes a binary PGM with maxval 255; each intensity is quantised as
/// round(i * 255), rounding halves up.
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Applies the disk quantisation in memory: the result equals
/// load_pgm(save_pgm(img)) exactly.
GrayImage quantize8(const GrayImage& img);

/// Elementwise ln(clamp(i, floor, 1)). floor must be in (0, 1).
LogImage to_log(const GrayImage& img, double floor = kDefaultLogFloor);

/// Elementwise clamp(exp(v), 0, 1).
GrayImage from_log(const LogImage& img);

/// Normalised coordinate grid; width and height must both be >= 2.
CoordGrid coord_grid(int width, int height);

}  // namespace xrbias
