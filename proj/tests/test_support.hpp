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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "xrbias/classifier.hpp"
#include "xrbias/image.hpp"

namespace testsupport {

inline double rel_err(double analytic, double reference, double scale_floor = 1e-8) {
    const double scale = std::max({std::abs(analytic), std::abs(reference), scale_floor});
    return std::abs(analytic - reference) / scale;
}

/// Central difference of value() with respect to one mutable slot.
template <typename F>
double central_diff(double& slot, double h, F&& value) {
    const double saved = slot;
    slot = saved + h;
    const double fp = value();
    slot = saved - h;
    const double fm = value();
    slot = saved;
    return (fp - fm) / (2.0 * h);
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

/// Brute-force oracle for the constant-bias restriction: tries every
/// constant log-bias in {-0.60, -0.59, ..., 0.60} applied directly to the
/// floored intensities (bypasses the attack and log-image code paths) and
/// reports whether any grid point flips the prediction.
inline bool constant_bias_oracle(const xrbias::MlpClassifier& model,
                                 const xrbias::GrayImage& image, int y, double floor) {
    for (int step = -60; step <= 60; ++step) {
        const double c = step / 100.0;
        const double factor = std::exp(c);
        xrbias::GrayImage biased(image.width, image.height);
        for (std::size_t i = 0; i < image.size(); ++i) {
            const double floored = std::clamp(image.data[i], floor, 1.0);
            biased.data[i] = std::clamp(floored * factor, 0.0, 1.0);
        }
        if (xrbias::predict(model, biased) != y) return true;
    }
    return false;
}

}  // namespace testsupport
