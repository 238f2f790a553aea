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
#include <span>
#include <vector>

#include "xrbias/classifier.hpp"
#include "xrbias/image.hpp"

namespace xrbias {

/// Per-pixel mask M in [0,1] localising the regions whose perturbation
/// drives the misclassification, plus the objective recorded per iteration.
struct InterpretMap {
    int width = 0;
    int height = 0;
    std::vector<double> data;
    std::vector<double> objective_trace;
};

struct InterpretConfig {
    int iterations = 150;
    double lambda1 = 0.05;  // L1 weight
    double lambda2 = 0.2;   // TV weight
    double step = 0.05;     // base step; halved on objective increase (max 5 times per iteration)
};

/// Per-pixel convex combination M*x_adv + (1-M)*x; exact at M = 0 and M = 1.
GrayImage blend(const InterpretMap& mask, const GrayImage& x_adv, const GrayImage& x);

/// Objective G(M) = softmax_y(blend(M)) + lambda1 |M|_1 + lambda2 TV(M) and
/// its subgradient (L1 and TV subgradients are 0 at kinks).
struct MaskObjective {
    double value = 0.0;
    std::vector<double> grad;
};

MaskObjective eval_mask_objective(const MlpClassifier& model, const InterpretMap& mask,
                                  const GrayImage& x_adv, const GrayImage& x, int y,
                                  double lambda1, double lambda2);

/// Projected gradient descent on G starting from M = 0.5 everywhere. Each
/// iteration re-tries with a halved step while the objective would increase
/// (up to 5 halvings, then keeps the current mask), so the recorded trace is
/// non-increasing. Requires x_adv to actually fool the model on label y.
InterpretMap optimize_map(const MlpClassifier& model, const GrayImage& x, const GrayImage& x_adv,
                          int y, const InterpretConfig& cfg = {});

/// Pointwise arithmetic mean; the result carries no objective trace.
InterpretMap average_maps(std::span<const InterpretMap> maps);

/// White overlay for display: out = M + (1 - M) * image.
GrayImage overlay_map(const InterpretMap& mask, const GrayImage& image);

/// PGM plus a .json sidecar (lambdas, iterations, final objective).
void export_map(const InterpretMap& mask, const InterpretConfig& cfg,
                const std::filesystem::path& pgm_path);

/// Reads a map previously exported as PGM (no trace).
InterpretMap load_map_pgm(const std::filesystem::path& pgm_path);

}  // namespace xrbias
