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

#include "xrbias/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "xrbias/biasfield.hpp"
#include "xrbias/kernels.hpp"

namespace xrbias {
namespace {

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_dims(const InterpretMap& mask, const GrayImage& a, const GrayImage& b) {
    if (mask.width != a.width || mask.height != a.height || a.width != b.width ||
        a.height != b.height) {
        throw std::invalid_argument("interpret: dimension mismatch");
    }
}

// d TV / d M: each neighbour pair |M_q - M_p| contributes -sgn to p and +sgn
// to q; zero-difference pairs contribute nothing.
void add_tv_subgradient(const InterpretMap& mask, double lambda2, std::vector<double>& grad) {
    const int w = mask.width;
    const int h = mask.height;
    for (int row = 0; row < h; ++row) {
        const double* line = mask.data.data() + static_cast<std::size_t>(row) * w;
        double* gline = grad.data() + static_cast<std::size_t>(row) * w;
        for (int col = 0; col + 1 < w; ++col) {
            const double s = sgn(line[col + 1] - line[col]);
            gline[col] -= lambda2 * s;
            gline[col + 1] += lambda2 * s;
        }
    }
    for (int row = 0; row + 1 < h; ++row) {
        const double* line = mask.data.data() + static_cast<std::size_t>(row) * w;
        double* gline = grad.data() + static_cast<std::size_t>(row) * w;
        for (int col = 0; col < w; ++col) {
            const double s = sgn(line[w + col] - line[col]);
            gline[col] -= lambda2 * s;
            gline[w + col] += lambda2 * s;
        }
    }
}

}  // namespace

GrayImage blend(const InterpretMap& mask, const GrayImage& x_adv, const GrayImage& x) {
    check_dims(mask, x_adv, x);
    GrayImage out(x.width, x.height);
    kernels::active().lerp_mask(mask.data.data(), x_adv.data.data(), x.data.data(),
                                out.data.data(), out.size());
    return out;
}

MaskObjective eval_mask_objective(const MlpClassifier& model, const InterpretMap& mask,
                                  const GrayImage& x_adv, const GrayImage& x, int y,
                                  double lambda1, double lambda2) {
    check_dims(mask, x_adv, x);
    const GrayImage blended = blend(mask, x_adv, x);
    const Scores scores = forward(model, blended);

    MaskObjective out;
    double l1 = 0.0;
    for (double m : mask.data) l1 += std::abs(m);
    out.value = scores.probs[y] + lambda1 * l1 + lambda2 * total_variation(mask.data, mask.width, mask.height);

    // d p_y / d M_i = d p_y / d blended_i * (x_adv_i - x_i)
    out.grad = prob_gradient(model, blended, y);
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
        out.grad[i] *= x_adv.data[i] - x.data[i];
        out.grad[i] += lambda1 * sgn(mask.data[i]);
    }
    add_tv_subgradient(mask, lambda2, out.grad);
    return out;
}

InterpretMap optimize_map(const MlpClassifier& model, const GrayImage& x, const GrayImage& x_adv,
                          int y, const InterpretConfig& cfg) {
    if (cfg.iterations < 1) throw std::invalid_argument("optimize_map: iterations must be >= 1");
    if (!(cfg.step > 0.0)) throw std::invalid_argument("optimize_map: step must be positive");
    if (x_adv.data == x.data) {
        throw std::invalid_argument("optimize_map: x_adv equals x (not an adversarial example)");
    }
    if (predict(model, x_adv) == y) {
        throw std::invalid_argument("optimize_map: x_adv does not fool the model on label y");
    }

    InterpretMap mask{x.width, x.height,
                      std::vector<double>(static_cast<std::size_t>(x.width) * x.height, 0.5),
                      {}};
    MaskObjective current =
        eval_mask_objective(model, mask, x_adv, x, y, cfg.lambda1, cfg.lambda2);
    mask.objective_trace.push_back(current.value);

    InterpretMap candidate = mask;
    for (int it = 0; it < cfg.iterations; ++it) {
        double step = cfg.step;
        for (int attempt = 0; attempt <= 5; ++attempt) {
            for (std::size_t i = 0; i < mask.data.size(); ++i) {
                candidate.data[i] = std::clamp(mask.data[i] - step * current.grad[i], 0.0, 1.0);
            }
            MaskObjective next =
                eval_mask_objective(model, candidate, x_adv, x, y, cfg.lambda1, cfg.lambda2);
            if (next.value <= current.value) {
                mask.data.swap(candidate.data);
                current = std::move(next);
                break;
            }
            step *= 0.5;
        }
        mask.objective_trace.push_back(current.value);
    }
    return mask;
}

InterpretMap average_maps(std::span<const InterpretMap> maps) {
    if (maps.empty()) throw std::invalid_argument("average_maps: empty input");
    const int w = maps.front().width;
    const int h = maps.front().height;
    InterpretMap mean{w, h, std::vector<double>(static_cast<std::size_t>(w) * h, 0.0), {}};
    for (const InterpretMap& m : maps) {
        if (m.width != w || m.height != h) {
            throw std::invalid_argument("average_maps: mixed dimensions");
        }
        kernels::active().axpy(1.0, m.data.data(), mean.data.data(), mean.data.size());
    }
    const double inv = 1.0 / static_cast<double>(maps.size());
    for (double& v : mean.data) v *= inv;
    return mean;
}

GrayImage overlay_map(const InterpretMap& mask, const GrayImage& image) {
    check_dims(mask, image, image);
    GrayImage out(image.width, image.height);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data[i] = mask.data[i] + (1.0 - mask.data[i]) * image.data[i];
    }
    return out;
}

void export_map(const InterpretMap& mask, const InterpretConfig& cfg,
                const std::filesystem::path& pgm_path) {
    GrayImage img{mask.width, mask.height};
    img.data = mask.data;
    save_pgm(img, pgm_path);

    nlohmann::json sidecar;
    sidecar["lambda1"] = cfg.lambda1;
    sidecar["lambda2"] = cfg.lambda2;
    sidecar["iterations"] = cfg.iterations;
    if (!mask.objective_trace.empty()) {
        sidecar["final_objective"] = mask.objective_trace.back();
    }
    std::filesystem::path json_path = pgm_path;
    json_path.replace_extension(".json");
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write " + json_path.string());
    out << sidecar.dump(2) << "\n";
}

InterpretMap load_map_pgm(const std::filesystem::path& pgm_path) {
    const GrayImage img = load_pgm(pgm_path);
    return InterpretMap{img.width, img.height, img.data, {}};
}

}  // namespace xrbias
