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

#include "xrbias/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "xrbias/kernels.hpp"
#include "xrbias/rng.hpp"

namespace xrbias {
namespace {

constexpr int kPhantomSize = 64;
constexpr int kBatchSize = 16;
constexpr std::uint64_t kShuffleStreamSalt = 0xD1B54A32D192ED03ULL;

double linear_ramp(double z) { return std::clamp(z, 0.0, 1.0); }

struct Ellipse {
    double cx, cy, rx, ry;
};

struct Blob {
    double row, col, sigma_px, amplitude;
};

// Samples a point uniformly inside an ellipse, inset from the rim.
Blob place_in_lung(SplitMix64& rng, const Ellipse& lung) {
    const double rho = std::sqrt(rng.next_double());
    const double phi = rng.uniform(0.0, 6.283185307179586476925286766559);
    const double bx = lung.cx + 0.8 * rho * lung.rx * std::cos(phi);
    const double by = lung.cy + 0.8 * rho * lung.ry * std::sin(phi);
    Blob blob;
    blob.col = (bx + 1.0) * (kPhantomSize - 1) / 2.0;
    blob.row = (by + 1.0) * (kPhantomSize - 1) / 2.0;
    return blob;
}

GrayImage render_phantom(SplitMix64& rng, int label) {
    // Radiograph-style phantom: near-black air surround, a brighter torso
    // oval, two dark elliptical lung fields, weak vascular speckle in both
    // classes, and (class 1 only) 1-3 strong bright blobs inside a lung.
    //
    // The frame stays predominantly dark so the pixel-norm of a flattened
    // image is moderate; the fixed-rate SGD recipe diverges on mostly-bright
    // rasters. The shared speckle and the wide shape/level jitter keep the
    // two classes from being trivially separable, which keeps the trained
    // subject model's margins moderate instead of saturating the softmax.
    //
    // Draw order is part of the determinism contract: air level, torso
    // (cy, rx, ry, level), left lung, right lung, shared speckle, class-1
    // blobs, then per-pixel noise in row-major order.
    const double air = 0.02 + rng.uniform(0.0, 0.03);
    Ellipse torso;
    torso.cx = 0.0;
    torso.cy = 0.05 + rng.uniform(-0.03, 0.03);
    torso.rx = 0.78 + rng.uniform(-0.04, 0.04);
    torso.ry = 0.95 + rng.uniform(-0.04, 0.04);
    const double body_level = rng.uniform(0.44, 0.54);
    Ellipse lungs[2];
    double lung_floor[2];
    for (int side = 0; side < 2; ++side) {
        const double center = side == 0 ? -0.40 : 0.40;
        lungs[side].cx = center + rng.uniform(-0.04, 0.04);
        lungs[side].cy = -0.05 + rng.uniform(-0.04, 0.04);
        lungs[side].rx = 0.26 + rng.uniform(-0.04, 0.04);
        lungs[side].ry = 0.45 + rng.uniform(-0.05, 0.05);
        lung_floor[side] = rng.uniform(0.26, 0.38);
    }
    std::vector<Blob> blobs;
    const int nspeckle = static_cast<int>(rng.below(2) + rng.below(2));  // 0-2, mode 1
    for (int b = 0; b < nspeckle; ++b) {
        Blob speckle = place_in_lung(rng, lungs[rng.below(2)]);
        speckle.sigma_px = rng.uniform(2.0, 4.5);
        speckle.amplitude = rng.uniform(0.04, 0.26);
        blobs.push_back(speckle);
    }
    if (label == 1) {
        const int nblobs = 1 + static_cast<int>(rng.below(3));
        for (int b = 0; b < nblobs; ++b) {
            Blob blob = place_in_lung(rng, lungs[rng.below(2)]);
            blob.sigma_px = rng.uniform(3.0, 6.0);
            blob.amplitude = rng.uniform(0.3, 0.5);
            blobs.push_back(blob);
        }
    }

    GrayImage img(kPhantomSize, kPhantomSize);
    for (int row = 0; row < kPhantomSize; ++row) {
        const double y = 2.0 * row / (kPhantomSize - 1.0) - 1.0;
        for (int col = 0; col < kPhantomSize; ++col) {
            const double x = 2.0 * col / (kPhantomSize - 1.0) - 1.0;
            const double tx = (x - torso.cx) / torso.rx;
            const double ty = (y - torso.cy) / torso.ry;
            const double te = tx * tx + ty * ty;
            // Soft-edged torso over the air background, slightly brighter
            // toward the mediastinum.
            double body = body_level * (1.0 - 0.10 * te);
            for (int side = 0; side < 2; ++side) {
                const double ex = (x - lungs[side].cx) / lungs[side].rx;
                const double ey = (y - lungs[side].cy) / lungs[side].ry;
                const double e = ex * ex + ey * ey;
                body *= lung_floor[side] + (1.0 - lung_floor[side]) * linear_ramp((e - 0.8) / 0.35);
            }
            double value = air + (body - air) * linear_ramp((1.1 - te) / 0.25);
            for (const Blob& blob : blobs) {
                const double dr = row - blob.row;
                const double dc = col - blob.col;
                value += blob.amplitude *
                         std::exp(-(dr * dr + dc * dc) / (2.0 * blob.sigma_px * blob.sigma_px));
            }
            img.at(row, col) = value;
        }
    }
    for (std::size_t i = 0; i < img.size(); ++i) {
        img.data[i] = std::clamp(img.data[i] + 0.05 * rng.next_gaussian(), 0.0, 1.0);
    }
    return img;
}

}  // namespace

PhantomDataset synth_dataset(std::uint64_t seed, int n_per_class) {
    if (n_per_class < 1) throw std::invalid_argument("synth_dataset: n_per_class must be >= 1");
    PhantomDataset dataset;
    dataset.seed = seed;
    dataset.images.reserve(2 * static_cast<std::size_t>(n_per_class));
    for (int pair = 0; pair < n_per_class; ++pair) {
        for (int label = 0; label < 2; ++label) {
            const std::uint64_t index = dataset.images.size();
            SplitMix64 rng(seed ^ index);
            dataset.images.push_back(render_phantom(rng, label));
            dataset.labels.push_back(label);
        }
    }
    return dataset;
}

void save_dataset(const PhantomDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "labels.csv");
    if (!csv) throw std::runtime_error("cannot write labels.csv in " + dir.string());
    char name[32];
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        std::snprintf(name, sizeof(name), "img_%05zu.pgm", i);
        save_pgm(dataset.images[i], dir / name);
        csv << name << "," << dataset.labels[i] << "\n";
    }
}

PhantomDataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream csv(dir / "labels.csv");
    if (!csv) throw std::runtime_error("cannot open labels.csv in " + dir.string());
    PhantomDataset dataset;
    std::string line;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("malformed labels.csv row: " + line);
        }
        const std::string filename = line.substr(0, comma);
        const int label = std::stoi(line.substr(comma + 1));
        if (label != 0 && label != 1) throw std::runtime_error("label out of range in labels.csv");
        dataset.images.push_back(load_pgm(dir / filename));
        dataset.labels.push_back(label);
    }
    if (dataset.size() == 0) throw std::runtime_error("empty dataset in " + dir.string());
    return dataset;
}

MlpClassifier::MlpClassifier(int input_width, int input_height, int hidden_dim,
                             std::uint64_t seed) {
    if (input_width < 1 || input_height < 1 || hidden_dim < 1) {
        throw std::invalid_argument("MlpClassifier: dimensions must be positive");
    }
    input_width_ = input_width;
    input_height_ = input_height;
    hidden_dim_ = hidden_dim;
    seed_ = seed;
    const std::size_t input = static_cast<std::size_t>(input_dim());
    const std::size_t hidden = static_cast<std::size_t>(hidden_dim);
    w1_.resize(hidden * input);
    b1_.assign(hidden, 0.0);
    w2_.resize(2 * hidden);
    b2_.assign(2, 0.0);

    SplitMix64 rng(seed);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input));
    for (double& w : w1_) w = rng.uniform(-s1, s1);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (double& w : w2_) w = rng.uniform(-s2, s2);
    rebuild_transpose();
}

MlpClassifier MlpClassifier::zeros(int input_width, int input_height, int hidden_dim) {
    MlpClassifier model(input_width, input_height, hidden_dim, 0);
    std::fill(model.w1_.begin(), model.w1_.end(), 0.0);
    std::fill(model.w2_.begin(), model.w2_.end(), 0.0);
    model.rebuild_transpose();
    return model;
}

void MlpClassifier::rebuild_transpose() {
    const std::size_t input = static_cast<std::size_t>(input_dim());
    const std::size_t hidden = static_cast<std::size_t>(hidden_dim_);
    w1t_.resize(input * hidden);
    for (std::size_t h = 0; h < hidden; ++h) {
        for (std::size_t j = 0; j < input; ++j) {
            w1t_[j * hidden + h] = w1_[h * input + j];
        }
    }
}

bool MlpClassifier::same_weights(const MlpClassifier& other) const {
    return input_width_ == other.input_width_ && input_height_ == other.input_height_ &&
           hidden_dim_ == other.hidden_dim_ && w1_ == other.w1_ && b1_ == other.b1_ &&
           w2_ == other.w2_ && b2_ == other.b2_;
}

void MlpClassifier::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["input_width"] = input_width_;
    j["input_height"] = input_height_;
    j["hidden_dim"] = hidden_dim_;
    j["seed"] = seed_;
    j["w1"] = w1_;
    j["b1"] = b1_;
    j["w2"] = w2_;
    j["b2"] = b2_;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model to " + path.string());
    out << j.dump() << "\n";
}

MlpClassifier MlpClassifier::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file " + path.string());
    nlohmann::json j;
    in >> j;
    MlpClassifier model;
    model.input_width_ = j.at("input_width").get<int>();
    model.input_height_ = j.at("input_height").get<int>();
    model.hidden_dim_ = j.at("hidden_dim").get<int>();
    model.seed_ = j.at("seed").get<std::uint64_t>();
    model.w1_ = j.at("w1").get<std::vector<double>>();
    model.b1_ = j.at("b1").get<std::vector<double>>();
    model.w2_ = j.at("w2").get<std::vector<double>>();
    model.b2_ = j.at("b2").get<std::vector<double>>();
    const std::size_t input = static_cast<std::size_t>(model.input_dim());
    const std::size_t hidden = static_cast<std::size_t>(model.hidden_dim_);
    if (model.w1_.size() != hidden * input || model.b1_.size() != hidden ||
        model.w2_.size() != 2 * hidden || model.b2_.size() != 2) {
        throw std::runtime_error("model file has inconsistent dimensions: " + path.string());
    }
    model.rebuild_transpose();
    return model;
}

// Shared forward/backward machinery. Keeping it in one place guarantees the
// training loop, the loss report and the attack-facing gradients all see the
// same arithmetic.
struct MlpBackprop {
    static void check_image(const MlpClassifier& model, const GrayImage& image) {
        if (image.width != model.input_width() || image.height != model.input_height()) {
            throw std::invalid_argument("image dimensions do not match the model input");
        }
    }

    static void forward_raw(const MlpClassifier& model, const double* x,
                            std::vector<double>& hidden_pre, std::vector<double>& hidden,
                            std::array<double, 2>& logits) {
        const std::size_t input = static_cast<std::size_t>(model.input_dim());
        const std::size_t nh = static_cast<std::size_t>(model.hidden_dim());
        hidden_pre = model.b1_;
        const auto& ops = kernels::active();
        for (std::size_t j = 0; j < input; ++j) {
            if (x[j] != 0.0) {
                ops.axpy(x[j], model.w1t_.data() + j * nh, hidden_pre.data(), nh);
            }
        }
        hidden.resize(nh);
        for (std::size_t h = 0; h < nh; ++h) hidden[h] = hidden_pre[h] > 0.0 ? hidden_pre[h] : 0.0;
        for (int k = 0; k < 2; ++k) {
            double acc = model.b2_[k];
            const double* row = model.w2_.data() + static_cast<std::size_t>(k) * nh;
            for (std::size_t h = 0; h < nh; ++h) acc += row[h] * hidden[h];
            logits[k] = acc;
        }
    }

    /// dx = W1^T (relu'(pre) . (W2^T dlogits)); also exposes dhidden for the
    /// weight gradients used in training.
    static void backward_input(const MlpClassifier& model, const std::vector<double>& hidden_pre,
                               const std::array<double, 2>& dlogits,
                               std::vector<double>& dhidden, std::vector<double>& dx) {
        const std::size_t input = static_cast<std::size_t>(model.input_dim());
        const std::size_t nh = static_cast<std::size_t>(model.hidden_dim());
        dhidden.assign(nh, 0.0);
        for (std::size_t h = 0; h < nh; ++h) {
            if (hidden_pre[h] > 0.0) {
                dhidden[h] = model.w2_[h] * dlogits[0] + model.w2_[nh + h] * dlogits[1];
            }
        }
        dx.assign(input, 0.0);
        const auto& ops = kernels::active();
        for (std::size_t h = 0; h < nh; ++h) {
            if (dhidden[h] != 0.0) {
                ops.axpy(dhidden[h], model.w1_.data() + h * input, dx.data(), input);
            }
        }
    }
};

static std::array<double, 2> softmax2(const std::array<double, 2>& logits) {
    const double m = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - m);
    const double e1 = std::exp(logits[1] - m);
    const double inv = 1.0 / (e0 + e1);
    return {e0 * inv, e1 * inv};
}

Scores forward(const MlpClassifier& model, const GrayImage& image) {
    MlpBackprop::check_image(model, image);
    std::vector<double> pre, hidden;
    std::array<double, 2> logits;
    MlpBackprop::forward_raw(model, image.data.data(), pre, hidden, logits);
    return {logits, softmax2(logits)};
}

double cross_entropy(const std::array<double, 2>& logits, int y) {
    if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
    const double m = std::max(logits[0], logits[1]);
    const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
    return lse - logits[y];
}

LossValue evaluate(const MlpClassifier& model, const GrayImage& image, int y) {
    const Scores scores = forward(model, image);
    LossValue out;
    out.loss = cross_entropy(scores.logits, y);
    out.predicted = scores.logits[1] > scores.logits[0] ? 1 : 0;
    out.probs = scores.probs;
    return out;
}

std::vector<double> input_gradient(const MlpClassifier& model, const GrayImage& image, int y) {
    if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
    MlpBackprop::check_image(model, image);
    std::vector<double> pre, hidden;
    std::array<double, 2> logits;
    MlpBackprop::forward_raw(model, image.data.data(), pre, hidden, logits);
    std::array<double, 2> dlogits = softmax2(logits);
    dlogits[y] -= 1.0;
    std::vector<double> dhidden, dx;
    MlpBackprop::backward_input(model, pre, dlogits, dhidden, dx);
    return dx;
}

std::vector<double> prob_gradient(const MlpClassifier& model, const GrayImage& image, int y) {
    if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
    MlpBackprop::check_image(model, image);
    std::vector<double> pre, hidden;
    std::array<double, 2> logits;
    MlpBackprop::forward_raw(model, image.data.data(), pre, hidden, logits);
    const std::array<double, 2> probs = softmax2(logits);
    // d softmax_y / d logit_k = p_y * (delta_ky - p_k)
    std::array<double, 2> dlogits;
    for (int k = 0; k < 2; ++k) dlogits[k] = probs[y] * ((k == y ? 1.0 : 0.0) - probs[k]);
    std::vector<double> dhidden, dx;
    MlpBackprop::backward_input(model, pre, dlogits, dhidden, dx);
    return dx;
}

int predict(const MlpClassifier& model, const GrayImage& image) {
    const Scores scores = forward(model, image);
    return scores.logits[1] > scores.logits[0] ? 1 : 0;
}

double accuracy(const MlpClassifier& model, const PhantomDataset& dataset) {
    if (dataset.size() == 0) throw std::invalid_argument("accuracy over an empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (predict(model, dataset.images[i]) == dataset.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

MlpClassifier train(const PhantomDataset& dataset, int epochs, double learning_rate,
                    std::uint64_t seed, int hidden_dim) {
    if (dataset.size() == 0) throw std::invalid_argument("train: dataset is empty");
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    const int width = dataset.images.front().width;
    const int height = dataset.images.front().height;
    for (const GrayImage& img : dataset.images) {
        if (img.width != width || img.height != height) {
            throw std::invalid_argument("train: image dimensions are not uniform");
        }
    }

    MlpClassifier model(width, height, hidden_dim, seed);
    SplitMix64 shuffle_rng(seed ^ kShuffleStreamSalt);
    const std::size_t input = static_cast<std::size_t>(model.input_dim());
    const std::size_t nh = static_cast<std::size_t>(hidden_dim);
    const std::size_t n = dataset.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> gw1(nh * input), gb1(nh), gw2(2 * nh), gb2(2);
    std::vector<double> pre, hidden, dhidden, dx_unused;
    std::array<double, 2> logits;
    const auto& ops = kernels::active();

    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = shuffle_rng.below(i + 1);
            std::swap(order[i], order[j]);
        }
        for (std::size_t start = 0; start < n; start += kBatchSize) {
            const std::size_t stop = std::min(start + kBatchSize, n);
            std::fill(gw1.begin(), gw1.end(), 0.0);
            std::fill(gb1.begin(), gb1.end(), 0.0);
            std::fill(gw2.begin(), gw2.end(), 0.0);
            std::fill(gb2.begin(), gb2.end(), 0.0);
            for (std::size_t s = start; s < stop; ++s) {
                const GrayImage& image = dataset.images[order[s]];
                const int y = dataset.labels[order[s]];
                MlpBackprop::forward_raw(model, image.data.data(), pre, hidden, logits);
                std::array<double, 2> dlogits = softmax2(logits);
                dlogits[y] -= 1.0;
                for (int k = 0; k < 2; ++k) {
                    gb2[k] += dlogits[k];
                    ops.axpy(dlogits[k], hidden.data(), gw2.data() + static_cast<std::size_t>(k) * nh,
                             nh);
                }
                dhidden.assign(nh, 0.0);
                for (std::size_t h = 0; h < nh; ++h) {
                    if (pre[h] > 0.0) {
                        dhidden[h] = model.w2_[h] * dlogits[0] + model.w2_[nh + h] * dlogits[1];
                    }
                }
                for (std::size_t h = 0; h < nh; ++h) {
                    if (dhidden[h] != 0.0) {
                        gb1[h] += dhidden[h];
                        ops.axpy(dhidden[h], image.data.data(), gw1.data() + h * input, input);
                    }
                }
            }
            const double scale = -learning_rate / static_cast<double>(stop - start);
            ops.axpy(scale, gw1.data(), model.w1_.data(), gw1.size());
            ops.axpy(scale, gb1.data(), model.b1_.data(), gb1.size());
            ops.axpy(scale, gw2.data(), model.w2_.data(), gw2.size());
            ops.axpy(scale, gb2.data(), model.b2_.data(), gb2.size());
            model.rebuild_transpose();
        }
    }
    return model;
}

}  // namespace xrbias
