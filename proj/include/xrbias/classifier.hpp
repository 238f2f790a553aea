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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xrbias/image.hpp"

namespace xrbias {

/// Deterministic synthetic radiograph-like dataset: 64x64 images with two
/// dark lung fields on a bright body; class 1 additionally carries 1-3
/// bright Gaussian blobs inside a lung. Labels interleave [0, 1, 0, 1, ...].
struct PhantomDataset {
    std::vector<GrayImage> images;
    std::vector<int> labels;  // 0 = normal, 1 = blob class
    std::uint64_t seed = 0;

    std::size_t size() const { return images.size(); }
};

/// Generates n_per_class images per class. Image i draws all of its
/// randomness from SplitMix64 seeded with (seed XOR i), so any image can be
/// regenerated in isolation and whole datasets are bit-identical per seed.
PhantomDataset synth_dataset(std::uint64_t seed, int n_per_class);

void save_dataset(const PhantomDataset& dataset, const std::filesystem::path& dir);
PhantomDataset load_dataset(const std::filesystem::path& dir);

/// One-hidden-layer classifier over flattened grayscale images:
///   logits = W2 * relu(W1 * x + b1) + b2, two output classes.
/// Forward, loss and input-gradient passes are explicit so attack chains can
/// differentiate end to end. Immutable once trained.
class MlpClassifier {
public:
    /// Random initialisation: W1 then W2 drawn row-major from
    /// SplitMix64(seed), uniform in [-s, s] with s = 1/sqrt(fan_in);
    /// biases start at zero.
    MlpClassifier(int input_width, int input_height, int hidden_dim, std::uint64_t seed);

    /// All-zero weights (useful as a degenerate fixture).
    static MlpClassifier zeros(int input_width, int input_height, int hidden_dim);

    int input_width() const { return input_width_; }
    int input_height() const { return input_height_; }
    int input_dim() const { return input_width_ * input_height_; }
    int hidden_dim() const { return hidden_dim_; }
    std::uint64_t seed() const { return seed_; }

    std::span<const double> w1() const { return w1_; }  // [hidden][input] row-major
    std::span<const double> b1() const { return b1_; }
    std::span<const double> w2() const { return w2_; }  // [2][hidden] row-major
    std::span<const double> b2() const { return b2_; }

    bool same_weights(const MlpClassifier& other) const;

    void save(const std::filesystem::path& path) const;
    static MlpClassifier load(const std::filesystem::path& path);

    friend MlpClassifier train(const PhantomDataset& dataset, int epochs, double learning_rate,
                               std::uint64_t seed, int hidden_dim);
    friend struct MlpBackprop;

private:
    MlpClassifier() = default;
    void rebuild_transpose();

    int input_width_ = 0;
    int input_height_ = 0;
    int hidden_dim_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> w1_;   // [hidden][input]
    std::vector<double> w1t_;  // [input][hidden], kept in sync with w1_
    std::vector<double> b1_;
    std::vector<double> w2_;
    std::vector<double> b2_;
};

struct Scores {
    std::array<double, 2> logits;
    std::array<double, 2> probs;
};

/// Cross-entropy of one example plus the prediction that produced it.
struct LossValue {
    double loss = 0.0;
    int predicted = 0;
    std::array<double, 2> probs{};
};

Scores forward(const MlpClassifier& model, const GrayImage& image);

/// -ln softmax(logits)[y], evaluated through log-sum-exp.
double cross_entropy(const std::array<double, 2>& logits, int y);

LossValue evaluate(const MlpClassifier& model, const GrayImage& image, int y);

/// dJ/dpixel for J = cross_entropy(forward(image), y). Relu subgradient is 0
/// at 0.
std::vector<double> input_gradient(const MlpClassifier& model, const GrayImage& image, int y);

/// d softmax_y / dpixel (gradient of the class-y probability).
std::vector<double> prob_gradient(const MlpClassifier& model, const GrayImage& image, int y);

/// Argmax of the logits; ties resolve to the lower class index.
int predict(const MlpClassifier& model, const GrayImage& image);

double accuracy(const MlpClassifier& model, const PhantomDataset& dataset);

/// Minibatch SGD (batch 16) on cross-entropy. Weight init consumes
/// SplitMix64(seed); epoch shuffles consume an independent stream seeded with
/// (seed XOR 0xD1B54A32D192ED03). Single-threaded, bit-deterministic.
MlpClassifier train(const PhantomDataset& dataset, int epochs, double learning_rate,
                    std::uint64_t seed, int hidden_dim = 64);

}  // namespace xrbias
