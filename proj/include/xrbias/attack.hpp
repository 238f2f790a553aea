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

#include <optional>
#include <vector>

#include "xrbias/biasfield.hpp"
#include "xrbias/classifier.hpp"
#include "xrbias/image.hpp"
#include "xrbias/tps.hpp"

namespace xrbias {

/// Configuration of the smooth bias-field attack.
struct AttackConfig {
    int grid_size = 16;     // TPS control points per axis
    int degree = 10;        // D
    int min_degree = 1;     // D0
    double lambda_a = 0.05;
    double lambda_theta = 0.05;
    double eps_a = 0.06;
    double eps_theta = 0.06;
    int iterations = 10;
    double floor = kDefaultLogFloor;
    double ridge = 0.0;

    void validate() const;
};

/// Configuration of the log-domain noise baselines. The perturbation budget
/// is an infinity-norm bound on the log-bias raster.
struct NoiseAttackConfig {
    double epsilon = 0.1;
    int iterations = 10;
    double step = 0.0;      // 0 means epsilon / iterations
    double momentum = 1.0;  // MIFGSM decay

    void validate() const;
    double effective_step() const { return step > 0.0 ? step : epsilon / iterations; }
};

/// Outcome of one attack on one image. `bias` is the log-domain field of the
/// reported iterate; `params` is present for the polynomial attack only.
struct AttackResult {
    GrayImage adversarial;
    std::optional<BiasFieldParams> params;
    LogBiasField bias;
    std::vector<double> loss_trace;  // J at iterates 0..iterations
    double reported_loss = 0.0;      // J of the reported iterate
    bool success = false;
    int final_prediction = 0;
    double tv_of_bias = 0.0;
};

/// The penalised objective F(a, theta) = J(X^a, y) - lambda_a |a|_1
/// - lambda_theta |theta|_1 at one parameter point, with its analytic
/// gradients. Pixels saturated by the [0,1] clamp contribute zero to the
/// chain (clamp subgradient), and the L1 subgradient at 0 is 0.
struct BiasObjective {
    double value = 0.0;
    double loss = 0.0;
    std::vector<double> grad_coeffs;  // dF/da
    TpsDisplacement grad_theta;       // dF/d(dx,dy)
    GrayImage adversarial;
    LogBiasField bias;
    int prediction = 0;
};

BiasObjective eval_bias_objective(const MlpClassifier& model, const LogImage& xhat,
                                  const CoordGrid& coords, const TpsBasis& basis,
                                  const BiasFieldParams& params, int y, double lambda_a,
                                  double lambda_theta);

/// Sign-gradient ascent on F: per iteration a += eps_a * sign(dF/da) and
/// theta += eps_theta * sign(dF/dtheta), starting from zero parameters. All
/// iterations+1 loss values are recorded; the reported iterate is the first
/// one whose prediction flips (a run that never flips reports the identity
/// field), and success means the reported prediction differs from y.
AttackResult advsbf_attack(const MlpClassifier& model, const GrayImage& image, int y,
                           const AttackConfig& cfg);

/// Variant reusing a basis/coords pair shared across a batch (the basis
/// depends only on grid size, image dimensions and ridge).
AttackResult advsbf_attack(const MlpClassifier& model, const GrayImage& image, int y,
                           const AttackConfig& cfg, const TpsBasis& basis,
                           const CoordGrid& coords);

/// Single log-domain step: bias = epsilon * sign(dJ/dbias) at bias = 0.
AttackResult noise_bias_attack_fgsm(const MlpClassifier& model, const GrayImage& image, int y,
                                    const NoiseAttackConfig& cfg,
                                    double floor = kDefaultLogFloor);

/// Iterated sign steps of effective_step(), projected onto
/// |bias|_inf <= epsilon after every step. Reports the final iterate.
AttackResult noise_bias_attack_bim(const MlpClassifier& model, const GrayImage& image, int y,
                                   const NoiseAttackConfig& cfg,
                                   double floor = kDefaultLogFloor);

/// BIM with momentum: g <- momentum * g + grad / |grad|_1 before each sign
/// step (the normalisation is skipped when the gradient vanishes).
AttackResult noise_bias_attack_mifgsm(const MlpClassifier& model, const GrayImage& image, int y,
                                      const NoiseAttackConfig& cfg,
                                      double floor = kDefaultLogFloor);

}  // namespace xrbias
