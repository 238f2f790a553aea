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

#include "test_support.hpp"
#include "xrbias/attack.hpp"
#include "xrbias/rng.hpp"

using namespace xrbias;
using testsupport::rel_err;

namespace {

GrayImage mid_gray_image(SplitMix64& rng, int w, int h) {
    GrayImage img(w, h);
    for (double& v : img.data) v = rng.uniform(0.3, 0.7);
    return img;
}

bool is_step_multiple(double value, double eps, int max_steps) {
    const double steps = value / eps;
    return std::abs(steps - std::round(steps)) <= 1e-9 &&
           std::abs(value) <= eps * max_steps + 1e-12;
}

}  // namespace

TEST_SUITE("attack") {

TEST_CASE("config validation") {
    AttackConfig cfg;
    cfg.iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.eps_a = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.degree = 3;
    cfg.min_degree = 2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    CHECK_NOTHROW(cfg.validate());

    NoiseAttackConfig ncfg;
    ncfg.epsilon = -0.1;
    CHECK_THROWS_AS(ncfg.validate(), std::invalid_argument);
    ncfg = {};
    CHECK(ncfg.effective_step() == doctest::Approx(0.01));
}

TEST_CASE("zero-weight model leaves the parameters untouched") {
    const MlpClassifier zero = MlpClassifier::zeros(16, 16, 4);
    SplitMix64 rng(1);
    const GrayImage img = mid_gray_image(rng, 16, 16);
    AttackConfig cfg;
    cfg.grid_size = 2;
    cfg.degree = 2;
    cfg.min_degree = 1;
    cfg.iterations = 4;
    cfg.lambda_a = 0.0;  // keep sign(0) = 0 the only force
    cfg.lambda_theta = 0.0;
    const AttackResult result = advsbf_attack(zero, img, 0, cfg);
    REQUIRE(result.params.has_value());
    for (double a : result.params->coeffs) CHECK(a == 0.0);
    for (double d : result.params->theta.dx) CHECK(d == 0.0);
    for (double d : result.params->theta.dy) CHECK(d == 0.0);
    CHECK_FALSE(result.success);
    CHECK(result.loss_trace.size() == 5);
    CHECK(result.tv_of_bias == 0.0);
}

TEST_CASE("advsbf coefficients stay on the eps lattice") {
    SplitMix64 rng(2);
    for (std::uint64_t model_seed : {2024ULL, 77ULL}) {
        const MlpClassifier model(16, 16, 8, model_seed);
        for (int y = 0; y < 2; ++y) {
            const GrayImage img = mid_gray_image(rng, 16, 16);
            AttackConfig cfg;
            cfg.grid_size = 3;
            cfg.degree = 3;
            cfg.min_degree = 1;
            cfg.iterations = 5;
            const AttackResult result = advsbf_attack(model, img, y, cfg);
            REQUIRE(result.params.has_value());
            CHECK(result.loss_trace.size() == 6);
            for (double a : result.params->coeffs) {
                CHECK(is_step_multiple(a, cfg.eps_a, cfg.iterations));
            }
            for (std::size_t j = 0; j < result.params->theta.size(); ++j) {
                CHECK(is_step_multiple(result.params->theta.dx[j], cfg.eps_theta, cfg.iterations));
                CHECK(is_step_multiple(result.params->theta.dy[j], cfg.eps_theta, cfg.iterations));
            }
        }
    }
}

TEST_CASE("advsbf is deterministic") {
    const MlpClassifier model(16, 16, 8, 11);
    SplitMix64 rng(3);
    const GrayImage img = mid_gray_image(rng, 16, 16);
    AttackConfig cfg;
    cfg.grid_size = 3;
    cfg.degree = 4;
    cfg.min_degree = 1;
    cfg.iterations = 3;
    const AttackResult r1 = advsbf_attack(model, img, 1, cfg);
    const AttackResult r2 = advsbf_attack(model, img, 1, cfg);
    CHECK(r1.loss_trace == r2.loss_trace);
    CHECK(r1.adversarial.data == r2.adversarial.data);
    CHECK(r1.bias.data == r2.bias.data);
    CHECK(r1.params->coeffs == r2.params->coeffs);
    CHECK(r1.success == r2.success);
}

TEST_CASE("objective gradient matches finite differences away from kinks") {
    const CoordGrid coords = coord_grid(16, 16);
    const TpsBasis basis = build_tps(3, coords, 0.0);
    const MlpClassifier model(16, 16, 8, 55);
    SplitMix64 rng(4);
    const GrayImage img = mid_gray_image(rng, 16, 16);
    const LogImage xhat = to_log(img);
    const double lambda_a = 0.03, lambda_theta = 0.03;
    const int y = 1;

    BiasFieldParams params = BiasFieldParams::zeros(3, 1, basis.num_controls());
    for (double& a : params.coeffs) {
        a = rng.uniform(0.01, 0.03) * (rng.below(2) ? 1.0 : -1.0);
    }
    for (std::size_t j = 0; j < params.theta.size(); ++j) {
        params.theta.dx[j] = rng.uniform(0.004, 0.012) * (rng.below(2) ? 1.0 : -1.0);
        params.theta.dy[j] = rng.uniform(0.004, 0.012) * (rng.below(2) ? 1.0 : -1.0);
    }

    const BiasObjective obj =
        eval_bias_objective(model, xhat, coords, basis, params, y, lambda_a, lambda_theta);
    // value decomposes as J minus the penalties
    double l1a = 0.0, l1t = 0.0;
    for (double a : params.coeffs) l1a += std::abs(a);
    for (std::size_t j = 0; j < params.theta.size(); ++j) {
        l1t += std::abs(params.theta.dx[j]) + std::abs(params.theta.dy[j]);
    }
    CHECK(obj.value ==
          doctest::Approx(obj.loss - lambda_a * l1a - lambda_theta * l1t).epsilon(1e-12));

    auto objective_value = [&] {
        return eval_bias_objective(model, xhat, coords, basis, params, y, lambda_a, lambda_theta)
            .value;
    };
    const double h = 1e-6;
    for (std::size_t k = 0; k < params.coeffs.size(); ++k) {
        const double fd = testsupport::central_diff(params.coeffs[k], h, objective_value);
        CHECK(rel_err(obj.grad_coeffs[k], fd, 1e-6) < 1e-4);
    }
    for (std::size_t j = 0; j < params.theta.size(); j += 3) {
        const double fd_x = testsupport::central_diff(params.theta.dx[j], h, objective_value);
        const double fd_y = testsupport::central_diff(params.theta.dy[j], h, objective_value);
        CHECK(rel_err(obj.grad_theta.dx[j], fd_x, 1e-6) < 1e-4);
        CHECK(rel_err(obj.grad_theta.dy[j], fd_y, 1e-6) < 1e-4);
    }
}

TEST_CASE("fgsm saturates the budget exactly where the gradient is nonzero") {
    const MlpClassifier zero = MlpClassifier::zeros(16, 16, 4);
    SplitMix64 rng(5);
    const GrayImage img = mid_gray_image(rng, 16, 16);
    NoiseAttackConfig cfg;
    cfg.iterations = 1;
    const AttackResult none = noise_bias_attack_fgsm(zero, img, 0, cfg);
    for (double b : none.bias.data) CHECK(b == 0.0);
    CHECK(none.loss_trace.size() == 2);
    CHECK_FALSE(none.success);

    const MlpClassifier model(16, 16, 8, 19);
    const AttackResult result = noise_bias_attack_fgsm(model, img, 0, cfg);
    for (double b : result.bias.data) {
        CHECK((b == 0.0 || b == cfg.epsilon || b == -cfg.epsilon));
    }
    double max_abs = 0.0;
    for (double b : result.bias.data) max_abs = std::max(max_abs, std::abs(b));
    CHECK(max_abs == cfg.epsilon);
}

TEST_CASE("one bim iteration with step epsilon reproduces fgsm") {
    const MlpClassifier model(16, 16, 8, 23);
    SplitMix64 rng(6);
    const GrayImage img = mid_gray_image(rng, 16, 16);
    NoiseAttackConfig one;
    one.iterations = 1;
    one.step = one.epsilon;
    const AttackResult bim = noise_bias_attack_bim(model, img, 1, one);
    NoiseAttackConfig fcfg;
    fcfg.iterations = 1;
    const AttackResult fgsm = noise_bias_attack_fgsm(model, img, 1, fcfg);
    CHECK(bim.bias.data == fgsm.bias.data);
    CHECK(bim.adversarial.data == fgsm.adversarial.data);
    CHECK(bim.loss_trace == fgsm.loss_trace);
}

TEST_CASE("bim respects the infinity budget after every iteration") {
    const MlpClassifier model(16, 16, 8, 29);
    SplitMix64 rng(7);
    const GrayImage img = mid_gray_image(rng, 16, 16);
    for (int iters : {1, 3, 10, 25}) {
        NoiseAttackConfig cfg;
        cfg.iterations = iters;
        const AttackResult result = noise_bias_attack_bim(model, img, 0, cfg);
        CHECK(result.loss_trace.size() == static_cast<std::size_t>(iters) + 1);
        for (double b : result.bias.data) CHECK(std::abs(b) <= cfg.epsilon + 1e-15);
    }
}

TEST_CASE("mifgsm with zero momentum reduces to bim") {
    const MlpClassifier model(16, 16, 8, 31);
    SplitMix64 rng(8);
    const GrayImage img = mid_gray_image(rng, 16, 16);
    NoiseAttackConfig cfg;
    cfg.momentum = 0.0;
    const AttackResult mi = noise_bias_attack_mifgsm(model, img, 1, cfg);
    NoiseAttackConfig bcfg;
    const AttackResult bim = noise_bias_attack_bim(model, img, 1, bcfg);
    CHECK(mi.bias.data == bim.bias.data);
    CHECK(mi.loss_trace == bim.loss_trace);

    NoiseAttackConfig def;
    const AttackResult deep = noise_bias_attack_mifgsm(model, img, 1, def);
    for (double b : deep.bias.data) CHECK(std::abs(b) <= def.epsilon + 1e-15);
}

TEST_CASE("input validation for attacks") {
    const MlpClassifier model(16, 16, 4, 1);
    GrayImage wrong(8, 8, 0.5);
    AttackConfig cfg;
    cfg.grid_size = 2;
    cfg.degree = 1;
    cfg.min_degree = 0;
    CHECK_THROWS_AS(advsbf_attack(model, wrong, 0, cfg), std::invalid_argument);
    GrayImage img(16, 16, 0.5);
    CHECK_THROWS_AS(advsbf_attack(model, img, 2, cfg), std::invalid_argument);
    NoiseAttackConfig ncfg;
    CHECK_THROWS_AS(noise_bias_attack_bim(model, wrong, 0, ncfg), std::invalid_argument);
}

}  // TEST_SUITE
