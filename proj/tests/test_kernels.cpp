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
#include <vector>

#include <doctest.h>

#include "test_support.hpp"
#include "xrbias/attack.hpp"
#include "xrbias/classifier.hpp"
#include "xrbias/kernels.hpp"
#include "xrbias/rng.hpp"

using namespace xrbias;

namespace {

std::vector<double> random_vec(SplitMix64& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

struct ExpTable {
    std::vector<int> t, l;
    std::vector<double> coef;
    int degree;
};

ExpTable random_table(SplitMix64& rng, int degree) {
    ExpTable table;
    table.degree = degree;
    for (int t = 0; t <= degree; ++t) {
        for (int l = 0; l + t <= degree; ++l) {
            table.t.push_back(t);
            table.l.push_back(l);
            table.coef.push_back(rng.uniform(-1.0, 1.0));
        }
    }
    return table;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("avx2 variants are bit-identical to the scalar reference") {
    const kernels::Ops* avx2 = kernels::avx2_ops();
    if (avx2 == nullptr) {
        MESSAGE("avx2 unavailable on this machine; equivalence not exercised");
        return;
    }
    const kernels::Ops& scalar = kernels::scalar_ops();
    SplitMix64 rng(2024);

    for (std::size_t n : {std::size_t(1), std::size_t(3), std::size_t(4), std::size_t(63),
                          std::size_t(64), std::size_t(129), std::size_t(1000)}) {
        const std::vector<double> a = random_vec(rng, n);
        const std::vector<double> b = random_vec(rng, n);
        const std::vector<double> m = random_vec(rng, n, 0.0, 1.0);
        const double alpha = rng.uniform(-3.0, 3.0);

        std::vector<double> y1 = b, y2 = b;
        scalar.axpy(alpha, a.data(), y1.data(), n);
        avx2->axpy(alpha, a.data(), y2.data(), n);
        CHECK(y1 == y2);

        std::vector<double> o1(n), o2(n);
        scalar.add(a.data(), b.data(), o1.data(), n);
        avx2->add(a.data(), b.data(), o2.data(), n);
        CHECK(o1 == o2);
        scalar.mul(a.data(), b.data(), o1.data(), n);
        avx2->mul(a.data(), b.data(), o2.data(), n);
        CHECK(o1 == o2);
        scalar.lerp_mask(m.data(), a.data(), b.data(), o1.data(), n);
        avx2->lerp_mask(m.data(), a.data(), b.data(), o2.data(), n);
        CHECK(o1 == o2);
    }

    for (int degree : {0, 1, 4, 10}) {
        const ExpTable table = random_table(rng, degree);
        const std::size_t n = 157;
        const std::vector<double> u = random_vec(rng, n, -1.0, 1.0);
        const std::vector<double> v = random_vec(rng, n, -1.0, 1.0);
        std::vector<double> f1(n), f2(n);
        scalar.poly_eval(u.data(), v.data(), n, table.coef.data(), table.t.data(),
                         table.l.data(), table.coef.size(), degree, f1.data());
        avx2->poly_eval(u.data(), v.data(), n, table.coef.data(), table.t.data(),
                        table.l.data(), table.coef.size(), degree, f2.data());
        CHECK(f1 == f2);

        std::vector<double> du1(n), dv1(n), du2(n), dv2(n);
        scalar.poly_grad_uv(u.data(), v.data(), n, table.coef.data(), table.t.data(),
                            table.l.data(), table.coef.size(), degree, du1.data(), dv1.data());
        avx2->poly_grad_uv(u.data(), v.data(), n, table.coef.data(), table.t.data(),
                           table.l.data(), table.coef.size(), degree, du2.data(), dv2.data());
        CHECK(du1 == du2);
        CHECK(dv1 == dv2);
    }
}

TEST_CASE("poly_eval matches a naive pow-based evaluation") {
    SplitMix64 rng(7);
    const ExpTable table = random_table(rng, 6);
    const std::size_t n = 64;
    const std::vector<double> u = random_vec(rng, n, -1.0, 1.0);
    const std::vector<double> v = random_vec(rng, n, -1.0, 1.0);
    std::vector<double> out(n);
    kernels::active().poly_eval(u.data(), v.data(), n, table.coef.data(), table.t.data(),
                                table.l.data(), table.coef.size(), table.degree, out.data());
    for (std::size_t i = 0; i < n; ++i) {
        double expected = 0.0;
        for (std::size_t k = 0; k < table.coef.size(); ++k) {
            expected += table.coef[k] * std::pow(u[i], table.t[k]) * std::pow(v[i], table.l[k]);
        }
        CHECK(testsupport::rel_err(out[i], expected) < 1e-12);
    }
}

TEST_CASE("poly_grad_uv matches finite differences of poly_eval") {
    SplitMix64 rng(11);
    const ExpTable table = random_table(rng, 5);
    std::vector<double> u = random_vec(rng, 16, -0.9, 0.9);
    std::vector<double> v = random_vec(rng, 16, -0.9, 0.9);
    std::vector<double> du(16), dv(16);
    kernels::active().poly_grad_uv(u.data(), v.data(), 16, table.coef.data(), table.t.data(),
                                   table.l.data(), table.coef.size(), table.degree, du.data(),
                                   dv.data());
    auto eval_pixel = [&](std::size_t i) {
        double out;
        kernels::active().poly_eval(&u[i], &v[i], 1, table.coef.data(), table.t.data(),
                                    table.l.data(), table.coef.size(), table.degree, &out);
        return out;
    };
    for (std::size_t i = 0; i < 16; ++i) {
        const double fd_u =
            testsupport::central_diff(u[i], 1e-7, [&] { return eval_pixel(i); });
        const double fd_v =
            testsupport::central_diff(v[i], 1e-7, [&] { return eval_pixel(i); });
        CHECK(testsupport::rel_err(du[i], fd_u, 1e-6) < 1e-6);
        CHECK(testsupport::rel_err(dv[i], fd_v, 1e-6) < 1e-6);
    }
}

TEST_CASE("scalar and avx2 backends agree bit-for-bit through a full attack") {
    if (kernels::avx2_ops() == nullptr) {
        MESSAGE("avx2 unavailable; cross-backend pipeline check skipped");
        return;
    }
    auto run_once = [] {
        const xrbias::PhantomDataset ds = xrbias::synth_dataset(31, 6);
        const xrbias::MlpClassifier model = xrbias::train(ds, 4, 0.05, 3, 16);
        xrbias::AttackConfig cfg;
        cfg.grid_size = 4;
        cfg.degree = 4;
        cfg.min_degree = 1;
        cfg.iterations = 4;
        const xrbias::AttackResult r =
            xrbias::advsbf_attack(model, ds.images[0], ds.labels[0], cfg);
        return std::make_tuple(model.w1()[0], r.loss_trace, r.adversarial.data, r.bias.data);
    };
    kernels::select_backend(kernels::Backend::kScalar);
    const auto scalar_out = run_once();
    kernels::select_backend(kernels::Backend::kAvx2);
    const auto avx2_out = run_once();
    kernels::select_auto();
    CHECK(std::get<0>(scalar_out) == std::get<0>(avx2_out));
    CHECK(std::get<1>(scalar_out) == std::get<1>(avx2_out));
    CHECK(std::get<2>(scalar_out) == std::get<2>(avx2_out));
    CHECK(std::get<3>(scalar_out) == std::get<3>(avx2_out));
}

TEST_CASE("backend selection") {
    kernels::select_backend(kernels::Backend::kScalar);
    CHECK(kernels::active_backend() == kernels::Backend::kScalar);
    CHECK(&kernels::active() == &kernels::scalar_ops());
    if (kernels::avx2_ops() != nullptr) {
        kernels::select_backend(kernels::Backend::kAvx2);
        CHECK(kernels::active_backend() == kernels::Backend::kAvx2);
    } else {
        CHECK_THROWS_AS(kernels::select_backend(kernels::Backend::kAvx2), std::runtime_error);
    }
    kernels::select_auto();
}

}  // TEST_SUITE
