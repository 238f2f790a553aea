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

#include "xrbias/kernels.hpp"

#include <vector>

namespace xrbias::kernels {
namespace {

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void lerp_mask_scalar(const double* m, const double* a, const double* b, double* out,
                      std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = m[i] * a[i] + (1.0 - m[i]) * b[i];
}

void poly_eval_scalar(const double* u, const double* v, std::size_t n, const double* coef,
                      const int* texp, const int* lexp, std::size_t ncoef, int max_degree,
                      double* out) {
    double pu[kMaxPolyDegree + 1];
    double pv[kMaxPolyDegree + 1];
    for (std::size_t i = 0; i < n; ++i) {
        pu[0] = 1.0;
        pv[0] = 1.0;
        for (int d = 1; d <= max_degree; ++d) {
            pu[d] = pu[d - 1] * u[i];
            pv[d] = pv[d - 1] * v[i];
        }
        double acc = 0.0;
        for (std::size_t k = 0; k < ncoef; ++k) {
            acc += coef[k] * (pu[texp[k]] * pv[lexp[k]]);
        }
        out[i] = acc;
    }
}

void poly_grad_uv_scalar(const double* u, const double* v, std::size_t n, const double* coef,
                         const int* texp, const int* lexp, std::size_t ncoef, int max_degree,
                         double* du, double* dv) {
    // Derivative coefficients coef[k]*t and coef[k]*l are hoisted out of the
    // pixel loop; SIMD variants must hoist them identically.
    std::vector<double> ct(ncoef), cl(ncoef);
    for (std::size_t k = 0; k < ncoef; ++k) {
        ct[k] = coef[k] * static_cast<double>(texp[k]);
        cl[k] = coef[k] * static_cast<double>(lexp[k]);
    }
    double pu[kMaxPolyDegree + 1];
    double pv[kMaxPolyDegree + 1];
    for (std::size_t i = 0; i < n; ++i) {
        pu[0] = 1.0;
        pv[0] = 1.0;
        for (int d = 1; d <= max_degree; ++d) {
            pu[d] = pu[d - 1] * u[i];
            pv[d] = pv[d - 1] * v[i];
        }
        double accu = 0.0;
        double accv = 0.0;
        for (std::size_t k = 0; k < ncoef; ++k) {
            const int t = texp[k];
            const int l = lexp[k];
            if (t > 0) accu += ct[k] * (pu[t - 1] * pv[l]);
            if (l > 0) accv += cl[k] * (pu[t] * pv[l - 1]);
        }
        du[i] = accu;
        dv[i] = accv;
    }
}

constexpr Ops kScalarOps = {
    "scalar",        axpy_scalar,      add_scalar,          mul_scalar,
    lerp_mask_scalar, poly_eval_scalar, poly_grad_uv_scalar,
};

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

}  // namespace xrbias::kernels
