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

// AVX2 variants of the kernel table. Lanes map to independent output
// elements and every lane replays the scalar operation sequence (mul then
// add, never fused), so results are bit-identical to kernels_scalar.cpp.
// Tails shorter than one vector fall through to the scalar reference.

#include "xrbias/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <vector>

namespace xrbias::kernels {
namespace {

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    if (i < n) scalar_ops().axpy(alpha, x + i, y + i, n - i);
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    if (i < n) scalar_ops().add(a + i, b + i, out + i, n - i);
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    if (i < n) scalar_ops().mul(a + i, b + i, out + i, n - i);
}

void lerp_mask_avx2(const double* m, const double* a, const double* b, double* out,
                    std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vm = _mm256_loadu_pd(m + i);
        const __m256d lhs = _mm256_mul_pd(vm, _mm256_loadu_pd(a + i));
        const __m256d rhs = _mm256_mul_pd(_mm256_sub_pd(one, vm), _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(lhs, rhs));
    }
    if (i < n) scalar_ops().lerp_mask(m + i, a + i, b + i, out + i, n - i);
}

void poly_eval_avx2(const double* u, const double* v, std::size_t n, const double* coef,
                    const int* texp, const int* lexp, std::size_t ncoef, int max_degree,
                    double* out) {
    __m256d pu[kMaxPolyDegree + 1];
    __m256d pv[kMaxPolyDegree + 1];
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vu = _mm256_loadu_pd(u + i);
        const __m256d vv = _mm256_loadu_pd(v + i);
        pu[0] = _mm256_set1_pd(1.0);
        pv[0] = _mm256_set1_pd(1.0);
        for (int d = 1; d <= max_degree; ++d) {
            pu[d] = _mm256_mul_pd(pu[d - 1], vu);
            pv[d] = _mm256_mul_pd(pv[d - 1], vv);
        }
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < ncoef; ++k) {
            const __m256d mono = _mm256_mul_pd(pu[texp[k]], pv[lexp[k]]);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(coef[k]), mono));
        }
        _mm256_storeu_pd(out + i, acc);
    }
    if (i < n) {
        scalar_ops().poly_eval(u + i, v + i, n - i, coef, texp, lexp, ncoef, max_degree, out + i);
    }
}

void poly_grad_uv_avx2(const double* u, const double* v, std::size_t n, const double* coef,
                       const int* texp, const int* lexp, std::size_t ncoef, int max_degree,
                       double* du, double* dv) {
    std::vector<double> ct(ncoef), cl(ncoef);
    for (std::size_t k = 0; k < ncoef; ++k) {
        ct[k] = coef[k] * static_cast<double>(texp[k]);
        cl[k] = coef[k] * static_cast<double>(lexp[k]);
    }
    __m256d pu[kMaxPolyDegree + 1];
    __m256d pv[kMaxPolyDegree + 1];
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vu = _mm256_loadu_pd(u + i);
        const __m256d vv = _mm256_loadu_pd(v + i);
        pu[0] = _mm256_set1_pd(1.0);
        pv[0] = _mm256_set1_pd(1.0);
        for (int d = 1; d <= max_degree; ++d) {
            pu[d] = _mm256_mul_pd(pu[d - 1], vu);
            pv[d] = _mm256_mul_pd(pv[d - 1], vv);
        }
        __m256d accu = _mm256_setzero_pd();
        __m256d accv = _mm256_setzero_pd();
        for (std::size_t k = 0; k < ncoef; ++k) {
            const int t = texp[k];
            const int l = lexp[k];
            if (t > 0) {
                const __m256d mono = _mm256_mul_pd(pu[t - 1], pv[l]);
                accu = _mm256_add_pd(accu, _mm256_mul_pd(_mm256_set1_pd(ct[k]), mono));
            }
            if (l > 0) {
                const __m256d mono = _mm256_mul_pd(pu[t], pv[l - 1]);
                accv = _mm256_add_pd(accv, _mm256_mul_pd(_mm256_set1_pd(cl[k]), mono));
            }
        }
        _mm256_storeu_pd(du + i, accu);
        _mm256_storeu_pd(dv + i, accv);
    }
    if (i < n) {
        scalar_ops().poly_grad_uv(u + i, v + i, n - i, coef, texp, lexp, ncoef, max_degree,
                                  du + i, dv + i);
    }
}

constexpr Ops kAvx2Ops = {
    "avx2",         axpy_avx2,      add_avx2,          mul_avx2,
    lerp_mask_avx2, poly_eval_avx2, poly_grad_uv_avx2,
};

}  // namespace

const Ops* avx2_ops() {
    return __builtin_cpu_supports("avx2") ? &kAvx2Ops : nullptr;
}

}  // namespace xrbias::kernels

#else  // !__AVX2__

namespace xrbias::kernels {

const Ops* avx2_ops() { return nullptr; }

}  // namespace xrbias::kernels

#endif
