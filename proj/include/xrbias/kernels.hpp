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

#include <cstddef>

namespace xrbias::kernels {

/// Hard cap on the polynomial degree the kernels can evaluate; power tables
/// live on the stack.
inline constexpr int kMaxPolyDegree = 32;

enum class Backend { kScalar, kAvx2 };

/// Table of the arithmetic inner loops that dominate runtime.
///
/// Contract shared by every variant: a SIMD implementation may only
/// parallelise across *independent output elements*. Each output keeps the
/// exact operation sequence of the scalar reference (no FMA contraction, no
/// reordered accumulation), so all backends produce bit-identical results.
/// Loops that reduce to a single scalar stay out of this table for the same
/// reason.
struct Ops {
    const char* name;

    /// y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    /// out[i] = a[i] + b[i]
    void (*add)(const double* a, const double* b, double* out, std::size_t n);

    /// out[i] = a[i] * b[i]
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);

    /// out[i] = m[i] * a[i] + (1 - m[i]) * b[i]
    void (*lerp_mask)(const double* m, const double* a, const double* b, double* out,
                      std::size_t n);

    /// out[i] = sum_k coef[k] * u[i]^texp[k] * v[i]^lexp[k]
    /// Powers come from per-pixel tables built by iterated multiplication;
    /// terms accumulate in k order.
    void (*poly_eval)(const double* u, const double* v, std::size_t n, const double* coef,
                      const int* texp, const int* lexp, std::size_t ncoef, int max_degree,
                      double* out);

    /// du[i] = sum_k coef[k]*texp[k] * u[i]^(texp[k]-1) * v[i]^lexp[k]
    /// dv[i] = sum_k coef[k]*lexp[k] * u[i]^texp[k]     * v[i]^(lexp[k]-1)
    /// Terms with a zero exponent are skipped.
    void (*poly_grad_uv)(const double* u, const double* v, std::size_t n, const double* coef,
                         const int* texp, const int* lexp, std::size_t ncoef, int max_degree,
                         double* du, double* dv);
};

/// Portable reference implementation; always available.
const Ops& scalar_ops();

/// AVX2 implementation, or nullptr when the build or the CPU lacks it.
const Ops* avx2_ops();

/// The table selected for this process (auto-detected on first use).
const Ops& active();

Backend active_backend();

/// Force a specific backend; throws std::runtime_error if unavailable.
void select_backend(Backend backend);

/// Restore auto-detection (best available backend).
void select_auto();

}  // namespace xrbias::kernels
