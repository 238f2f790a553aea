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

#include <atomic>
#include <stdexcept>
#include <string>

namespace xrbias::kernels {
namespace {

std::atomic<const Ops*> g_active{nullptr};

const Ops* best_available() {
    if (const Ops* avx2 = avx2_ops()) return avx2;
    return &scalar_ops();
}

}  // namespace

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (ops == nullptr) {
        ops = best_available();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

Backend active_backend() {
    return &active() == &scalar_ops() ? Backend::kScalar : Backend::kAvx2;
}

void select_backend(Backend backend) {
    switch (backend) {
        case Backend::kScalar:
            g_active.store(&scalar_ops(), std::memory_order_release);
            return;
        case Backend::kAvx2:
            if (const Ops* avx2 = avx2_ops()) {
                g_active.store(avx2, std::memory_order_release);
                return;
            }
            throw std::runtime_error("avx2 kernels not available on this machine");
    }
    throw std::runtime_error("unknown kernel backend");
}

void select_auto() { g_active.store(best_available(), std::memory_order_release); }

}  // namespace xrbias::kernels
