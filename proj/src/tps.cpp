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

#include "xrbias/tps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xrbias/kernels.hpp"

namespace xrbias {
namespace {

// U(r) = r^2 ln(r^2) expressed through the squared radius; the singularity
// at r = 0 is removable and pinned to 0.
inline double tps_kernel_r2(double r2) { return r2 > 0.0 ? r2 * std::log(r2) : 0.0; }

// Dense LU factorisation with partial pivoting, in place. a is n x n
// row-major. Returns false when a pivot collapses to zero.
bool lu_factor(std::vector<double>& a, int n, std::vector<int>& piv) {
    piv.resize(n);
    for (int col = 0; col < n; ++col) {
        int best = col;
        double best_mag = std::abs(a[static_cast<std::size_t>(col) * n + col]);
        for (int row = col + 1; row < n; ++row) {
            const double mag = std::abs(a[static_cast<std::size_t>(row) * n + col]);
            if (mag > best_mag) {
                best = row;
                best_mag = mag;
            }
        }
        if (best_mag == 0.0) return false;
        piv[col] = best;
        if (best != col) {
            for (int k = 0; k < n; ++k) {
                std::swap(a[static_cast<std::size_t>(col) * n + k],
                          a[static_cast<std::size_t>(best) * n + k]);
            }
        }
        const double inv_pivot = 1.0 / a[static_cast<std::size_t>(col) * n + col];
        for (int row = col + 1; row < n; ++row) {
            double& factor = a[static_cast<std::size_t>(row) * n + col];
            factor *= inv_pivot;
            const double f = factor;
            if (f != 0.0) {
                const double* src = &a[static_cast<std::size_t>(col) * n];
                double* dst = &a[static_cast<std::size_t>(row) * n];
                for (int k = col + 1; k < n; ++k) dst[k] -= f * src[k];
            }
        }
    }
    return true;
}

// Solves LU x = b in place using the pivot record. The factorisation swaps
// whole rows, so all permutations are applied to b before the triangular
// substitutions.
void lu_solve(const std::vector<double>& lu, int n, const std::vector<int>& piv, double* b) {
    for (int col = 0; col < n; ++col) {
        if (piv[col] != col) std::swap(b[col], b[piv[col]]);
    }
    for (int col = 0; col < n; ++col) {
        const double bc = b[col];
        if (bc != 0.0) {
            for (int row = col + 1; row < n; ++row) {
                b[row] -= lu[static_cast<std::size_t>(row) * n + col] * bc;
            }
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        double acc = b[row];
        const double* lrow = &lu[static_cast<std::size_t>(row) * n];
        for (int col = row + 1; col < n; ++col) acc -= lrow[col] * b[col];
        b[row] = acc / lrow[row];
    }
}

}  // namespace

void TpsBasis::accumulate_displacement(std::span<const double> delta,
                                       std::span<double> out) const {
    if (delta.size() != num_controls() || out.size() != num_pixels_) {
        throw std::invalid_argument("TPS displacement accumulation: dimension mismatch");
    }
    const auto& ops = kernels::active();
    for (std::size_t j = 0; j < num_controls(); ++j) {
        if (delta[j] != 0.0) {
            ops.axpy(delta[j], columns_.data() + j * num_pixels_, out.data(), num_pixels_);
        }
    }
}

TpsBasis build_tps(int grid_size, const CoordGrid& coords, double ridge) {
    if (grid_size < 2) throw std::invalid_argument("TPS grid_size must be >= 2");
    if (ridge < 0.0) throw std::invalid_argument("TPS ridge must be >= 0");
    if (coords.size() == 0) throw std::invalid_argument("TPS needs a non-empty coordinate grid");

    TpsBasis basis;
    basis.grid_size_ = grid_size;
    basis.ridge_ = ridge;
    basis.width_ = coords.width;
    basis.height_ = coords.height;
    basis.num_pixels_ = coords.size();

    const int m = grid_size * grid_size;
    basis.ctrl_x_.resize(m);
    basis.ctrl_y_.resize(m);
    for (int row = 0; row < grid_size; ++row) {
        for (int col = 0; col < grid_size; ++col) {
            basis.ctrl_x_[static_cast<std::size_t>(row) * grid_size + col] =
                2.0 * col / (grid_size - 1.0) - 1.0;
            basis.ctrl_y_[static_cast<std::size_t>(row) * grid_size + col] =
                2.0 * row / (grid_size - 1.0) - 1.0;
        }
    }

    // Bordered interpolation system:
    //   [ K + ridge*I   P ] [w]   [d]
    //   [ P^T           0 ] [c] = [0]
    // with K_ij = U(|c_i - c_j|) and P_i = (1, x_i, y_i). Solving against the
    // m unit displacement vectors yields X with A X = [I; 0]; the influence
    // of control j over pixel p is then k(p) . X[:, j] where k(p) stacks the
    // kernel values at p and the affine terms.
    const int n = m + 3;
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double ddx = basis.ctrl_x_[i] - basis.ctrl_x_[j];
            const double ddy = basis.ctrl_y_[i] - basis.ctrl_y_[j];
            a[static_cast<std::size_t>(i) * n + j] = tps_kernel_r2(ddx * ddx + ddy * ddy);
        }
        a[static_cast<std::size_t>(i) * n + i] += ridge;
        a[static_cast<std::size_t>(i) * n + m] = 1.0;
        a[static_cast<std::size_t>(i) * n + m + 1] = basis.ctrl_x_[i];
        a[static_cast<std::size_t>(i) * n + m + 2] = basis.ctrl_y_[i];
        a[static_cast<std::size_t>(m) * n + i] = 1.0;
        a[static_cast<std::size_t>(m + 1) * n + i] = basis.ctrl_x_[i];
        a[static_cast<std::size_t>(m + 2) * n + i] = basis.ctrl_y_[i];
    }

    std::vector<int> piv;
    if (!lu_factor(a, n, piv)) {
        throw std::runtime_error("singular TPS system (duplicate control points?)");
    }

    // X[:, j] column-major, length n each.
    std::vector<double> solution(static_cast<std::size_t>(n) * m, 0.0);
    for (int j = 0; j < m; ++j) {
        double* column = solution.data() + static_cast<std::size_t>(j) * n;
        column[j] = 1.0;
        lu_solve(a, n, piv, column);
    }

    // Materialise the influence columns: for each basis function q build its
    // per-pixel column and scatter it into every control's column with the
    // solved weight X[q][j].
    const std::size_t npix = basis.num_pixels_;
    basis.columns_.assign(static_cast<std::size_t>(m) * npix, 0.0);
    std::vector<double> basis_column(npix);
    const auto& ops = kernels::active();
    for (int q = 0; q < n; ++q) {
        if (q < m) {
            const double cx = basis.ctrl_x_[q];
            const double cy = basis.ctrl_y_[q];
            for (std::size_t p = 0; p < npix; ++p) {
                const double ddx = coords.x[p] - cx;
                const double ddy = coords.y[p] - cy;
                basis_column[p] = tps_kernel_r2(ddx * ddx + ddy * ddy);
            }
        } else if (q == m) {
            basis_column.assign(npix, 1.0);
        } else if (q == m + 1) {
            basis_column.assign(coords.x.begin(), coords.x.end());
        } else {
            basis_column.assign(coords.y.begin(), coords.y.end());
        }
        for (int j = 0; j < m; ++j) {
            const double weight = solution[static_cast<std::size_t>(j) * n + q];
            if (weight != 0.0) {
                ops.axpy(weight, basis_column.data(), basis.columns_.data() + static_cast<std::size_t>(j) * npix,
                         npix);
            }
        }
    }
    return basis;
}

WarpedCoords apply_tps(const TpsBasis& basis, const TpsDisplacement& theta,
                       const CoordGrid& coords) {
    if (coords.width != basis.width() || coords.height != basis.height()) {
        throw std::invalid_argument("apply_tps: basis was built for a different grid");
    }
    if (theta.dx.size() != basis.num_controls() || theta.dy.size() != basis.num_controls()) {
        throw std::invalid_argument("apply_tps: displacement size does not match control count");
    }
    WarpedCoords warped{coords.x, coords.y};
    basis.accumulate_displacement(theta.dx, warped.u);
    basis.accumulate_displacement(theta.dy, warped.v);
    return warped;
}

}  // namespace xrbias
