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

#include <filesystem>
#include <span>
#include <vector>

#include "xrbias/image.hpp"
#include "xrbias/tps.hpp"

namespace xrbias {

/// Canonical exponent index set of the bias-field polynomial:
///   { (t, l) : t >= min_degree, l >= min_degree, t + l <= degree }
/// ordered t ascending, then l ascending. Serialised coefficient vectors
/// follow this order.
struct ExponentTable {
    int degree = 0;      // D: maximum total degree
    int min_degree = 0;  // D0: minimum per-axis exponent
    std::vector<int> t;
    std::vector<int> l;

    static ExponentTable make(int degree, int min_degree);
    std::size_t size() const { return t.size(); }
};

/// Cardinality of the canonical index set, by enumeration.
std::size_t param_count(int degree, int min_degree);

/// Reference triangular count (degree - min_degree + 1)(degree - min_degree + 2)/2.
/// It agrees with param_count only at min_degree = 0; for min_degree >= 1 the
/// per-axis exponent rule excludes additional terms (e.g. degree 10,
/// min_degree 1: 45 enumerated vs 55 closed form).
std::size_t param_count_closed_form(int degree, int min_degree);

/// Parameters of the distortion-aware polynomial bias field: coefficients
/// over the canonical index set plus TPS control-point displacements.
struct BiasFieldParams {
    int degree = 0;
    int min_degree = 0;
    std::vector<double> coeffs;  // canonical order
    TpsDisplacement theta;

    static BiasFieldParams zeros(int degree, int min_degree, std::size_t num_controls);
};

/// Per-pixel log-domain bias values (unconstrained reals).
struct LogBiasField {
    int width = 0;
    int height = 0;
    std::vector<double> data;
};

/// B_i = sum_{(t,l)} a_{t,l} * u_i^t * v_i^l over the warped coordinates
/// (u, v) = TPS(theta)(x, y). The warped coordinates are used as-is (not
/// re-clamped to the unit box); mild excursions outside [-1,1] are expected
/// and keep the objective smooth in theta.
LogBiasField eval_bias(const BiasFieldParams& params, const TpsBasis& basis,
                       const CoordGrid& coords);

/// Variant taking precomputed warped coordinates (the attack loop reuses one
/// warp per iteration).
LogBiasField eval_bias_at(const BiasFieldParams& params, const WarpedCoords& warped, int width,
                          int height);

/// X^a = exp(xhat + bhat) clamped to [0, 1].
GrayImage apply_bias(const LogImage& xhat, const LogBiasField& bhat);

/// Gradient of sum_i upstream_i * B_i with respect to the coefficient vector:
/// component k is sum_i upstream_i * u_i^t_k * v_i^l_k.
std::vector<double> grad_bias_a(std::span<const double> upstream, const BiasFieldParams& params,
                                const TpsBasis& basis, const CoordGrid& coords);
std::vector<double> grad_bias_a_at(std::span<const double> upstream,
                                   const BiasFieldParams& params, const WarpedCoords& warped);

/// Gradient of sum_i upstream_i * B_i with respect to (dx, dy): the chain of
/// dB/du (resp. dB/dv) through the constant influence matrix.
TpsDisplacement grad_bias_theta(std::span<const double> upstream, const BiasFieldParams& params,
                                const TpsBasis& basis, const CoordGrid& coords);
TpsDisplacement grad_bias_theta_at(std::span<const double> upstream,
                                   const BiasFieldParams& params, const TpsBasis& basis,
                                   const WarpedCoords& warped);

/// Anisotropic total variation: sum of absolute horizontal plus vertical
/// neighbour differences. A smoothness statistic (low = smooth).
double total_variation(std::span<const double> field, int width, int height);
double total_variation(const LogBiasField& field);

/// JSON round-trip for parameter vectors (fields D, D0, a, dx, dy).
std::string params_to_json(const BiasFieldParams& params);
BiasFieldParams params_from_json(const std::string& text);

/// Visualisation export: the field affinely rescaled to [0, 1] as a PGM, with
/// the original min/max recorded in a .json sidecar next to it.
void export_field_pgm(const LogBiasField& field, const std::filesystem::path& pgm_path);

}  // namespace xrbias
