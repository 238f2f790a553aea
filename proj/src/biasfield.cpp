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

#include "xrbias/biasfield.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "xrbias/kernels.hpp"

namespace xrbias {
namespace {

void check_index_set(int degree, int min_degree) {
    if (degree < 0 || min_degree < 0 || 2 * min_degree > degree) {
        throw std::invalid_argument("empty polynomial index set (need 0 <= 2*D0 <= D)");
    }
    if (degree > kernels::kMaxPolyDegree) {
        throw std::invalid_argument("polynomial degree exceeds kernel limit");
    }
}

void check_params(const BiasFieldParams& params, const TpsBasis& basis) {
    if (params.coeffs.size() != param_count(params.degree, params.min_degree)) {
        throw std::invalid_argument("coefficient vector does not match the index set");
    }
    if (params.theta.dx.size() != basis.num_controls() ||
        params.theta.dy.size() != basis.num_controls()) {
        throw std::invalid_argument("theta size does not match TPS control count");
    }
}

}  // namespace

ExponentTable ExponentTable::make(int degree, int min_degree) {
    check_index_set(degree, min_degree);
    ExponentTable table;
    table.degree = degree;
    table.min_degree = min_degree;
    for (int t = min_degree; t <= degree; ++t) {
        for (int l = min_degree; l <= degree - t; ++l) {
            table.t.push_back(t);
            table.l.push_back(l);
        }
    }
    return table;
}

std::size_t param_count(int degree, int min_degree) {
    check_index_set(degree, min_degree);
    std::size_t count = 0;
    for (int t = min_degree; t <= degree; ++t) {
        for (int l = min_degree; l <= degree - t; ++l) ++count;
    }
    return count;
}

std::size_t param_count_closed_form(int degree, int min_degree) {
    const std::size_t span = static_cast<std::size_t>(degree - min_degree + 1);
    return span * (span + 1) / 2;
}

BiasFieldParams BiasFieldParams::zeros(int degree, int min_degree, std::size_t num_controls) {
    BiasFieldParams params;
    params.degree = degree;
    params.min_degree = min_degree;
    params.coeffs.assign(param_count(degree, min_degree), 0.0);
    params.theta = TpsDisplacement::zeros(num_controls);
    return params;
}

LogBiasField eval_bias_at(const BiasFieldParams& params, const WarpedCoords& warped, int width,
                          int height) {
    const ExponentTable table = ExponentTable::make(params.degree, params.min_degree);
    if (params.coeffs.size() != table.size()) {
        throw std::invalid_argument("coefficient vector does not match the index set");
    }
    const std::size_t npix = warped.u.size();
    LogBiasField field{width, height, std::vector<double>(npix)};
    kernels::active().poly_eval(warped.u.data(), warped.v.data(), npix, params.coeffs.data(),
                                table.t.data(), table.l.data(), table.size(), params.degree,
                                field.data.data());
    return field;
}

LogBiasField eval_bias(const BiasFieldParams& params, const TpsBasis& basis,
                       const CoordGrid& coords) {
    check_params(params, basis);
    const WarpedCoords warped = apply_tps(basis, params.theta, coords);
    return eval_bias_at(params, warped, coords.width, coords.height);
}

GrayImage apply_bias(const LogImage& xhat, const LogBiasField& bhat) {
    if (xhat.width != bhat.width || xhat.height != bhat.height) {
        throw std::invalid_argument("apply_bias: dimension mismatch");
    }
    LogImage shifted{xhat.width, xhat.height, std::vector<double>(xhat.data.size())};
    kernels::active().add(xhat.data.data(), bhat.data.data(), shifted.data.data(),
                          xhat.data.size());
    return from_log(shifted);
}

std::vector<double> grad_bias_a_at(std::span<const double> upstream,
                                   const BiasFieldParams& params, const WarpedCoords& warped) {
    const ExponentTable table = ExponentTable::make(params.degree, params.min_degree);
    if (upstream.size() != warped.u.size()) {
        throw std::invalid_argument("grad_bias_a: upstream size mismatch");
    }
    const std::size_t ncoef = table.size();
    std::vector<double> grad(ncoef, 0.0);
    std::vector<double> mono(ncoef);
    double pu[kernels::kMaxPolyDegree + 1];
    double pv[kernels::kMaxPolyDegree + 1];
    const auto& ops = kernels::active();
    for (std::size_t i = 0; i < upstream.size(); ++i) {
        if (upstream[i] == 0.0) continue;
        pu[0] = 1.0;
        pv[0] = 1.0;
        for (int d = 1; d <= params.degree; ++d) {
            pu[d] = pu[d - 1] * warped.u[i];
            pv[d] = pv[d - 1] * warped.v[i];
        }
        for (std::size_t k = 0; k < ncoef; ++k) mono[k] = pu[table.t[k]] * pv[table.l[k]];
        ops.axpy(upstream[i], mono.data(), grad.data(), ncoef);
    }
    return grad;
}

std::vector<double> grad_bias_a(std::span<const double> upstream, const BiasFieldParams& params,
                                const TpsBasis& basis, const CoordGrid& coords) {
    check_params(params, basis);
    const WarpedCoords warped = apply_tps(basis, params.theta, coords);
    return grad_bias_a_at(upstream, params, warped);
}

TpsDisplacement grad_bias_theta_at(std::span<const double> upstream,
                                   const BiasFieldParams& params, const TpsBasis& basis,
                                   const WarpedCoords& warped) {
    const ExponentTable table = ExponentTable::make(params.degree, params.min_degree);
    const std::size_t npix = warped.u.size();
    if (upstream.size() != npix) {
        throw std::invalid_argument("grad_bias_theta: upstream size mismatch");
    }
    const auto& ops = kernels::active();
    std::vector<double> dfield_du(npix), dfield_dv(npix);
    ops.poly_grad_uv(warped.u.data(), warped.v.data(), npix, params.coeffs.data(),
                     table.t.data(), table.l.data(), table.size(), params.degree,
                     dfield_du.data(), dfield_dv.data());
    std::vector<double> weighted_u(npix), weighted_v(npix);
    ops.mul(upstream.data(), dfield_du.data(), weighted_u.data(), npix);
    ops.mul(upstream.data(), dfield_dv.data(), weighted_v.data(), npix);

    // influence^T * weighted, one fixed-order dot per control point.
    TpsDisplacement grad = TpsDisplacement::zeros(basis.num_controls());
    for (std::size_t j = 0; j < basis.num_controls(); ++j) {
        const std::span<const double> column = basis.influence_column(j);
        double acc_x = 0.0;
        double acc_y = 0.0;
        for (std::size_t i = 0; i < npix; ++i) {
            acc_x += weighted_u[i] * column[i];
            acc_y += weighted_v[i] * column[i];
        }
        grad.dx[j] = acc_x;
        grad.dy[j] = acc_y;
    }
    return grad;
}

TpsDisplacement grad_bias_theta(std::span<const double> upstream, const BiasFieldParams& params,
                                const TpsBasis& basis, const CoordGrid& coords) {
    check_params(params, basis);
    const WarpedCoords warped = apply_tps(basis, params.theta, coords);
    return grad_bias_theta_at(upstream, params, basis, warped);
}

double total_variation(std::span<const double> field, int width, int height) {
    if (width <= 0 || height <= 0 ||
        field.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("total_variation: empty or mismatched raster");
    }
    double tv = 0.0;
    for (int row = 0; row < height; ++row) {
        const double* line = field.data() + static_cast<std::size_t>(row) * width;
        for (int col = 0; col + 1 < width; ++col) tv += std::abs(line[col + 1] - line[col]);
    }
    for (int row = 0; row + 1 < height; ++row) {
        const double* line = field.data() + static_cast<std::size_t>(row) * width;
        for (int col = 0; col < width; ++col) tv += std::abs(line[width + col] - line[col]);
    }
    return tv;
}

double total_variation(const LogBiasField& field) {
    return total_variation(field.data, field.width, field.height);
}

std::string params_to_json(const BiasFieldParams& params) {
    nlohmann::json j;
    j["D"] = params.degree;
    j["D0"] = params.min_degree;
    j["a"] = params.coeffs;
    j["dx"] = params.theta.dx;
    j["dy"] = params.theta.dy;
    return j.dump(2);
}

BiasFieldParams params_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    BiasFieldParams params;
    params.degree = j.at("D").get<int>();
    params.min_degree = j.at("D0").get<int>();
    params.coeffs = j.at("a").get<std::vector<double>>();
    params.theta.dx = j.at("dx").get<std::vector<double>>();
    params.theta.dy = j.at("dy").get<std::vector<double>>();
    if (params.coeffs.size() != param_count(params.degree, params.min_degree)) {
        throw std::invalid_argument("params JSON: coefficient count does not match D, D0");
    }
    if (params.theta.dx.size() != params.theta.dy.size()) {
        throw std::invalid_argument("params JSON: dx and dy lengths differ");
    }
    return params;
}

void export_field_pgm(const LogBiasField& field, const std::filesystem::path& pgm_path) {
    const auto [min_it, max_it] = std::minmax_element(field.data.begin(), field.data.end());
    const double lo = *min_it;
    const double hi = *max_it;
    const double scale = hi > lo ? 1.0 / (hi - lo) : 0.0;
    GrayImage img(field.width, field.height);
    for (std::size_t i = 0; i < field.data.size(); ++i) {
        img.data[i] = (field.data[i] - lo) * scale;
    }
    save_pgm(img, pgm_path);

    nlohmann::json sidecar;
    sidecar["min"] = lo;
    sidecar["max"] = hi;
    std::filesystem::path json_path = pgm_path;
    json_path.replace_extension(".json");
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write " + json_path.string());
    out << sidecar.dump(2) << "\n";
}

}  // namespace xrbias
