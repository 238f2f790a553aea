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

#include "xrbias/evalharness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace xrbias {
namespace {

bool same_double(double a, double b) {
    if (std::isnan(a) && std::isnan(b)) return true;
    return a == b;
}

std::string format_row(const ReportRow& row) {
    char buffer[256];
    std::snprintf(buffer, sizeof(buffer), "%s,%s,%s,%d,%.4f,%.6f\n", row.attack.c_str(),
                  row.source.c_str(), row.target.c_str(), row.n, row.success_rate, row.mean_tv);
    return buffer;
}

}  // namespace

WhiteboxRun run_whitebox(const std::string& attack_name, const std::string& model_id,
                         const MlpClassifier& model, const PhantomDataset& eval_set,
                         const AttackFn& attack) {
    WhiteboxRun run;
    run.stats.attack = attack_name;
    run.stats.model_id = model_id;

    for (std::size_t i = 0; i < eval_set.size(); ++i) {
        if (predict(model, eval_set.images[i]) == eval_set.labels[i]) {
            run.kept_indices.push_back(i);
        }
    }
    if (run.kept_indices.empty()) {
        throw std::runtime_error("run_whitebox: no correctly classified image in the eval set");
    }

    double tv_sum = 0.0;
    double gain_sum = 0.0;
    int successes = 0;
    run.results.reserve(run.kept_indices.size());
    for (std::size_t idx : run.kept_indices) {
        AttackResult result = attack(model, eval_set.images[idx], eval_set.labels[idx]);
        if (result.success) ++successes;
        tv_sum += result.tv_of_bias;
        gain_sum += result.reported_loss - result.loss_trace.front();
        run.results.push_back(std::move(result));
    }

    const double n = static_cast<double>(run.kept_indices.size());
    run.stats.n_images = static_cast<int>(run.kept_indices.size());
    run.stats.n_success = successes;
    run.stats.success_rate = successes / n;
    run.stats.mean_bias_tv = tv_sum / n;
    run.stats.mean_loss_gain = gain_sum / n;
    return run;
}

TransferMatrix run_transfer(const std::string& attack_name, const std::string& source_id,
                            const MlpClassifier& source, const std::vector<NamedModel>& targets,
                            const PhantomDataset& eval_set, const AttackFn& attack) {
    const WhiteboxRun run = run_whitebox(attack_name, source_id, source, eval_set, attack);
    return transfer_from_run(run, source, targets, eval_set);
}

TransferMatrix transfer_from_run(const WhiteboxRun& run, const MlpClassifier& source,
                                 const std::vector<NamedModel>& targets,
                                 const PhantomDataset& eval_set) {
    TransferMatrix matrix;
    matrix.attack = run.stats.attack;
    matrix.source = run.stats.model_id;
    matrix.whitebox = run.stats;

    // Source-successful adversarial examples quantised the way they would be
    // written to and read back from disk.
    std::vector<GrayImage> crafted;
    std::vector<int> labels;
    for (std::size_t k = 0; k < run.results.size(); ++k) {
        if (run.results[k].success) {
            crafted.push_back(quantize8(run.results[k].adversarial));
            labels.push_back(eval_set.labels[run.kept_indices[k]]);
        }
    }

    for (const NamedModel& target : targets) {
        if (target.model == nullptr) throw std::invalid_argument("run_transfer: null target");
        TransferEntry entry;
        entry.target = target.id;
        if (target.model->same_weights(source)) {
            entry.is_whitebox = true;
            entry.n = run.stats.n_images;
            entry.rate = run.stats.success_rate;
        } else if (crafted.empty()) {
            entry.n = 0;
            entry.rate = std::numeric_limits<double>::quiet_NaN();
        } else {
            int flipped = 0;
            for (std::size_t k = 0; k < crafted.size(); ++k) {
                if (predict(*target.model, crafted[k]) != labels[k]) ++flipped;
            }
            entry.n = static_cast<int>(crafted.size());
            entry.rate = static_cast<double>(flipped) / static_cast<double>(crafted.size());
        }
        matrix.entries.push_back(std::move(entry));
    }
    return matrix;
}

bool Report::operator==(const Report& other) const {
    if (rows.size() != other.rows.size() || config != other.config) return false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ReportRow& a = rows[i];
        const ReportRow& b = other.rows[i];
        if (a.attack != b.attack || a.source != b.source || a.target != b.target || a.n != b.n ||
            !same_double(a.success_rate, b.success_rate) || !same_double(a.mean_tv, b.mean_tv)) {
            return false;
        }
        if (a.mean_loss_gain.has_value() != b.mean_loss_gain.has_value()) return false;
        if (a.mean_loss_gain && !same_double(*a.mean_loss_gain, *b.mean_loss_gain)) return false;
    }
    return true;
}

ReportRow row_from(const SuccessStats& stats) {
    ReportRow row;
    row.attack = stats.attack;
    row.source = stats.model_id;
    row.target = stats.model_id;
    row.n = stats.n_images;
    row.success_rate = stats.success_rate;
    row.mean_tv = stats.mean_bias_tv;
    row.mean_loss_gain = stats.mean_loss_gain;
    return row;
}

std::vector<ReportRow> rows_from(const TransferMatrix& matrix) {
    std::vector<ReportRow> rows;
    for (const TransferEntry& entry : matrix.entries) {
        ReportRow row;
        row.attack = matrix.attack;
        row.source = matrix.source;
        row.target = entry.target;
        row.n = entry.n;
        row.success_rate = entry.rate;
        row.mean_tv = matrix.whitebox.mean_bias_tv;
        if (entry.is_whitebox) row.mean_loss_gain = matrix.whitebox.mean_loss_gain;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string report_csv(const Report& report) {
    std::string csv = "attack,source,target,n,success_rate,mean_tv\n";
    for (const ReportRow& row : report.rows) csv += format_row(row);
    return csv;
}

void emit_report(const Report& report, const std::filesystem::path& csv_path,
                 const std::filesystem::path& json_path) {
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + csv_path.string());
        out << report_csv(report);
    }
    nlohmann::json j;
    j["config"] = report.config;
    j["rows"] = nlohmann::json::array();
    for (const ReportRow& row : report.rows) {
        nlohmann::json r;
        r["attack"] = row.attack;
        r["source"] = row.source;
        r["target"] = row.target;
        r["n"] = row.n;
        if (std::isnan(row.success_rate)) {
            r["success_rate"] = nullptr;
        } else {
            r["success_rate"] = row.success_rate;
        }
        r["mean_tv"] = row.mean_tv;
        if (row.mean_loss_gain) r["mean_loss_gain"] = *row.mean_loss_gain;
        j["rows"].push_back(std::move(r));
    }
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + json_path.string());
    out << j.dump(2) << "\n";
}

Report load_report_json(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open " + json_path.string());
    nlohmann::json j;
    in >> j;
    Report report;
    report.config = j.value("config", nlohmann::json::object());
    for (const nlohmann::json& r : j.at("rows")) {
        ReportRow row;
        row.attack = r.at("attack").get<std::string>();
        row.source = r.at("source").get<std::string>();
        row.target = r.at("target").get<std::string>();
        row.n = r.at("n").get<int>();
        row.success_rate = r.at("success_rate").is_null()
                               ? std::numeric_limits<double>::quiet_NaN()
                               : r.at("success_rate").get<double>();
        row.mean_tv = r.at("mean_tv").get<double>();
        if (r.contains("mean_loss_gain")) row.mean_loss_gain = r.at("mean_loss_gain").get<double>();
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace xrbias
