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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xrbias/attack.hpp"
#include "xrbias/classifier.hpp"

namespace xrbias {

using AttackFn = std::function<AttackResult(const MlpClassifier&, const GrayImage&, int)>;

/// Whitebox aggregate over a filtered evaluation cohort. Success means the
/// attack flipped an initially correct prediction; initially misclassified
/// images are excluded from the denominator.
struct SuccessStats {
    std::string attack;
    std::string model_id;
    int n_images = 0;  // cohort size after filtering
    int n_success = 0;
    double success_rate = 0.0;
    double mean_bias_tv = 0.0;
    double mean_loss_gain = 0.0;  // mean (J of reported iterate - initial J)
};

/// Full per-image record of a whitebox run, for callers that export or
/// post-process individual results.
struct WhiteboxRun {
    SuccessStats stats;
    std::vector<std::size_t> kept_indices;  // positions in the eval set
    std::vector<AttackResult> results;      // parallel to kept_indices
};

WhiteboxRun run_whitebox(const std::string& attack_name, const std::string& model_id,
                         const MlpClassifier& model, const PhantomDataset& eval_set,
                         const AttackFn& attack);

/// One target's row of a transfer evaluation. For genuine transfers the
/// denominator is the source-successful subset and the adversarial images are
/// 8-bit quantised (what would be read back from disk); the diagonal entry
/// (target weights equal to the source's) restates the whitebox rate.
struct TransferEntry {
    std::string target;
    int n = 0;
    double rate = 0.0;  // NaN when the source-successful subset is empty
    bool is_whitebox = false;
};

struct TransferMatrix {
    std::string attack;
    std::string source;
    SuccessStats whitebox;
    std::vector<TransferEntry> entries;
};

struct NamedModel {
    std::string id;
    const MlpClassifier* model = nullptr;
};

TransferMatrix run_transfer(const std::string& attack_name, const std::string& source_id,
                            const MlpClassifier& source, const std::vector<NamedModel>& targets,
                            const PhantomDataset& eval_set, const AttackFn& attack);

/// Transfer evaluation over an already-completed whitebox run (avoids
/// re-crafting when the caller also needs those per-image results).
TransferMatrix transfer_from_run(const WhiteboxRun& run, const MlpClassifier& source,
                                 const std::vector<NamedModel>& targets,
                                 const PhantomDataset& eval_set);

/// One CSV/JSON report line.
struct ReportRow {
    std::string attack;
    std::string source;
    std::string target;
    int n = 0;
    double success_rate = 0.0;
    double mean_tv = 0.0;
    std::optional<double> mean_loss_gain;  // whitebox rows only
};

struct Report {
    std::vector<ReportRow> rows;
    nlohmann::json config;  // effective run configuration, echoed verbatim

    bool operator==(const Report& other) const;
};

ReportRow row_from(const SuccessStats& stats);
std::vector<ReportRow> rows_from(const TransferMatrix& matrix);

/// CSV with header attack,source,target,n,success_rate,mean_tv; rates carry
/// 4 decimals, TV 6. Deterministic byte-for-byte for identical inputs.
std::string report_csv(const Report& report);

void emit_report(const Report& report, const std::filesystem::path& csv_path,
                 const std::filesystem::path& json_path);

Report load_report_json(const std::filesystem::path& json_path);

}  // namespace xrbias
