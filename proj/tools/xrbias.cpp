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

// Command-line front end. Subcommands: synth-data, train, attack, transfer,
// interpret, report. Values come from built-in defaults, overridden by a
// --config JSON file, overridden by explicit flags; the merged effective
// config is echoed next to every run's outputs. Exit codes: 0 success,
// 1 runtime failure, 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xrbias/attack.hpp"
#include "xrbias/biasfield.hpp"
#include "xrbias/classifier.hpp"
#include "xrbias/evalharness.hpp"
#include "xrbias/image.hpp"
#include "xrbias/interpret.hpp"
#include "xrbias/kernels.hpp"
#include "xrbias/tps.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    json j;
    in >> j;
    return j;
}

// Config-file values fill in only the options the user did not set on the
// command line.
template <typename T>
void merge_key(const json& cfg, const CLI::App& cmd, const std::string& flag, T& value) {
    const std::string key = flag.substr(2);  // strip leading --
    std::string json_key = key;
    std::replace(json_key.begin(), json_key.end(), '-', '_');
    if (cmd.get_option(flag)->count() == 0 && cfg.contains(json_key)) {
        value = cfg.at(json_key).get<T>();
    }
}

void write_json_file(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

fs::path sibling_config_path(const fs::path& output_file) {
    fs::path p = output_file;
    p.replace_extension();
    p += ".run_config.json";
    return p;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

struct AttackFlags {
    std::string attack;
    // polynomial bias-field attack
    int grid = 16;
    int degree = 10;
    int d0 = 1;
    double lambda_a = 0.05;
    double lambda_theta = 0.05;
    double eps_a = 0.06;
    double eps_theta = 0.06;
    // noise baselines
    double eps = 0.1;
    double step = 0.0;
    double momentum = 1.0;
    // shared
    int iters = 0;  // 0 = per-attack default (10)
    double floor = xrbias::kDefaultLogFloor;
    double ridge = 0.0;
    int limit = 0;  // cap on eval images, 0 = all
};

void add_attack_flags(CLI::App* cmd, AttackFlags& f) {
    cmd->add_option("--attack", f.attack, "attack name")
        ->check(CLI::IsMember({"advsbf", "fgsm", "bim", "mifgsm"}));
    cmd->add_option("--grid", f.grid, "TPS control points per axis (advsbf)");
    cmd->add_option("--degree", f.degree, "maximum total polynomial degree D (advsbf)");
    cmd->add_option("--d0", f.d0, "minimum per-axis exponent D0 (advsbf)");
    cmd->add_option("--lambda-a", f.lambda_a, "L1 penalty on coefficients (advsbf)");
    cmd->add_option("--lambda-theta", f.lambda_theta, "L1 penalty on displacements (advsbf)");
    cmd->add_option("--eps-a", f.eps_a, "coefficient step size (advsbf)");
    cmd->add_option("--eps-theta", f.eps_theta, "displacement step size (advsbf)");
    cmd->add_option("--eps", f.eps, "max log-domain perturbation (noise baselines)");
    cmd->add_option("--step", f.step, "per-iteration step, 0 = eps/iters (noise baselines)");
    cmd->add_option("--momentum", f.momentum, "momentum decay (mifgsm)");
    cmd->add_option("--iters", f.iters, "iteration count (0 = attack default)");
    cmd->add_option("--floor", f.floor, "intensity floor before the log transform");
    cmd->add_option("--ridge", f.ridge, "TPS kernel ridge (advsbf)");
    cmd->add_option("--limit", f.limit, "use only the first N eval images (0 = all)");
}

void merge_attack_flags(const json& cfg, const CLI::App& cmd, AttackFlags& f) {
    merge_key(cfg, cmd, "--attack", f.attack);
    merge_key(cfg, cmd, "--grid", f.grid);
    merge_key(cfg, cmd, "--degree", f.degree);
    merge_key(cfg, cmd, "--d0", f.d0);
    merge_key(cfg, cmd, "--lambda-a", f.lambda_a);
    merge_key(cfg, cmd, "--lambda-theta", f.lambda_theta);
    merge_key(cfg, cmd, "--eps-a", f.eps_a);
    merge_key(cfg, cmd, "--eps-theta", f.eps_theta);
    merge_key(cfg, cmd, "--eps", f.eps);
    merge_key(cfg, cmd, "--step", f.step);
    merge_key(cfg, cmd, "--momentum", f.momentum);
    merge_key(cfg, cmd, "--iters", f.iters);
    merge_key(cfg, cmd, "--floor", f.floor);
    merge_key(cfg, cmd, "--ridge", f.ridge);
    merge_key(cfg, cmd, "--limit", f.limit);
}

json attack_flags_json(const AttackFlags& f) {
    json j;
    j["attack"] = f.attack;
    if (f.attack == "advsbf") {
        j["grid"] = f.grid;
        j["degree"] = f.degree;
        j["d0"] = f.d0;
        j["lambda_a"] = f.lambda_a;
        j["lambda_theta"] = f.lambda_theta;
        j["eps_a"] = f.eps_a;
        j["eps_theta"] = f.eps_theta;
        j["ridge"] = f.ridge;
    } else {
        j["eps"] = f.eps;
        j["step"] = f.step;
        if (f.attack == "mifgsm") j["momentum"] = f.momentum;
    }
    j["iters"] = f.iters > 0 ? f.iters : (f.attack == "fgsm" ? 1 : 10);
    j["floor"] = f.floor;
    j["limit"] = f.limit;
    return j;
}

// Owns whatever the attack closure needs (TPS basis, coordinate grid).
struct AttackRunner {
    xrbias::AttackFn fn;
    std::shared_ptr<xrbias::TpsBasis> basis;
    std::shared_ptr<xrbias::CoordGrid> coords;
};

bool known_attack(const std::string& name) {
    return name == "advsbf" || name == "fgsm" || name == "bim" || name == "mifgsm";
}

AttackRunner make_attack_runner(const AttackFlags& f, int width, int height) {
    if (!known_attack(f.attack)) {
        throw std::invalid_argument("unknown attack name: " + f.attack);
    }
    AttackRunner runner;
    if (f.attack == "advsbf") {
        xrbias::AttackConfig cfg;
        cfg.grid_size = f.grid;
        cfg.degree = f.degree;
        cfg.min_degree = f.d0;
        cfg.lambda_a = f.lambda_a;
        cfg.lambda_theta = f.lambda_theta;
        cfg.eps_a = f.eps_a;
        cfg.eps_theta = f.eps_theta;
        cfg.iterations = f.iters > 0 ? f.iters : 10;
        cfg.floor = f.floor;
        cfg.ridge = f.ridge;
        cfg.validate();
        runner.coords = std::make_shared<xrbias::CoordGrid>(xrbias::coord_grid(width, height));
        runner.basis = std::make_shared<xrbias::TpsBasis>(
            xrbias::build_tps(cfg.grid_size, *runner.coords, cfg.ridge));
        auto basis = runner.basis;
        auto coords = runner.coords;
        runner.fn = [cfg, basis, coords](const xrbias::MlpClassifier& model,
                                         const xrbias::GrayImage& image, int y) {
            return xrbias::advsbf_attack(model, image, y, cfg, *basis, *coords);
        };
        return runner;
    }
    xrbias::NoiseAttackConfig cfg;
    cfg.epsilon = f.eps;
    cfg.step = f.step;
    cfg.momentum = f.momentum;
    cfg.iterations = f.iters > 0 ? f.iters : (f.attack == "fgsm" ? 1 : 10);
    cfg.validate();
    const double floor = f.floor;
    if (f.attack == "fgsm") {
        runner.fn = [cfg, floor](const auto& model, const auto& image, int y) {
            return xrbias::noise_bias_attack_fgsm(model, image, y, cfg, floor);
        };
    } else if (f.attack == "bim") {
        runner.fn = [cfg, floor](const auto& model, const auto& image, int y) {
            return xrbias::noise_bias_attack_bim(model, image, y, cfg, floor);
        };
    } else {
        runner.fn = [cfg, floor](const auto& model, const auto& image, int y) {
            return xrbias::noise_bias_attack_mifgsm(model, image, y, cfg, floor);
        };
    }
    return runner;
}

xrbias::PhantomDataset load_eval_set(const std::string& dir, int limit) {
    xrbias::PhantomDataset dataset = xrbias::load_dataset(dir);
    if (limit > 0 && static_cast<std::size_t>(limit) < dataset.size()) {
        dataset.images.resize(limit);
        dataset.labels.resize(limit);
    }
    return dataset;
}

// ---------------------------------------------------------------------------

int cmd_synth_data(std::uint64_t seed, int n_per_class, const std::string& out_dir) {
    const xrbias::PhantomDataset dataset = xrbias::synth_dataset(seed, n_per_class);
    xrbias::save_dataset(dataset, out_dir);
    json cfg{{"subcommand", "synth-data"}, {"seed", seed}, {"n", n_per_class}, {"out", out_dir}};
    write_json_file(cfg, fs::path(out_dir) / "run_config.json");
    std::printf("wrote %zu images to %s\n", dataset.size(), out_dir.c_str());
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& test_dir, int epochs, double lr,
              int hidden, std::uint64_t seed, const std::string& out_file) {
    const xrbias::PhantomDataset dataset = xrbias::load_dataset(data_dir);
    const xrbias::MlpClassifier model = xrbias::train(dataset, epochs, lr, seed, hidden);
    model.save(out_file);
    std::printf("train_accuracy=%.4f\n", xrbias::accuracy(model, dataset));
    if (!test_dir.empty()) {
        const xrbias::PhantomDataset test_set = xrbias::load_dataset(test_dir);
        std::printf("test_accuracy=%.4f\n", xrbias::accuracy(model, test_set));
    }
    json cfg{{"subcommand", "train"}, {"data", data_dir},   {"test_data", test_dir},
             {"epochs", epochs},      {"lr", lr},           {"hidden", hidden},
             {"seed", seed},          {"out", out_file}};
    write_json_file(cfg, sibling_config_path(out_file));
    return 0;
}

int cmd_attack(const std::string& model_file, const std::string& data_dir, const AttackFlags& f,
               const std::string& out_dir) {
    const xrbias::MlpClassifier model = xrbias::MlpClassifier::load(model_file);
    const xrbias::PhantomDataset eval_set = load_eval_set(data_dir, f.limit);
    const AttackRunner runner =
        make_attack_runner(f, model.input_width(), model.input_height());

    const xrbias::WhiteboxRun run =
        xrbias::run_whitebox(f.attack, stem_of(model_file), model, eval_set, runner.fn);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    std::ofstream losses(out / "losses.csv", std::ios::binary);
    if (!losses) throw std::runtime_error("cannot write losses.csv");
    json manifest;
    manifest["attack"] = f.attack;
    manifest["model"] = model_file;
    manifest["data"] = data_dir;
    manifest["rows"] = json::array();
    char name[64], num[32];
    for (std::size_t k = 0; k < run.results.size(); ++k) {
        const std::size_t index = run.kept_indices[k];
        const xrbias::AttackResult& result = run.results[k];

        std::snprintf(name, sizeof(name), "adv_%05zu.pgm", index);
        xrbias::save_pgm(result.adversarial, out / name);
        json row{{"index", index},
                 {"label", eval_set.labels[index]},
                 {"success", result.success},
                 {"final_prediction", result.final_prediction},
                 {"tv_of_bias", result.tv_of_bias},
                 {"reported_loss", result.reported_loss},
                 {"adv_pgm", name}};

        std::snprintf(name, sizeof(name), "field_%05zu.pgm", index);
        xrbias::export_field_pgm(result.bias, out / name);
        row["field_pgm"] = name;

        if (result.params) {
            std::snprintf(name, sizeof(name), "params_%05zu.json", index);
            std::ofstream pj(out / name);
            pj << xrbias::params_to_json(*result.params) << "\n";
            row["params_json"] = name;
        }
        manifest["rows"].push_back(std::move(row));

        losses << index;
        for (double j_val : result.loss_trace) {
            std::snprintf(num, sizeof(num), ",%.17g", j_val);
            losses << num;
        }
        losses << "\n";
    }
    write_json_file(manifest, out / "results.json");

    xrbias::Report report;
    report.rows.push_back(xrbias::row_from(run.stats));
    json cfg = attack_flags_json(f);
    cfg["subcommand"] = "attack";
    cfg["model"] = model_file;
    cfg["data"] = data_dir;
    cfg["out"] = out_dir;
    report.config = cfg;
    xrbias::emit_report(report, out / "report.csv", out / "report.json");
    write_json_file(cfg, out / "run_config.json");

    std::printf("attack=%s n=%d success_rate=%.4f mean_tv=%.6f\n", f.attack.c_str(),
                run.stats.n_images, run.stats.success_rate, run.stats.mean_bias_tv);
    return 0;
}

int cmd_transfer(const std::vector<std::string>& model_files, const std::string& data_dir,
                 const AttackFlags& f, const std::string& out_dir) {
    std::vector<xrbias::MlpClassifier> models;
    models.reserve(model_files.size());
    for (const std::string& file : model_files) models.push_back(xrbias::MlpClassifier::load(file));
    const xrbias::PhantomDataset eval_set = load_eval_set(data_dir, f.limit);
    const AttackRunner runner =
        make_attack_runner(f, models.front().input_width(), models.front().input_height());

    std::vector<xrbias::NamedModel> targets;
    for (std::size_t i = 0; i < models.size(); ++i) {
        targets.push_back({stem_of(model_files[i]), &models[i]});
    }

    xrbias::Report report;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const xrbias::TransferMatrix matrix = xrbias::run_transfer(
            f.attack, stem_of(model_files[i]), models[i], targets, eval_set, runner.fn);
        for (xrbias::ReportRow& row : xrbias::rows_from(matrix)) {
            report.rows.push_back(std::move(row));
        }
    }
    json cfg = attack_flags_json(f);
    cfg["subcommand"] = "transfer";
    cfg["models"] = model_files;
    cfg["data"] = data_dir;
    cfg["out"] = out_dir;
    report.config = cfg;

    fs::create_directories(out_dir);
    xrbias::emit_report(report, fs::path(out_dir) / "transfer.csv",
                        fs::path(out_dir) / "transfer.json");
    write_json_file(cfg, fs::path(out_dir) / "run_config.json");
    std::printf("transfer rows=%zu -> %s\n", report.rows.size(), out_dir.c_str());
    return 0;
}

int cmd_interpret(const std::string& model_file, const std::string& attack_dir,
                  const std::string& data_dir, const std::string& average_dir, int iters,
                  double lambda1, double lambda2, double step, int limit,
                  const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    xrbias::InterpretConfig cfg;
    cfg.iterations = iters;
    cfg.lambda1 = lambda1;
    cfg.lambda2 = lambda2;
    cfg.step = step;

    if (!average_dir.empty()) {
        // Averaging-only mode over a directory of previously exported maps.
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(average_dir)) {
            if (entry.path().extension() == ".pgm" &&
                entry.path().filename().string().rfind("map_", 0) == 0) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw std::runtime_error("no map_*.pgm files in " + average_dir);
        std::vector<xrbias::InterpretMap> maps;
        for (const fs::path& file : files) maps.push_back(xrbias::load_map_pgm(file));
        xrbias::export_map(xrbias::average_maps(maps), cfg, out / "mean_map.pgm");
        std::printf("averaged %zu maps -> %s\n", maps.size(), out_dir.c_str());
        return 0;
    }

    const xrbias::MlpClassifier model = xrbias::MlpClassifier::load(model_file);
    const xrbias::PhantomDataset dataset = xrbias::load_dataset(data_dir);
    std::ifstream mf(fs::path(attack_dir) / "results.json");
    if (!mf) throw std::runtime_error("cannot open results.json in " + attack_dir);
    json manifest;
    mf >> manifest;

    std::vector<xrbias::InterpretMap> maps;
    char name[64];
    int skipped = 0;
    for (const json& row : manifest.at("rows")) {
        if (!row.at("success").get<bool>()) continue;
        if (limit > 0 && static_cast<int>(maps.size()) >= limit) break;
        const std::size_t index = row.at("index").get<std::size_t>();
        const int label = row.at("label").get<int>();
        const xrbias::GrayImage x_adv =
            xrbias::load_pgm(fs::path(attack_dir) / row.at("adv_pgm").get<std::string>());
        // The stored image is 8-bit; quantisation can undo a marginal flip.
        if (xrbias::predict(model, x_adv) == label) {
            ++skipped;
            continue;
        }
        xrbias::InterpretMap map =
            xrbias::optimize_map(model, dataset.images[index], x_adv, label, cfg);
        std::snprintf(name, sizeof(name), "map_%05zu.pgm", index);
        xrbias::export_map(map, cfg, out / name);
        std::snprintf(name, sizeof(name), "overlay_%05zu.pgm", index);
        xrbias::save_pgm(xrbias::overlay_map(map, dataset.images[index]), out / name);
        maps.push_back(std::move(map));
    }
    if (maps.empty()) {
        throw std::runtime_error("no successful adversarial example to interpret");
    }
    xrbias::export_map(xrbias::average_maps(maps), cfg, out / "mean_map.pgm");

    json run_cfg{{"subcommand", "interpret"}, {"model", model_file}, {"attack_dir", attack_dir},
                 {"data", data_dir},          {"iterations", iters}, {"lambda1", lambda1},
                 {"lambda2", lambda2},        {"step", step},        {"limit", limit},
                 {"out", out_dir},            {"skipped_after_quantization", skipped}};
    write_json_file(run_cfg, out / "run_config.json");
    std::printf("maps=%zu skipped=%d -> %s\n", maps.size(), skipped, out_dir.c_str());
    return 0;
}

int cmd_report(const std::string& in_file, const std::string& out_file) {
    const xrbias::Report report = xrbias::load_report_json(in_file);
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_file);
    out << xrbias::report_csv(report);
    std::printf("wrote %zu rows to %s\n", report.rows.size(), out_file.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial bias-field toolkit for grayscale radiograph-like images"};
    app.require_subcommand(1);
    std::string kernels_choice = "auto";
    app.add_option("--kernels", kernels_choice, "kernel backend: auto, scalar, avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    // synth-data
    auto* synth = app.add_subcommand("synth-data", "generate the synthetic phantom dataset");
    std::string synth_config;
    std::uint64_t synth_seed = 42;
    int synth_n = 100;
    std::string synth_out;
    synth->add_option("--config", synth_config, "JSON config file");
    synth->add_option("--seed", synth_seed, "dataset seed");
    synth->add_option("--n", synth_n, "images per class");
    synth->add_option("--out", synth_out, "output directory");

    // train
    auto* tr = app.add_subcommand("train", "train the subject classifier");
    std::string tr_config, tr_data, tr_test, tr_out;
    int tr_epochs = 50, tr_hidden = 64;
    double tr_lr = 0.05;
    std::uint64_t tr_seed = 42;
    tr->add_option("--config", tr_config, "JSON config file");
    tr->add_option("--data", tr_data, "training dataset directory");
    tr->add_option("--test-data", tr_test, "held-out dataset directory");
    tr->add_option("--epochs", tr_epochs, "training epochs");
    tr->add_option("--lr", tr_lr, "learning rate");
    tr->add_option("--hidden", tr_hidden, "hidden layer width");
    tr->add_option("--seed", tr_seed, "init and shuffle seed");
    tr->add_option("--out", tr_out, "output model JSON");

    // attack
    auto* atk = app.add_subcommand("attack", "run a whitebox attack over a dataset");
    std::string atk_config, atk_model, atk_data, atk_out;
    AttackFlags atk_flags;
    atk->add_option("--config", atk_config, "JSON config file");
    atk->add_option("--model", atk_model, "model JSON");
    atk->add_option("--data", atk_data, "eval dataset directory");
    atk->add_option("--out", atk_out, "output directory");
    add_attack_flags(atk, atk_flags);

    // transfer
    auto* tra = app.add_subcommand("transfer", "transfer attack matrix across models");
    std::string tra_config, tra_data, tra_out;
    std::vector<std::string> tra_models;
    AttackFlags tra_flags;
    tra->add_option("--config", tra_config, "JSON config file");
    tra->add_option("--model", tra_models, "model JSON (repeat, at least two)")
        ->expected(1, 64);
    tra->add_option("--data", tra_data, "eval dataset directory");
    tra->add_option("--out", tra_out, "output directory");
    add_attack_flags(tra, tra_flags);

    // interpret
    auto* itp = app.add_subcommand("interpret", "optimise interpretability maps");
    std::string itp_config, itp_model, itp_attack_dir, itp_data, itp_avg, itp_out;
    int itp_iters = 150, itp_limit = 0;
    double itp_l1 = 0.05, itp_l2 = 0.2, itp_step = 0.05;
    itp->add_option("--config", itp_config, "JSON config file");
    itp->add_option("--model", itp_model, "model JSON");
    itp->add_option("--attack-dir", itp_attack_dir, "attack output directory (results.json)");
    itp->add_option("--data", itp_data, "original dataset directory");
    itp->add_option("--average", itp_avg, "average existing map_*.pgm files from this directory");
    itp->add_option("--iters", itp_iters, "gradient iterations");
    itp->add_option("--lambda1", itp_l1, "L1 weight");
    itp->add_option("--lambda2", itp_l2, "TV weight");
    itp->add_option("--step", itp_step, "base step size");
    itp->add_option("--limit", itp_limit, "max maps (0 = all successes)");
    itp->add_option("--out", itp_out, "output directory");

    // report
    auto* rep = app.add_subcommand("report", "convert a JSON report back to CSV");
    std::string rep_in, rep_out;
    rep->add_option("--in", rep_in, "report JSON")->required();
    rep->add_option("--out", rep_out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const auto usage_error = [](const std::string& message) {
        std::cerr << message << "\nRun with --help for more information.\n";
        return 2;
    };

    try {
        if (kernels_choice == "scalar") {
            xrbias::kernels::select_backend(xrbias::kernels::Backend::kScalar);
        } else if (kernels_choice == "avx2") {
            xrbias::kernels::select_backend(xrbias::kernels::Backend::kAvx2);
        }

        if (synth->parsed()) {
            if (!synth_config.empty()) {
                const json cfg = load_config_file(synth_config);
                merge_key(cfg, *synth, "--seed", synth_seed);
                merge_key(cfg, *synth, "--n", synth_n);
                merge_key(cfg, *synth, "--out", synth_out);
            }
            if (synth_out.empty()) return usage_error("synth-data needs --out");
            return cmd_synth_data(synth_seed, synth_n, synth_out);
        }
        if (tr->parsed()) {
            if (!tr_config.empty()) {
                const json cfg = load_config_file(tr_config);
                merge_key(cfg, *tr, "--data", tr_data);
                merge_key(cfg, *tr, "--test-data", tr_test);
                merge_key(cfg, *tr, "--epochs", tr_epochs);
                merge_key(cfg, *tr, "--lr", tr_lr);
                merge_key(cfg, *tr, "--hidden", tr_hidden);
                merge_key(cfg, *tr, "--seed", tr_seed);
                merge_key(cfg, *tr, "--out", tr_out);
            }
            if (tr_data.empty() || tr_out.empty()) {
                return usage_error("train needs --data and --out");
            }
            return cmd_train(tr_data, tr_test, tr_epochs, tr_lr, tr_hidden, tr_seed, tr_out);
        }
        if (atk->parsed()) {
            if (!atk_config.empty()) {
                const json cfg = load_config_file(atk_config);
                merge_key(cfg, *atk, "--model", atk_model);
                merge_key(cfg, *atk, "--data", atk_data);
                merge_key(cfg, *atk, "--out", atk_out);
                merge_attack_flags(cfg, *atk, atk_flags);
            }
            if (atk_model.empty() || atk_data.empty() || atk_out.empty() ||
                atk_flags.attack.empty()) {
                return usage_error("attack needs --model, --data, --out and --attack");
            }
            if (!known_attack(atk_flags.attack)) {
                return usage_error("unknown attack name: " + atk_flags.attack);
            }
            return cmd_attack(atk_model, atk_data, atk_flags, atk_out);
        }
        if (tra->parsed()) {
            if (!tra_config.empty()) {
                const json cfg = load_config_file(tra_config);
                merge_key(cfg, *tra, "--model", tra_models);
                merge_key(cfg, *tra, "--data", tra_data);
                merge_key(cfg, *tra, "--out", tra_out);
                merge_attack_flags(cfg, *tra, tra_flags);
            }
            if (tra_data.empty() || tra_out.empty() || tra_flags.attack.empty()) {
                return usage_error("transfer needs --model, --data, --out and --attack");
            }
            if (!known_attack(tra_flags.attack)) {
                return usage_error("unknown attack name: " + tra_flags.attack);
            }
            if (tra_models.size() < 2) {
                return usage_error("transfer needs at least two --model files");
            }
            return cmd_transfer(tra_models, tra_data, tra_flags, tra_out);
        }
        if (itp->parsed()) {
            if (!itp_config.empty()) {
                const json cfg = load_config_file(itp_config);
                merge_key(cfg, *itp, "--model", itp_model);
                merge_key(cfg, *itp, "--attack-dir", itp_attack_dir);
                merge_key(cfg, *itp, "--data", itp_data);
                merge_key(cfg, *itp, "--average", itp_avg);
                merge_key(cfg, *itp, "--iters", itp_iters);
                merge_key(cfg, *itp, "--lambda1", itp_l1);
                merge_key(cfg, *itp, "--lambda2", itp_l2);
                merge_key(cfg, *itp, "--step", itp_step);
                merge_key(cfg, *itp, "--limit", itp_limit);
                merge_key(cfg, *itp, "--out", itp_out);
            }
            if (itp_out.empty()) return usage_error("interpret needs --out");
            if (itp_avg.empty() && (itp_model.empty() || itp_attack_dir.empty() || itp_data.empty())) {
                return usage_error("interpret needs --model, --attack-dir and --data (or --average)");
            }
            return cmd_interpret(itp_model, itp_attack_dir, itp_data, itp_avg, itp_iters, itp_l1,
                                 itp_l2, itp_step, itp_limit, itp_out);
        }
        if (rep->parsed()) {
            return cmd_report(rep_in, rep_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
