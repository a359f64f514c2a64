#include "bcosad/pipeline.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "bcosad/errors.hpp"
#include "bcosad/kernels.hpp"

namespace bcosad {

const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> stages = {"load",  "fit_gaussian",          "sample_outliers",
                                                    "train", "build_memory_bank",     "fit_normalization",
                                                    "score", "eval",                  "write"};
    return stages;
}

namespace {

template <typename F>
auto stage(const char* name, std::ostream* log, F&& body) -> decltype(body()) {
    if (log) *log << "stage " << name << '\n';
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::vector<std::size_t> network_dims(const RunConfig& cfg, std::size_t input_dim) {
    std::vector<std::size_t> dims{input_dim};
    dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    dims.push_back(BcosNetwork::kHeadDim);
    return dims;
}

}  // namespace

Normalization fit_training_normalization(const BcosNetwork& net, const MemoryBank& bank, const DatasetTable& train,
                                         const ScoreConfig& cfg) {
    const Vec ffs_train = kernels::omp::batch_ffs_leave_one_out(bank, cfg.k);
    const Vec ens_train = kernels::omp::batch_ens(net, train.samples, cfg.novelty_layer, cfg.target_node);
    return fit_normalization(ffs_train, ens_train);
}

std::vector<ScoreRecord> score_table(const BcosNetwork& net, const MemoryBank& bank, const DatasetTable& test,
                                     const ScoreConfig& cfg) {
    const auto raw = kernels::omp::batch_scores(net, bank, test.samples, cfg);
    std::vector<ScoreRecord> records;
    records.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) records.push_back(joint_score(raw.ffs[i], raw.ens[i], cfg));
    return records;
}

MetricsReport evaluate_records(const std::vector<ScoreRecord>& records, const std::vector<int>& labels) {
    Vec joint, ffs_raw, ens_raw;
    for (const auto& r : records) {
        joint.push_back(r.joint);
        ffs_raw.push_back(r.ffs_raw);
        ens_raw.push_back(r.ens_raw);
    }
    const auto joint_ls = LabeledScores::make(joint, labels);
    const auto ffs_ls = LabeledScores::make(ffs_raw, labels);
    MetricsReport m;
    m.auroc = auroc(joint_ls);
    m.confusion = oracle_threshold(joint_ls);
    m.fn_reduction = fn_reduction(ffs_ls, joint_ls);
    m.auroc_ffs = auroc(ffs_ls);
    m.auroc_ens = auroc(LabeledScores::make(ens_raw, labels));
    return m;
}

DatasetTable generate_outliers(const RunConfig& cfg, const DatasetTable& train) {
    const auto model = fit_gaussian(train);
    Rng rng = Rng(cfg.seed).child(1);
    const std::size_t n = cfg.outlier_count ? cfg.outlier_count : train.size();
    return sample_outliers(model, n, rng, cfg.clamp);
}

BcosNetwork train_model(const RunConfig& cfg, const DatasetTable& train, const DatasetTable& outliers,
                        TrainReport* report) {
    const Rng root(cfg.seed);
    Rng init = root.child(2);
    const auto dims = network_dims(cfg, train.dim());
    const auto net = cfg.b_per_layer.empty() ? BcosNetwork::random(dims, init)
                                             : BcosNetwork::random(dims, init, cfg.b_per_layer);
    TrainConfig tc = cfg.train;
    tc.seed = root.child(3).next_u64();
    return bcosad::train(net, train, outliers, tc, report);
}

namespace {

MemoryBank make_bank(const BcosNetwork& net, const DatasetTable& train, ScoreConfig& cfg) {
    const std::size_t layer = cfg.feature_layer.value_or(default_feature_layer(net));
    cfg.feature_layer = layer;
    return MemoryBank(kernels::omp::batch_features(net, train.samples, layer), layer);
}

}  // namespace

ScoringResult score_dataset(const BcosNetwork& net, const DatasetTable& train, const DatasetTable& test,
                            const ScoreConfig& cfg) {
    if (test.dim() != train.dim()) throw DimensionError("train and test widths differ");
    ScoreConfig resolved = cfg;
    auto bank = make_bank(net, train, resolved);
    resolved.normalization = fit_training_normalization(net, bank, train, resolved);
    auto records = score_table(net, bank, test, resolved);
    return {std::move(bank), resolved, std::move(records)};
}

ProjectionTable projection_for(const BcosNetwork& net, const MemoryBank& bank, const DatasetTable& train,
                               const DatasetTable& test, const std::vector<ScoreRecord>& records,
                               const ScoreConfig& cfg) {
    Vec ens_column = kernels::omp::batch_ens(net, train.samples, cfg.novelty_layer, cfg.target_node);
    for (const auto& r : records) ens_column.push_back(r.ens_raw);
    const Matrix test_features = kernels::omp::batch_features(net, test.samples, bank.source_layer());
    return pca_diagnostic(bank, test_features, ens_column);
}

PipelineResult run_pipeline(const RunConfig& cfg, const DatasetTable& train, const DatasetTable& test,
                            std::ostream* log) {
    PipelineResult result;

    stage("fit_gaussian", log, [&] {
        if (test.size() > 0 && test.dim() != train.dim()) throw DimensionError("train and test widths differ");
        if (!test.labels) throw ConfigError("test set needs a label column");
        // fit once here so a singular or undersized train set fails in this stage
        const auto model = fit_gaussian(train);
        if (log) *log << "  jitter " << format_real(model.jitter) << '\n';
    });

    result.outliers = stage("sample_outliers", log, [&] { return generate_outliers(cfg, train); });

    result.model = stage("train", log, [&] {
        auto trained = train_model(cfg, train, result.outliers);
        result.train_accuracy = accuracy(trained, train, result.outliers);
        return trained;
    });
    if (log) *log << "  train_accuracy " << format_real(result.train_accuracy) << '\n';

    ScoreConfig score_cfg = cfg.score;
    const auto bank = stage("build_memory_bank", log, [&] { return make_bank(result.model, train, score_cfg); });

    result.normalization = stage("fit_normalization", log, [&] {
        return fit_training_normalization(result.model, bank, train, score_cfg);
    });
    score_cfg.normalization = result.normalization;

    result.records = stage("score", log, [&] { return score_table(result.model, bank, test, score_cfg); });
    result.labels = *test.labels;

    stage("eval", log, [&] {
        result.metrics = evaluate_records(result.records, result.labels);
        result.projection = projection_for(result.model, bank, train, test, result.records, score_cfg);
    });
    if (log) *log << "  auroc " << format_real(result.metrics.auroc) << '\n';
    return result;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    std::ostringstream log;
    DatasetTable train, test;
    stage("load", &log, [&] {
        if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
        train = load_csv(cfg.train_path);
        train.split = Split::TrainNormal;
        test = load_csv(cfg.test_path);
        if (cfg.heatmap_count > 0) {
            if (!cfg.heatmap_shape) throw ConfigError("heatmap_count needs heatmap_shape");
            if (cfg.heatmap_shape->height * cfg.heatmap_shape->width != train.dim())
                throw DimensionError("heatmap_shape does not match the input width");
        }
        fs::create_directories(cfg.output_dir);
    });

    auto result = run_pipeline(cfg, train, test, &log);

    stage("write", &log, [&] {
        const fs::path dir(cfg.output_dir);
        save_csv(result.outliers, (dir / "outliers.csv").string());
        save_model(result.model, (dir / "model.bin").string());
        write_scores(result.records, test.labels, (dir / "scores.csv").string());
        write_metrics(result.metrics, (dir / "metrics.txt").string());
        write_projection(result.projection, (dir / "projection.csv").string());
        const std::size_t n_maps = std::min(cfg.heatmap_count, test.size());
        if (n_maps > 0) fs::create_directories(dir / "heatmaps");
        for (std::size_t i = 0; i < n_maps; ++i) {
            const auto fw = forward(result.model, test.row(i));
            const Vec expl = collapse(result.model, fw.trace, 0, cfg.score.target_node);
            save_heatmap(expl, test.row(i), *cfg.heatmap_shape,
                         (dir / "heatmaps" / ("sample_" + std::to_string(i) + ".pgm")).string());
        }
        log << "done\n";
        std::ofstream out(dir / "run.log");
        out << log.str();
    });
    return result;
}

void write_scores(const std::vector<ScoreRecord>& records, const std::optional<std::vector<int>>& labels,
                  const std::string& path) {
    if (labels && labels->size() != records.size()) throw DimensionError("write_scores: label count mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "sample_id,ffs_raw,ens_raw,ffs_norm,ens_norm,joint,label\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        out << i << ',' << format_real(r.ffs_raw) << ',' << format_real(r.ens_raw) << ',' << format_real(r.ffs_norm)
            << ',' << format_real(r.ens_norm) << ',' << format_real(r.joint) << ',';
        if (labels) out << (*labels)[i];
        out << '\n';
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

ScoreFile read_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line) || line.rfind("sample_id,ffs_raw,ens_raw,ffs_norm,ens_norm,joint,label", 0) != 0)
        throw ParseError(path + ":1: unexpected score header");
    ScoreFile f;
    std::vector<int> labels;
    bool any_label = false, any_missing = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != 7) throw ParseError(path + ":" + std::to_string(line_no) + ": expected 7 cells");
        auto number = [&](std::size_t c) {
            double v = 0.0;
            const auto& s = cells[c];
            const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (s.empty() || ec != std::errc() || p != s.data() + s.size())
                throw ParseError(path + ":" + std::to_string(line_no) + ":" + std::to_string(c + 1) +
                                 ": not a number");
            return v;
        };
        f.ids.push_back(static_cast<std::size_t>(number(0)));
        ScoreRecord r;
        r.ffs_raw = number(1);
        r.ens_raw = number(2);
        r.ffs_norm = number(3);
        r.ens_norm = number(4);
        r.joint = number(5);
        f.records.push_back(r);
        if (cells[6].empty()) {
            any_missing = true;
        } else {
            any_label = true;
            labels.push_back(static_cast<int>(number(6)));
        }
    }
    if (any_label && any_missing) throw ParseError(path + ": label column partially filled");
    if (any_label) f.labels = std::move(labels);
    return f;
}

}  // namespace bcosad
