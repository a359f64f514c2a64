#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bcosad/bcos_network.hpp"
#include "bcosad/dataset.hpp"
#include "bcosad/eval.hpp"
#include "bcosad/outlier_gen.hpp"
#include "bcosad/scoring.hpp"

namespace bcosad {

struct RunConfig {
    std::string train_path;  ///< CSV of training normals
    std::string test_path;   ///< CSV of labeled test samples
    std::string output_dir;
    std::vector<std::size_t> hidden_dims = {16, 8};
    std::vector<double> b_per_layer;  ///< empty = kDefaultB everywhere, else one value per layer
    TrainConfig train;
    ScoreConfig score;
    std::size_t outlier_count = 0;  ///< 0 = as many as training normals
    std::optional<ClampRange> clamp;
    std::optional<ImageShape> heatmap_shape;
    std::size_t heatmap_count = 0;
    std::uint64_t seed = 0;
};

struct PipelineResult {
    BcosNetwork model;
    DatasetTable outliers;
    Normalization normalization;
    std::vector<ScoreRecord> records;
    std::vector<int> labels;
    MetricsReport metrics;
    ProjectionTable projection;
    double train_accuracy = 0.0;
};

/// Stage names in execution order.
const std::vector<std::string>& pipeline_stages();

/// fit_gaussian -> sample_outliers -> train -> build_memory_bank ->
/// fit_normalization -> score -> eval, on in-memory tables. Stage progress
/// goes to `log` when given. Failures are rethrown as StageError.
PipelineResult run_pipeline(const RunConfig& cfg, const DatasetTable& train, const DatasetTable& test,
                            std::ostream* log = nullptr);

/// Loads the configured CSVs, runs the pipeline and writes outliers.csv,
/// model.bin, scores.csv, metrics.txt, projection.csv, run.log and any
/// heatmaps into cfg.output_dir.
PipelineResult run_pipeline(const RunConfig& cfg);

/// Gaussian fit on `train` and cfg.outlier_count draws from seed stream 1 of
/// cfg.seed. Matches the outliers run_pipeline generates for the same config.
DatasetTable generate_outliers(const RunConfig& cfg, const DatasetTable& train);

/// Random init from seed stream 2, training order from stream 3.
BcosNetwork train_model(const RunConfig& cfg, const DatasetTable& train, const DatasetTable& outliers,
                        TrainReport* report = nullptr);

struct ScoringResult {
    MemoryBank bank;
    ScoreConfig config;  ///< feature layer resolved, normalization set
    std::vector<ScoreRecord> records;
};

/// Builds the memory bank from `train`, fits the normalization and scores
/// every row of `test`.
ScoringResult score_dataset(const BcosNetwork& net, const DatasetTable& train, const DatasetTable& test,
                            const ScoreConfig& cfg);

/// PCA diagnostic over bank and test features with the ENS column appended.
ProjectionTable projection_for(const BcosNetwork& net, const MemoryBank& bank, const DatasetTable& train,
                               const DatasetTable& test, const std::vector<ScoreRecord>& records,
                               const ScoreConfig& cfg);

/// Raw FFS/ENS of the training normals: FFS scores each bank row against the
/// other rows, ENS is taken at the configured layer and node.
Normalization fit_training_normalization(const BcosNetwork& net, const MemoryBank& bank,
                                         const DatasetTable& train, const ScoreConfig& cfg);

/// Scores each test row; output order matches row order.
std::vector<ScoreRecord> score_table(const BcosNetwork& net, const MemoryBank& bank, const DatasetTable& test,
                                     const ScoreConfig& cfg);

MetricsReport evaluate_records(const std::vector<ScoreRecord>& records, const std::vector<int>& labels);

/// Header: sample_id,ffs_raw,ens_raw,ffs_norm,ens_norm,joint,label. The
/// label cell is empty for unlabeled samples.
void write_scores(const std::vector<ScoreRecord>& records, const std::optional<std::vector<int>>& labels,
                  const std::string& path);

struct ScoreFile {
    std::vector<std::size_t> ids;
    std::vector<ScoreRecord> records;
    std::optional<std::vector<int>> labels;
};
ScoreFile read_scores(const std::string& path);

}  // namespace bcosad
