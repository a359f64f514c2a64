#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bcosad/numerics.hpp"
#include "bcosad/scoring.hpp"

namespace bcosad {

/// Scores with labels (0 = normal, 1 = anomaly); higher score = more anomalous.
struct LabeledScores {
    Vec scores;
    std::vector<int> labels;
    std::vector<std::size_t> ids;

    /// Ids default to 0..n-1.
    static LabeledScores make(Vec scores, std::vector<int> labels);
    std::size_t size() const noexcept { return scores.size(); }
    void validate() const;
};

struct ConfusionReport {
    double threshold = 0.0;  ///< predict anomaly when score > threshold
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double fnr = 0.0;
    double fpr = 0.0;
    double balanced_accuracy = 0.0;
};

/// Mann-Whitney U / (n_anomaly * n_normal) with average ranks for ties.
double auroc(const LabeledScores& ls);

/// Confusion counts for one threshold.
ConfusionReport confusion_at(const LabeledScores& ls, double threshold);

/// Best balanced accuracy over: below the minimum, every midpoint between
/// adjacent distinct sorted scores, and above the maximum. The lowest such
/// threshold wins ties.
ConfusionReport oracle_threshold(const LabeledScores& ls);

/// (fn_base - fn_joint) / fn_base, each at its own oracle threshold; 0 when
/// the baseline has no false negatives.
double fn_reduction(const LabeledScores& base, const LabeledScores& joint);

struct ProjectionRow {
    bool from_bank = false;
    std::size_t index = 0;
    double pc1 = 0.0;
    double pc2 = 0.0;
    double knn_distance = 0.0;  ///< sum of distances to the 2 nearest bank rows (self excluded for bank rows)
};

struct ProjectionTable {
    PcaResult pca;
    std::vector<ProjectionRow> rows;  ///< bank rows first, then test rows
};

/// Two-component PCA fitted on bank rows, applied to bank and test rows.
///
/// `ens_column`, when given, holds one ENS value per bank row followed by one
/// per test row. It is z-scored with the bank part's statistics and appended
/// as an extra coordinate before fitting. Distances always use the bank's
/// original feature space.
ProjectionTable pca_diagnostic(const MemoryBank& bank, const Matrix& test_features,
                               const std::optional<Vec>& ens_column = std::nullopt);

struct MetricsReport {
    double auroc = 0.0;
    ConfusionReport confusion;
    double fn_reduction = 0.0;
    std::optional<double> auroc_ffs;
    std::optional<double> auroc_ens;
};

/// "key = value" lines; keys: auroc, threshold, tp, fp, tn, fn, fnr, fpr,
/// fn_reduction, then auroc_ffs and auroc_ens when present.
void write_metrics(const MetricsReport& report, std::ostream& out);
void write_metrics(const MetricsReport& report, const std::string& path);
void write_projection(const ProjectionTable& table, std::ostream& out);
void write_projection(const ProjectionTable& table, const std::string& path);

}  // namespace bcosad
