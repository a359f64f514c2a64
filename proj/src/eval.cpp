#include "bcosad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "bcosad/errors.hpp"

namespace bcosad {

LabeledScores LabeledScores::make(Vec scores, std::vector<int> labels) {
    LabeledScores ls{std::move(scores), std::move(labels), {}};
    ls.ids.resize(ls.scores.size());
    std::iota(ls.ids.begin(), ls.ids.end(), std::size_t{0});
    return ls;
}

void LabeledScores::validate() const {
    if (labels.size() != scores.size() || ids.size() != scores.size())
        throw DimensionError("LabeledScores: scores, labels and ids differ in length");
    for (int l : labels)
        if (l != 0 && l != 1) throw ConfigError("LabeledScores: labels must be 0 or 1");
    require_finite(scores, "LabeledScores");
}

namespace {

struct ClassCounts {
    std::size_t normal = 0;
    std::size_t anomaly = 0;
};

ClassCounts count_classes(const LabeledScores& ls, const char* op) {
    ls.validate();
    ClassCounts c;
    for (int l : ls.labels) (l == 1 ? c.anomaly : c.normal)++;
    if (c.normal == 0 || c.anomaly == 0)
        throw ConfigError(std::string(op) + ": both classes must be present");
    return c;
}

double balanced_accuracy(std::size_t tp, std::size_t tn, const ClassCounts& c) {
    return 0.5 * (static_cast<double>(tp) / static_cast<double>(c.anomaly) +
                  static_cast<double>(tn) / static_cast<double>(c.normal));
}

ConfusionReport make_report(double threshold, std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn,
                            const ClassCounts& c) {
    ConfusionReport r;
    r.threshold = threshold;
    r.tp = tp;
    r.fp = fp;
    r.tn = tn;
    r.fn = fn;
    r.fnr = static_cast<double>(fn) / static_cast<double>(c.anomaly);
    r.fpr = static_cast<double>(fp) / static_cast<double>(c.normal);
    r.balanced_accuracy = balanced_accuracy(tp, tn, c);
    return r;
}

std::vector<std::size_t> ascending_order(const Vec& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    return order;
}

}  // namespace

double auroc(const LabeledScores& ls) {
    const ClassCounts c = count_classes(ls, "auroc");
    const auto order = ascending_order(ls.scores);
    // Sum of 1-based average ranks of the anomalies.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && ls.scores[order[j]] == ls.scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            if (ls.labels[order[t]] == 1) rank_sum += avg_rank;
        i = j;
    }
    const double na = static_cast<double>(c.anomaly);
    const double u = rank_sum - na * (na + 1.0) / 2.0;
    return u / (na * static_cast<double>(c.normal));
}

ConfusionReport confusion_at(const LabeledScores& ls, double threshold) {
    const ClassCounts c = count_classes(ls, "confusion_at");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        const bool flagged = ls.scores[i] > threshold;
        if (ls.labels[i] == 1)
            (flagged ? tp : fn)++;
        else
            (flagged ? fp : tn)++;
    }
    return make_report(threshold, tp, fp, tn, fn, c);
}

ConfusionReport oracle_threshold(const LabeledScores& ls) {
    const ClassCounts c = count_classes(ls, "oracle_threshold");
    const auto order = ascending_order(ls.scores);
    const Vec& s = ls.scores;

    // Start below the minimum: everything flagged.
    std::size_t tp = c.anomaly, fp = c.normal, tn = 0, fn = 0;
    const double lowest = std::nextafter(s[order.front()], -std::numeric_limits<double>::infinity());
    ConfusionReport best = make_report(lowest, tp, fp, tn, fn, c);

    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && s[order[j]] == s[order[i]]) {
            if (ls.labels[order[j]] == 1) {
                --tp;
                ++fn;
            } else {
                --fp;
                ++tn;
            }
            ++j;
        }
        const double threshold = j < order.size() ? 0.5 * (s[order[i]] + s[order[j]]) : s[order[i]];
        if (balanced_accuracy(tp, tn, c) > best.balanced_accuracy)
            best = make_report(threshold, tp, fp, tn, fn, c);
        i = j;
    }
    return best;
}

double fn_reduction(const LabeledScores& base, const LabeledScores& joint) {
    if (base.ids != joint.ids) throw ConfigError("fn_reduction: sample ids differ");
    if (base.labels != joint.labels) throw ConfigError("fn_reduction: labels differ");
    const auto fn_base = oracle_threshold(base).fn;
    if (fn_base == 0) return 0.0;
    const auto fn_joint = oracle_threshold(joint).fn;
    return (static_cast<double>(fn_base) - static_cast<double>(fn_joint)) / static_cast<double>(fn_base);
}

ProjectionTable pca_diagnostic(const MemoryBank& bank, const Matrix& test_features,
                               const std::optional<Vec>& ens_column) {
    const Matrix& bank_rows = bank.features();
    const std::size_t nb = bank_rows.rows();
    const std::size_t nt = test_features.rows();
    if (nt > 0 && test_features.cols() != bank.feature_dim())
        throw DimensionError("pca_diagnostic: test feature width does not match bank");
    if (bank.feature_dim() + (ens_column ? 1 : 0) < 2)
        throw DimensionError("pca_diagnostic: need at least two coordinates");

    Matrix fit_rows = bank_rows;
    Matrix test_rows = nt > 0 ? test_features : Matrix(0, bank.feature_dim());
    if (ens_column) {
        if (ens_column->size() != nb + nt)
            throw DimensionError("pca_diagnostic: ens_column needs one value per bank and test row");
        const ChannelStats stats = fit_channel(std::span<const double>(ens_column->data(), nb));
        auto widen = [&](const Matrix& src, std::size_t offset) {
            Matrix out(src.rows(), src.cols() + 1);
            for (std::size_t r = 0; r < src.rows(); ++r) {
                std::copy(src.row(r).begin(), src.row(r).end(), out.row(r).begin());
                out(r, src.cols()) = stats.z((*ens_column)[offset + r]);
            }
            return out;
        };
        fit_rows = widen(bank_rows, 0);
        test_rows = widen(test_rows, nb);
    }

    ProjectionTable table;
    table.pca = pca_project(fit_rows, 2);
    const Matrix test_proj = pca_transform(table.pca, test_rows);
    table.rows.reserve(nb + nt);
    for (std::size_t r = 0; r < nb; ++r) {
        table.rows.push_back({true, r, table.pca.projected(r, 0), table.pca.projected(r, 1),
                              ffs(bank, bank_rows.row(r), 2, r)});
    }
    for (std::size_t r = 0; r < nt; ++r) {
        table.rows.push_back({false, r, test_proj(r, 0), test_proj(r, 1), ffs(bank, test_features.row(r), 2)});
    }
    return table;
}

void write_metrics(const MetricsReport& report, std::ostream& out) {
    const auto& c = report.confusion;
    out << "auroc = " << format_real(report.auroc) << '\n'
        << "threshold = " << format_real(c.threshold) << '\n'
        << "tp = " << c.tp << '\n'
        << "fp = " << c.fp << '\n'
        << "tn = " << c.tn << '\n'
        << "fn = " << c.fn << '\n'
        << "fnr = " << format_real(c.fnr) << '\n'
        << "fpr = " << format_real(c.fpr) << '\n'
        << "fn_reduction = " << format_real(report.fn_reduction) << '\n';
    if (report.auroc_ffs) out << "auroc_ffs = " << format_real(*report.auroc_ffs) << '\n';
    if (report.auroc_ens) out << "auroc_ens = " << format_real(*report.auroc_ens) << '\n';
}

void write_metrics(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_metrics(report, out);
}

void write_projection(const ProjectionTable& table, std::ostream& out) {
    out << "set,index,pc1,pc2,knn2_distance\n";
    for (const auto& r : table.rows) {
        out << (r.from_bank ? "bank" : "test") << ',' << r.index << ',' << format_real(r.pc1) << ','
            << format_real(r.pc2) << ',' << format_real(r.knn_distance) << '\n';
    }
}

void write_projection(const ProjectionTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_projection(table, out);
}

}  // namespace bcosad
