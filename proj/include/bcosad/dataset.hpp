#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bcosad/numerics.hpp"

namespace bcosad {

enum class Split { TrainNormal, TestNormal, TestAnomaly, Outlier, Unspecified };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view text);

struct ImageShape {
    std::size_t height = 0;
    std::size_t width = 0;
    bool operator==(const ImageShape&) const = default;
};

/// Labeled collection of fixed-width real vectors, one row per sample.
struct DatasetTable {
    Matrix samples;
    std::optional<std::vector<int>> labels;
    Split split = Split::Unspecified;
    std::optional<ImageShape> shape_hint;

    std::size_t size() const noexcept { return samples.rows(); }
    std::size_t dim() const noexcept { return samples.cols(); }
    ConstSpan row(std::size_t i) const noexcept { return samples.row(i); }

    /// Throws DimensionError if labels or the shape hint disagree with samples.
    void validate() const;
};

/// Rows whose label equals `label`, preserving order. Requires labels.
DatasetTable filter_by_label(const DatasetTable& table, int label);

/// Concatenates rows of two tables of equal width. Labels are kept only if
/// both tables carry them.
DatasetTable concat(const DatasetTable& a, const DatasetTable& b);

/// Reads a CSV with a header row and decimal cells. A final column named
/// "label" becomes the label list. Lines starting with '#' before the header
/// may carry "# split: <tag>" and "# shape: HxW"; other such lines are
/// ignored. Errors carry the 1-based line and column.
DatasetTable load_csv(const std::string& path);
void save_csv(const DatasetTable& table, const std::string& path);

/// Binary P5 graymap, maxval <= 65535. Pixels are scaled to [0,1]; the result
/// is a single-row table with the shape hint set.
DatasetTable load_pgm(const std::string& path);
/// Writes values in [0,1] as P5 with the given maxval (clamped, rounded).
void save_pgm(ConstSpan pixels, ImageShape shape, const std::string& path, unsigned maxval = 255);

struct HeatmapScaling {
    double min = 0.0;
    double max = 0.0;
    unsigned maxval = 255;
};

/// Renders per-pixel contribution magnitudes |explanation_j * input_j| as a
/// P5 image, min-max scaled to [0, maxval]. A constant map renders all zeros.
/// The scaling constants go to `path + ".txt"`.
HeatmapScaling save_heatmap(ConstSpan explanation, ConstSpan input, ImageShape shape,
                            const std::string& path, unsigned maxval = 255);

/// Shortest decimal text that round-trips to the same double.
std::string format_real(double value);

}  // namespace bcosad
