#include "bcosad/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bcosad/errors.hpp"

namespace bcosad {

std::string_view to_string(Split split) noexcept {
    switch (split) {
        case Split::TrainNormal: return "train_normal";
        case Split::TestNormal: return "test_normal";
        case Split::TestAnomaly: return "test_anomaly";
        case Split::Outlier: return "outlier";
        case Split::Unspecified: break;
    }
    return "unspecified";
}

Split parse_split(std::string_view text) {
    for (Split s : {Split::TrainNormal, Split::TestNormal, Split::TestAnomaly, Split::Outlier, Split::Unspecified})
        if (to_string(s) == text) return s;
    throw ConfigError("unknown split tag '" + std::string(text) + "'");
}

void DatasetTable::validate() const {
    if (labels && labels->size() != samples.rows())
        throw DimensionError("DatasetTable: label count does not match sample count");
    if (shape_hint && shape_hint->height * shape_hint->width != samples.cols())
        throw DimensionError("DatasetTable: shape hint does not match row width");
}

DatasetTable filter_by_label(const DatasetTable& table, int label) {
    if (!table.labels) throw ConfigError("filter_by_label: table has no labels");
    DatasetTable out;
    out.samples = Matrix(0, table.dim());
    out.labels = std::vector<int>{};
    out.split = table.split;
    out.shape_hint = table.shape_hint;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if ((*table.labels)[i] != label) continue;
        out.samples.append_row(table.row(i));
        out.labels->push_back(label);
    }
    return out;
}

DatasetTable concat(const DatasetTable& a, const DatasetTable& b) {
    if (a.size() > 0 && b.size() > 0 && a.dim() != b.dim()) throw DimensionError("concat: width mismatch");
    DatasetTable out;
    out.samples = a.samples;
    for (std::size_t i = 0; i < b.size(); ++i) out.samples.append_row(b.row(i));
    if (a.labels && b.labels) {
        out.labels = *a.labels;
        out.labels->insert(out.labels->end(), b.labels->begin(), b.labels->end());
    }
    out.split = a.split == b.split ? a.split : Split::Unspecified;
    out.shape_hint = a.shape_hint == b.shape_hint ? a.shape_hint : std::nullopt;
    return out;
}

std::string format_real(double value) { return fmt::format("{}", value); }

namespace {

std::string location(const std::string& path, std::size_t line, std::size_t column) {
    return path + ":" + std::to_string(line) + ":" + std::to_string(column);
}

std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

DatasetTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");

    DatasetTable table;
    std::string line;
    std::size_t line_no = 0;
    // leading "# key: value" lines; split and shape are understood, others ignored
    while (true) {
        if (!std::getline(in, line)) throw ParseError(location(path, line_no + 1, 1) + ": missing header row");
        ++line_no;
        if (line.empty() || line[0] != '#') break;
        const std::string_view body = trim(std::string_view(line).substr(1));
        const auto colon = body.find(':');
        if (colon == std::string_view::npos) continue;
        const auto key = trim(body.substr(0, colon));
        const auto value = trim(body.substr(colon + 1));
        if (key == "split") {
            try {
                table.split = parse_split(value);
            } catch (const ConfigError& e) {
                throw ParseError(location(path, line_no, 1) + ": " + e.what());
            }
        } else if (key == "shape") {
            const auto x = value.find('x');
            std::size_t h = 0, w = 0;
            const auto r1 = std::from_chars(value.data(), value.data() + (x == std::string_view::npos ? 0 : x), h);
            const auto r2 = x == std::string_view::npos
                                ? r1
                                : std::from_chars(value.data() + x + 1, value.data() + value.size(), w);
            if (x == std::string_view::npos || r1.ec != std::errc() || r1.ptr != value.data() + x ||
                r2.ec != std::errc() || r2.ptr != value.data() + value.size() || h == 0 || w == 0)
                throw ParseError(location(path, line_no, 1) + ": shape must be HxW");
            table.shape_hint = ImageShape{h, w};
        }
    }
    const std::size_t header_line = line_no;
    const auto header = split_cells(line);
    const bool has_label = trim(header.back()) == "label";
    const std::size_t width = header.size() - (has_label ? 1 : 0);
    if (width == 0) throw ParseError(location(path, header_line, 1) + ": no feature columns");

    std::vector<double> data;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_cells(line);
        if (cells.size() != header.size()) {
            throw ParseError(location(path, line_no, 1) + ": row " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, header has " + std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto cell = trim(cells[c]);
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
                throw ParseError(location(path, line_no, c + 1) + ": not a finite decimal number: '" +
                                 std::string(cell) + "'");
            }
            if (c < width) {
                data.push_back(value);
            } else {
                if (value != 0.0 && value != 1.0)
                    throw ParseError(location(path, line_no, c + 1) + ": label must be 0 or 1");
                labels.push_back(static_cast<int>(value));
            }
        }
    }
    const std::size_t rows = data.size() / width;
    table.samples = Matrix(rows, width, std::move(data));
    if (has_label) table.labels = std::move(labels);
    try {
        table.validate();
    } catch (const DimensionError& e) {
        throw ParseError(path + ": " + e.what());
    }
    return table;
}

void save_csv(const DatasetTable& table, const std::string& path) {
    table.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    if (table.split != Split::Unspecified) out << "# split: " << to_string(table.split) << '\n';
    if (table.shape_hint) out << "# shape: " << table.shape_hint->height << 'x' << table.shape_hint->width << '\n';
    for (std::size_t c = 0; c < table.dim(); ++c) out << (c ? "," : "") << 'x' << c;
    if (table.labels) out << ",label";
    out << '\n';
    for (std::size_t r = 0; r < table.size(); ++r) {
        const auto row = table.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_real(row[c]);
        if (table.labels) out << ',' << (*table.labels)[r];
        out << '\n';
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in, const std::string& path) {
    std::string token;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!token.empty()) return token;
            continue;
        }
        token.push_back(static_cast<char>(ch));
    }
    if (token.empty()) throw ParseError(path + ": truncated PGM header");
    return token;
}

std::size_t pgm_number(std::istream& in, const std::string& path, const char* field) {
    const std::string tok = pgm_token(in, path);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(path + ": bad PGM " + field + " '" + tok + "'");
    return value;
}

}  // namespace

DatasetTable load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    char magic[2] = {};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5') throw ParseError(path + ": bad magic, expected P5");
    const std::size_t width = pgm_number(in, path, "width");
    const std::size_t height = pgm_number(in, path, "height");
    const std::size_t maxval = pgm_number(in, path, "maxval");
    if (width == 0 || height == 0) throw ParseError(path + ": empty image");
    if (maxval == 0 || maxval > 65535) throw ParseError(path + ": maxval must be in [1, 65535]");
    // pgm_token consumed the single whitespace byte after maxval.

    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(width * height * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw ParseError(path + ": truncated pixel payload");

    std::vector<double> pixels(width * height);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const std::size_t v = bytes_per == 2 ? (std::size_t{raw[2 * i]} << 8) | raw[2 * i + 1] : raw[i];
        if (v > maxval) throw ParseError(path + ": pixel exceeds maxval");
        pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    DatasetTable t;
    const std::size_t n = pixels.size();
    t.samples = Matrix(1, n, std::move(pixels));
    t.shape_hint = ImageShape{height, width};
    return t;
}

void save_pgm(ConstSpan pixels, ImageShape shape, const std::string& path, unsigned maxval) {
    if (pixels.size() != shape.height * shape.width) throw DimensionError("save_pgm: pixel count does not match shape");
    if (maxval == 0 || maxval > 65535) throw ConfigError("save_pgm: maxval must be in [1, 65535]");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "P5\n" << shape.width << ' ' << shape.height << '\n' << maxval << '\n';
    for (double p : pixels) {
        const auto v = static_cast<unsigned>(std::lround(std::clamp(p, 0.0, 1.0) * maxval));
        if (maxval > 255) out.put(static_cast<char>((v >> 8) & 0xFF));
        out.put(static_cast<char>(v & 0xFF));
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

HeatmapScaling save_heatmap(ConstSpan explanation, ConstSpan input, ImageShape shape, const std::string& path,
                            unsigned maxval) {
    if (explanation.size() != shape.height * shape.width || input.size() != explanation.size())
        throw DimensionError("save_heatmap: explanation, input and shape disagree");
    Vec contrib(explanation.size());
    for (std::size_t i = 0; i < contrib.size(); ++i) contrib[i] = std::abs(explanation[i] * input[i]);
    const auto [lo, hi] = std::minmax_element(contrib.begin(), contrib.end());
    HeatmapScaling s{*lo, *hi, maxval};
    const double range = s.max - s.min;
    Vec scaled(contrib.size(), 0.0);
    if (range > 0.0)
        for (std::size_t i = 0; i < contrib.size(); ++i) scaled[i] = (contrib[i] - s.min) / range;
    save_pgm(scaled, shape, path, maxval);

    std::ofstream side(path + ".txt");
    if (!side) throw std::runtime_error(path + ".txt: cannot open for writing");
    side << "statistic = abs_contribution\n"
         << "min = " << format_real(s.min) << '\n'
         << "max = " << format_real(s.max) << '\n'
         << "maxval = " << s.maxval << '\n';
    return s;
}

}  // namespace bcosad
