#include "fouriergnn/data.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "fouriergnn/error.hpp"

namespace fgnn {
namespace {

std::string read_maybe_gzip(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw DataError("no such file: " + path.string());
    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr) throw DataError("cannot open " + path.string());
    std::string text;
    std::array<char, 1 << 16> buf{};
    int got = 0;
    while ((got = gzread(file, buf.data(), static_cast<unsigned>(buf.size()))) > 0) {
        text.append(buf.data(), static_cast<std::size_t>(got));
    }
    const bool failed = got < 0;
    gzclose(file);
    if (failed) throw DataError("failed to read " + path.string());
    return text;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_line(std::string_view line, char delim) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

bool parse_number(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::string location(std::size_t row, std::size_t col) {
    return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

SeriesTable slice_rows(const SeriesTable& t, Index start, Index count) {
    SeriesTable out;
    out.values = t.values.middleRows(start, count);
    out.names = t.names;
    if (!t.timestamps.empty()) {
        out.timestamps.assign(t.timestamps.begin() + start, t.timestamps.begin() + start + count);
    }
    out.first_row = t.first_row + start;
    return out;
}

void check_stats(const MinMaxStats& stats, Index width) {
    if (stats.min.size() != width || stats.max.size() != width) {
        throw ShapeError("min-max statistics cover " + std::to_string(stats.min.size()) +
                         " variables, data has " + std::to_string(width));
    }
}

double span_of(const MinMaxStats& s, Index v) { return s.max[v] - s.min[v]; }

} // namespace

SeriesTable parse_series(const std::string& text, const CsvOptions& options) {
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    std::string_view rest(text);
    std::size_t line_no = 0;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        const std::string_view line = rest.substr(0, nl);
        ++line_no;
        if (!trim(line).empty()) lines.emplace_back(line_no, line);
        if (nl == std::string_view::npos) break;
        rest.remove_prefix(nl + 1);
    }
    if (lines.empty()) throw DataError("empty CSV input");

    const std::size_t skip = options.timestamp_column ? 1 : 0;
    SeriesTable table;
    std::size_t first_data = 0;
    {
        const auto cells = split_line(lines[0].second, options.delimiter);
        bool numeric = true;
        double tmp = 0.0;
        for (std::size_t c = skip; c < cells.size(); ++c) numeric = numeric && parse_number(cells[c], tmp);
        if (!numeric) {
            for (std::size_t c = skip; c < cells.size(); ++c) table.names.emplace_back(cells[c]);
            first_data = 1;
        }
    }
    if (first_data == lines.size()) throw DataError("CSV has a header but no data rows");

    const std::size_t width = split_line(lines[first_data].second, options.delimiter).size();
    if (width <= skip) throw DataError("CSV rows have no value columns");
    if (!table.names.empty() && table.names.size() + skip != width) {
        throw DataError("header has " + std::to_string(table.names.size() + skip) + " columns, " +
                        "row " + std::to_string(lines[first_data].first) + " has " + std::to_string(width));
    }

    const auto rows = static_cast<Index>(lines.size() - first_data);
    RealMatrix values(rows, static_cast<Index>(width - skip));
    for (std::size_t r = first_data; r < lines.size(); ++r) {
        const auto [row_no, line] = lines[r];
        const auto cells = split_line(line, options.delimiter);
        if (cells.size() != width) {
            throw DataError("ragged CSV: row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                            " columns, expected " + std::to_string(width));
        }
        if (skip != 0) table.timestamps.emplace_back(cells[0]);
        for (std::size_t c = skip; c < width; ++c) {
            double v = 0.0;
            if (!parse_number(cells[c], v)) {
                throw DataError((cells[c].empty() ? "missing value at " : "non-numeric cell '" + std::string(cells[c]) + "' at ") +
                                location(row_no, c + 1));
            }
            values(static_cast<Index>(r - first_data), static_cast<Index>(c - skip)) = v;
        }
    }
    if (options.transpose) {
        table.values = values.transpose();
        table.names.clear();
        table.timestamps.clear();
    } else {
        table.values = std::move(values);
    }
    return table;
}

SeriesTable load_series(const std::filesystem::path& path, const CsvOptions& options) {
    try {
        return parse_series(read_maybe_gzip(path), options);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_csv(const std::filesystem::path& path, const RealMatrix& values, const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    if (!header.empty()) out << '\n';
    for (Index r = 0; r < values.rows(); ++r) {
        for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << values(r, c);
        out << '\n';
    }
}

void SplitSpec::validate() const {
    if (train < 0.0 || val < 0.0 || test < 0.0) throw ConfigError("dataset.split", "ratios must be nonnegative");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw ConfigError("dataset.split", "ratios must sum to 1");
}

SplitTables split_chrono(const SeriesTable& table, const SplitSpec& spec, Index min_length) {
    spec.validate();
    const Index total = table.length();
    // The epsilon absorbs representation error such as 0.7 * 10 = 6.999...
    const auto rows_for = [total](double ratio) {
        return static_cast<Index>(std::floor(ratio * static_cast<double>(total) + 1e-9));
    };
    const Index n_train = rows_for(spec.train);
    const Index n_val = std::min(rows_for(spec.val), total - n_train);
    const Index n_test = total - n_train - n_val;

    SplitTables out{slice_rows(table, 0, n_train), slice_rows(table, n_train, n_val),
                    slice_rows(table, n_train + n_val, n_test)};
    const auto check = [min_length](const SeriesTable& t, double ratio, const char* name) {
        if (ratio > 0.0 && t.length() < min_length) {
            throw DataError(std::string(name) + " split has " + std::to_string(t.length()) +
                            " rows, fewer than T + tau = " + std::to_string(min_length));
        }
    };
    check(out.train, spec.train, "train");
    check(out.val, spec.val, "validation");
    check(out.test, spec.test, "test");
    return out;
}

MinMaxStats minmax_fit(const SeriesTable& train) {
    if (train.length() < 1) throw DataError("cannot fit min-max statistics on an empty split");
    return {train.values.colwise().minCoeff().transpose(), train.values.colwise().maxCoeff().transpose()};
}

SeriesTable minmax_apply(const SeriesTable& table, const MinMaxStats& stats) {
    check_stats(stats, table.width());
    SeriesTable out = table;
    for (Index v = 0; v < table.width(); ++v) {
        const double range = span_of(stats, v);
        if (range > 0.0) {
            out.values.col(v) = (table.values.col(v).array() - stats.min[v]) / range;
        } else {
            out.values.col(v).setZero();
        }
    }
    return out;
}

SeriesTable minmax_invert(const SeriesTable& table, const MinMaxStats& stats) {
    SeriesTable out = table;
    out.values = minmax_invert_rows(table.values.transpose(), stats).transpose();
    return out;
}

RealMatrix minmax_invert_rows(const RealMatrix& values, const MinMaxStats& stats) {
    check_stats(stats, values.rows());
    RealMatrix out(values.rows(), values.cols());
    for (Index v = 0; v < values.rows(); ++v) {
        out.row(v) = values.row(v).array() * span_of(stats, v) + stats.min[v];
    }
    return out;
}

RealMatrix minmax_apply_rows(const RealMatrix& values, const MinMaxStats& stats) {
    check_stats(stats, values.rows());
    RealMatrix out = RealMatrix::Zero(values.rows(), values.cols());
    for (Index v = 0; v < values.rows(); ++v) {
        const double range = span_of(stats, v);
        if (range > 0.0) out.row(v) = (values.row(v).array() - stats.min[v]) / range;
    }
    return out;
}

std::vector<MtsWindow> sliding_windows(const SeriesTable& table, Index lookback, Index horizon, Index stride) {
    if (lookback < 1 || horizon < 1 || stride < 1) throw ShapeError("T, tau and stride must be >= 1");
    const Index len = table.length();
    if (len < lookback + horizon) {
        throw DataError("series of length " + std::to_string(len) + " is shorter than T + tau = " +
                        std::to_string(lookback + horizon));
    }
    const Index count = (len - lookback - horizon) / stride + 1;
    std::vector<MtsWindow> windows;
    windows.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
        const Index start = i * stride;
        windows.push_back({table.values.middleRows(start, lookback).transpose(),
                           table.values.middleRows(start + lookback, horizon).transpose(),
                           table.first_row + start});
    }
    return windows;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest " + path.string() + ": " + e.what());
    }
    if (!doc.contains("datasets") || !doc["datasets"].is_array()) {
        throw DataError("manifest " + path.string() + " needs a \"datasets\" array");
    }
    std::vector<ManifestEntry> out;
    for (const auto& item : doc["datasets"]) {
        try {
            ManifestEntry e;
            e.name = item.at("name").get<std::string>();
            e.path = item.at("path").get<std::string>();
            if (e.path.is_relative()) e.path = path.parent_path() / e.path;
            e.n_vars = item.value("n_vars", Index{0});
            e.granularity = item.value("granularity", std::string{});
            e.csv.transpose = item.value("transpose", false);
            e.csv.timestamp_column = item.value("timestamp_column", false);
            out.push_back(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("manifest " + path.string() + ": " + e.what());
        }
    }
    return out;
}

const ManifestEntry& find_dataset(const std::vector<ManifestEntry>& manifest, const std::string& name) {
    for (const auto& e : manifest) {
        if (e.name == name) return e;
    }
    throw DataError("dataset '" + name + "' is not in the manifest");
}

SeriesTable make_coupled_sinusoids(const SyntheticSpec& spec) {
    if (spec.n_vars < 1 || spec.length < 1) throw ShapeError("synthetic series needs N >= 1 and L >= 1");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> period(8.0, 40.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> mix(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, spec.noise);

    const Index n = spec.n_vars;
    RealVector periods(n);
    RealVector phases(n);
    for (Index v = 0; v < n; ++v) {
        periods[v] = period(rng);
        phases[v] = phase(rng);
    }
    RealMatrix coupling = RealMatrix::Identity(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j) coupling(i, j) = spec.coupling * mix(rng);
        }
    }

    RealMatrix base(spec.length, n);
    for (Index t = 0; t < spec.length; ++t) {
        for (Index v = 0; v < n; ++v) {
            base(t, v) = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / periods[v] + phases[v]);
        }
    }
    SeriesTable table;
    table.values = base * coupling.transpose();
    for (Index i = 0; i < table.values.size(); ++i) table.values.data()[i] += noise(rng);
    for (Index v = 0; v < n; ++v) table.names.push_back("x" + std::to_string(v));
    return table;
}

} // namespace fgnn
