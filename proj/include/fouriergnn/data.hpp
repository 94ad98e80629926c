#pragma once

// CSV ingestion, chronological splits, min-max scaling and sliding windows.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fouriergnn/model.hpp"

namespace fgnn {

/// L timestamps by N variables.
struct SeriesTable {
    RealMatrix values; // (L, N)
    std::vector<std::string> names;
    std::vector<std::string> timestamps; // parsed but not used by the math
    Index first_row = 0;                 // offset of row 0 in the source series

    Index length() const { return values.rows(); }
    Index width() const { return values.cols(); }
};

struct CsvOptions {
    bool transpose = false;        // file rows are variables instead of timestamps
    bool timestamp_column = false; // first column holds timestamps
    char delimiter = ',';
};

/// Reads a CSV (gzip-compressed files are decompressed transparently). A
/// header is detected when the first line contains a non-numeric data cell.
/// Ragged rows, empty or non-numeric cells and empty files raise DataError
/// naming the 1-based row and column.
SeriesTable load_series(const std::filesystem::path& path, const CsvOptions& options = {});
SeriesTable parse_series(const std::string& text, const CsvOptions& options = {});

void write_csv(const std::filesystem::path& path, const RealMatrix& values,
               const std::vector<std::string>& header = {});

struct SplitSpec {
    double train = 0.7;
    double val = 0.2;
    double test = 0.1;

    void validate() const;
};

struct SplitTables {
    SeriesTable train;
    SeriesTable val;
    SeriesTable test;
};

/// Contiguous prefix / middle / suffix. Train and validation get
/// floor(ratio * L) rows, test the remainder. Any split with a nonzero ratio
/// shorter than `min_length` is rejected.
SplitTables split_chrono(const SeriesTable& table, const SplitSpec& spec, Index min_length = 0);

struct MinMaxStats {
    RealVector min; // per variable
    RealVector max;
};

MinMaxStats minmax_fit(const SeriesTable& train);

/// x -> (x - min) / (max - min) per variable; constant variables map to 0.
SeriesTable minmax_apply(const SeriesTable& table, const MinMaxStats& stats);

/// Inverse of `minmax_apply` on a table; constant variables return to their value.
SeriesTable minmax_invert(const SeriesTable& table, const MinMaxStats& stats);

/// Inverse scaling for arrays laid out (N, steps), e.g. forecasts.
RealMatrix minmax_invert_rows(const RealMatrix& values, const MinMaxStats& stats);
RealMatrix minmax_apply_rows(const RealMatrix& values, const MinMaxStats& stats);

/// Windows with inputs rows [i*stride, i*stride + T) and targets the next
/// tau rows, both transposed to (N, .). `origin` is the source row index.
std::vector<MtsWindow> sliding_windows(const SeriesTable& table, Index lookback, Index horizon,
                                       Index stride = 1);

struct ManifestEntry {
    std::string name;
    std::filesystem::path path; // resolved against the manifest's directory
    Index n_vars = 0;
    std::string granularity;
    CsvOptions csv;
};

/// JSON: {"datasets": [{"name", "path", "n_vars", "granularity",
///                      "transpose"?, "timestamp_column"?}]}
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
const ManifestEntry& find_dataset(const std::vector<ManifestEntry>& manifest, const std::string& name);

struct SyntheticSpec {
    Index n_vars = 8;
    Index length = 2000;
    double noise = 0.1;
    double coupling = 0.3;
    std::uint64_t seed = 7;
};

/// N sinusoids with random periods and phases, linearly mixed so each
/// variable carries some of its neighbours' signals, plus Gaussian noise.
SeriesTable make_coupled_sinusoids(const SyntheticSpec& spec);

} // namespace fgnn
