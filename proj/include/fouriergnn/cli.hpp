#pragma once

// Command-line front end. Subcommands: train, evaluate, predict, verify,
// bench, ablate, export-adjacency.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fouriergnn/config.hpp"
#include "fouriergnn/data.hpp"

namespace fgnn {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitVerifyFailed = 2,
    kExitRuntime = 3,
};

/// Normalized windows for the three chronological splits.
struct PreparedData {
    MinMaxStats stats;
    Index n_vars = 0;
    std::vector<MtsWindow> train;
    std::vector<MtsWindow> val;
    std::vector<MtsWindow> test;
};

SeriesTable load_dataset(const DatasetSection& dataset);

/// Splits, fits min-max on train (unless `stats` is given) and slices windows.
PreparedData prepare_data(const SeriesTable& table, const DatasetSection& dataset, Index lookback,
                          Index horizon, const MinMaxStats* stats = nullptr);

struct OutputLayout {
    std::filesystem::path root;

    std::filesystem::path checkpoints() const { return root / "checkpoints"; }
    std::filesystem::path traces() const { return root / "traces"; }
    std::filesystem::path reports() const { return root / "reports"; }
    std::filesystem::path adjacency() const { return root / "adjacency"; }
    void create() const;
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace fgnn
