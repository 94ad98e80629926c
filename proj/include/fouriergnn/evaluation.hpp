#pragma once

// Forecast metrics, split evaluation and the complexity benchmark.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "fouriergnn/data.hpp"
#include "fouriergnn/model.hpp"

namespace fgnn {

/// Ground-truth magnitudes below this are left out of MAPE.
inline constexpr double kMapeMaskThreshold = 1e-8;

struct HorizonMetrics {
    double mae = 0.0;
    double rmse = 0.0;
    double mape_percent = 0.0;
};

struct MetricReport {
    double mae = 0.0;
    double rmse = 0.0;
    double mape_percent = 0.0; // 0 when every term is masked
    std::vector<HorizonMetrics> per_horizon;
    Index n_terms = 0;
    Index n_masked_mape_terms = 0;
};

/// Pools absolute, squared and percentage errors across any number of
/// (N, tau) forecasts, so the result equals metrics over the concatenation.
class MetricAccumulator {
public:
    void add(const RealMatrix& pred, const RealMatrix& truth);
    MetricReport finish() const;

private:
    struct Sums {
        double abs = 0.0;
        double sq = 0.0;
        double pct = 0.0;
        Index count = 0;
        Index masked = 0;
    };
    Sums total_;
    std::vector<Sums> horizon_;
};

MetricReport compute_metrics(const RealMatrix& pred, const RealMatrix& truth);

using Forecaster = std::function<RealMatrix(const MtsWindow&)>;

/// Forecasts every window and pools metrics. With `denormalize`, predictions
/// and targets are mapped back to physical units with `stats` first.
MetricReport evaluate_forecaster(const Forecaster& forecast, std::span<const MtsWindow> windows,
                                 const MinMaxStats* stats, bool denormalize);

MetricReport evaluate_split(const FourierGnnModel& model, std::span<const MtsWindow> windows,
                            const MinMaxStats& stats, bool denormalize);

/// Repeats the last observed value of each variable for all tau steps.
RealMatrix repeat_last_forecast(const MtsWindow& window, Index horizon);

MetricReport evaluate_repeat_last(std::span<const MtsWindow> windows, const MinMaxStats& stats,
                                  bool denormalize);

struct BenchPoint {
    Index n = 0;
    double mean_seconds = 0.0;
    double std_seconds = 0.0;
    double min_seconds = 0.0; // fastest repeat; least disturbed by other load
};

struct BenchReport {
    Index d = 0;
    Index k = 0;
    std::vector<BenchPoint> spectral;
    std::vector<BenchPoint> dense;
    double spectral_slope = 0.0;
    double dense_slope = 0.0;
};

/// Least-squares slope of log(min_seconds) against log(n).
double loglog_slope(std::span<const BenchPoint> points);

/// Times the spectral FGO path (DFT, K operator products, IDFT) and the
/// dense time-domain path (K orders of A X W with dense n x n A) on random
/// data. One warm-up round per size is discarded.
BenchReport bench_scaling(Index d, Index k, std::span<const Index> spectral_sizes,
                          std::span<const Index> dense_sizes, Index repeats, std::uint64_t seed = 0);

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, MetricReport>>& rows);

void write_bench_csv(const std::filesystem::path& path, const BenchReport& report);

} // namespace fgnn
