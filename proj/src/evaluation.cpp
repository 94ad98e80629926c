#include "fouriergnn/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "fouriergnn/error.hpp"

namespace fgnn {
namespace {

using Clock = std::chrono::steady_clock;

HorizonMetrics summarize(double abs, double sq, double pct, Index count, Index masked) {
    if (count == 0) return {};
    const double n = static_cast<double>(count);
    const Index kept = count - masked;
    return {abs / n, std::sqrt(sq / n), kept > 0 ? pct / static_cast<double>(kept) * 100.0 : 0.0};
}

template <class Op>
double seconds_per_call(Op&& op, Index inner) {
    const auto start = Clock::now();
    for (Index i = 0; i < inner; ++i) op();
    return std::chrono::duration<double>(Clock::now() - start).count() / static_cast<double>(inner);
}

template <class Op>
BenchPoint time_op(Index n, Op&& op, Index repeats) {
    // Warm-up also sizes the inner loop so each sample lasts >= ~20 ms.
    const double warm = seconds_per_call(op, 1);
    const Index inner = std::max<Index>(1, static_cast<Index>(0.02 / std::max(warm, 1e-9)));
    std::vector<double> samples;
    for (Index r = 0; r < repeats; ++r) samples.push_back(seconds_per_call(op, inner));
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    return {n, mean, std::sqrt(var / static_cast<double>(samples.size())),
            *std::min_element(samples.begin(), samples.end())};
}

RealMatrix random_real(Index rows, Index cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    RealMatrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

} // namespace

void MetricAccumulator::add(const RealMatrix& pred, const RealMatrix& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw ShapeError("metrics: prediction and truth shapes differ");
    }
    if (horizon_.empty()) horizon_.resize(static_cast<std::size_t>(truth.cols()));
    if (static_cast<Index>(horizon_.size()) != truth.cols()) throw ShapeError("metrics: horizon changed between windows");
    for (Index i = 0; i < truth.rows(); ++i) {
        for (Index j = 0; j < truth.cols(); ++j) {
            const double err = truth(i, j) - pred(i, j);
            for (Sums* s : {&total_, &horizon_[static_cast<std::size_t>(j)]}) {
                s->abs += std::abs(err);
                s->sq += err * err;
                ++s->count;
                if (std::abs(truth(i, j)) < kMapeMaskThreshold) {
                    ++s->masked;
                } else {
                    s->pct += std::abs(err / truth(i, j));
                }
            }
        }
    }
}

MetricReport MetricAccumulator::finish() const {
    const HorizonMetrics all = summarize(total_.abs, total_.sq, total_.pct, total_.count, total_.masked);
    MetricReport r{all.mae, all.rmse, all.mape_percent, {}, total_.count, total_.masked};
    for (const auto& h : horizon_) r.per_horizon.push_back(summarize(h.abs, h.sq, h.pct, h.count, h.masked));
    return r;
}

MetricReport compute_metrics(const RealMatrix& pred, const RealMatrix& truth) {
    MetricAccumulator acc;
    acc.add(pred, truth);
    return acc.finish();
}

MetricReport evaluate_forecaster(const Forecaster& forecast, std::span<const MtsWindow> windows,
                                 const MinMaxStats* stats, bool denormalize) {
    if (windows.empty()) throw DataError("evaluation split has no windows");
    if (denormalize && stats == nullptr) throw Error("denormalized evaluation needs min-max statistics");
    MetricAccumulator acc;
    for (const auto& w : windows) {
        const RealMatrix pred = forecast(w);
        if (denormalize) {
            acc.add(minmax_invert_rows(pred, *stats), minmax_invert_rows(w.target, *stats));
        } else {
            acc.add(pred, w.target);
        }
    }
    return acc.finish();
}

MetricReport evaluate_split(const FourierGnnModel& model, std::span<const MtsWindow> windows,
                            const MinMaxStats& stats, bool denormalize) {
    return evaluate_forecaster([&model](const MtsWindow& w) { return model_forward(model, w); }, windows,
                               &stats, denormalize);
}

RealMatrix repeat_last_forecast(const MtsWindow& window, Index horizon) {
    return window.input.col(window.input.cols() - 1).replicate(1, horizon);
}

MetricReport evaluate_repeat_last(std::span<const MtsWindow> windows, const MinMaxStats& stats, bool denormalize) {
    return evaluate_forecaster([](const MtsWindow& w) { return repeat_last_forecast(w, w.target.cols()); },
                               windows, &stats, denormalize);
}

double loglog_slope(std::span<const BenchPoint> points) {
    if (points.size() < 2) throw Error("slope fit needs at least two sizes");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : points) {
        const double x = std::log(static_cast<double>(p.n));
        if (!(p.min_seconds > 0.0)) throw Error("slope fit needs positive timings");
        const double y = std::log(p.min_seconds);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(points.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

BenchReport bench_scaling(Index d, Index k, std::span<const Index> spectral_sizes,
                          std::span<const Index> dense_sizes, Index repeats, std::uint64_t seed) {
    if (repeats < 3) throw Error("bench_scaling needs at least 3 repeats");
    for (auto sizes : {spectral_sizes, dense_sizes}) {
        for (std::size_t i = 1; i < sizes.size(); ++i) {
            if (sizes[i] <= sizes[i - 1]) throw Error("bench sizes must be strictly increasing");
        }
    }
    Eigen::setNbThreads(1);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));

    std::vector<FgoLayer> layers;
    for (Index i = 0; i < k; ++i) {
        FgoLayer layer{ComplexMatrix(d, d), ComplexVector::Zero(d)};
        for (Index j = 0; j < layer.weight.size(); ++j) {
            layer.weight.data()[j] = Complex(bound * dist(rng), bound * dist(rng));
        }
        layers.push_back(std::move(layer));
    }
    const FgoStack stack = FgoStack::independent(layers);
    std::vector<RealMatrix> weights;
    for (Index i = 0; i < k; ++i) weights.push_back(random_real(d, d, rng) * bound);

    BenchReport report{d, k, {}, {}, 0.0, 0.0};
    for (Index n : spectral_sizes) {
        const RealMatrix x = random_real(n, d, rng);
        RealMatrix sink;
        report.spectral.push_back(time_op(n, [&] {
            sink = to_real(idft_nodes(fgo_forward(x, stack, Activation::split_relu(), false)));
        }, repeats));
    }
    for (Index n : dense_sizes) {
        const RealMatrix x = random_real(n, d, rng);
        const RealMatrix a = random_real(n, n, rng) / static_cast<double>(n);
        RealMatrix sink;
        report.dense.push_back(time_op(n, [&] {
            RealMatrix term = x;
            RealMatrix total = x;
            for (const auto& w : weights) {
                term = (a * term) * w;
                total += term;
            }
            sink = std::move(total);
        }, repeats));
    }
    if (report.spectral.size() >= 2) report.spectral_slope = loglog_slope(report.spectral);
    if (report.dense.size() >= 2) report.dense_slope = loglog_slope(report.dense);
    return report;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, MetricReport>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(10);
    out << "model,mae,rmse,mape_percent,n_terms,n_masked_mape_terms\n";
    for (const auto& [name, r] : rows) {
        out << name << ',' << r.mae << ',' << r.rmse << ',' << r.mape_percent << ',' << r.n_terms << ','
            << r.n_masked_mape_terms << '\n';
    }
}

void write_bench_csv(const std::filesystem::path& path, const BenchReport& report) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(10);
    out << "path,n,mean_seconds,std_seconds,min_seconds\n";
    auto rows = [&](const char* name, const std::vector<BenchPoint>& pts) {
        for (const auto& p : pts) {
            out << name << ',' << p.n << ',' << p.mean_seconds << ',' << p.std_seconds << ',' << p.min_seconds << '\n';
        }
    };
    rows("spectral", report.spectral);
    rows("dense", report.dense);
}

} // namespace fgnn
