#pragma once
/**
 * @file metrics.hpp
 * @brief l1 numeric error against the exact solution and ensemble statistics
 *        over repeated training runs.
 *
 * Estimators: sample standard deviation (divisor n - 1, zero for n = 1) and
 * nearest-rank quantiles (the value at 1-based rank ceil(q n) of the
 * ascending sort). Diverged runs never enter the moments; they are counted.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nform {

/// sum_i |exact_i - trial_i|. Throws std::invalid_argument on length mismatch.
double numeric_error(std::span<const double> exact, std::span<const double> trial);

/// numeric_error divided by the number of points. This is the delta u that
/// training records and the experiment tables report.
double mean_numeric_error(std::span<const double> exact, std::span<const double> trial);

struct HistoryPoint {
    std::uint64_t epoch = 0;
    double cost = 0.0;
    double delta_u = 0.0;  ///< grid-averaged
};

struct RunRecord {
    std::string fingerprint;
    std::uint64_t seed = 0;
    double delta_u = 0.0;   ///< grid-averaged l1 error; NaN when diverged
    double l1_error = 0.0;  ///< plain l1 sum; NaN when diverged
    double final_cost = 0.0;
    bool diverged = false;
    double wall_ms = 0.0;
    std::uint64_t epochs = 0;  ///< optimizer steps actually taken
    std::vector<HistoryPoint> history;
    std::vector<double> final_weights;
};

struct EnsembleSummary {
    bool empty = true;  ///< no finite member; every statistic below is NaN
    std::size_t count = 0;
    std::size_t diverged = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double q10 = 0.0;
    double q20 = 0.0;
    double q30 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Nearest-rank quantile of an ascending, non-empty sequence; `percent` in [0, 100].
double nearest_rank_quantile(std::span<const double> sorted, unsigned percent);

EnsembleSummary summarize(std::span<const RunRecord> records);

struct AverageError {
    double mean = 0.0;          ///< NaN if every member diverged
    std::size_t count = 0;      ///< finite members averaged
    std::size_t diverged = 0;
    bool contaminated = false;  ///< at least one member diverged
};

AverageError average_error(std::span<const RunRecord> records);

}  // namespace nform
