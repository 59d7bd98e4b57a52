#include "nform/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nform {

namespace {

bool usable(const RunRecord& r) {
    return !r.diverged && std::isfinite(r.delta_u);
}

}  // namespace

double numeric_error(std::span<const double> exact, std::span<const double> trial) {
    if (exact.size() != trial.size()) {
        throw std::invalid_argument("numeric_error: sequences differ in length");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        sum += std::abs(exact[i] - trial[i]);
    }
    return sum;
}

double mean_numeric_error(std::span<const double> exact, std::span<const double> trial) {
    const double sum = numeric_error(exact, trial);
    if (exact.empty()) {
        throw std::invalid_argument("mean_numeric_error: empty sequences");
    }
    return sum / static_cast<double>(exact.size());
}

double nearest_rank_quantile(std::span<const double> sorted, unsigned percent) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile of an empty sequence");
    }
    if (percent > 100) {
        throw std::invalid_argument("quantile percent above 100");
    }
    // Integer arithmetic keeps ceil(q n) exact, e.g. 0.3 * 10 would round up to 4.
    const std::size_t n = sorted.size();
    std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

EnsembleSummary summarize(std::span<const RunRecord> records) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    EnsembleSummary s;
    std::vector<double> values;
    values.reserve(records.size());
    for (const RunRecord& r : records) {
        if (usable(r)) {
            values.push_back(r.delta_u);
        } else {
            ++s.diverged;
        }
    }
    s.count = values.size();
    if (values.empty()) {
        s.empty = true;
        s.mean = s.stddev = s.q10 = s.q20 = s.q30 = s.min = s.max = nan;
        return s;
    }
    s.empty = false;
    // Sorting first makes the moments independent of input order as well.
    std::sort(values.begin(), values.end());

    // Moments of the offsets from the smallest value, so an ensemble of equal
    // values has exactly that mean and zero spread.
    const double base = values.front();
    double sum = 0.0;
    for (const double v : values) {
        sum += v - base;
    }
    const double shift = sum / static_cast<double>(values.size());
    s.mean = base + shift;
    if (values.size() > 1) {
        double sq = 0.0;
        for (const double v : values) {
            const double d = (v - base) - shift;
            sq += d * d;
        }
        s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
    } else {
        s.stddev = 0.0;
    }
    s.q10 = nearest_rank_quantile(values, 10);
    s.q20 = nearest_rank_quantile(values, 20);
    s.q30 = nearest_rank_quantile(values, 30);
    s.min = values.front();
    s.max = values.back();
    return s;
}

AverageError average_error(std::span<const RunRecord> records) {
    AverageError out;
    double sum = 0.0;
    for (const RunRecord& r : records) {
        if (usable(r)) {
            sum += r.delta_u;
            ++out.count;
        } else {
            ++out.diverged;
        }
    }
    out.contaminated = out.diverged > 0;
    out.mean = out.count > 0 ? sum / static_cast<double>(out.count)
                             : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace nform
