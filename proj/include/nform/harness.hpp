#pragma once
/**
 * @file harness.hpp
 * @brief Single runs, seeded ensembles and the six parameter-study sweeps.
 *
 * Member r of an ensemble is initialised from mix_seed(base_seed, r), a
 * splitmix64-style finaliser, so each run's seed depends only on its index and
 * results are identical under any worker count or schedule.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nform/config.hpp"
#include "nform/csv.hpp"
#include "nform/metrics.hpp"

namespace nform {

/// splitmix64 finaliser applied to base + (index + 1) * golden-ratio increment.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) noexcept;

/// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
/// exception thrown by any call is rethrown after all workers have joined.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

/// Trains every spec; records come back in input order.
std::vector<RunRecord> run_batch(std::span<const RunSpec> specs, unsigned workers);

/// Throws ConfigError on an invalid spec; divergence is reported in the record.
RunRecord run_single(const RunSpec& spec);

struct EnsembleResult {
    std::vector<RunSpec> specs;
    std::vector<RunRecord> records;
    EnsembleSummary summary;
    AverageError average;
};

/// `runs` copies of `base` with uniform initialisation seeded by mix_seed(base_seed, r).
EnsembleResult run_ensemble(const RunSpec& base, std::size_t runs, std::uint64_t base_seed,
                            unsigned workers);

struct OutputFile {
    std::string name;
    std::string content;
};

struct ExperimentOutput {
    std::vector<OutputFile> files;  ///< first entry is the all-runs table
    std::vector<ResultRow> rows;
};

/// Runs single, ensemble or exp1..exp6 and renders every CSV in memory.
ExperimentOutput run_experiment(const ExperimentSpec& spec);

/// Writes each file below `dir` (created if missing). Throws IoError.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir,
                                                 const ExperimentOutput& output);

}  // namespace nform
