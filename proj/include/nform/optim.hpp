#pragma once
/**
 * @file optim.hpp
 * @brief Momentum backpropagation (constant or linearly decaying rate), Adam,
 *        and the fixed-budget full-batch training loop.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nform/metrics.hpp"
#include "nform/network.hpp"
#include "nform/neural_form.hpp"
#include "nform/ode_model.hpp"

namespace nform {

enum class OptimizerKind { Adam, CBP, VBP };

std::string_view to_string(OptimizerKind k) noexcept;
/// Accepts "adam" / "cbp" / "vbp" (case-insensitive). Throws std::invalid_argument.
OptimizerKind parse_optimizer(std::string_view text);

struct LearningRateSchedule {
    enum class Mode { Constant, LinearDecay };
    Mode mode = Mode::Constant;
    double alpha = 1e-3;
    double alpha0 = 1e-2;
    double alpha_end = 1e-3;
    std::uint64_t decay_epochs = 10000;

    void validate() const;
};

/// alpha0 - (alpha0 - alpha_end) k / k_c for k <= k_c, alpha_end afterwards.
double schedule_rate(const LearningRateSchedule& s, std::uint64_t k) noexcept;

struct MomentumState {
    std::vector<double> previous_update;
    std::uint64_t epoch = 0;

    explicit MomentumState(std::size_t n = 0) : previous_update(n, 0.0) {}
};

/// delta = -rate * grad + beta * previous_delta; params += delta.
void step_momentum(std::span<double> params, std::span<const double> grad, MomentumState& state,
                   double rate, double beta);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected Adam update.
void step_adam(std::span<double> params, std::span<const double> grad, AdamState& state);

struct OptimizerSettings {
    double cbp_alpha = 1e-3;
    double cbp_beta = 0.9;
    double vbp_alpha0 = 1e-2;
    double vbp_alpha_end = 1e-3;
    std::uint64_t vbp_decay_epochs = 10000;
    double vbp_beta = 0.9;
    double adam_alpha = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct InitSpec {
    enum class Kind { Constant, Uniform };
    Kind kind = Kind::Constant;
    double value = 0.0;  ///< constant value
    double lo = 0.0;     ///< uniform range [lo, hi)
    double hi = 1e-2;
    std::uint64_t seed = 0;

    NetworkParameters materialize(const Architecture& arch) const;
};

struct TrainingConfig {
    Method method = Method::MTSM;
    Penalty penalty = Penalty::PerPoint;  ///< mTSM only
    OptimizerKind optimizer = OptimizerKind::Adam;
    std::uint64_t k_max = 100000;
    OptimizerSettings settings{};
    Architecture arch{};
    InitSpec init{};
    bool record_history = false;
    bool keep_weights = false;

    void validate() const;
};

/// Stable 16-hex-digit hash of every field that influences a run's outcome.
std::string fingerprint(const TrainingConfig& config, const StiffLinearIVP& ivp,
                        const Grid& grid);

/// Epochs at which history is sampled: 1..9, 10..90, 100..900, ... plus k_max.
std::vector<std::uint64_t> history_epochs(std::uint64_t k_max);

/// Runs exactly k_max full-batch epochs unless the cost, gradient or weights
/// become non-finite; then the record is returned flagged as diverged.
RunRecord train(const TrainingConfig& config, const StiffLinearIVP& ivp, const Grid& grid);

/// l1 error sum_i |u(x_i) - u_t(x_i)| of a parameter vector on the grid.
double grid_error(Method method, const StiffLinearIVP& ivp, const NetworkParameters& params,
                  const Grid& grid);

}  // namespace nform
