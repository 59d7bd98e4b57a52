#pragma once
/**
 * @file config.hpp
 * @brief Flat key=value configuration ('#' starts a comment) and the run /
 *        experiment specifications built from it.
 *
 * Recognised keys mirror the CLI flags one to one:
 *
 *   method optimizer init init_value init_lo init_hi layers neurons ntp kmax
 *   lambda xend u0 seed runs workers values xend_values methods optimizers ntps
 *   width timing history weights cbp_alpha cbp_beta vbp_alpha0 vbp_alpha_e
 *   vbp_kc vbp_beta adam_alpha adam_beta1 adam_beta2 adam_eps penalty
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nform/neural_form.hpp"
#include "nform/ode_model.hpp"
#include "nform/optim.hpp"

namespace nform {

/// Invalid configuration value; `field()` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string, std::less<>>;

std::span<const std::string_view> known_keys() noexcept;

/// Throws ConfigError for malformed lines or unknown keys.
KeyValues parse_key_values(std::string_view text);
/// Throws IoError if the file cannot be read.
KeyValues load_key_values(const std::filesystem::path& path);

/// Everything needed to reproduce one training run.
struct RunSpec {
    TrainingConfig training{};
    StiffLinearIVP ivp{};
    std::size_t ntp = 10;

    Grid grid() const { return uniform_grid(ivp.x_end, ntp); }
    void validate() const;
};

enum class ExperimentId { Single, Ensemble, Exp1, Exp2, Exp3, Exp4, Exp5, Exp6, GradCheck };

std::string_view to_string(ExperimentId id) noexcept;
/// Throws ConfigError("command", ...) for unknown ids.
ExperimentId parse_experiment_id(std::string_view text);

struct ExperimentSpec {
    ExperimentId id = ExperimentId::Single;
    RunSpec base{};
    std::vector<double> values;       ///< primary sweep axis
    std::vector<double> xend_values;  ///< exp5 part 2 axis
    std::size_t runs = 1;             ///< random-init members per sweep point
    std::uint64_t base_seed = 0;
    std::filesystem::path out;        ///< output directory; empty means stdout
    unsigned workers = 1;
    std::vector<Method> methods;
    std::vector<OptimizerKind> optimizers;
    std::vector<std::size_t> ntps;
    double width = 1e-2;  ///< exp1 perturbation width around each constant
    bool timing = false;  ///< write measured wall_ms instead of 0
    bool history = false;
    bool weights = false;

    void validate() const;
};

/// Applies the per-experiment defaults, then every key in `kv`.
ExperimentSpec build_spec(ExperimentId id, const KeyValues& kv);

/// Inclusive arithmetic range, robust to accumulated rounding.
std::vector<double> linear_range(double first, double last, double step);

}  // namespace nform
