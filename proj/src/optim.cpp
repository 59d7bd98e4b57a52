#include "nform/optim.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace nform {

namespace {

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void check_alignment(std::size_t params, std::size_t grad, std::size_t state) {
    if (params != grad || params != state) {
        throw std::logic_error("optimizer state is not aligned with the parameter vector");
    }
}

void append_field(std::string& out, std::string_view key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out.append(key).append("=").append(buf).append(";");
}

void append_field(std::string& out, std::string_view key, std::uint64_t value) {
    out.append(key).append("=").append(std::to_string(value)).append(";");
}

void append_field(std::string& out, std::string_view key, std::string_view value) {
    out.append(key).append("=").append(value).append(";");
}

}  // namespace

std::string_view to_string(OptimizerKind k) noexcept {
    switch (k) {
        case OptimizerKind::Adam:
            return "adam";
        case OptimizerKind::CBP:
            return "cbp";
        case OptimizerKind::VBP:
            return "vbp";
    }
    return "adam";
}

OptimizerKind parse_optimizer(std::string_view text) {
    const std::string lower = lowercase(text);
    if (lower == "adam") {
        return OptimizerKind::Adam;
    }
    if (lower == "cbp") {
        return OptimizerKind::CBP;
    }
    if (lower == "vbp") {
        return OptimizerKind::VBP;
    }
    throw std::invalid_argument("optimizer: expected adam, cbp or vbp, got '" +
                                std::string(text) + "'");
}

void LearningRateSchedule::validate() const {
    if (mode == Mode::Constant) {
        if (!(alpha > 0.0)) {
            throw std::invalid_argument("alpha: learning rate must be positive");
        }
        return;
    }
    if (!(alpha_end > 0.0) || !(alpha0 >= alpha_end)) {
        throw std::invalid_argument("alpha0/alpha_e: need alpha0 >= alpha_e > 0");
    }
    if (decay_epochs < 1) {
        throw std::invalid_argument("kc: decay epoch cap must be at least 1");
    }
}

double schedule_rate(const LearningRateSchedule& s, std::uint64_t k) noexcept {
    if (s.mode == LearningRateSchedule::Mode::Constant) {
        return s.alpha;
    }
    if (k > s.decay_epochs) {
        return s.alpha_end;
    }
    const double rate = s.alpha0 - (s.alpha0 - s.alpha_end) / static_cast<double>(s.decay_epochs) *
                                       static_cast<double>(k);
    // Rounding must not carry the rate past alpha_end just before k_c.
    return s.alpha0 >= s.alpha_end ? std::max(rate, s.alpha_end) : std::min(rate, s.alpha_end);
}

void step_momentum(std::span<double> params, std::span<const double> grad, MomentumState& state,
                   double rate, double beta) {
    check_alignment(params.size(), grad.size(), state.previous_update.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double delta = -rate * grad[i] + beta * state.previous_update[i];
        state.previous_update[i] = delta;
        params[i] += delta;
    }
    ++state.epoch;
}

void step_adam(std::span<double> params, std::span<const double> grad, AdamState& state) {
    check_alignment(params.size(), grad.size(), state.m.size());
    check_alignment(params.size(), grad.size(), state.v.size());
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        params[i] -= state.alpha * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

NetworkParameters InitSpec::materialize(const Architecture& arch) const {
    if (kind == Kind::Constant) {
        return init_constant(arch, value);
    }
    std::mt19937_64 rng(seed);
    return init_random(arch, lo, hi, rng);
}

void TrainingConfig::validate() const {
    arch.validate();
    if (k_max < 1) {
        throw std::invalid_argument("kmax: at least one epoch is required");
    }
    if (init.kind == InitSpec::Kind::Uniform && !(init.lo < init.hi)) {
        throw std::invalid_argument("init: uniform range needs lo < hi");
    }
    if (init.kind == InitSpec::Kind::Constant && !std::isfinite(init.value)) {
        throw std::invalid_argument("init_value: must be finite");
    }
    LearningRateSchedule schedule;
    switch (optimizer) {
        case OptimizerKind::CBP:
            schedule.alpha = settings.cbp_alpha;
            break;
        case OptimizerKind::VBP:
            schedule.mode = LearningRateSchedule::Mode::LinearDecay;
            schedule.alpha0 = settings.vbp_alpha0;
            schedule.alpha_end = settings.vbp_alpha_end;
            schedule.decay_epochs = settings.vbp_decay_epochs;
            break;
        case OptimizerKind::Adam:
            schedule.alpha = settings.adam_alpha;
            if (!(settings.adam_beta1 >= 0.0 && settings.adam_beta1 < 1.0) ||
                !(settings.adam_beta2 >= 0.0 && settings.adam_beta2 < 1.0)) {
                throw std::invalid_argument("beta1/beta2: Adam decay rates must lie in [0, 1)");
            }
            if (!(settings.adam_eps > 0.0)) {
                throw std::invalid_argument("eps: must be positive");
            }
            break;
    }
    schedule.validate();
}

std::string fingerprint(const TrainingConfig& config, const StiffLinearIVP& ivp,
                        const Grid& grid) {
    std::string canon;
    append_field(canon, "method", to_string(config.method));
    if (config.method == Method::MTSM) {
        append_field(canon, "penalty", to_string(config.penalty));
    }
    append_field(canon, "optimizer", to_string(config.optimizer));
    append_field(canon, "kmax", config.k_max);
    append_field(canon, "layers", static_cast<std::uint64_t>(config.arch.hidden_layers));
    append_field(canon, "neurons", static_cast<std::uint64_t>(config.arch.neurons));
    append_field(canon, "ntp", static_cast<std::uint64_t>(grid.size()));
    append_field(canon, "lambda", ivp.lambda);
    append_field(canon, "u0", ivp.u0);
    append_field(canon, "xend", ivp.x_end);
    if (config.init.kind == InitSpec::Kind::Constant) {
        append_field(canon, "init", "const");
        append_field(canon, "init_value", config.init.value);
    } else {
        append_field(canon, "init", "uniform");
        append_field(canon, "init_lo", config.init.lo);
        append_field(canon, "init_hi", config.init.hi);
        append_field(canon, "seed", config.init.seed);
    }
    const OptimizerSettings& s = config.settings;
    switch (config.optimizer) {
        case OptimizerKind::CBP:
            append_field(canon, "alpha", s.cbp_alpha);
            append_field(canon, "beta", s.cbp_beta);
            break;
        case OptimizerKind::VBP:
            append_field(canon, "alpha0", s.vbp_alpha0);
            append_field(canon, "alpha_e", s.vbp_alpha_end);
            append_field(canon, "kc", s.vbp_decay_epochs);
            append_field(canon, "beta", s.vbp_beta);
            break;
        case OptimizerKind::Adam:
            append_field(canon, "alpha", s.adam_alpha);
            append_field(canon, "beta1", s.adam_beta1);
            append_field(canon, "beta2", s.adam_beta2);
            append_field(canon, "eps", s.adam_eps);
            break;
    }

    // FNV-1a, 64 bit.
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : canon) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::vector<std::uint64_t> history_epochs(std::uint64_t k_max) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t decade = 1; decade <= k_max; decade *= 10) {
        for (std::uint64_t m = 1; m <= 9; ++m) {
            const std::uint64_t e = m * decade;
            if (e > k_max) {
                break;
            }
            out.push_back(e);
        }
        if (decade > k_max / 10) {
            break;
        }
    }
    if (out.empty() || out.back() != k_max) {
        out.push_back(k_max);
    }
    return out;
}

double grid_error(Method method, const StiffLinearIVP& ivp, const NetworkParameters& params,
                  const Grid& grid) {
    std::vector<double> exact;
    std::vector<double> trial;
    exact.reserve(grid.size());
    trial.reserve(grid.size());
    for (const auto& [x, u] : evaluate_on_grid(method, ivp, params, grid)) {
        exact.push_back(exact_solution(ivp, x));
        trial.push_back(u);
    }
    return numeric_error(exact, trial);
}

RunRecord train(const TrainingConfig& config, const StiffLinearIVP& ivp, const Grid& grid) {
    config.validate();
    ivp.validate();
    const auto started = std::chrono::steady_clock::now();

    RunRecord record;
    record.fingerprint = fingerprint(config, ivp, grid);
    record.seed = config.init.kind == InitSpec::Kind::Uniform ? config.init.seed : 0;

    NetworkParameters params = config.init.materialize(config.arch);
    CostEvaluator evaluator(config.method, ivp, grid, config.penalty);
    CostReport report;

    const std::size_t n = params.size();
    MomentumState momentum(n);
    AdamState adam(n);
    adam.alpha = config.settings.adam_alpha;
    adam.beta1 = config.settings.adam_beta1;
    adam.beta2 = config.settings.adam_beta2;
    adam.eps = config.settings.adam_eps;

    LearningRateSchedule schedule;
    double beta = 0.0;
    if (config.optimizer == OptimizerKind::CBP) {
        schedule.alpha = config.settings.cbp_alpha;
        beta = config.settings.cbp_beta;
    } else if (config.optimizer == OptimizerKind::VBP) {
        schedule.mode = LearningRateSchedule::Mode::LinearDecay;
        schedule.alpha0 = config.settings.vbp_alpha0;
        schedule.alpha_end = config.settings.vbp_alpha_end;
        schedule.decay_epochs = config.settings.vbp_decay_epochs;
        beta = config.settings.vbp_beta;
    }

    std::vector<std::uint64_t> sample_at;
    if (config.record_history) {
        sample_at = history_epochs(config.k_max);
    }
    std::size_t next_sample = 0;
    const auto points = static_cast<double>(grid.size());

    // Weights of the last epoch whose values were all finite.
    std::vector<double> last_good(params.weights().begin(), params.weights().end());
    for (std::uint64_t k = 0; k < config.k_max; ++k) {
        evaluator.evaluate(params, report);
        if (!std::isfinite(report.value) || !all_finite(report.gradient)) {
            record.diverged = true;
            break;
        }
        std::span<double> weights = params.weights();
        std::copy(weights.begin(), weights.end(), last_good.begin());
        if (config.optimizer == OptimizerKind::Adam) {
            step_adam(weights, report.gradient, adam);
        } else {
            step_momentum(weights, report.gradient, momentum, schedule_rate(schedule, k), beta);
        }
        ++record.epochs;
        if (!all_finite(weights)) {
            std::copy(last_good.begin(), last_good.end(), weights.begin());
            record.diverged = true;
            break;
        }
        if (next_sample < sample_at.size() && sample_at[next_sample] == record.epochs) {
            HistoryPoint point;
            point.epoch = record.epochs;
            point.cost = evaluator.evaluate(params).value;
            point.delta_u = grid_error(config.method, ivp, params, grid) / points;
            record.history.push_back(point);
            ++next_sample;
        }
    }

    if (!record.diverged) {
        record.final_cost = evaluator.evaluate(params).value;
        record.l1_error = grid_error(config.method, ivp, params, grid);
        record.delta_u = record.l1_error / points;
        if (!std::isfinite(record.final_cost) || !std::isfinite(record.l1_error)) {
            record.diverged = true;
        }
    }
    if (record.diverged) {
        record.delta_u = std::numeric_limits<double>::quiet_NaN();
        record.l1_error = std::numeric_limits<double>::quiet_NaN();
        record.final_cost = std::numeric_limits<double>::quiet_NaN();
    }
    if (config.keep_weights) {
        record.final_weights.assign(params.weights().begin(), params.weights().end());
    }
    record.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    return record;
}

}  // namespace nform
