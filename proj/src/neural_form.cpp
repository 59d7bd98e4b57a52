#include "nform/neural_form.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace nform {

std::string_view to_string(Method m) noexcept {
    return m == Method::TSM ? "tsm" : "mtsm";
}

Method parse_method(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "tsm") {
        return Method::TSM;
    }
    if (lower == "mtsm") {
        return Method::MTSM;
    }
    throw std::invalid_argument("method: expected tsm or mtsm, got '" + std::string(text) + "'");
}

std::string_view to_string(Penalty p) noexcept {
    return p == Penalty::PerPoint ? "per_point" : "once";
}

Penalty parse_penalty(std::string_view text) {
    if (text == "per_point") {
        return Penalty::PerPoint;
    }
    if (text == "once") {
        return Penalty::Once;
    }
    throw std::invalid_argument("penalty: expected per_point or once, got '" + std::string(text) +
                                "'");
}

double penalty_weight(Penalty p, std::size_t points) noexcept {
    return p == Penalty::PerPoint ? static_cast<double>(points) : 1.0;
}

double trial_value(Method method, const StiffLinearIVP& ivp, const NetworkParameters& params,
                   double x) {
    const double n = forward(params, x).value;
    if (method == Method::TSM) {
        return ivp.u0 + x * n;
    }
    return n;
}

CostEvaluator::CostEvaluator(Method method, StiffLinearIVP ivp, Grid grid, Penalty penalty)
    : method_(method), penalty_(penalty), ivp_(ivp), grid_(std::move(grid)) {
    ivp_.validate();
    if (method_ == Method::MTSM && (grid_.size() == 0 || grid_[0] != 0.0)) {
        throw std::invalid_argument("grid: mTSM needs x = 0 as its first point");
    }
}

void CostEvaluator::evaluate(const NetworkParameters& params, CostReport& report) {
    const std::size_t n = grid_.size();
    const double lambda = ivp_.lambda;
    const double weight = method_ == Method::MTSM ? penalty_weight(penalty_, n) : 0.0;
    report.gradient.assign(params.size(), 0.0);
    report.residuals.resize(n);
    report.penalty = 0.0;

    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid_[i];
        forward(params, x, trace_);
        const double net = trace_.value;
        const double net_x = trace_.derivative;

        double r = 0.0;
        double seed_value = 0.0;
        double seed_derivative = 0.0;
        if (method_ == Method::TSM) {
            // d/dx (u0 + x N) - lambda (u0 + x N)
            r = net + x * net_x - lambda * (ivp_.u0 + x * net);
            seed_value = r * (1.0 - lambda * x);
            seed_derivative = r * x;
        } else {
            r = net_x - lambda * net;
            seed_value = -lambda * r;
            seed_derivative = r;
            if (i == 0) {
                report.penalty = net - ivp_.u0;
                seed_value += weight * report.penalty;
            }
        }
        report.residuals[i] = r;
        sum_sq += r * r;
        accumulate_gradient(params, trace_, seed_value, seed_derivative, report.gradient,
                            scratch_);
    }
    report.value = 0.5 * sum_sq + 0.5 * weight * report.penalty * report.penalty;
}

CostReport CostEvaluator::evaluate(const NetworkParameters& params) {
    CostReport report;
    evaluate(params, report);
    return report;
}

CostReport cost_tsm(const NetworkParameters& params, const Grid& grid, const StiffLinearIVP& ivp) {
    CostEvaluator evaluator(Method::TSM, ivp, grid);
    return evaluator.evaluate(params);
}

CostReport cost_mtsm(const NetworkParameters& params, const Grid& grid,
                     const StiffLinearIVP& ivp, Penalty penalty) {
    CostEvaluator evaluator(Method::MTSM, ivp, grid, penalty);
    return evaluator.evaluate(params);
}

std::vector<std::pair<double, double>> evaluate_on_grid(Method method, const StiffLinearIVP& ivp,
                                                        const NetworkParameters& params,
                                                        const Grid& grid) {
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    ForwardTrace trace(params.arch());
    for (const double x : grid.points()) {
        forward(params, x, trace);
        out.emplace_back(x, method == Method::TSM ? ivp.u0 + x * trace.value : trace.value);
    }
    return out;
}

}  // namespace nform
