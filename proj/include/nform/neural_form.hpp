#pragma once
/**
 * @file neural_form.hpp
 * @brief Trial solutions and residual cost functions for the stiff linear IVP.
 *
 * TSM  : u_t(x) = u0 + x N(x)       (initial condition built in)
 * mTSM : u_t(x) = N(x)              (initial condition as a cost penalty at x = 0)
 *
 * Both costs are unnormalized sums over grid points with a factor 1/2. The
 * mTSM penalty 1/2 (N(0) - u0)^2 carries weight n by default, i.e. it is
 * added once per training point; Penalty::Once gives it weight 1.
 */

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "nform/network.hpp"
#include "nform/ode_model.hpp"

namespace nform {

enum class Method { TSM, MTSM };

std::string_view to_string(Method m) noexcept;
/// Accepts "tsm" / "mtsm" (case-insensitive). Throws std::invalid_argument.
Method parse_method(std::string_view text);

enum class Penalty { PerPoint, Once };

std::string_view to_string(Penalty p) noexcept;
/// Accepts "per_point" / "once". Throws std::invalid_argument.
Penalty parse_penalty(std::string_view text);
double penalty_weight(Penalty p, std::size_t points) noexcept;

struct CostReport {
    double value = 0.0;
    std::vector<double> gradient;
    std::vector<double> residuals;
    double penalty = 0.0;  ///< N(0) - u0; always zero for TSM
};

double trial_value(Method method, const StiffLinearIVP& ivp, const NetworkParameters& params,
                   double x);

/// Reusable evaluator: holds the per-point trace and scratch buffers so a
/// training loop allocates nothing per epoch.
class CostEvaluator {
public:
    CostEvaluator(Method method, StiffLinearIVP ivp, Grid grid,
                  Penalty penalty = Penalty::PerPoint);

    Method method() const noexcept { return method_; }
    Penalty penalty() const noexcept { return penalty_; }
    const Grid& grid() const noexcept { return grid_; }
    const StiffLinearIVP& ivp() const noexcept { return ivp_; }

    /// Fills `report` (gradient sized to params). Points are visited in
    /// ascending grid order, so the result is bit-reproducible.
    void evaluate(const NetworkParameters& params, CostReport& report);
    CostReport evaluate(const NetworkParameters& params);

private:
    Method method_;
    Penalty penalty_;
    StiffLinearIVP ivp_;
    Grid grid_;
    ForwardTrace trace_;
    std::vector<double> scratch_;
};

CostReport cost_tsm(const NetworkParameters& params, const Grid& grid, const StiffLinearIVP& ivp);
/// Throws std::invalid_argument if the grid does not start at x = 0.
CostReport cost_mtsm(const NetworkParameters& params, const Grid& grid,
                     const StiffLinearIVP& ivp, Penalty penalty = Penalty::PerPoint);

/// (x_i, u_t(x_i)) in grid order.
std::vector<std::pair<double, double>> evaluate_on_grid(Method method, const StiffLinearIVP& ivp,
                                                        const NetworkParameters& params,
                                                        const Grid& grid);

}  // namespace nform
