#include "nform/ode_model.hpp"

#include <cmath>
#include <stdexcept>

namespace nform {

void StiffLinearIVP::validate() const {
    if (!std::isfinite(lambda)) {
        throw std::invalid_argument("lambda: must be finite");
    }
    if (!std::isfinite(u0)) {
        throw std::invalid_argument("u0: must be finite");
    }
    if (!(x_end > 0.0) || !std::isfinite(x_end)) {
        throw std::invalid_argument("xend: domain end must be positive");
    }
}

double exact_solution(const StiffLinearIVP& ivp, double x) noexcept {
    return ivp.u0 * std::exp(ivp.lambda * x);
}

Grid uniform_grid(double x_end, std::size_t n) {
    if (n < 2) {
        throw std::invalid_argument("ntp: a grid needs at least two points");
    }
    if (!(x_end > 0.0) || !std::isfinite(x_end)) {
        throw std::invalid_argument("xend: domain end must be positive");
    }
    Grid grid;
    grid.spacing_ = x_end / static_cast<double>(n - 1);
    grid.points_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid.points_[i] = x_end * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    grid.points_.back() = x_end;
    return grid;
}

}  // namespace nform
