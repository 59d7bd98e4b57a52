#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nform {

/// du/dx = lambda * u on [0, x_end] with u(0) = u0.
struct StiffLinearIVP {
    double lambda = -5.0;
    double u0 = 1.0;
    double x_end = 2.0;

    void validate() const;
};

double exact_solution(const StiffLinearIVP& ivp, double x) noexcept;

/// Uniformly spaced points, both endpoints included.
class Grid {
public:
    std::span<const double> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    double operator[](std::size_t i) const noexcept { return points_[i]; }
    double spacing() const noexcept { return spacing_; }

    friend Grid uniform_grid(double x_end, std::size_t n);

private:
    std::vector<double> points_;
    double spacing_ = 0.0;
};

/// Throws std::invalid_argument when n < 2 or x_end <= 0.
Grid uniform_grid(double x_end, std::size_t n);

}  // namespace nform
