#pragma once
/**
 * @file gradcheck.hpp
 * @brief Finite-difference validation of the analytic network and cost
 *        gradients.
 *
 * The reference side re-evaluates N, dN/dx and both costs in long double with
 * its own straightforward forward pass and differentiates them by central
 * differences. An entry passes if its relative error is below `rel_tol`, or,
 * when the reference magnitude is below `small`, if its absolute error is
 * below `abs_tol`.
 */

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nform/network.hpp"
#include "nform/neural_form.hpp"

namespace nform {

struct GradCheckOptions {
    std::vector<std::size_t> layers{1, 2, 3};
    std::vector<std::size_t> neurons{1, 5, 10};
    std::size_t draws = 20;
    std::size_t ntp = 10;
    double lambda = -5.0;
    double x_end = 2.0;
    double weight_range = 1.0;  ///< draws are uniform on [-range, range)
    std::uint64_t seed = 7;
    double step = 1e-6;
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    double small = 1e-3;
    double closed_form_tol = 1e-12;
    bool corrupt = false;  ///< perturbs one analytic entry; for testing the detector
};

struct GradCheckReport {
    std::size_t entries = 0;
    double max_rel_error = 0.0;     ///< over entries with |reference| >= small
    double max_abs_error = 0.0;     ///< over entries with |reference| < small
    double max_closed_form_diff = 0.0;
    std::size_t failures = 0;
    std::vector<std::string> failure_notes;  ///< first few failing entries

    bool passed() const noexcept { return failures == 0; }
};

/// Long-double reference values of N and dN/dx.
struct ReferenceOutput {
    long double value;
    long double derivative;
};
ReferenceOutput reference_forward(const Architecture& arch, const std::vector<long double>& p,
                                  long double x);
long double reference_cost(Method method, const Architecture& arch,
                           const std::vector<long double>& p, const std::vector<double>& grid,
                           long double lambda, long double u0, long double penalty_weight = 1.0L);

GradCheckReport gradcheck(const GradCheckOptions& options);

}  // namespace nform
