#pragma once
/**
 * @file network.hpp
 * @brief Scalar-input feedforward network with sigmoid hidden layers and a
 *        linear output neuron, plus the weight gradients needed by the
 *        neural-form cost functions.
 *
 * Flattened weight layout (canonical, never reordered):
 *
 *   layer 1      : w_1..w_H (input weights), u_1..u_H (biases)
 *   layer l > 1  : W[j][k] row-major (j = receiving neuron), then H biases
 *   output       : v_1..v_H (no output bias)
 */

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nform {

double sigmoid(double z) noexcept;
double sigmoid_d1(double z) noexcept;
double sigmoid_d2(double z) noexcept;

struct Architecture {
    std::size_t hidden_layers = 1;
    std::size_t neurons = 5;

    /// Throws std::invalid_argument when either count is zero.
    void validate() const;
    std::size_t parameter_count() const noexcept;

    /// Offset of layer `l` (0-based) inside the flattened vector.
    std::size_t layer_offset(std::size_t l) const noexcept;
    std::size_t output_offset() const noexcept;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

class NetworkParameters {
public:
    NetworkParameters() = default;
    /// Throws std::invalid_argument on length mismatch or non-finite entries.
    NetworkParameters(Architecture arch, std::vector<double> weights);

    const Architecture& arch() const noexcept { return arch_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<double> weights() noexcept { return weights_; }
    std::size_t size() const noexcept { return weights_.size(); }

    bool all_finite() const noexcept;

    friend bool operator==(const NetworkParameters&, const NetworkParameters&) = default;

private:
    Architecture arch_{};
    std::vector<double> weights_;
};

/// Per-layer values of one forward evaluation, including the input tangent
/// channel d(.)/dx. Buffers are sized once and reused across evaluations.
struct ForwardTrace {
    std::vector<std::vector<double>> z;   ///< pre-activations
    std::vector<std::vector<double>> a;   ///< sigmoid(z)
    std::vector<std::vector<double>> dz;  ///< dz/dx
    std::vector<std::vector<double>> da;  ///< da/dx
    double x = 0.0;
    double value = 0.0;       ///< N(x, p)
    double derivative = 0.0;  ///< dN/dx

    explicit ForwardTrace(const Architecture& arch = {});
};

/// Evaluates N and dN/dx, reusing the buffers of `trace`.
void forward(const NetworkParameters& params, double x, ForwardTrace& trace);
ForwardTrace forward(const NetworkParameters& params, double x);

/// Reverse sweep accumulating
///   grad += seed_value * dN/dp + seed_derivative * d(dN/dx)/dp
/// for the point captured in `trace`. `grad` must have params.size() entries.
void accumulate_gradient(const NetworkParameters& params, const ForwardTrace& trace,
                         double seed_value, double seed_derivative,
                         std::span<double> grad, std::vector<double>& scratch);

std::vector<double> grad_output(const NetworkParameters& params, double x);
std::vector<double> grad_output_derivative(const NetworkParameters& params, double x);

/// Direct one-hidden-layer formulas for dN/dp and d(dN/dx)/dp, written out
/// per weight family. Throws std::invalid_argument unless hidden_layers == 1.
struct ClosedFormGradients {
    std::vector<double> output;
    std::vector<double> derivative;
};
ClosedFormGradients closed_form_gradients(const NetworkParameters& params, double x);

NetworkParameters init_constant(const Architecture& arch, double c);

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw;
/// independent of the standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) noexcept;

/// Every entry i.i.d. uniform on [lo, hi). Throws std::invalid_argument if lo >= hi.
NetworkParameters init_random(const Architecture& arch, double lo, double hi,
                              std::mt19937_64& rng);

}  // namespace nform
