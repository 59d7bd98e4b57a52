#include "nform/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nform {

double sigmoid(double z) noexcept {
    // Branch on sign so exp() only ever sees a non-positive argument.
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double sigmoid_d1(double z) noexcept {
    const double s = sigmoid(z);
    return s * (1.0 - s);
}

double sigmoid_d2(double z) noexcept {
    const double s = sigmoid(z);
    return s * (1.0 - s) * (1.0 - 2.0 * s);
}

void Architecture::validate() const {
    if (hidden_layers < 1) {
        throw std::invalid_argument("layers: at least one hidden layer is required");
    }
    if (neurons < 1) {
        throw std::invalid_argument("neurons: at least one neuron per layer is required");
    }
}

std::size_t Architecture::parameter_count() const noexcept {
    const std::size_t h = neurons;
    return 2 * h + (hidden_layers - 1) * (h * h + h) + h;
}

std::size_t Architecture::layer_offset(std::size_t l) const noexcept {
    if (l == 0) {
        return 0;
    }
    const std::size_t h = neurons;
    return 2 * h + (l - 1) * (h * h + h);
}

std::size_t Architecture::output_offset() const noexcept {
    return layer_offset(hidden_layers);
}

NetworkParameters::NetworkParameters(Architecture arch, std::vector<double> weights)
    : arch_(arch), weights_(std::move(weights)) {
    arch_.validate();
    if (weights_.size() != arch_.parameter_count()) {
        throw std::invalid_argument("weights: expected " + std::to_string(arch_.parameter_count()) +
                                    " entries, got " + std::to_string(weights_.size()));
    }
    if (!all_finite()) {
        throw std::invalid_argument("weights: non-finite entry");
    }
}

bool NetworkParameters::all_finite() const noexcept {
    return std::all_of(weights_.begin(), weights_.end(),
                       [](double w) { return std::isfinite(w); });
}

ForwardTrace::ForwardTrace(const Architecture& arch)
    : z(arch.hidden_layers, std::vector<double>(arch.neurons)),
      a(arch.hidden_layers, std::vector<double>(arch.neurons)),
      dz(arch.hidden_layers, std::vector<double>(arch.neurons)),
      da(arch.hidden_layers, std::vector<double>(arch.neurons)) {}

void forward(const NetworkParameters& params, double x, ForwardTrace& trace) {
    const Architecture& arch = params.arch();
    const std::size_t h = arch.neurons;
    const std::span<const double> p = params.weights();
    if (trace.z.size() != arch.hidden_layers || trace.z.front().size() != h) {
        trace = ForwardTrace(arch);
    }
    trace.x = x;

    for (std::size_t j = 0; j < h; ++j) {
        const double w = p[j];
        const double z = w * x + p[h + j];
        const double s = sigmoid(z);
        trace.z[0][j] = z;
        trace.a[0][j] = s;
        trace.dz[0][j] = w;
        trace.da[0][j] = s * (1.0 - s) * w;
    }

    for (std::size_t l = 1; l < arch.hidden_layers; ++l) {
        const double* weights = p.data() + arch.layer_offset(l);
        const double* bias = weights + h * h;
        const std::vector<double>& a_prev = trace.a[l - 1];
        const std::vector<double>& da_prev = trace.da[l - 1];
        for (std::size_t j = 0; j < h; ++j) {
            const double* row = weights + j * h;
            double z = bias[j];
            double dz = 0.0;
            for (std::size_t k = 0; k < h; ++k) {
                z += row[k] * a_prev[k];
                dz += row[k] * da_prev[k];
            }
            const double s = sigmoid(z);
            trace.z[l][j] = z;
            trace.a[l][j] = s;
            trace.dz[l][j] = dz;
            trace.da[l][j] = s * (1.0 - s) * dz;
        }
    }

    const double* v = p.data() + arch.output_offset();
    const std::vector<double>& a_last = trace.a.back();
    const std::vector<double>& da_last = trace.da.back();
    double value = 0.0;
    double derivative = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
        value += v[j] * a_last[j];
        derivative += v[j] * da_last[j];
    }
    trace.value = value;
    trace.derivative = derivative;
}

ForwardTrace forward(const NetworkParameters& params, double x) {
    ForwardTrace trace(params.arch());
    forward(params, x, trace);
    return trace;
}

void accumulate_gradient(const NetworkParameters& params, const ForwardTrace& trace,
                         double seed_value, double seed_derivative,
                         std::span<double> grad, std::vector<double>& scratch) {
    const Architecture& arch = params.arch();
    const std::size_t h = arch.neurons;
    const std::span<const double> p = params.weights();
    if (grad.size() != p.size()) {
        throw std::invalid_argument("gradient buffer does not match parameter count");
    }
    scratch.resize(4 * h);
    // Adjoints of the value channel (a) and the tangent channel (da), and of
    // the corresponding pre-activation quantities (z, dz).
    double* a_bar = scratch.data();
    double* da_bar = a_bar + h;
    double* z_bar = da_bar + h;
    double* dz_bar = z_bar + h;

    const std::size_t out = arch.output_offset();
    const std::vector<double>& a_last = trace.a.back();
    const std::vector<double>& da_last = trace.da.back();
    for (std::size_t j = 0; j < h; ++j) {
        const double v = p[out + j];
        a_bar[j] = seed_value * v;
        da_bar[j] = seed_derivative * v;
        grad[out + j] += seed_value * a_last[j] + seed_derivative * da_last[j];
    }

    for (std::size_t l = arch.hidden_layers; l-- > 0;) {
        const std::vector<double>& a = trace.a[l];
        const std::vector<double>& dz = trace.dz[l];
        for (std::size_t j = 0; j < h; ++j) {
            const double s = a[j];
            const double d1 = s * (1.0 - s);
            const double d2 = d1 * (1.0 - 2.0 * s);
            z_bar[j] = a_bar[j] * d1 + da_bar[j] * d2 * dz[j];
            dz_bar[j] = da_bar[j] * d1;
        }

        const std::size_t off = arch.layer_offset(l);
        if (l == 0) {
            for (std::size_t j = 0; j < h; ++j) {
                grad[off + j] += z_bar[j] * trace.x + dz_bar[j];
                grad[off + h + j] += z_bar[j];
            }
            break;
        }

        const std::vector<double>& a_prev = trace.a[l - 1];
        const std::vector<double>& da_prev = trace.da[l - 1];
        const double* weights = p.data() + off;
        double* g_weights = grad.data() + off;
        double* g_bias = g_weights + h * h;
        std::fill(a_bar, a_bar + h, 0.0);
        std::fill(da_bar, da_bar + h, 0.0);
        for (std::size_t j = 0; j < h; ++j) {
            const double* row = weights + j * h;
            double* g_row = g_weights + j * h;
            for (std::size_t k = 0; k < h; ++k) {
                g_row[k] += z_bar[j] * a_prev[k] + dz_bar[j] * da_prev[k];
                a_bar[k] += row[k] * z_bar[j];
                da_bar[k] += row[k] * dz_bar[j];
            }
            g_bias[j] += z_bar[j];
        }
    }
}

std::vector<double> grad_output(const NetworkParameters& params, double x) {
    const ForwardTrace trace = forward(params, x);
    std::vector<double> grad(params.size(), 0.0);
    std::vector<double> scratch;
    accumulate_gradient(params, trace, 1.0, 0.0, grad, scratch);
    return grad;
}

std::vector<double> grad_output_derivative(const NetworkParameters& params, double x) {
    const ForwardTrace trace = forward(params, x);
    std::vector<double> grad(params.size(), 0.0);
    std::vector<double> scratch;
    accumulate_gradient(params, trace, 0.0, 1.0, grad, scratch);
    return grad;
}

ClosedFormGradients closed_form_gradients(const NetworkParameters& params, double x) {
    const Architecture& arch = params.arch();
    if (arch.hidden_layers != 1) {
        throw std::invalid_argument("closed-form gradients exist only for one hidden layer");
    }
    const std::size_t h = arch.neurons;
    const std::span<const double> p = params.weights();
    ClosedFormGradients out{std::vector<double>(p.size()), std::vector<double>(p.size())};
    for (std::size_t j = 0; j < h; ++j) {
        const double w = p[j];
        const double u = p[h + j];
        const double v = p[2 * h + j];
        const double z = w * x + u;
        const double s = sigmoid(z);
        const double s1 = sigmoid_d1(z);
        const double s2 = sigmoid_d2(z);

        out.output[j] = v * x * s1;
        out.output[h + j] = v * s1;
        out.output[2 * h + j] = s;

        out.derivative[j] = v * s1 + v * w * x * s2;
        out.derivative[h + j] = v * w * s2;
        out.derivative[2 * h + j] = w * s1;
    }
    return out;
}

NetworkParameters init_constant(const Architecture& arch, double c) {
    arch.validate();
    return NetworkParameters(arch, std::vector<double>(arch.parameter_count(), c));
}

double uniform01(std::mt19937_64& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

NetworkParameters init_random(const Architecture& arch, double lo, double hi,
                              std::mt19937_64& rng) {
    arch.validate();
    if (!(lo < hi)) {
        throw std::invalid_argument("init range: lower bound must be below upper bound");
    }
    std::vector<double> weights(arch.parameter_count());
    const double width = hi - lo;
    const double top = std::nextafter(hi, lo);
    for (double& w : weights) {
        w = std::min(lo + width * uniform01(rng), top);
    }
    return NetworkParameters(arch, std::move(weights));
}

}  // namespace nform
