#include "nform/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <utility>

namespace nform {

namespace {

long double sigmoid_ld(long double z) {
    return 1.0L / (1.0L + std::exp(-z));
}

struct Comparator {
    const GradCheckOptions& opt;
    GradCheckReport& report;

    void compare(double analytic, long double reference, const char* what, std::size_t index) {
        ++report.entries;
        const long double err = std::fabs(static_cast<long double>(analytic) - reference);
        bool ok = true;
        if (std::fabs(reference) < opt.small) {
            report.max_abs_error = std::max(report.max_abs_error, static_cast<double>(err));
            ok = err < opt.abs_tol;
        } else {
            const double rel = static_cast<double>(err / std::fabs(reference));
            report.max_rel_error = std::max(report.max_rel_error, rel);
            ok = rel < opt.rel_tol;
        }
        if (!ok) {
            ++report.failures;
            if (report.failure_notes.size() < 8) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "%s[%zu]: analytic %.17g vs reference %.17Lg", what,
                              index, analytic, reference);
                report.failure_notes.emplace_back(buf);
            }
        }
    }
};

template <typename F>
long double central_difference(std::vector<long double>& p, std::size_t i, long double h, F&& f) {
    const long double saved = p[i];
    p[i] = saved + h;
    const long double up = f(p);
    p[i] = saved - h;
    const long double down = f(p);
    p[i] = saved;
    return (up - down) / (2.0L * h);
}

}  // namespace

ReferenceOutput reference_forward(const Architecture& arch, const std::vector<long double>& p,
                                  long double x) {
    const std::size_t h = arch.neurons;
    std::vector<long double> a(h), da(h);
    for (std::size_t j = 0; j < h; ++j) {
        const long double w = p[j];
        const long double s = sigmoid_ld(w * x + p[h + j]);
        a[j] = s;
        da[j] = s * (1.0L - s) * w;
    }
    std::size_t off = 2 * h;
    for (std::size_t l = 1; l < arch.hidden_layers; ++l) {
        std::vector<long double> next(h), dnext(h);
        for (std::size_t j = 0; j < h; ++j) {
            long double z = p[off + h * h + j];
            long double dz = 0.0L;
            for (std::size_t k = 0; k < h; ++k) {
                z += p[off + j * h + k] * a[k];
                dz += p[off + j * h + k] * da[k];
            }
            const long double s = sigmoid_ld(z);
            next[j] = s;
            dnext[j] = s * (1.0L - s) * dz;
        }
        a.swap(next);
        da.swap(dnext);
        off += h * h + h;
    }
    ReferenceOutput out{0.0L, 0.0L};
    for (std::size_t j = 0; j < h; ++j) {
        out.value += p[off + j] * a[j];
        out.derivative += p[off + j] * da[j];
    }
    return out;
}

long double reference_cost(Method method, const Architecture& arch,
                           const std::vector<long double>& p, const std::vector<double>& grid,
                           long double lambda, long double u0, long double penalty_weight) {
    long double sum = 0.0L;
    for (const double xd : grid) {
        const long double x = xd;
        const ReferenceOutput n = reference_forward(arch, p, x);
        long double r = 0.0L;
        if (method == Method::TSM) {
            const long double u = u0 + x * n.value;
            const long double du = n.value + x * n.derivative;
            r = du - lambda * u;
        } else {
            r = n.derivative - lambda * n.value;
        }
        sum += r * r;
    }
    long double cost = 0.5L * sum;
    if (method == Method::MTSM) {
        const long double e = reference_forward(arch, p, 0.0L).value - u0;
        cost += 0.5L * penalty_weight * e * e;
    }
    return cost;
}

GradCheckReport gradcheck(const GradCheckOptions& opt) {
    GradCheckReport report;
    Comparator cmp{opt, report};
    std::mt19937_64 rng(opt.seed);
    const Grid grid = uniform_grid(opt.x_end, opt.ntp);
    const std::vector<double> xs(grid.points().begin(), grid.points().end());
    const StiffLinearIVP ivp{opt.lambda, 1.0, opt.x_end};
    const long double h = opt.step;

    for (const std::size_t layers : opt.layers) {
        for (const std::size_t neurons : opt.neurons) {
            const Architecture arch{layers, neurons};
            for (std::size_t d = 0; d < opt.draws; ++d) {
                const NetworkParameters params =
                    init_random(arch, -opt.weight_range, opt.weight_range, rng);
                std::vector<long double> p(params.weights().begin(), params.weights().end());
                const double x = xs[1 + d % (xs.size() - 1)];

                std::vector<double> g_out = grad_output(params, x);
                const std::vector<double> g_der = grad_output_derivative(params, x);
                if (opt.corrupt && d == 0) {
                    g_out.back() += 1e-3;
                }
                for (std::size_t i = 0; i < p.size(); ++i) {
                    const long double ref_out = central_difference(p, i, h, [&](const auto& q) {
                        return reference_forward(arch, q, x).value;
                    });
                    const long double ref_der = central_difference(p, i, h, [&](const auto& q) {
                        return reference_forward(arch, q, x).derivative;
                    });
                    cmp.compare(g_out[i], ref_out, "dN/dp", i);
                    cmp.compare(g_der[i], ref_der, "d(dN/dx)/dp", i);
                }

                const std::pair<Method, Penalty> forms[] = {{Method::TSM, Penalty::PerPoint},
                                                            {Method::MTSM, Penalty::PerPoint},
                                                            {Method::MTSM, Penalty::Once}};
                for (const auto& [method, penalty] : forms) {
                    CostEvaluator evaluator(method, ivp, grid, penalty);
                    const CostReport cost = evaluator.evaluate(params);
                    const long double weight = penalty_weight(penalty, xs.size());
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        const long double ref = central_difference(p, i, h, [&](const auto& q) {
                            return reference_cost(method, arch, q, xs, opt.lambda, 1.0L, weight);
                        });
                        cmp.compare(cost.gradient[i], ref,
                                    method == Method::TSM ? "dE_tsm/dp" : "dE_mtsm/dp", i);
                    }
                }

                if (layers == 1) {
                    const ClosedFormGradients closed = closed_form_gradients(params, x);
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        const double diff = std::max(std::abs(closed.output[i] - g_out[i]),
                                                     std::abs(closed.derivative[i] - g_der[i]));
                        report.max_closed_form_diff = std::max(report.max_closed_form_diff, diff);
                    }
                }
            }
        }
    }
    if (report.max_closed_form_diff > opt.closed_form_tol) {
        ++report.failures;
        report.failure_notes.emplace_back("closed-form and reverse-accumulation gradients disagree");
    }
    return report;
}

}  // namespace nform
