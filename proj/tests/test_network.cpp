#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nform/network.hpp"
#include "oracle.hpp"

using namespace nform;

namespace {

NetworkParameters make(std::size_t L, std::size_t H, std::vector<double> w) {
    return NetworkParameters(Architecture{L, H}, std::move(w));
}

NetworkParameters random_params(std::size_t L, std::size_t H, std::mt19937_64& rng,
                                double range = 1.0) {
    return init_random(Architecture{L, H}, -range, range, rng);
}

std::vector<oracle::Real> widen(std::span<const double> p) {
    return {p.begin(), p.end()};
}

}  // namespace

TEST_CASE("sigmoid values and derivatives at zero") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid_d1(0.0) == 0.25);
    CHECK(sigmoid_d2(0.0) == 0.0);
}

TEST_CASE("sigmoid is stable for large magnitudes") {
    const double s = sigmoid(-50.0);
    CHECK(s > 0.0);
    CHECK(s < 2e-22);
    CHECK(s == doctest::Approx(1.0 / (1.0 + std::exp(50.0))).epsilon(1e-14));
    for (double z : {-700.0, -300.0, 300.0, 700.0}) {
        CHECK(std::isfinite(sigmoid(z)));
        CHECK(std::isfinite(sigmoid_d1(z)));
        CHECK(std::isfinite(sigmoid_d2(z)));
        CHECK(sigmoid(z) >= 0.0);
        CHECK(sigmoid(z) <= 1.0);
    }
    CHECK(sigmoid(3.0) + sigmoid(-3.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("parameter count follows the layer layout") {
    CHECK(Architecture{1, 5}.parameter_count() == 15);
    CHECK(Architecture{2, 5}.parameter_count() == 45);
    CHECK(Architecture{3, 1}.parameter_count() == 7);
    CHECK(Architecture{2, 3}.layer_offset(1) == 6);
    CHECK(Architecture{2, 3}.output_offset() == 18);
    CHECK_THROWS_AS(Architecture({0, 5}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(Architecture({1, 0}).validate(), std::invalid_argument);
}

TEST_CASE("parameters reject wrong length and non-finite entries") {
    CHECK_THROWS_AS(make(1, 2, {0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(make(1, 1, {0, NAN, 0}), std::invalid_argument);
    CHECK_THROWS_AS(make(1, 1, {0, INFINITY, 0}), std::invalid_argument);
    CHECK_NOTHROW(make(1, 1, {0, 0, 0}));
}

TEST_CASE("forward on hand-computed cases") {
    const auto zero = init_constant(Architecture{1, 5}, 0.0);
    for (double x : {0.0, 0.7, 2.0}) {
        const auto t = forward(zero, x);
        CHECK(t.value == 0.0);
        CHECK(t.derivative == 0.0);
    }
    const auto one = make(1, 1, {1.0, 0.0, 1.0});
    const auto t = forward(one, 0.0);
    CHECK(t.value == 0.5);
    CHECK(t.derivative == 0.25);

    // z_j = w_j x + u_j, N = sum v_j sigma(z_j).
    const auto p = make(1, 2, {0.3, -1.2, 0.5, 0.25, 2.0, -0.7});
    const double x = 1.4;
    const double expect = 2.0 * sigmoid(0.3 * x + 0.5) - 0.7 * sigmoid(-1.2 * x + 0.25);
    CHECK(forward(p, x).value == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("forward with a reused trace matches a fresh trace bit for bit") {
    std::mt19937_64 rng(3);
    const auto p = random_params(3, 4, rng);
    ForwardTrace trace(p.arch());
    forward(p, 0.3, trace);
    forward(p, 1.1, trace);
    const auto fresh = forward(p, 1.1);
    CHECK(trace.value == fresh.value);
    CHECK(trace.derivative == fresh.derivative);
}

TEST_CASE("output is bounded by the sum of output weight magnitudes") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_params(1 + trial % 3, 1 + trial % 7, rng, 3.0);
        const auto w = p.weights();
        double bound = 0.0;
        for (std::size_t j = p.arch().output_offset(); j < w.size(); ++j) {
            bound += std::fabs(w[j]);
        }
        const double x = 4.0 * uniform01(rng) - 2.0;
        CHECK(std::fabs(forward(p, x).value) <= bound);
    }
}

TEST_CASE("input tangent matches the oracle and finite differences") {
    std::mt19937_64 rng(5);
    for (std::size_t L = 1; L <= 3; ++L) {
        for (std::size_t H : {1u, 4u, 10u}) {
            const auto p = random_params(L, H, rng);
            const auto q = widen(p.weights());
            const oracle::Net net{L, H};
            for (double x : {0.0, 0.37, 1.9}) {
                const auto t = forward(p, x);
                const auto o = oracle::eval(net, q, x);
                CHECK(t.value == doctest::Approx(static_cast<double>(o.n)).epsilon(1e-13));
                CHECK(t.derivative == doctest::Approx(static_cast<double>(o.nx)).epsilon(1e-12));
                const long double h = 1e-6L;
                const long double fd =
                    (oracle::eval(net, q, x + h).n - oracle::eval(net, q, x - h).n) / (2 * h);
                CHECK(oracle::close(t.derivative, static_cast<double>(fd)));
            }
        }
    }
}

TEST_CASE("closed-form gradient examples") {
    const auto p = make(1, 1, {1.0, 0.0, 2.0});
    const auto g = grad_output(p, 3.0);
    CHECK(g[2] == doctest::Approx(sigmoid(3.0)).epsilon(1e-15));

    const auto zero = init_constant(Architecture{1, 5}, 0.0);
    const auto gz = grad_output(zero, 1.0);
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(gz[j] == 0.0);
        CHECK(gz[5 + j] == 0.0);
        CHECK(gz[10 + j] == 0.5);
    }
    for (double d : grad_output_derivative(zero, 0.8)) {
        CHECK(d == 0.0);
    }
    const auto unit = make(1, 1, {1.0, 0.0, 1.0});
    CHECK(grad_output_derivative(unit, 0.0)[0] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("reverse sweep equals the single-layer formulas") {
    std::mt19937_64 rng(17);
    double worst = 0.0;
    for (std::size_t H : {1u, 3u, 5u, 10u}) {
        for (int d = 0; d < 20; ++d) {
            const auto p = random_params(1, H, rng);
            const double x = 2.0 * uniform01(rng);
            const auto cf = closed_form_gradients(p, x);
            const auto g = grad_output(p, x);
            const auto gd = grad_output_derivative(p, x);
            for (std::size_t i = 0; i < g.size(); ++i) {
                worst = std::max(worst, std::fabs(g[i] - cf.output[i]));
                worst = std::max(worst, std::fabs(gd[i] - cf.derivative[i]));
            }
        }
    }
    CHECK(worst <= 1e-12);
    std::mt19937_64 r2(1);
    CHECK_THROWS_AS(closed_form_gradients(random_params(2, 3, r2), 0.5), std::invalid_argument);
}

TEST_CASE("weight gradients of N and N_x match the finite-difference oracle") {
    std::mt19937_64 rng(23);
    for (std::size_t L = 1; L <= 3; ++L) {
        for (std::size_t H = 1; H <= 10; ++H) {
            for (int d = 0; d < 3; ++d) {
                const auto p = random_params(L, H, rng);
                const oracle::Net net{L, H};
                const double x = 2.0 * uniform01(rng);
                const auto g = grad_output(p, x);
                const auto gd = grad_output_derivative(p, x);
                const auto ref = oracle::central_gradient(
                    widen(p.weights()), [&](const auto& q) { return oracle::eval(net, q, x).n; });
                const auto refd = oracle::central_gradient(
                    widen(p.weights()), [&](const auto& q) { return oracle::eval(net, q, x).nx; });
                for (std::size_t i = 0; i < g.size(); ++i) {
                    CAPTURE(L);
                    CAPTURE(H);
                    CAPTURE(i);
                    CHECK(oracle::close(g[i], ref[i]));
                    CHECK(oracle::close(gd[i], refd[i]));
                }
            }
        }
    }
}

TEST_CASE("seeded accumulation is linear in the seeds") {
    std::mt19937_64 rng(29);
    const auto p = random_params(2, 5, rng);
    const auto t = forward(p, 0.9);
    std::vector<double> combined(p.size(), 0.0), scratch;
    accumulate_gradient(p, t, 2.5, -1.5, combined, scratch);
    const auto g = grad_output(p, 0.9);
    const auto gd = grad_output_derivative(p, 0.9);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(combined[i] == doctest::Approx(2.5 * g[i] - 1.5 * gd[i]).epsilon(1e-13));
    }
    std::vector<double> wrong(p.size() + 1);
    CHECK_THROWS_AS(accumulate_gradient(p, t, 1, 0, wrong, scratch), std::invalid_argument);
}

TEST_CASE("initialisers") {
    const auto c = init_constant(Architecture{1, 5}, 0.0);
    CHECK(c.size() == 15);
    for (double w : c.weights()) CHECK(w == 0.0);
    CHECK(forward(c, 0.4).value == forward(c, 0.4).value);

    std::mt19937_64 a(42), b(42);
    const auto pa = init_random(Architecture{2, 5}, 0.0, 1e-2, a);
    const auto pb = init_random(Architecture{2, 5}, 0.0, 1e-2, b);
    CHECK(pa == pb);
    for (double w : pa.weights()) {
        CHECK(w >= 0.0);
        CHECK(w < 1e-2);
    }
    std::mt19937_64 r(1);
    CHECK_THROWS_AS(init_random(Architecture{1, 5}, 1.0, 1.0, r), std::invalid_argument);
    CHECK_THROWS_AS(init_random(Architecture{1, 5}, 2.0, 1.0, r), std::invalid_argument);
}

TEST_CASE("uniform draws have the expected mean") {
    std::mt19937_64 rng(42);
    const auto p = init_random(Architecture{1, 33333}, 0.0, 1e-2, rng);
    double sum = 0.0;
    for (double w : p.weights()) sum += w;
    CHECK(sum / static_cast<double>(p.size()) == doctest::Approx(5e-3).epsilon(2e-2));
    CHECK(std::fabs(sum / static_cast<double>(p.size()) - 5e-3) < 1e-4);
}
