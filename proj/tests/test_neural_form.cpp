#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "doctest.h"
#include "nform/neural_form.hpp"
#include "nform/ode_model.hpp"
#include "oracle.hpp"

using namespace nform;

TEST_CASE("exact solution of the model problem") {
    const StiffLinearIVP ivp{};
    CHECK(exact_solution(ivp, 0.0) == 1.0);
    CHECK(exact_solution(ivp, 2.0) == doctest::Approx(std::exp(-10.0)).epsilon(1e-15));
    const StiffLinearIVP other{-1.0, 3.0, 1.0};
    CHECK(exact_solution(other, 0.5) == doctest::Approx(3.0 * std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("exact solution satisfies the ODE") {
    const StiffLinearIVP ivp{-7.0, 1.5, 3.0};
    for (double x : {0.1, 0.8, 2.5}) {
        const double h = 1e-6;
        const double fd = (exact_solution(ivp, x + h) - exact_solution(ivp, x - h)) / (2 * h);
        CHECK(fd == doctest::Approx(ivp.lambda * exact_solution(ivp, x)).epsilon(1e-7));
    }
}

TEST_CASE("ivp validation") {
    CHECK_NOTHROW(StiffLinearIVP{}.validate());
    CHECK_THROWS(StiffLinearIVP({-5.0, 1.0, 0.0}).validate());
    CHECK_THROWS(StiffLinearIVP({NAN, 1.0, 2.0}).validate());
}

TEST_CASE("uniform grid") {
    const Grid g = uniform_grid(2.0, 10);
    REQUIRE(g.size() == 10);
    CHECK(g[0] == 0.0);
    CHECK(g[9] == 2.0);
    CHECK(g.spacing() == doctest::Approx(2.0 / 9.0));
    for (std::size_t i = 1; i < g.size(); ++i) {
        CHECK(g[i] > g[i - 1]);
        CHECK(g[i] - g[i - 1] == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
    }
    const Grid two = uniform_grid(1.0, 2);
    CHECK(two[0] == 0.0);
    CHECK(two[1] == 1.0);
    CHECK_THROWS_AS(uniform_grid(2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(uniform_grid(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(uniform_grid(-1.0, 10), std::invalid_argument);
}

TEST_CASE("method names") {
    CHECK(parse_method("tsm") == Method::TSM);
    CHECK(parse_method("MTSM") == Method::MTSM);
    CHECK(to_string(Method::TSM) == "tsm");
    CHECK_THROWS_AS(parse_method("foo"), std::invalid_argument);
}

TEST_CASE("trial solution satisfies the initial condition exactly for TSM") {
    std::mt19937_64 rng(99);
    const StiffLinearIVP ivp{};
    for (int i = 0; i < 10000; ++i) {
        const Architecture arch{1 + static_cast<std::size_t>(i % 3),
                                1 + static_cast<std::size_t>(i % 10)};
        const auto p = init_random(arch, -10.0, 10.0, rng);
        REQUIRE(trial_value(Method::TSM, ivp, p, 0.0) == 1.0);
    }
}

TEST_CASE("mTSM trial solution is the network output") {
    std::mt19937_64 rng(4);
    const auto p = init_random(Architecture{2, 3}, -1, 1, rng);
    const StiffLinearIVP ivp{};
    CHECK(trial_value(Method::MTSM, ivp, p, 0.6) == forward(p, 0.6).value);
    CHECK(trial_value(Method::TSM, ivp, p, 0.6) == 1.0 + 0.6 * forward(p, 0.6).value);
}

TEST_CASE("costs at the zero network") {
    const auto zero = init_constant(Architecture{1, 5}, 0.0);
    const StiffLinearIVP ivp{};
    const Grid g = uniform_grid(2.0, 10);
    // TSM residual is -lambda * u0 at every point; mTSM keeps only the penalty,
    // weighted by the point count unless applied once.
    const auto t = cost_tsm(zero, g, ivp);
    CHECK(t.value == doctest::Approx(0.5 * 10 * 25.0).epsilon(1e-15));
    CHECK(t.penalty == 0.0);
    const auto m = cost_mtsm(zero, g, ivp);
    CHECK(m.value == doctest::Approx(0.5 * 10).epsilon(1e-15));
    CHECK(m.penalty == -1.0);
    const auto once = cost_mtsm(zero, g, ivp, Penalty::Once);
    CHECK(once.value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(once.gradient.size() == m.gradient.size());
}

TEST_CASE("evaluators accept any uniform grid") {
    CHECK_NOTHROW(CostEvaluator(Method::TSM, StiffLinearIVP{}, uniform_grid(2.0, 5)));
    CHECK_NOTHROW(CostEvaluator(Method::MTSM, StiffLinearIVP{}, uniform_grid(2.0, 5)));
}

TEST_CASE("cost values and gradients match the independent oracle") {
    std::mt19937_64 rng(2024);
    const StiffLinearIVP ivp{-5.0, 1.0, 2.0};
    const Grid grid = uniform_grid(ivp.x_end, 10);
    const std::vector<double> xs(grid.points().begin(), grid.points().end());
    for (std::size_t L = 1; L <= 3; ++L) {
        for (std::size_t H : {1u, 5u, 10u}) {
            const oracle::Net net{L, H};
            for (int d = 0; d < 4; ++d) {
                const auto p = init_random(Architecture{L, H}, -1.0, 1.0, rng);
                const std::vector<oracle::Real> q(p.weights().begin(), p.weights().end());
                const std::pair<Method, Penalty> forms[] = {{Method::TSM, Penalty::PerPoint},
                                                            {Method::MTSM, Penalty::PerPoint},
                                                            {Method::MTSM, Penalty::Once}};
                for (const auto& [m, pen] : forms) {
                    const oracle::Real weight = pen == Penalty::Once ? 1.0L : 10.0L;
                    const auto f = [&](const std::vector<oracle::Real>& v) {
                        return m == Method::TSM
                                   ? oracle::tsm_cost(net, v, xs, -5.0L, 1.0L)
                                   : oracle::mtsm_cost(net, v, xs, -5.0L, 1.0L, weight);
                    };
                    const auto report = m == Method::TSM ? cost_tsm(p, grid, ivp)
                                                         : cost_mtsm(p, grid, ivp, pen);
                    CHECK(report.value ==
                          doctest::Approx(static_cast<double>(f(q))).epsilon(1e-12));
                    const auto ref = oracle::central_gradient(q, f);
                    REQUIRE(report.gradient.size() == ref.size());
                    for (std::size_t i = 0; i < ref.size(); ++i) {
                        CAPTURE(L);
                        CAPTURE(H);
                        CAPTURE(i);
                        CHECK(oracle::close(report.gradient[i], ref[i]));
                    }
                }
            }
        }
    }
}

TEST_CASE("residuals reproduce the reported cost") {
    std::mt19937_64 rng(8);
    const auto p = init_random(Architecture{1, 5}, -1, 1, rng);
    const StiffLinearIVP ivp{};
    const Grid g = uniform_grid(2.0, 20);
    const std::pair<Method, Penalty> forms[] = {
        {Method::TSM, Penalty::PerPoint}, {Method::MTSM, Penalty::PerPoint},
        {Method::MTSM, Penalty::Once}};
    for (const auto& [m, pen] : forms) {
        CostEvaluator ev(m, ivp, g, pen);
        CHECK(ev.penalty() == pen);
        const auto r = ev.evaluate(p);
        REQUIRE(r.residuals.size() == g.size());
        const double weight = m == Method::TSM ? 0.0 : penalty_weight(pen, g.size());
        double sum = 0.5 * weight * r.penalty * r.penalty;
        for (double v : r.residuals) sum += 0.5 * v * v;
        CHECK(r.value == doctest::Approx(sum).epsilon(1e-14));
    }
}

TEST_CASE("evaluator is deterministic and reusable") {
    std::mt19937_64 rng(10);
    const auto p = init_random(Architecture{2, 5}, -1, 1, rng);
    const auto p2 = init_random(Architecture{2, 5}, -1, 1, rng);
    CostEvaluator ev(Method::MTSM, StiffLinearIVP{}, uniform_grid(2.0, 10));
    CostReport a;
    ev.evaluate(p, a);
    ev.evaluate(p2, a);
    ev.evaluate(p, a);
    const auto b = cost_mtsm(p, uniform_grid(2.0, 10), StiffLinearIVP{});
    CHECK(a.value == b.value);
    CHECK(a.gradient == b.gradient);
}

TEST_CASE("evaluate_on_grid pairs points with trial values") {
    const auto zero = init_constant(Architecture{1, 5}, 0.0);
    const Grid g = uniform_grid(2.0, 4);
    const auto t = evaluate_on_grid(Method::TSM, StiffLinearIVP{}, zero, g);
    REQUIRE(t.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(t[i].first == g[i]);
        CHECK(t[i].second == 1.0);
    }
}

TEST_CASE("penalty modes") {
    CHECK(parse_penalty("per_point") == Penalty::PerPoint);
    CHECK(parse_penalty("once") == Penalty::Once);
    CHECK_THROWS_AS(parse_penalty("twice"), std::invalid_argument);
    CHECK(to_string(Penalty::Once) == std::string("once"));
    CHECK(penalty_weight(Penalty::PerPoint, 40) == 40.0);
    CHECK(penalty_weight(Penalty::Once, 40) == 1.0);
}
