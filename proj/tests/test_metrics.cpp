#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nform/metrics.hpp"

using namespace nform;

namespace {

RunRecord rec(double du, bool diverged = false) {
    RunRecord r;
    r.delta_u = diverged ? std::numeric_limits<double>::quiet_NaN() : du;
    r.diverged = diverged;
    return r;
}

std::vector<RunRecord> records(const std::vector<double>& v) {
    std::vector<RunRecord> out;
    for (double d : v) out.push_back(rec(d));
    return out;
}

}  // namespace

TEST_CASE("numeric error") {
    const std::vector<double> a{1.0, 0.5, 0.25};
    const std::vector<double> b{0.9, 0.7, 0.25};
    CHECK(numeric_error(a, a) == 0.0);
    CHECK(numeric_error(a, b) == doctest::Approx(0.3));
    CHECK(mean_numeric_error(a, b) == doctest::Approx(0.1));
    CHECK_THROWS_AS(numeric_error(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("numeric error is a metric on random triples") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> a(12), b(12), c(12);
        for (std::size_t i = 0; i < 12; ++i) {
            a[i] = d(rng);
            b[i] = d(rng);
            c[i] = d(rng);
        }
        CHECK(numeric_error(a, b) == numeric_error(b, a));
        CHECK(numeric_error(a, b) > 0.0);
        CHECK(numeric_error(a, c) <= numeric_error(a, b) + numeric_error(b, c) + 1e-12);
    }
}

TEST_CASE("nearest-rank quantiles") {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[i] = i + 1;
    CHECK(nearest_rank_quantile(v, 10) == 10.0);
    CHECK(nearest_rank_quantile(v, 20) == 20.0);
    CHECK(nearest_rank_quantile(v, 30) == 30.0);
    CHECK(nearest_rank_quantile(v, 0) == 1.0);
    CHECK(nearest_rank_quantile(v, 100) == 100.0);
    const std::vector<double> three{1.0, 2.0, 3.0};
    CHECK(nearest_rank_quantile(three, 10) == 1.0);
    CHECK(nearest_rank_quantile(three, 34) == 2.0);
    CHECK(nearest_rank_quantile(three, 33) == 1.0);
}

TEST_CASE("summary of known values") {
    const auto s = summarize(records({1.0, 2.0, 3.0, 4.0}));
    CHECK_FALSE(s.empty);
    CHECK(s.count == 4);
    CHECK(s.diverged == 0);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.min == 1.0);
    CHECK(s.max == 4.0);
    CHECK(s.q10 == 1.0);
    CHECK(s.q30 == 2.0);

    const auto one = summarize(records({7.0}));
    CHECK(one.stddev == 0.0);
    CHECK(one.mean == 7.0);
}

TEST_CASE("identical values give zero spread and equal quantiles") {
    const auto s = summarize(records(std::vector<double>(100, 3e-4)));
    CHECK(s.stddev == 0.0);
    CHECK(s.q10 == 3e-4);
    CHECK(s.q20 == 3e-4);
    CHECK(s.q30 == 3e-4);
    CHECK(s.mean == doctest::Approx(3e-4).epsilon(1e-14));
}

TEST_CASE("diverged members are counted and excluded") {
    auto r = records({1.0, 2.0, 3.0});
    r.push_back(rec(0.0, true));
    const auto s = summarize(r);
    CHECK(s.count == 3);
    CHECK(s.diverged == 1);
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(std::isfinite(s.stddev));

    std::vector<RunRecord> all{rec(0, true), rec(0, true)};
    const auto e = summarize(all);
    CHECK(e.empty);
    CHECK(e.count == 0);
    CHECK(e.diverged == 2);
    CHECK(std::isnan(e.mean));
}

TEST_CASE("average error carries the contamination flag") {
    std::vector<RunRecord> r;
    for (int i = 0; i < 99; ++i) r.push_back(rec(2.0));
    r.push_back(rec(0.0, true));
    const auto a = average_error(r);
    CHECK(a.contaminated);
    CHECK(a.count == 99);
    CHECK(a.diverged == 1);
    CHECK(a.mean == doctest::Approx(2.0));

    const auto clean = average_error(records({1.0, 3.0}));
    CHECK_FALSE(clean.contaminated);
    CHECK(clean.mean == 2.0);

    std::vector<RunRecord> dead{rec(0, true)};
    CHECK(std::isnan(average_error(dead).mean));
}

TEST_CASE("summary properties on random ensembles") {
    std::mt19937_64 rng(77);
    std::lognormal_distribution<double> d(-9.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng() % 300;
        std::vector<double> v(n);
        for (double& x : v) x = d(rng);
        auto r = records(v);
        const auto s = summarize(r);
        CHECK(s.q10 <= s.q20);
        CHECK(s.q20 <= s.q30);
        CHECK(s.min <= s.q10);
        CHECK(s.q30 <= s.max);
        CHECK(s.min <= s.mean);
        CHECK(s.mean <= s.max);
        CHECK(s.stddev >= 0.0);

        std::shuffle(r.begin(), r.end(), rng);
        const auto p = summarize(r);
        CHECK(p.mean == s.mean);
        CHECK(p.stddev == s.stddev);
        CHECK(p.q10 == s.q10);
        CHECK(p.q20 == s.q20);
        CHECK(p.q30 == s.q30);
    }
}
