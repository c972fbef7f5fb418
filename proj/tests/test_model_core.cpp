#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ovlq/gaussian.hpp"
#include "ovlq/queue_model.hpp"
#include "ovlq/rate_function.hpp"

using namespace ovlq;

namespace {

QueueModel finite_model(long n, double mu) {
    return QueueModel(n, mu, RateFunction::constant(1.0));
}

} // namespace

TEST_CASE("gaussian_cdf") {
    CHECK(gaussian_cdf({0, 0, 1}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gaussian_cdf({30, 20, 0}) == 1.0);
    CHECK(gaussian_cdf({20, 30, 0}) == 0.0);
    // standard normal at z = 1
    CHECK(gaussian_cdf({30, 28, 2}) == doctest::Approx(0.8413447460685429).epsilon(1e-10));
    CHECK_THROWS_AS(gaussian_cdf({0, 0, -1}), std::domain_error);
}

TEST_CASE("gaussian_cdf symmetry: F(a) + F(2b-a) = 1") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> d(-50.0, 50.0);
    std::uniform_real_distribution<double> sd(0.01, 20.0);
    for (int i = 0; i < 200; ++i) {
        const double a = d(gen), b = d(gen), c = sd(gen);
        CHECK(gaussian_cdf({a, b, c}) + gaussian_cdf({2 * b - a, b, c}) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("gaussian_pdf") {
    CHECK(gaussian_pdf({0, 0, 1}) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(gaussian_pdf({5, 5, 0}) == 0.0);
    // standard normal density at 1
    CHECK(gaussian_pdf({31, 30, 1}) == doctest::Approx(0.24197072451914337).epsilon(1e-12));
    CHECK_THROWS_AS(gaussian_pdf({0, 0, -0.5}), std::domain_error);
}

TEST_CASE("rate_f2") {
    CHECK(rate_f2(20, finite_model(30, 1.0)) == 20.0);
    CHECK(rate_f2(45, finite_model(30, 1.0)) == 30.0);
    QueueModel inf(QueueModel::kInfiniteServers, 2.0, RateFunction::constant(1.0));
    CHECK(rate_f2(12.5, inf) == 25.0);
}

TEST_CASE("rate_g2 values") {
    auto m = finite_model(30, 1.0);
    CHECK(rate_g2(20, 0, m) == 20.0);
    // E[min(N(30,1), 30)] = 30 - phi_std(0)
    CHECK(rate_g2(30, 1, m) == doctest::Approx(29.6010577195985673).epsilon(1e-10));
    // mass above n sits ~7.5 sigma out
    CHECK(rate_g2(45, 4, m) == doctest::Approx(30.0).epsilon(1e-5));
    CHECK_THROWS_AS(rate_g2(10, -1, m), std::domain_error);
    QueueModel inf(QueueModel::kInfiniteServers, 1.0, RateFunction::constant(1.0));
    CHECK_THROWS_AS(rate_g2(10, 1, inf), config_error);
}

TEST_CASE("rate_g2 <= rate_f2 and the u -> 0 limit") {
    auto m = finite_model(30, 1.0);
    for (double x = 0; x <= 60; x += 2.5) {
        for (double u : {0.0, 0.1, 1.0, 5.0, 15.0, 30.0}) {
            CHECK(rate_g2(x, u, m) <= rate_f2(x, m) + 1e-12);
        }
        CHECK(std::abs(rate_g2(x, 1e-12, m) - rate_f2(x, m)) < 1e-6 * 1.0 * 30);
    }
}

TEST_CASE("rate_g2 monotone nondecreasing in x") {
    auto m = finite_model(30, 1.0);
    for (double u : {0.5, 2.0, 10.0, 30.0}) {
        double prev = rate_g2(0.0, u, m);
        for (double x = 0.25; x <= 60; x += 0.25) {
            const double cur = rate_g2(x, u, m);
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("rate_g2 matches Monte Carlo E[min(N,n)]") {
    auto m = finite_model(30, 1.0);
    std::mt19937_64 gen(42);
    const std::size_t samples = 100000;
    for (double x : {0.0, 15.0, 30.0, 45.0, 60.0}) {
        for (double u : {0.5, 5.0, 10.0, 20.0, 30.0}) {
            std::normal_distribution<double> normal(x, std::sqrt(u));
            double sum = 0.0, sumsq = 0.0;
            for (std::size_t i = 0; i < samples; ++i) {
                const double v = std::min(normal(gen), 30.0);
                sum += v;
                sumsq += v * v;
            }
            const double mean = sum / samples;
            const double var = (sumsq - samples * mean * mean) / (samples - 1);
            const double se = std::sqrt(var / samples);
            // cells where every draw clips to n have zero stderr; allow the
            // analytic tail remainder there
            CHECK(std::abs(rate_g2(x, u, m) - mean) < 4 * se + 1e-5);
        }
    }
}

TEST_CASE("sinusoidal rate stays inside its band") {
    auto r = RateFunction::sinusoidal(0.3, 0.5, 1.0, 30, 0.8);
    const double lo = (1.0 - 0.3) * 30 * 0.8;
    const double hi = (1.0 + 0.3) * 30 * 0.8;
    CHECK(r.upper_bound() == doctest::Approx(hi));
    for (double t = 0; t <= 40; t += 0.01) {
        const double v = r(t);
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
    }
}

TEST_CASE("negative-rate sinusoidal configs are rejected") {
    CHECK_THROWS_AS(RateFunction::sinusoidal(1.5, 0.5, 1.0, 30, 0.8), config_error);
    CHECK_NOTHROW(RateFunction::sinusoidal(1.0, 0.5, 1.0, 30, 0.8));
}

TEST_CASE("tabulated rate interpolates linearly") {
    auto r = RateFunction::tabulated({{0, 2}, {10, 4}, {20, 0}}, 4.0);
    CHECK(r(-1) == 2.0);
    CHECK(r(5) == doctest::Approx(3.0));
    CHECK(r(15) == doctest::Approx(2.0));
    CHECK(r(25) == 0.0);
    CHECK(r.upper_bound() == 4.0);
    CHECK_THROWS_AS(RateFunction::tabulated({{0, 2}, {10, -1}}, 2.0), config_error);
    CHECK_THROWS_AS(RateFunction::tabulated({{0, 2}, {10, 4}}, 3.0), config_error);
    CHECK_THROWS_AS(RateFunction::tabulated({{0, 2}, {0, 3}}, 3.0), config_error);
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(QueueModel(0, 1.0, RateFunction::constant(1.0)), config_error);
    CHECK_THROWS_AS(QueueModel(5, 0.0, RateFunction::constant(1.0)), config_error);
    CHECK_THROWS_AS(QueueModel(5, 1.0, RateFunction::constant(1.0), -1.0), config_error);
    CHECK_NOTHROW(QueueModel(QueueModel::kInfiniteServers, 1.0, RateFunction::constant(1.0)));
}
