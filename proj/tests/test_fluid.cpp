#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ovlq/fluid.hpp"

using namespace ovlq;

namespace {

QueueModel table1_model(double alpha, double beta) {
    return QueueModel(30, 1.0, RateFunction::sinusoidal(beta, alpha, 1.0, 30, 0.8), 0.0);
}

QueueModel figure1_model() {
    // lambda(t) = 30 (0.5 sin(0.5 t) + 1.0)
    return QueueModel(30, 1.0, RateFunction::sinusoidal(0.5, 0.5, 1.0, 30, 1.0), 0.0);
}

// Trapezoid quadrature of a channel between two times inside the grid,
// independent of the solver's cumulative channel.
double trapezoid(const Trajectory& traj, const std::string& channel, double a, double b) {
    const auto& c = traj.channel(channel);
    const double h = traj.step();
    auto idx_above = [&](double t) {
        return static_cast<std::size_t>(std::ceil((t - traj.start_time()) / h - 1e-12));
    };
    const std::size_t i0 = idx_above(a);
    const std::size_t i1 = static_cast<std::size_t>((b - traj.start_time()) / h + 1e-12);
    double sum = 0.0;
    for (std::size_t i = i0; i < i1; ++i) sum += 0.5 * (c[i] + c[i + 1]) * h;
    // partial end segments via interpolated values
    if (traj.time(i0) > a) sum += 0.5 * (traj.at(channel, a) + c[i0]) * (traj.time(i0) - a);
    if (b > traj.time(i1)) sum += 0.5 * (c[i1] + traj.at(channel, b)) * (b - traj.time(i1));
    return sum;
}

} // namespace

TEST_CASE("solve_fluid: equilibrium below capacity") {
    QueueModel m(30, 1.0, RateFunction::constant(24.0), 24.0);
    auto traj = solve_fluid(m, 10.0, 1e-3);
    for (std::size_t i = 0; i < traj.size(); i += 100)
        CHECK(traj.channel("x")[i] == doctest::Approx(24.0).epsilon(1e-10));
}

TEST_CASE("solve_fluid: pure death decays exponentially") {
    QueueModel m(30, 1.0, RateFunction::constant(0.0), 20.0);
    auto traj = solve_fluid(m, 2.0, 1e-3);
    CHECK(traj.at("x", 1.0) == doctest::Approx(20.0 * std::exp(-1.0)).epsilon(1e-8));
    CHECK(traj.at("x", 1.0) == doctest::Approx(7.3576).epsilon(1e-4));
}

TEST_CASE("solve_fluid: figure-1 setting crosses capacity and oscillates") {
    auto traj = solve_fluid(figure1_model(), 20.0, 1e-3);
    const auto& x = traj.channel("x");
    double max_x = 0.0, min_after_cross = 1e9;
    bool crossed = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        max_x = std::max(max_x, x[i]);
        if (x[i] > 30.0) crossed = true;
        if (crossed) min_after_cross = std::min(min_after_cross, x[i]);
    }
    CHECK(crossed);
    CHECK(max_x > 30.0);
    CHECK(min_after_cross < 30.0); // comes back below capacity
}

TEST_CASE("solve_fluid: input validation") {
    QueueModel m(30, 1.0, RateFunction::constant(1.0));
    CHECK_THROWS_AS(solve_fluid(m, 0.0, 1e-3), config_error);
    CHECK_THROWS_AS(solve_fluid(m, 1.0, 0.0), config_error);
    CHECK_THROWS_AS(solve_fluid(m, 1.0, 2.0), config_error);
}

TEST_CASE("solve_z: piecewise analytic drain") {
    QueueModel m(30, 1.0, RateFunction::constant(0.0));
    auto traj = solve_z(m, 45.0, 3.0, 1e-3);
    // constant drain -mu n while z > n
    CHECK(traj.at("z", 0.25) == doctest::Approx(45.0 - 30.0 * 0.25).epsilon(1e-8));
    // exponential decay below n
    CHECK(traj.at("z", 1.0) == doctest::Approx(30.0 * std::exp(-0.5)).epsilon(1e-6));
    // nonincreasing at every step
    const auto& z = traj.channel("z");
    for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] <= z[i - 1] + 1e-12);
}

TEST_CASE("solve_z: absorbing at zero") {
    QueueModel m(30, 1.0, RateFunction::constant(0.0));
    auto traj = solve_z(m, 0.0, 1.0, 1e-3);
    for (double v : traj.channel("z")) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("first_passage") {
    QueueModel m(30, 1.0, RateFunction::constant(0.0));
    auto traj = solve_z(m, 45.0, 3.0, 1e-3);
    auto fp = first_passage(traj, "z", 29.0);
    REQUIRE(fp.reached());
    CHECK(*fp.time == doctest::Approx(0.5 + std::log(30.0 / 29.0)).epsilon(1e-4));

    auto below = solve_z(m, 20.0, 1.0, 1e-3);
    auto fp0 = first_passage(below, "z", 29.0);
    REQUIRE(fp0.reached());
    CHECK(*fp0.time == 0.0);

    auto short_run = solve_z(m, 45.0, 0.3, 1e-3);
    CHECK_FALSE(first_passage(short_run, "z", 29.0).reached());
}

TEST_CASE("solve_adjusted: below-capacity limit equals plain fluid") {
    QueueModel m(1000000, 1.0, RateFunction::constant(24.0), 24.0);
    auto adj = solve_adjusted(m, 5.0, 1e-3);
    auto fl = solve_fluid(m, 5.0, 1e-3);
    for (std::size_t i = 0; i < adj.size(); i += 50)
        CHECK(std::abs(adj.channel("x")[i] - fl.channel("x")[i]) < 1e-8);
}

TEST_CASE("solve_adjusted: pure death matches fluid while 5 sigma below n") {
    QueueModel m(30, 1.0, RateFunction::constant(0.0), 20.0);
    auto adj = solve_adjusted(m, 5.0, 1e-3);
    auto fl = solve_fluid(m, 5.0, 1e-3);
    const auto& x = adj.channel("x");
    const auto& u = adj.channel("u");
    for (std::size_t i = 0; i < adj.size(); ++i) {
        CHECK(u[i] >= 0.0);
        if (30.0 - x[i] >= 5.0 * std::sqrt(u[i]))
            CHECK(std::abs(x[i] - fl.channel("x")[i]) < 1e-8);
    }
}

TEST_CASE("solve_adjusted: rejects infinite servers") {
    QueueModel inf(QueueModel::kInfiniteServers, 1.0, RateFunction::constant(1.0));
    CHECK_THROWS_AS(solve_adjusted(inf, 1.0, 1e-3), config_error);
}

TEST_CASE("solve_z_adjusted: pinned variance reduces to plain drain") {
    QueueModel m(30, 1.0, RateFunction::constant(0.0));
    auto adj = solve_z_adjusted(m, 45.0, 0.0, 2.0, 1e-3, /*evolve_variance=*/false);
    auto plain = solve_z(m, 45.0, 2.0, 1e-3);
    for (std::size_t i = 0; i < adj.size(); ++i)
        CHECK(std::abs(adj.channel("z")[i] - plain.channel("z")[i]) < 1e-8);
}

TEST_CASE("solve_z_adjusted: dominates the plain drain (g2 <= f2)") {
    QueueModel m(30, 1.0, RateFunction::constant(0.0));
    auto adj = solve_z_adjusted(m, 45.0, 2.0, 3.0, 1e-3);
    auto plain = solve_z(m, 45.0, 3.0, 1e-3);
    const auto& za = adj.channel("z");
    const auto& v = adj.channel("v");
    for (std::size_t i = 0; i < za.size(); ++i) {
        CHECK(za[i] >= plain.channel("z")[i] - 1e-10);
        CHECK(v[i] >= 0.0);
        if (i > 0) CHECK(za[i] < za[i - 1]); // strictly decreasing from 45
    }
}

TEST_CASE("solve_z_adjusted: absorbing at zero") {
    QueueModel m(30, 1.0, RateFunction::constant(0.0));
    auto adj = solve_z_adjusted(m, 0.0, 0.0, 1.0, 1e-3);
    for (double z : adj.channel("z")) CHECK(z == doctest::Approx(0.0).epsilon(1e-15));
    for (double v : adj.channel("v")) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("overlap_fluid: reproduces reference values") {
    auto r1 = overlap_fluid(table1_model(0.5, 0.3), 3.0, 29.0, 1e-3);
    CHECK(r1.expected_overlap == doctest::Approx(29.46).epsilon(0.02));
    auto r2 = overlap_fluid(table1_model(0.5, 0.5), 6.0, 29.0, 1e-3);
    CHECK(r2.expected_overlap == doctest::Approx(48.64).epsilon(0.02));
}

TEST_CASE("overlap_fluid: empty system gives zero overlap") {
    QueueModel m(30, 1.0, RateFunction::constant(0.0), 0.0);
    auto r = overlap_fluid(m, 2.0, 10.0, 1e-3);
    CHECK(r.expected_overlap == doctest::Approx(0.0).epsilon(1e-12));
    REQUIRE(r.first_passage.has_value());
    CHECK(*r.first_passage->time == 0.0);
}

TEST_CASE("overlap_fluid: horizon too short names the required minimum") {
    try {
        overlap_fluid(table1_model(0.5, 0.5), 6.0, 7.2, 1e-3);
        FAIL("expected horizon_error");
    } catch (const horizon_error& e) {
        // tau + t0 + 1/mu with t0 ~ 0.38
        CHECK(e.required_horizon() > 7.2);
        CHECK(e.required_horizon() < 7.6);
    }
}

TEST_CASE("overlap_adjusted: reproduces reference values") {
    CHECK(overlap_adjusted(table1_model(0.5, 0.3), 3.0, 29.0, 1e-3).expected_overlap ==
          doctest::Approx(31.52).epsilon(0.03));
    CHECK(overlap_adjusted(table1_model(1.0, 0.5), 3.0, 29.0, 1e-3).expected_overlap ==
          doctest::Approx(33.66).epsilon(0.03));
    CHECK(overlap_adjusted(table1_model(0.5, 0.5), 9.0, 29.0, 1e-3).expected_overlap ==
          doctest::Approx(16.71).epsilon(0.03));
}

TEST_CASE("adjusted first passage dominates fluid first passage") {
    for (double tau : {3.0, 6.0}) {
        auto rf = overlap_fluid(table1_model(0.5, 0.5), tau, 29.0, 1e-3);
        auto ra = overlap_adjusted(table1_model(0.5, 0.5), tau, 29.0, 1e-3);
        CHECK(*ra.first_passage->time >= *rf.first_passage->time - 1e-9);
    }
}

TEST_CASE("grid refinement: halving h moves overlap by < 1e-4") {
    auto m = table1_model(0.5, 0.5);
    const double f1 = overlap_fluid(m, 6.0, 29.0, 1e-3).expected_overlap;
    const double f2 = overlap_fluid(m, 6.0, 29.0, 5e-4).expected_overlap;
    CHECK(std::abs(f1 - f2) < 1e-4);
    const double a1 = overlap_adjusted(m, 6.0, 29.0, 1e-3).expected_overlap;
    const double a2 = overlap_adjusted(m, 6.0, 29.0, 5e-4).expected_overlap;
    CHECK(std::abs(a1 - a2) < 1e-4);
}

TEST_CASE("cum_x endpoint agrees with independent trapezoid quadrature") {
    auto m = table1_model(0.5, 0.5);
    auto traj = solve_fluid(m, 29.0, 1e-3);
    const double tau = 6.0;
    auto r = overlap_fluid(m, tau, 29.0, 1e-3);
    const double end = tau + *r.first_passage->time + 1.0;
    const double quad = trapezoid(traj, "x", tau, end);
    CHECK(std::abs(r.expected_overlap - quad) / quad < 1e-6);
}

TEST_CASE("trajectory CSV export") {
    QueueModel m(30, 1.0, RateFunction::constant(2.0), 1.0);
    auto traj = solve_fluid(m, 0.01, 1e-3);
    std::ostringstream os;
    traj.write_csv(os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,x,cum_x");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == traj.size());
}
