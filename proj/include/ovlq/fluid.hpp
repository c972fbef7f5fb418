#ifndef OVLQ_FLUID_HPP
#define OVLQ_FLUID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>

#include "ovlq/errors.hpp"
#include "ovlq/queue_model.hpp"
#include "ovlq/trajectory.hpp"

namespace ovlq {

namespace detail {

template <std::size_t N, class Deriv>
std::array<double, N> rk4_step(Deriv&& f, double t, double h,
                               const std::array<double, N>& y) {
    std::array<double, N> k1 = f(t, y);
    std::array<double, N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    std::array<double, N> k2 = f(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    std::array<double, N> k3 = f(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
    std::array<double, N> k4 = f(t + h, tmp);
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

inline std::size_t grid_steps(double horizon, double step) {
    if (horizon <= 0.0) throw config_error("solver: horizon must be positive");
    if (step <= 0.0 || step > horizon)
        throw config_error("solver: step must satisfy 0 < h <= T");
    return static_cast<std::size_t>(std::llround(horizon / step));
}

} // namespace detail

// Fluid ODE dx/dt = lambda(t) - mu min(x, n), integrated with classical RK4,
// together with the running integral cum_x(t) = int_0^t x ds.
// Channels: "x", "cum_x".
inline Trajectory solve_fluid(const QueueModel& model, double horizon, double step) {
    const std::size_t steps = detail::grid_steps(horizon, step);
    Trajectory traj(0.0, step, steps + 1);
    auto& x = traj.add_channel("x");
    auto& cum = traj.add_channel("cum_x");

    auto deriv = [&](double t, const std::array<double, 2>& y) {
        return std::array<double, 2>{model.arrival()(t) - rate_f2(y[0], model), y[0]};
    };
    std::array<double, 2> y{model.initial_count(), 0.0};
    x[0] = y[0];
    cum[0] = y[1];
    for (std::size_t i = 0; i < steps; ++i) {
        y = detail::rk4_step(deriv, static_cast<double>(i) * step, step, y);
        x[i + 1] = y[0];
        cum[i + 1] = y[1];
    }
    return traj;
}

// Drain ODE dz/dt = -mu min(z, n) from z(0) = x_at_tau. Channel: "z".
// Grid times are offsets from tau.
inline Trajectory solve_z(const QueueModel& model, double x_at_tau, double horizon,
                          double step) {
    if (x_at_tau < 0.0) throw config_error("solve_z: initial value must be >= 0");
    const std::size_t steps = detail::grid_steps(horizon, step);
    Trajectory traj(0.0, step, steps + 1);
    auto& z = traj.add_channel("z");

    auto deriv = [&](double, const std::array<double, 1>& y) {
        return std::array<double, 1>{-rate_f2(y[0], model)};
    };
    std::array<double, 1> y{x_at_tau};
    z[0] = y[0];
    for (std::size_t i = 0; i < steps; ++i) {
        y = detail::rk4_step(deriv, static_cast<double>(i) * step, step, y);
        z[i + 1] = y[0];
    }
    return traj;
}

// Adjusted fluid/variance system
//   dx/dt = g1 - g2(x, u)
//   du/dt = -2 mu Phi(n, x, sqrt(u)) u + g1 + g2(x, u)
// with the running integral of x. Channels: "x", "u", "cum_x".
// u is clamped to >= 0 after every step (roundoff near zero).
inline Trajectory solve_adjusted(const QueueModel& model, double horizon, double step,
                                 double initial_variance = 0.0) {
    if (model.infinite_servers())
        throw config_error("solve_adjusted: requires a finite server count");
    if (initial_variance < 0.0)
        throw config_error("solve_adjusted: initial variance must be >= 0");
    const std::size_t steps = detail::grid_steps(horizon, step);
    Trajectory traj(0.0, step, steps + 1);
    auto& x = traj.add_channel("x");
    auto& u = traj.add_channel("u");
    auto& cum = traj.add_channel("cum_x");

    const double mu = model.service_rate();
    const double n = static_cast<double>(model.servers());
    auto deriv = [&](double t, const std::array<double, 3>& y) {
        const double xv = y[0];
        const double uv = std::max(y[1], 0.0);
        const double g1 = model.arrival()(t);
        const double g2 = rate_g2(xv, uv, model);
        const double du = -2.0 * mu * gaussian_cdf({n, xv, std::sqrt(uv)}) * uv + g1 + g2;
        return std::array<double, 3>{g1 - g2, du, xv};
    };
    std::array<double, 3> y{model.initial_count(), initial_variance, 0.0};
    x[0] = y[0];
    u[0] = y[1];
    cum[0] = y[2];
    for (std::size_t i = 0; i < steps; ++i) {
        y = detail::rk4_step(deriv, static_cast<double>(i) * step, step, y);
        y[1] = std::max(y[1], 0.0);
        x[i + 1] = y[0];
        u[i + 1] = y[1];
        cum[i + 1] = y[2];
    }
    return traj;
}

// Adjusted drain system
//   dz/dt = -g2(z, v)
//   dv/dt = -2 mu Phi(n, z, sqrt(v)) v + g2(z, v)
// from (x_at_tau, u_at_tau). Channels: "z", "v". With evolve_variance = false
// the v equation is disabled and v is pinned at its initial value
// (cross-check mode: v == 0 reduces to the plain drain).
inline Trajectory solve_z_adjusted(const QueueModel& model, double x_at_tau,
                                   double u_at_tau, double horizon, double step,
                                   bool evolve_variance = true) {
    if (model.infinite_servers())
        throw config_error("solve_z_adjusted: requires a finite server count");
    if (x_at_tau < 0.0 || u_at_tau < 0.0)
        throw config_error("solve_z_adjusted: initial state must be >= 0");
    const std::size_t steps = detail::grid_steps(horizon, step);
    Trajectory traj(0.0, step, steps + 1);
    auto& z = traj.add_channel("z");
    auto& v = traj.add_channel("v");

    const double mu = model.service_rate();
    const double n = static_cast<double>(model.servers());
    auto deriv = [&](double, const std::array<double, 2>& y) {
        const double zv = y[0];
        const double vv = std::max(y[1], 0.0);
        const double g2 = rate_g2(zv, vv, model);
        const double dv =
            evolve_variance
                ? -2.0 * mu * gaussian_cdf({n, zv, std::sqrt(vv)}) * vv + g2
                : 0.0;
        return std::array<double, 2>{-g2, dv};
    };
    std::array<double, 2> y{x_at_tau, u_at_tau};
    z[0] = y[0];
    v[0] = y[1];
    for (std::size_t i = 0; i < steps; ++i) {
        y = detail::rk4_step(deriv, static_cast<double>(i) * step, step, y);
        y[1] = std::max(y[1], 0.0);
        z[i + 1] = y[0];
        v[i + 1] = y[1];
    }
    return traj;
}

enum class Method { fluid, adjusted, simulation, closed_form, numeric_ode };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::fluid: return "fluid";
        case Method::adjusted: return "adjusted";
        case Method::simulation: return "simulation";
        case Method::closed_form: return "closed-form";
        case Method::numeric_ode: return "numeric-ode";
    }
    return "?";
}

struct OverlapResult {
    Method method;
    double tau;
    std::optional<FirstPassage> first_passage; // absent for infinite-server paths
    double expected_overlap;
    // simulation only:
    std::optional<double> variance;
    std::optional<double> stderr_;
    std::optional<std::size_t> sample_count;
};

namespace detail {

inline void check_overlap_horizon(double tau, const FirstPassage& fp, double inv_mu,
                                  double horizon, const char* who) {
    if (!fp.reached()) {
        std::ostringstream msg;
        msg << who << ": drain never reached n-1 within T = " << horizon
            << "; extend T (required minimum unknown, beyond " << horizon << ")";
        throw horizon_error(msg.str(), std::nan(""));
    }
    const double required = tau + *fp.time + inv_mu;
    if (required > horizon) {
        std::ostringstream msg;
        msg << who << ": integration endpoint " << required << " exceeds T = " << horizon
            << "; extend T to at least " << required;
        throw horizon_error(msg.str(), required);
    }
}

} // namespace detail

// Expected overlap via the plain fluid limit:
//   E[O_tau] ~ int_tau^{tau+t0+1/mu} x(t) dt,
// with t0 the first passage of the drain z below n-1 starting from x(tau).
inline OverlapResult overlap_fluid(const QueueModel& model, double tau, double horizon,
                                   double step) {
    if (tau < 0.0 || tau >= horizon)
        throw config_error("overlap_fluid: need 0 <= tau < T");
    const Trajectory fluid = solve_fluid(model, horizon, step);
    const double x_tau = fluid.at("x", tau);
    const Trajectory drain = solve_z(model, x_tau, horizon - tau, step);
    const double threshold = static_cast<double>(model.servers()) - 1.0;
    const FirstPassage fp = first_passage(drain, "z", threshold);
    const double inv_mu = 1.0 / model.service_rate();
    detail::check_overlap_horizon(tau, fp, inv_mu, horizon, "overlap_fluid");
    const double end = tau + *fp.time + inv_mu;
    const double value = fluid.at("cum_x", end) - fluid.at("cum_x", tau);
    return OverlapResult{Method::fluid, tau, fp, value, {}, {}, {}};
}

// Expected overlap via the adjusted fluid model:
//   E[O_tau] ~ int_tau^{tau+ta+1/mu} x_a(t) dt,
// with ta the first passage of the adjusted drain below n-1 starting from
// (x_a(tau), u(tau)).
inline OverlapResult overlap_adjusted(const QueueModel& model, double tau,
                                      double horizon, double step) {
    if (tau < 0.0 || tau >= horizon)
        throw config_error("overlap_adjusted: need 0 <= tau < T");
    const Trajectory adj = solve_adjusted(model, horizon, step);
    const double x_tau = adj.at("x", tau);
    const double u_tau = std::max(adj.at("u", tau), 0.0);
    const Trajectory drain = solve_z_adjusted(model, x_tau, u_tau, horizon - tau, step);
    const double threshold = static_cast<double>(model.servers()) - 1.0;
    const FirstPassage fp = first_passage(drain, "z", threshold);
    const double inv_mu = 1.0 / model.service_rate();
    detail::check_overlap_horizon(tau, fp, inv_mu, horizon, "overlap_adjusted");
    const double end = tau + *fp.time + inv_mu;
    const double value = adj.at("cum_x", end) - adj.at("cum_x", tau);
    return OverlapResult{Method::adjusted, tau, fp, value, {}, {}, {}};
}

} // namespace ovlq

#endif
