#ifndef OVLQ_INFINITE_SERVER_HPP
#define OVLQ_INFINITE_SERVER_HPP

#include <cmath>

#include "ovlq/errors.hpp"
#include "ovlq/fluid.hpp"
#include "ovlq/queue_model.hpp"
#include "ovlq/trajectory.hpp"

namespace ovlq {

// M_t/M/inf fluid model with sinusoidal arrivals lambda(t) = beta sin(alpha t) + lambda,
// opening empty. The mean path and expected overlap both have closed forms.
struct SinusoidalInfModel {
    double alpha;    // radians/time
    double beta;     // customers/time
    double lambda;   // customers/time, baseline
    double mu;       // 1/time

    void validate() const {
        if (mu <= 0.0) throw config_error("SinusoidalInfModel: mu must be positive");
        if (lambda < std::abs(beta))
            throw config_error("SinusoidalInfModel: need lambda >= |beta| for a nonnegative rate");
    }

    RateFunction rate() const {
        return RateFunction::sinusoidal(beta, alpha, lambda, 1.0, 1.0);
    }
};

// Closed-form mean path x(t) of the M_t/M/inf fluid limit with x(0) = 0:
//   x(t) = (beta/mu)(1 + a^2)^{-1} [sin(alpha t) - a cos(alpha t) + a e^{-mu t}]
//        + (lambda/mu)(1 - e^{-mu t}),   a = alpha/mu.
inline double closed_form_x(const SinusoidalInfModel& m, double t) {
    m.validate();
    const double a = m.alpha / m.mu;
    const double amp = (m.beta / m.mu) / (1.0 + a * a);
    return amp * (std::sin(m.alpha * t) - a * std::cos(m.alpha * t) + a * std::exp(-m.mu * t)) +
           (m.lambda / m.mu) * (1.0 - std::exp(-m.mu * t));
}

namespace detail {

// Antiderivative of closed_form_x (constant of integration arbitrary).
inline double closed_form_x_antideriv(const SinusoidalInfModel& m, double t) {
    const double a = m.alpha / m.mu;
    const double amp = (m.beta / m.mu) / (1.0 + a * a);
    double s;
    if (m.alpha != 0.0) {
        s = amp * (-std::cos(m.alpha * t) / m.alpha -
                   a * std::sin(m.alpha * t) / m.alpha -
                   (a / m.mu) * std::exp(-m.mu * t));
    } else {
        // sin(alpha t) -> 0, cos(alpha t) -> 1 as alpha -> 0
        s = amp * (-a * t - (a / m.mu) * std::exp(-m.mu * t));
    }
    return s + (m.lambda / m.mu) * (t + std::exp(-m.mu * t) / m.mu);
}

} // namespace detail

// Closed-form expected overlap int_tau^{tau+1/mu} x(t) dt, evaluated from the
// exact antiderivative of closed_form_x.
inline double closed_form_overlap(const SinusoidalInfModel& m, double tau) {
    m.validate();
    if (tau < 0.0) throw config_error("closed_form_overlap: tau must be >= 0");
    const double end = tau + 1.0 / m.mu;
    return detail::closed_form_x_antideriv(m, end) - detail::closed_form_x_antideriv(m, tau);
}

// Numeric-ODE mean path: RK4 on dx/dt = lambda(t) - mu x with a cumulative
// integral channel. Channels: "x", "cum_x".
inline Trajectory solve_fluid_inf(const SinusoidalInfModel& m, double horizon, double step) {
    m.validate();
    QueueModel model(QueueModel::kInfiniteServers, m.mu, m.rate(), 0.0);
    return solve_fluid(model, horizon, step);
}

// Numeric counterpart of closed_form_overlap.
inline double numeric_overlap_inf(const SinusoidalInfModel& m, double tau, double step) {
    m.validate();
    if (tau < 0.0) throw config_error("numeric_overlap_inf: tau must be >= 0");
    const double end = tau + 1.0 / m.mu;
    // pad the horizon by one step so the endpoint interpolates inside the grid
    const Trajectory traj = solve_fluid_inf(m, end + step, step);
    return traj.at("cum_x", end) - traj.at("cum_x", tau);
}

} // namespace ovlq

#endif
