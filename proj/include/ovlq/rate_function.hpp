#ifndef OVLQ_RATE_FUNCTION_HPP
#define OVLQ_RATE_FUNCTION_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include "ovlq/errors.hpp"

namespace ovlq {

// Time-varying arrival rate lambda(t) with an explicit upper bound.
//
// Two flavors:
//   sinusoidal  lambda(t) = (amplitude * sin(frequency * t) + baseline) * n_scale * rho
//   tabulated   piecewise-linear through sorted (time, rate) breakpoints,
//               constant extrapolation outside the breakpoint range
class RateFunction {
public:
    enum class Kind { sinusoidal, tabulated };

    struct Sinusoidal {
        double amplitude;   // customers/time
        double frequency;   // radians/time
        double baseline;    // customers/time
        double n_scale;     // server-count scale factor
        double rho;         // traffic intensity scale factor
    };

    using Breakpoint = std::pair<double, double>; // (time, rate)

    static RateFunction sinusoidal(double amplitude, double frequency,
                                   double baseline, double n_scale, double rho) {
        if (n_scale <= 0.0 || rho <= 0.0)
            throw config_error("RateFunction: n and rho scale factors must be positive");
        if ((baseline - std::abs(amplitude)) * n_scale * rho < 0.0)
            throw config_error("RateFunction: sinusoidal rate goes negative (need lambda >= |beta|)");
        RateFunction r;
        r.form_ = Sinusoidal{amplitude, frequency, baseline, n_scale, rho};
        r.bound_ = (baseline + std::abs(amplitude)) * n_scale * rho;
        return r;
    }

    static RateFunction tabulated(std::vector<Breakpoint> breakpoints, double upper_bound) {
        if (breakpoints.empty())
            throw config_error("RateFunction: tabulated form needs at least one breakpoint");
        double max_rate = 0.0;
        for (std::size_t i = 0; i < breakpoints.size(); ++i) {
            if (breakpoints[i].second < 0.0)
                throw config_error("RateFunction: tabulated rates must be >= 0");
            if (i > 0 && breakpoints[i].first <= breakpoints[i - 1].first)
                throw config_error("RateFunction: breakpoint times must be strictly increasing");
            max_rate = std::max(max_rate, breakpoints[i].second);
        }
        if (upper_bound < max_rate)
            throw config_error("RateFunction: upper bound below a breakpoint rate");
        RateFunction r;
        r.form_ = std::move(breakpoints);
        r.bound_ = upper_bound;
        return r;
    }

    static RateFunction constant(double rate) {
        return tabulated({{0.0, rate}}, rate);
    }

    Kind kind() const {
        return std::holds_alternative<Sinusoidal>(form_) ? Kind::sinusoidal : Kind::tabulated;
    }

    const Sinusoidal& sinusoidal_params() const { return std::get<Sinusoidal>(form_); }

    double operator()(double t) const {
        if (const auto* s = std::get_if<Sinusoidal>(&form_)) {
            return (s->amplitude * std::sin(s->frequency * t) + s->baseline) * s->n_scale * s->rho;
        }
        const auto& bp = std::get<std::vector<Breakpoint>>(form_);
        if (t <= bp.front().first) return bp.front().second;
        if (t >= bp.back().first) return bp.back().second;
        auto it = std::upper_bound(bp.begin(), bp.end(), t,
                                   [](double v, const Breakpoint& b) { return v < b.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (t - lo.first) / (hi.first - lo.first);
        return lo.second + w * (hi.second - lo.second);
    }

    double upper_bound() const { return bound_; }

private:
    RateFunction() = default;

    std::variant<Sinusoidal, std::vector<Breakpoint>> form_;
    double bound_ = 0.0;
};

} // namespace ovlq

#endif
