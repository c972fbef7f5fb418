#ifndef OVLQ_TRAJECTORY_HPP
#define OVLQ_TRAJECTORY_HPP

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ovlq/errors.hpp"

namespace ovlq {

inline std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Uniform time grid with named value channels, linearly interpolable.
class Trajectory {
public:
    Trajectory(double start_time, double step, std::size_t points)
        : start_(start_time), step_(step), points_(points) {
        if (step <= 0.0 || points < 2)
            throw config_error("Trajectory: need positive step and >= 2 grid points");
    }

    double start_time() const { return start_; }
    double step() const { return step_; }
    std::size_t size() const { return points_; }
    double time(std::size_t i) const { return start_ + static_cast<double>(i) * step_; }
    double end_time() const { return time(points_ - 1); }

    std::vector<double>& add_channel(const std::string& name) {
        channels_.emplace_back(name, std::vector<double>(points_, 0.0));
        return channels_.back().second;
    }

    bool has_channel(const std::string& name) const { return find(name) != nullptr; }

    const std::vector<double>& channel(const std::string& name) const {
        if (const auto* c = find(name)) return *c;
        throw config_error("Trajectory: no channel named '" + name + "'");
    }

    // Linear interpolation of a channel at time t (t clamped to grid by tolerance
    // half a step at either end; outside that is an error).
    double at(const std::string& name, double t) const {
        const auto& c = channel(name);
        const double s = (t - start_) / step_;
        if (s < -0.5 || s > static_cast<double>(points_ - 1) + 0.5)
            throw config_error("Trajectory: time " + format_full(t) + " outside grid");
        if (s <= 0.0) return c.front();
        if (s >= static_cast<double>(points_ - 1)) return c.back();
        const auto i = static_cast<std::size_t>(s);
        const double w = s - static_cast<double>(i);
        return c[i] + w * (c[i + 1] - c[i]);
    }

    const std::vector<std::pair<std::string, std::vector<double>>>& channels() const {
        return channels_;
    }

    // CSV: header `t,<channel>...`, one row per grid point, full precision.
    void write_csv(std::ostream& os) const {
        os << 't';
        for (const auto& [name, vals] : channels_) os << ',' << name;
        os << '\n';
        for (std::size_t i = 0; i < points_; ++i) {
            os << format_full(time(i));
            for (const auto& [name, vals] : channels_) os << ',' << format_full(vals[i]);
            os << '\n';
        }
    }

private:
    const std::vector<double>* find(const std::string& name) const {
        for (const auto& [n, v] : channels_)
            if (n == name) return &v;
        return nullptr;
    }

    double start_;
    double step_;
    std::size_t points_;
    std::vector<std::pair<std::string, std::vector<double>>> channels_;
};

// First time a trajectory channel drops to or below a threshold.
// time() is empty when the channel stays above the threshold on the grid.
struct FirstPassage {
    double threshold;
    std::optional<double> time;

    bool reached() const { return time.has_value(); }
};

// Smallest grid-bracketed crossing of `channel` <= threshold, refined by
// linear interpolation between the bracketing points. Returns 0 immediately
// when the initial value already satisfies the condition.
inline FirstPassage first_passage(const Trajectory& traj, const std::string& channel,
                                  double threshold) {
    const auto& c = traj.channel(channel);
    FirstPassage fp{threshold, std::nullopt};
    if (c.front() <= threshold) {
        fp.time = 0.0;
        return fp;
    }
    for (std::size_t i = 1; i < c.size(); ++i) {
        if (c[i] <= threshold) {
            const double frac = (c[i - 1] - threshold) / (c[i - 1] - c[i]);
            fp.time = (static_cast<double>(i - 1) + frac) * traj.step();
            return fp;
        }
    }
    return fp;
}

} // namespace ovlq

#endif
