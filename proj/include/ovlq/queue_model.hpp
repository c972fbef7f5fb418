#ifndef OVLQ_QUEUE_MODEL_HPP
#define OVLQ_QUEUE_MODEL_HPP

#include <algorithm>
#include <cmath>

#include "ovlq/errors.hpp"
#include "ovlq/gaussian.hpp"
#include "ovlq/rate_function.hpp"

namespace ovlq {

// An M_t/M/n (or M_t/M/inf) queue instance.
class QueueModel {
public:
    static constexpr long kInfiniteServers = -1;

    QueueModel(long servers, double service_rate, RateFunction arrival,
               double initial_count = 0.0)
        : servers_(servers),
          service_rate_(service_rate),
          arrival_(std::move(arrival)),
          initial_count_(initial_count) {
        if (service_rate_ <= 0.0)
            throw config_error("QueueModel: service rate must be positive");
        if (servers_ != kInfiniteServers && servers_ < 1)
            throw config_error("QueueModel: server count must be >= 1 or infinite");
        if (initial_count_ < 0.0)
            throw config_error("QueueModel: initial count must be >= 0");
    }

    bool infinite_servers() const { return servers_ == kInfiniteServers; }
    long servers() const { return servers_; }
    double service_rate() const { return service_rate_; }
    const RateFunction& arrival() const { return arrival_; }
    double initial_count() const { return initial_count_; }

private:
    long servers_;
    double service_rate_;
    RateFunction arrival_;
    double initial_count_;
};

// Fluid departure rate mu * min(x, n); mu * x for infinite servers.
inline double rate_f2(double x, const QueueModel& model) {
    if (model.infinite_servers()) return model.service_rate() * x;
    return model.service_rate() * std::min(x, static_cast<double>(model.servers()));
}

// Adjusted departure rate mu * E[min(N, n)] for N ~ Normal(x, u), n finite.
// Below variance 1e-12 this short-circuits to the plain rate (its analytic limit).
inline double rate_g2(double x, double u, const QueueModel& model) {
    if (u < 0.0) throw std::domain_error("rate_g2: variance must be >= 0");
    if (model.infinite_servers())
        throw config_error("rate_g2: requires a finite server count");
    const double mu = model.service_rate();
    const double n = static_cast<double>(model.servers());
    if (u < 1e-12) return mu * std::min(x, n);
    const double sd = std::sqrt(u);
    return mu * (n + (x - n) * gaussian_cdf({n, x, sd}) - u * gaussian_pdf({n, x, sd}));
}

} // namespace ovlq

#endif
