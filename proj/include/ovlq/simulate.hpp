#ifndef OVLQ_SIMULATE_HPP
#define OVLQ_SIMULATE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "ovlq/errors.hpp"
#include "ovlq/queue_model.hpp"
#include "ovlq/rng.hpp"
#include "ovlq/trajectory.hpp"

namespace ovlq {

struct SimConfig {
    std::uint64_t master_seed = 1;
    std::size_t replications = 10000;
    double horizon = 0.0;
    double tau = 0.0;
    bool count_self = false;
    unsigned eta = 1;     // uniform-acceleration factor
    unsigned workers = 0; // 0 = hardware concurrency

    void validate() const {
        if (replications < 1) throw config_error("SimConfig: replications must be >= 1");
        if (!(tau >= 0.0 && tau < horizon))
            throw config_error("SimConfig: need 0 <= tau < horizon");
        if (eta < 1) throw config_error("SimConfig: eta must be >= 1");
    }
};

// One replication's view of the tagged customer.
struct SimSample {
    std::size_t replication = 0;
    double overlap = 0.0;               // O_tau, customer-time
    double overlap_until_service = 0.0; // portion accumulated while she waited
    double wait = 0.0;
    double service = 0.0;
    long system_size_at_tau = 0;        // others present just before her arrival

    double sojourn() const { return wait + service; }
};

struct SimAggregate {
    double mean = 0.0;
    double variance = 0.0; // sample variance, divisor N-1
    double stderr_ = 0.0;
    std::size_t sample_count = 0;
};

inline SimAggregate aggregate(const std::vector<SimSample>& samples) {
    SimAggregate agg;
    agg.sample_count = samples.size();
    double sum = 0.0;
    for (const auto& s : samples) sum += s.overlap;
    agg.mean = sum / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double ss = 0.0;
        for (const auto& s : samples) {
            const double d = s.overlap - agg.mean;
            ss += d * d;
        }
        agg.variance = ss / static_cast<double>(samples.size() - 1);
        agg.stderr_ = std::sqrt(agg.variance / static_cast<double>(samples.size()));
    }
    return agg;
}

// Next accepted arrival after `t` by thinning a homogeneous Poisson stream at
// the rate's upper bound. Returns +inf when the bound is zero.
inline double nhpp_next(const RateFunction& rate, CounterRng& rng, double t) {
    const double bound = rate.upper_bound();
    if (bound <= 0.0) return std::numeric_limits<double>::infinity();
    for (;;) {
        t += rng.exponential(bound);
        if (rng.uniform() * bound < rate(t)) return t;
    }
}

// One exact sample path of the M_t/M/n (or M_t/M/inf) queue with a tagged
// virtual customer injected at tau in addition to the Poisson stream.
//
// Departures of untagged customers are drawn as Exp(mu * busy_others) and
// redrawn after every event (valid by memorylessness); only the tagged
// customer's own service time is an explicit timer. Under FCFS every
// departure while she waits is a customer ahead of her, so her service
// starts when that count drops to n-1.
inline SimSample simulate_path(const QueueModel& model, const SimConfig& cfg,
                               CounterRng& rng) {
    cfg.validate();
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double mu = model.service_rate();

    double t = 0.0;
    long x = std::lround(model.initial_count()); // untagged customers in system
    double next_arrival = nhpp_next(model.arrival(), rng, 0.0);

    enum class Tag { pending, waiting, in_service, departed };
    Tag tag = Tag::pending;
    double tagged_departure = inf;
    long ahead = 0;

    SimSample out;

    auto busy_servers = [&](long total) {
        return model.infinite_servers() ? total
                                        : std::min(total, model.servers());
    };
    auto enter_service = [&](double now) {
        tag = Tag::in_service;
        out.wait = now - cfg.tau;
        out.service = rng.exponential(mu);
        out.overlap_until_service = out.overlap;
        tagged_departure = now + out.service;
    };

    while (tag != Tag::departed) {
        const bool tagged_present = tag == Tag::waiting || tag == Tag::in_service;
        const long total = x + (tagged_present ? 1 : 0);
        const long busy = busy_servers(total);
        const long busy_others = busy - (tag == Tag::in_service ? 1 : 0);
        const double next_departure =
            busy_others > 0 ? t + rng.exponential(mu * static_cast<double>(busy_others))
                            : inf;

        double next = std::min(next_arrival, next_departure);
        if (tag == Tag::pending) next = std::min(next, cfg.tau);
        if (tag == Tag::in_service) next = std::min(next, tagged_departure);

        if (next > cfg.horizon) {
            std::ostringstream msg;
            msg << "simulate_path: tagged customer still in system at T = " << cfg.horizon
                << " (state: " << (tag == Tag::waiting ? "waiting" : "in service")
                << ", X = " << total << ")";
            throw horizon_error(msg.str(), std::nan(""));
        }

        if (tagged_present) {
            const double others = static_cast<double>(x) + (cfg.count_self ? 1.0 : 0.0);
            out.overlap += others * (next - t);
        }

        if (tag == Tag::pending && next == cfg.tau &&
            cfg.tau <= next_arrival && cfg.tau <= next_departure) {
            t = next;
            out.system_size_at_tau = x;
            if (model.infinite_servers() || x < model.servers()) {
                enter_service(t);
            } else {
                tag = Tag::waiting;
                ahead = x;
            }
        } else if (tag == Tag::in_service && next == tagged_departure) {
            t = next;
            tag = Tag::departed;
        } else if (next == next_arrival) {
            t = next;
            ++x;
            next_arrival = nhpp_next(model.arrival(), rng, t);
        } else {
            t = next;
            --x;
            if (tag == Tag::waiting) {
                --ahead;
                if (ahead <= model.servers() - 1) enter_service(t);
            }
        }
    }
    return out;
}

// Runs cfg.replications independent paths with per-replication streams derived
// from the master seed, optionally across worker threads. Samples are stored
// and aggregated in replication-index order, so the result is identical for
// any worker count.
inline std::vector<SimSample> run_replication_samples(const QueueModel& model,
                                                      const SimConfig& cfg) {
    cfg.validate();
    std::vector<SimSample> samples(cfg.replications);
    unsigned workers = cfg.workers == 0 ? std::thread::hardware_concurrency() : cfg.workers;
    workers = std::max(1u, std::min<unsigned>(workers, cfg.replications));

    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= cfg.replications) return;
            try {
                CounterRng rng = CounterRng::stream(cfg.master_seed, i);
                samples[i] = simulate_path(model, cfg, rng);
                samples[i].replication = i;
            } catch (const horizon_error& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::make_exception_ptr(horizon_error(
                        "replication " + std::to_string(i) + ": " + e.what(),
                        e.required_horizon()));
                cursor.store(cfg.replications);
                return;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::make_exception_ptr(config_error(
                        "replication " + std::to_string(i) + ": " + e.what()));
                cursor.store(cfg.replications);
                return;
            }
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return samples;
}

inline SimAggregate run_replications(const QueueModel& model, const SimConfig& cfg) {
    return aggregate(run_replication_samples(model, cfg));
}

namespace detail {

// Event loop for the eta-scaled system without a tagged customer; calls
// segment(t_begin, t_end, count) for every piecewise-constant stretch of X.
template <class Segment>
void run_counts(const QueueModel& model, unsigned eta, double horizon, CounterRng& rng,
                Segment&& segment) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double mu = model.service_rate();
    const double bound = model.arrival().upper_bound() * static_cast<double>(eta);
    const long cap = model.infinite_servers()
                         ? std::numeric_limits<long>::max()
                         : model.servers() * static_cast<long>(eta);

    double t = 0.0;
    long x = std::lround(model.initial_count() * static_cast<double>(eta));
    double next_arrival = bound > 0.0 ? rng.exponential(bound) : inf;

    while (t < horizon) {
        const long busy = std::min(x, cap);
        const double next_departure =
            busy > 0 ? t + rng.exponential(mu * static_cast<double>(busy)) : inf;
        double next = std::min(next_arrival, next_departure);
        bool is_arrival = next == next_arrival;
        bool accepted = false;
        if (is_arrival && next < horizon) {
            accepted = rng.uniform() * bound <
                       static_cast<double>(eta) * model.arrival()(next);
        }
        const double seg_end = std::min(next, horizon);
        segment(t, seg_end, x);
        t = seg_end;
        if (t >= horizon) break;
        if (is_arrival) {
            if (accepted) ++x;
            next_arrival = next + (bound > 0.0 ? rng.exponential(bound) : inf);
        } else {
            --x;
        }
    }
}

} // namespace detail

struct MeanPath {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> stderr_;
};

// Mean (and stderr) of X(t)/eta over replications, sampled at `times`.
// `per_rep(replication, sampled)` sees each replication's sampled path.
template <class PerRep>
MeanPath simulate_mean_path(const QueueModel& model, const SimConfig& cfg,
                            const std::vector<double>& times, PerRep&& per_rep) {
    if (times.empty()) throw config_error("simulate_mean_path: empty time grid");
    MeanPath out;
    out.times = times;
    out.mean.assign(times.size(), 0.0);
    std::vector<double> m2(times.size(), 0.0);
    std::vector<double> sampled(times.size(), 0.0);

    for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
        CounterRng rng = CounterRng::stream(cfg.master_seed, rep);
        std::size_t idx = 0;
        detail::run_counts(model, cfg.eta, cfg.horizon, rng,
                           [&](double, double end, long x) {
                               const double scaled =
                                   static_cast<double>(x) / static_cast<double>(cfg.eta);
                               while (idx < times.size() && times[idx] <= end) {
                                   sampled[idx] = scaled;
                                   ++idx;
                               }
                           });
        while (idx < times.size()) {
            sampled[idx] = idx > 0 ? sampled[idx - 1] : 0.0;
            ++idx;
        }
        per_rep(rep, sampled);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double d = sampled[i] - out.mean[i];
            out.mean[i] += d / static_cast<double>(rep + 1);
            m2[i] += d * (sampled[i] - out.mean[i]);
        }
    }
    out.stderr_.assign(times.size(), 0.0);
    if (cfg.replications > 1) {
        const double n = static_cast<double>(cfg.replications);
        for (std::size_t i = 0; i < times.size(); ++i)
            out.stderr_[i] = std::sqrt(m2[i] / (n - 1.0) / n);
    }
    return out;
}

inline MeanPath simulate_mean_path(const QueueModel& model, const SimConfig& cfg,
                                   const std::vector<double>& times) {
    return simulate_mean_path(model, cfg, times, [](std::size_t, const std::vector<double>&) {});
}

struct AccelReport {
    unsigned eta = 1;
    double mean_sup_error = 0.0;  // mean over reps of sup_t |X^eta(t)/eta - x(t)|
    double mean_first_passage = 0.0; // mean scaled t0^eta (cohort drain to eta(n-1))
    std::size_t replications = 0;
};

// Uniform-acceleration experiment: simulates the eta-scaled system and
// measures the sup distance of X^eta/eta from the fluid trajectory on its
// grid; also tracks the tau-cohort drain and its first passage below
// eta(n-1), reported in unscaled time.
inline AccelReport simulate_accelerated(const QueueModel& model, const SimConfig& cfg,
                                        const Trajectory& fluid) {
    cfg.validate();
    if (fluid.end_time() > cfg.horizon + 1e-12)
        throw config_error("simulate_accelerated: fluid grid extends past the sim horizon");
    const auto& xf = fluid.channel("x");
    const double eta = static_cast<double>(cfg.eta);
    const long scaled_threshold =
        model.infinite_servers()
            ? -1
            : static_cast<long>(cfg.eta) * (model.servers() - 1);

    AccelReport report;
    report.eta = cfg.eta;
    report.replications = cfg.replications;

    for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
        CounterRng rng = CounterRng::stream(cfg.master_seed, rep);
        CounterRng cohort_rng = CounterRng::stream(cfg.master_seed ^ 0xC0C0C0C0C0C0C0C0ULL, rep);
        double sup = 0.0;
        std::size_t idx = 0;
        long cohort = -1; // X at tau, once reached
        double t0 = -1.0;
        long prev_x = -1;
        const long cap = model.infinite_servers() ? std::numeric_limits<long>::max()
                                                  : model.servers() * static_cast<long>(cfg.eta);
        detail::run_counts(model, cfg.eta, cfg.horizon, rng,
                           [&](double begin, double end, long x) {
                               while (idx < fluid.size() && fluid.time(idx) <= end) {
                                   sup = std::max(sup, std::abs(static_cast<double>(x) / eta - xf[idx]));
                                   ++idx;
                               }
                               if (cohort < 0 && cfg.tau >= begin && cfg.tau < end) {
                                   cohort = x;
                                   if (cohort <= scaled_threshold) t0 = 0.0;
                               } else if (cohort >= 0 && t0 < 0.0 && prev_x >= 0 && x == prev_x - 1) {
                                   // a departure: from the cohort with prob min(z, eta n)/busy
                                   const long busy = std::min(prev_x, cap);
                                   const double p = static_cast<double>(std::min(cohort, cap)) /
                                                    static_cast<double>(busy);
                                   if (cohort_rng.uniform() < p) {
                                       --cohort;
                                       if (cohort <= scaled_threshold) t0 = begin - cfg.tau;
                                   }
                               }
                               prev_x = x;
                           });
        report.mean_sup_error += sup;
        report.mean_first_passage += t0 >= 0.0 ? t0 : cfg.horizon - cfg.tau;
    }
    report.mean_sup_error /= static_cast<double>(cfg.replications);
    report.mean_first_passage /= static_cast<double>(cfg.replications);
    return report;
}

struct Histogram {
    std::vector<double> edges;        // bins + 1 entries
    std::vector<std::size_t> counts;  // bins entries
};

// Histogram with Freedman-Diaconis bin width by default (bins = 0); a
// zero-width IQR falls back to 30 fixed bins. The last bin is closed.
inline Histogram make_histogram(std::vector<double> samples, std::size_t bins = 0) {
    if (samples.size() < 2)
        throw config_error("make_histogram: need at least 2 samples");
    std::sort(samples.begin(), samples.end());
    double lo = samples.front();
    double hi = samples.back();
    if (bins == 0) {
        const double q1 = samples[samples.size() / 4];
        const double q3 = samples[(3 * samples.size()) / 4];
        const double iqr = q3 - q1;
        if (iqr <= 0.0) {
            bins = 30;
        } else {
            const double width =
                2.0 * iqr / std::cbrt(static_cast<double>(samples.size()));
            bins = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
        }
    }
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    h.edges.resize(bins + 1);
    h.counts.assign(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = lo + width * static_cast<double>(i);
    for (double v : samples) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        if (b >= bins) b = bins - 1;
        ++h.counts[b];
    }
    return h;
}

} // namespace ovlq

#endif
