#ifndef OVLQ_GAUSSIAN_HPP
#define OVLQ_GAUSSIAN_HPP

#include <cmath>
#include <stdexcept>

namespace ovlq {

// Evaluation point, mean and standard deviation of a Gaussian.
// stddev == 0 is allowed and gives step-function semantics.
struct GaussianParams {
    double point;
    double mean;
    double stddev;
};

// CDF of N(mean, stddev^2) at `point`. Degenerate stddev = 0 is the
// step-function limit: 1 if point >= mean, else 0.
inline double gaussian_cdf(const GaussianParams& p) {
    if (p.stddev < 0.0) throw std::domain_error("gaussian_cdf: stddev must be >= 0");
    if (p.stddev == 0.0) return p.point >= p.mean ? 1.0 : 0.0;
    return 0.5 * std::erfc(-(p.point - p.mean) / (p.stddev * std::sqrt(2.0)));
}

// Density of N(mean, stddev^2) at `point`. Degenerate stddev = 0 returns 0;
// callers only ever use this multiplied by a vanishing variance.
inline double gaussian_pdf(const GaussianParams& p) {
    if (p.stddev < 0.0) throw std::domain_error("gaussian_pdf: stddev must be >= 0");
    if (p.stddev == 0.0) return 0.0;
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    const double z = (p.point - p.mean) / p.stddev;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z) / p.stddev;
}

} // namespace ovlq

#endif
