#ifndef OVLQ_ERRORS_HPP
#define OVLQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ovlq {

// Bad model/solver configuration (nonpositive step, negative rate, ...).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// The requested computation does not fit inside the given horizon.
// required_horizon() is the minimum T that would have worked, or NaN if
// the solve never reached the point where the minimum becomes known.
class horizon_error : public std::runtime_error {
public:
    horizon_error(const std::string& what, double required)
        : std::runtime_error(what), required_(required) {}

    double required_horizon() const { return required_; }

private:
    double required_;
};

} // namespace ovlq

#endif
