#ifndef OVLQ_OVLQ_HPP
#define OVLQ_OVLQ_HPP

#include "ovlq/config.hpp"
#include "ovlq/errors.hpp"
#include "ovlq/fluid.hpp"
#include "ovlq/gaussian.hpp"
#include "ovlq/infinite_server.hpp"
#include "ovlq/queue_model.hpp"
#include "ovlq/rate_function.hpp"
#include "ovlq/rng.hpp"
#include "ovlq/simulate.hpp"
#include "ovlq/trajectory.hpp"

#endif
