#ifndef OVLQ_CONFIG_HPP
#define OVLQ_CONFIG_HPP

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ovlq/errors.hpp"
#include "ovlq/queue_model.hpp"

namespace ovlq {

// Model configuration, JSON layout:
//   {
//     "servers": 30 | "inf",
//     "mu": 1.0,
//     "arrival": {"kind": "sinusoidal", "alpha": .., "beta": .., "lambda": .., "rho": ..}
//              | {"kind": "tabulated", "breakpoints": [[t, rate], ...],
//                 "rate_upper_bound": ..},
//     "initial_count": 0
//   }
// For sinusoidal arrivals the rate is (beta sin(alpha t) + lambda) * n * rho,
// with n the server count (1 for infinite-server models).
inline QueueModel model_from_json(const nlohmann::json& j) {
    try {
        long servers;
        const auto& sv = j.at("servers");
        if (sv.is_string()) {
            const auto s = sv.get<std::string>();
            if (s != "inf" && s != "infinity")
                throw config_error("config: servers must be a positive integer or \"inf\"");
            servers = QueueModel::kInfiniteServers;
        } else {
            servers = sv.get<long>();
        }
        const double mu = j.at("mu").get<double>();
        const double initial = j.value("initial_count", 0.0);

        const auto& arr = j.at("arrival");
        const auto kind = arr.at("kind").get<std::string>();
        if (kind == "sinusoidal") {
            const double n_scale =
                servers == QueueModel::kInfiniteServers ? 1.0 : static_cast<double>(servers);
            RateFunction rate = RateFunction::sinusoidal(
                arr.at("beta").get<double>(), arr.at("alpha").get<double>(),
                arr.at("lambda").get<double>(), n_scale, arr.value("rho", 1.0));
            return QueueModel(servers, mu, std::move(rate), initial);
        }
        if (kind == "tabulated") {
            std::vector<RateFunction::Breakpoint> bps;
            for (const auto& p : arr.at("breakpoints"))
                bps.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            double bound = 0.0;
            if (arr.contains("rate_upper_bound")) {
                bound = arr.at("rate_upper_bound").get<double>();
            } else {
                for (const auto& bp : bps) bound = std::max(bound, bp.second);
            }
            RateFunction rate = RateFunction::tabulated(std::move(bps), bound);
            return QueueModel(servers, mu, std::move(rate), initial);
        }
        throw config_error("config: unknown arrival kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
}

} // namespace ovlq

#endif
