// overlapq: overlapping-time experiments for time-varying multi-server queues.
//
// Subcommands:
//   overlap   expected overlap at given tau values by the chosen methods
//   table1    fluid vs adjusted vs simulation comparison (8 preset rows)
//   table2    closed-form vs numeric vs simulation for the M_t/M/inf model
//   figure    trajectory / histogram CSV data (ids 1-4)
//   converge  uniform-acceleration sup-error sweep over eta

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ovlq/ovlq.hpp"

namespace fs = std::filesystem;
using namespace ovlq;

namespace {

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 1;
    std::size_t reps = 10000;
    double step = 1e-3;
    std::vector<double> taus;
    std::string out_dir = ".";
    bool count_self = false;
    std::string format = "csv";
    double horizon = 0.0; // 0 = auto (tau_max + 20/mu)
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_config) {
    if (with_config)
        cmd->add_option("--config", o.config_path, "model config file (JSON)");
    cmd->add_option("--seed", o.seed, "master RNG seed");
    cmd->add_option("--reps", o.reps, "simulation replications");
    cmd->add_option("--step", o.step, "ODE step h");
    cmd->add_option("--tau", o.taus, "arrival time(s) tau")->delimiter(',');
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_flag("--count-self", o.count_self, "count the tagged customer in the overlap integrand");
    cmd->add_option("--format", o.format, "csv or text")
        ->check(CLI::IsMember({"csv", "text"}));
    cmd->add_option("--horizon", o.horizon, "horizon T (default tau_max + 20/mu)");
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw config_error("cannot open output file " + tmp.string());
        os << content;
    }
    fs::rename(tmp, path);
}

std::string pct1(double approx, double sim) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", std::abs(approx - sim) / sim * 100.0);
    return buf;
}

QueueModel load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config file " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config parse: ") + e.what());
    }
    return model_from_json(j);
}

QueueModel table1_model(double alpha, double beta) {
    return QueueModel(30, 1.0, RateFunction::sinusoidal(beta, alpha, 1.0, 30, 0.8), 0.0);
}

QueueModel figure1_model() {
    // lambda(t) = 30 (0.5 sin(0.5 t) + 1.0)
    return QueueModel(30, 1.0, RateFunction::sinusoidal(0.5, 0.5, 1.0, 30, 1.0), 0.0);
}

const SinusoidalInfModel kInfModel{0.5, 2.0, 10.0, 1.0};

struct Table1Row {
    double alpha, beta, tau;
};

const std::vector<Table1Row> kTable1Rows = {
    {0.5, 0.3, 3}, {0.5, 0.3, 6}, {0.5, 0.5, 3}, {0.5, 0.5, 6},
    {0.5, 0.5, 9}, {1.0, 0.3, 9}, {1.0, 0.5, 3}, {1.0, 0.5, 9},
};

SimConfig sim_config(const CommonOpts& o, double tau, double horizon) {
    SimConfig cfg;
    cfg.master_seed = o.seed;
    cfg.replications = o.reps;
    cfg.tau = tau;
    cfg.horizon = horizon;
    cfg.count_self = o.count_self;
    return cfg;
}

int run_table1(const CommonOpts& o) {
    const double T = o.horizon > 0.0 ? o.horizon : 9.0 + 20.0; // tau_max + 20/mu
    std::ostringstream csv, text;
    csv << "alpha,beta,rho,tau,fluid,adjusted,sim_mean,sim_sd,"
           "fluid_err_pct,adjusted_err_pct\n";
    text << "alpha beta rho tau |    fluid (error) | adjusted (error) | simulation (sd)\n";
    for (const auto& row : kTable1Rows) {
        auto model = table1_model(row.alpha, row.beta);
        const double fluid = overlap_fluid(model, row.tau, T, o.step).expected_overlap;
        const double adjusted = overlap_adjusted(model, row.tau, T, o.step).expected_overlap;
        auto agg = run_replications(model, sim_config(o, row.tau, T));
        csv << row.alpha << ',' << row.beta << ",0.8," << row.tau << ','
            << format_full(fluid) << ',' << format_full(adjusted) << ','
            << format_full(agg.mean) << ',' << format_full(std::sqrt(agg.variance)) << ','
            << pct1(fluid, agg.mean) << ',' << pct1(adjusted, agg.mean) << '\n';
        char line[160];
        std::snprintf(line, sizeof(line),
                      "%4.1f %4.1f %3.1f %3.0f | %8.2f (%s%%) | %8.2f (%s%%) | %8.2f (%.2f)\n",
                      row.alpha, row.beta, 0.8, row.tau, fluid, pct1(fluid, agg.mean).c_str(),
                      adjusted, pct1(adjusted, agg.mean).c_str(), agg.mean,
                      std::sqrt(agg.variance));
        text << line;
    }
    write_atomic(fs::path(o.out_dir) / "table1.csv", csv.str());
    std::cout << (o.format == "text" ? text.str() : csv.str());
    return 0;
}

int run_table2(const CommonOpts& o) {
    const std::vector<double> taus = o.taus.empty() ? std::vector<double>{3, 5, 7, 9} : o.taus;
    const double tau_max = *std::max_element(taus.begin(), taus.end());
    const double T = o.horizon > 0.0 ? o.horizon : tau_max + 20.0;
    QueueModel model(QueueModel::kInfiniteServers, kInfModel.mu, kInfModel.rate(), 0.0);
    std::ostringstream csv, text;
    csv << "tau,analytical,numerical,sim_mean,sim_sd\n";
    text << "tau | analytical | numerical | simulation\n";
    for (double tau : taus) {
        const double analytical = closed_form_overlap(kInfModel, tau);
        const double numerical = numeric_overlap_inf(kInfModel, tau, o.step);
        auto agg = run_replications(model, sim_config(o, tau, T));
        csv << tau << ',' << format_full(analytical) << ',' << format_full(numerical) << ','
            << format_full(agg.mean) << ',' << format_full(std::sqrt(agg.variance)) << '\n';
        char line[120];
        std::snprintf(line, sizeof(line), "%3.0f | %10.2f | %9.2f | %10.2f\n", tau, analytical,
                      numerical, agg.mean);
        text << line;
    }
    write_atomic(fs::path(o.out_dir) / "table2.csv", csv.str());
    std::cout << (o.format == "text" ? text.str() : csv.str());
    return 0;
}

std::vector<double> time_grid(double end, double step) {
    std::vector<double> ts;
    for (double t = 0.0; t <= end + 1e-12; t += step) ts.push_back(t);
    return ts;
}

int run_figure(const CommonOpts& o, int id) {
    const double T = o.horizon > 0.0 ? o.horizon : 10.0;
    if (id == 1 || id == 2) {
        auto model = figure1_model();
        auto times = time_grid(T, 0.05);
        auto mp = simulate_mean_path(model, sim_config(o, T / 2, T + 1e-9), times);
        auto fluid = solve_fluid(model, T, o.step);
        std::ostringstream csv;
        csv << (id == 1 ? "t,sim_mean,fluid\n" : "t,sim_mean,fluid,adjusted\n");
        if (id == 1) {
            for (std::size_t i = 0; i < times.size(); ++i)
                csv << format_full(times[i]) << ',' << format_full(mp.mean[i]) << ','
                    << format_full(fluid.at("x", times[i])) << '\n';
        } else {
            auto adj = solve_adjusted(model, T, o.step);
            for (std::size_t i = 0; i < times.size(); ++i)
                csv << format_full(times[i]) << ',' << format_full(mp.mean[i]) << ','
                    << format_full(fluid.at("x", times[i])) << ','
                    << format_full(adj.at("x", times[i])) << '\n';
        }
        write_atomic(fs::path(o.out_dir) / ("figure" + std::to_string(id) + ".csv"), csv.str());
        return 0;
    }
    if (id == 3) {
        const std::vector<double> taus = o.taus.empty() ? std::vector<double>{3, 5, 7, 9} : o.taus;
        auto model = table1_model(0.5, 0.5);
        for (double tau : taus) {
            const double horizon = o.horizon > 0.0 ? o.horizon : tau + 20.0;
            auto samples = run_replication_samples(model, sim_config(o, tau, horizon));
            std::vector<double> overlaps(samples.size());
            for (std::size_t i = 0; i < samples.size(); ++i) overlaps[i] = samples[i].overlap;
            auto h = make_histogram(overlaps);
            std::ostringstream csv;
            csv << "bin_left,bin_right,count\n";
            for (std::size_t b = 0; b < h.counts.size(); ++b)
                csv << format_full(h.edges[b]) << ',' << format_full(h.edges[b + 1]) << ','
                    << h.counts[b] << '\n';
            std::ostringstream name;
            name << "figure3_tau" << tau << ".csv";
            write_atomic(fs::path(o.out_dir) / name.str(), csv.str());
        }
        return 0;
    }
    if (id == 4) {
        QueueModel model(QueueModel::kInfiniteServers, kInfModel.mu, kInfModel.rate(), 0.0);
        auto times = time_grid(T, 0.05);
        auto mp = simulate_mean_path(model, sim_config(o, T / 2, T + 1e-9), times);
        auto numeric = solve_fluid_inf(kInfModel, T, o.step);
        std::ostringstream csv;
        csv << "t,analytical,numerical,sim_mean\n";
        for (std::size_t i = 0; i < times.size(); ++i)
            csv << format_full(times[i]) << ',' << format_full(closed_form_x(kInfModel, times[i]))
                << ',' << format_full(numeric.at("x", times[i])) << ','
                << format_full(mp.mean[i]) << '\n';
        write_atomic(fs::path(o.out_dir) / "figure4.csv", csv.str());
        return 0;
    }
    throw config_error("figure id must be 1, 2, 3, or 4");
}

int run_converge(const CommonOpts& o, std::vector<unsigned> etas) {
    if (etas.empty()) etas = {1, 4, 16};
    const double T = o.horizon > 0.0 ? o.horizon : 10.0;
    auto model = o.config_path.empty() ? figure1_model() : load_model(o.config_path);
    auto fluid = solve_fluid(model, T, o.step);
    const double tau = o.taus.empty() ? T / 2 : o.taus.front();
    std::ostringstream csv;
    csv << "eta,mean_sup_error,mean_first_passage\n";
    for (unsigned eta : etas) {
        auto cfg = sim_config(o, tau, T + 1e-9);
        cfg.eta = eta;
        auto report = simulate_accelerated(model, cfg, fluid);
        csv << eta << ',' << format_full(report.mean_sup_error) << ','
            << format_full(report.mean_first_passage) << '\n';
    }
    write_atomic(fs::path(o.out_dir) / "converge.csv", csv.str());
    std::cout << csv.str();
    return 0;
}

int run_overlap(const CommonOpts& o, const std::vector<std::string>& methods,
                const std::string& raw_path) {
    if (o.config_path.empty()) throw config_error("overlap: --config is required");
    if (o.taus.empty()) throw config_error("overlap: at least one --tau is required");
    auto model = load_model(o.config_path);
    const double tau_max = *std::max_element(o.taus.begin(), o.taus.end());
    const double T = o.horizon > 0.0 ? o.horizon : tau_max + 20.0 / model.service_rate();

    const bool inf_sinusoidal = model.infinite_servers() &&
                                model.arrival().kind() == RateFunction::Kind::sinusoidal;
    SinusoidalInfModel inf_model{};
    if (inf_sinusoidal) {
        const auto& s = model.arrival().sinusoidal_params();
        inf_model = {s.frequency, s.amplitude * s.n_scale * s.rho,
                     s.baseline * s.n_scale * s.rho, model.service_rate()};
    }

    std::ostringstream csv, text;
    csv << "tau,method,value,stderr,samples\n";
    text << "  tau | method      | value (stderr)\n";
    auto text_row = [&text](double tau, const char* method, double value, double se, bool has_se) {
        char line[96];
        if (has_se)
            std::snprintf(line, sizeof(line), "%5.2f | %-11s | %10.4f (%.4f)\n", tau, method, value, se);
        else
            std::snprintf(line, sizeof(line), "%5.2f | %-11s | %10.4f\n", tau, method, value);
        text << line;
    };
    for (double tau : o.taus) {
        for (const auto& method : methods) {
            if (method == "fluid") {
                const double v = overlap_fluid(model, tau, T, o.step).expected_overlap;
                csv << tau << ",fluid," << format_full(v) << ",,\n";
                text_row(tau, "fluid", v, 0, false);
            } else if (method == "adjusted") {
                const double v = overlap_adjusted(model, tau, T, o.step).expected_overlap;
                csv << tau << ",adjusted," << format_full(v) << ",,\n";
                text_row(tau, "adjusted", v, 0, false);
            } else if (method == "simulation") {
                auto samples = run_replication_samples(model, sim_config(o, tau, T));
                auto agg = aggregate(samples);
                csv << tau << ",simulation," << format_full(agg.mean) << ','
                    << format_full(agg.stderr_) << ',' << agg.sample_count << '\n';
                text_row(tau, "simulation", agg.mean, agg.stderr_, true);
                if (!raw_path.empty()) {
                    std::ostringstream raw;
                    raw << "replication,O_tau,wait,service,X_at_tau\n";
                    for (const auto& s : samples)
                        raw << s.replication << ',' << format_full(s.overlap) << ','
                            << format_full(s.wait) << ',' << format_full(s.service) << ','
                            << s.system_size_at_tau << '\n';
                    write_atomic(raw_path, raw.str());
                }
            } else if (method == "closed-form") {
                if (!inf_sinusoidal)
                    throw config_error("closed-form requires infinite servers and a sinusoidal rate");
                const double v = closed_form_overlap(inf_model, tau);
                csv << tau << ",closed-form," << format_full(v) << ",,\n";
                text_row(tau, "closed-form", v, 0, false);
            } else if (method == "numeric-ode") {
                if (!inf_sinusoidal)
                    throw config_error("numeric-ode requires infinite servers and a sinusoidal rate");
                const double v = numeric_overlap_inf(inf_model, tau, o.step);
                csv << tau << ",numeric-ode," << format_full(v) << ",,\n";
                text_row(tau, "numeric-ode", v, 0, false);
            } else {
                throw config_error("unknown method '" + method + "'");
            }
        }
    }
    write_atomic(fs::path(o.out_dir) / "overlap.csv", csv.str());
    std::cout << (o.format == "text" ? text.str() : csv.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"overlapping-time toolkit for time-varying queues"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<std::string> methods;
    std::string raw_path;
    int figure_id = 0;
    std::vector<unsigned> etas;

    auto* overlap = app.add_subcommand("overlap", "expected overlap at given tau values");
    add_common(overlap, opts, true);
    overlap->add_option("--method", methods,
                        "methods: fluid, adjusted, simulation, closed-form, numeric-ode")
        ->delimiter(',')
        ->required();
    overlap->add_option("--raw", raw_path, "write raw simulation samples to this CSV file");

    auto* table1 = app.add_subcommand("table1", "fluid vs adjusted vs simulation (8 preset rows)");
    add_common(table1, opts, false);

    auto* table2 = app.add_subcommand("table2", "closed-form vs numeric vs simulation");
    add_common(table2, opts, false);

    auto* figure = app.add_subcommand("figure", "figure data CSVs (ids 1-4)");
    add_common(figure, opts, false);
    figure->add_option("id", figure_id, "figure id")->required();

    auto* converge = app.add_subcommand("converge", "uniform-acceleration eta sweep");
    add_common(converge, opts, true);
    converge->add_option("--eta", etas, "acceleration factors")->delimiter(',');
    converge->get_option("--reps")->default_val(100);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*overlap) return run_overlap(opts, methods, raw_path);
        if (*table1) return run_table1(opts);
        if (*table2) return run_table2(opts);
        if (*figure) return run_figure(opts, figure_id);
        if (*converge) return run_converge(opts, etas);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const horizon_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
