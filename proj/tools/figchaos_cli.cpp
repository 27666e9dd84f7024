#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "figchaos/figchaos.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

struct CommonOpts {
    std::uint64_t seed = 42;
    std::string config_path;
    std::string out_dir = "out";
};

/// Registers the flag trio shared by every subcommand.
void add_common(CLI::App *cmd, CommonOpts &opts)
{
    cmd->add_option("--seed", opts.seed, "base RNG seed");
    cmd->add_option("--config", opts.config_path,
                    "JSON config supplying stage defaults");
    cmd->add_option("--out-dir", opts.out_dir, "output directory");
}

figchaos::RunConfig effective_config(const CommonOpts &opts)
{
    figchaos::RunConfig config;
    if (!opts.config_path.empty()) {
        config = figchaos::load_run_config(opts.config_path);
    }
    if (config.models.empty()) {
        config.models = figchaos::default_model_grid();
    }
    return config;
}

fs::path ensure_out_dir(const CommonOpts &opts)
{
    fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    return dir;
}

void print_json(const json &j)
{
    std::cout << j.dump(2) << '\n';
}

figchaos::TimeSeries load_series(const std::string &path,
                                 const std::string &column)
{
    return figchaos::ingest_series(path, column);
}

int guarded(const std::function<int()> &body)
{
    try {
        return body();
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"FIGARCH simulation and chaos-detection toolkit"};
    app.require_subcommand(1);

    // ---- simulate -------------------------------------------------------
    auto *simulate = app.add_subcommand(
        "simulate", "simulate a FIGARCH path and write it as CSV");
    CommonOpts sim_common;
    add_common(simulate, sim_common);
    double sim_d = 0.5, sim_omega = 0.01;
    std::vector<double> sim_phi{0.01}, sim_beta{0.01};
    std::size_t sim_n = 4096, sim_burn = 2000, sim_trunc = 1000;
    std::string sim_out = "series.csv";
    simulate->add_option("--d", sim_d, "fractional order");
    simulate->add_option("--omega", sim_omega, "variance level");
    simulate->add_option("--phi", sim_phi, "phi coefficients")
        ->expected(0, -1);
    simulate->add_option("--beta", sim_beta, "beta coefficients")
        ->expected(0, -1);
    simulate->add_option("--n", sim_n, "points kept after burn-in");
    simulate->add_option("--burn-in", sim_burn, "discarded warmup steps");
    simulate->add_option("--truncation", sim_trunc, "ARCH(inf) lags kept");
    simulate->add_option("--out", sim_out, "series file name");
    simulate->callback([&] {
        std::exit(guarded([&] {
            figchaos::FigarchParams params;
            params.d = sim_d;
            params.omega = sim_omega;
            params.phi = sim_phi;
            params.beta = sim_beta;
            params.p = static_cast<int>(sim_phi.size());
            params.q = static_cast<int>(sim_beta.size());
            figchaos::SimConfig config;
            config.n_points = sim_n;
            config.burn_in = sim_burn;
            config.truncation = sim_trunc;
            config.seed = sim_common.seed;
            const auto series = figchaos::simulate(params, config);
            const auto dir = ensure_out_dir(sim_common);
            figchaos::write_series(dir / sim_out, series);
            print_json({{"written", (dir / sim_out).string()},
                        {"n", series.size()},
                        {"seed", config.seed}});
            return 0;
        }));
    });

    // ---- mi -------------------------------------------------------------
    auto *mi = app.add_subcommand(
        "mi", "mutual-information curve and first-minimum delay");
    CommonOpts mi_common;
    add_common(mi, mi_common);
    std::string mi_input, mi_column;
    std::size_t mi_max_lag = 0, mi_bins = 0;
    mi->add_option("--input", mi_input, "series CSV")->required();
    mi->add_option("--column", mi_column, "column name or index");
    mi->add_option("--max-lag", mi_max_lag, "largest lag scanned");
    mi->add_option("--bins", mi_bins, "histogram bins per axis");
    mi->callback([&] {
        std::exit(guarded([&] {
            const auto defaults = effective_config(mi_common).mi;
            const std::size_t max_lag =
                mi_max_lag ? mi_max_lag : defaults.max_lag;
            const std::size_t bins = mi_bins ? mi_bins : defaults.bins;
            const auto series = load_series(mi_input, mi_column);
            const auto curve = figchaos::mi_curve(series, max_lag, bins);
            const auto minimum = figchaos::first_minimum(curve);
            const auto dir = ensure_out_dir(mi_common);
            std::vector<double> lags(curve.lags.begin(), curve.lags.end());
            figchaos::write_table(dir / "mi.csv", {"lag", "bits"},
                                  {lags, curve.bits});
            print_json({{"delay", minimum.lag},
                        {"clear", minimum.clear},
                        {"bins", bins},
                        {"curve", (dir / "mi.csv").string()}});
            return 0;
        }));
    });

    // ---- fnn ------------------------------------------------------------
    auto *fnn = app.add_subcommand(
        "fnn", "false-nearest-neighbor fractions and minimum dimension");
    CommonOpts fnn_common;
    add_common(fnn, fnn_common);
    std::string fnn_input, fnn_column;
    std::size_t fnn_delay = 0, fnn_m_max = 0;
    double fnn_r_tol = 0.0, fnn_a_tol = 0.0, fnn_drop = 0.0;
    fnn->add_option("--input", fnn_input, "series CSV")->required();
    fnn->add_option("--column", fnn_column, "column name or index");
    fnn->add_option("--delay", fnn_delay, "embedding delay")->required();
    fnn->add_option("--m-max", fnn_m_max, "largest dimension tested");
    fnn->add_option("--r-tol", fnn_r_tol, "distance-ratio threshold");
    fnn->add_option("--a-tol", fnn_a_tol, "attractor-size threshold");
    fnn->add_option("--drop", fnn_drop, "acceptable false-neighbor fraction");
    fnn->callback([&] {
        std::exit(guarded([&] {
            const auto defaults = effective_config(fnn_common).fnn;
            figchaos::FnnOptions options;
            options.m_max = fnn_m_max ? fnn_m_max : defaults.m_max;
            options.r_tol = fnn_r_tol > 0.0 ? fnn_r_tol : defaults.r_tol;
            options.a_tol = fnn_a_tol > 0.0 ? fnn_a_tol : defaults.a_tol;
            const double drop = fnn_drop > 0.0 ? fnn_drop : defaults.drop;
            const auto series = load_series(fnn_input, fnn_column);
            const auto curve =
                figchaos::fnn_fractions(series, fnn_delay, options);
            const auto minimum = figchaos::min_embedding_dim(curve, drop);
            const auto dir = ensure_out_dir(fnn_common);
            std::vector<double> dims(curve.dimensions.begin(),
                                     curve.dimensions.end());
            std::vector<double> testable(curve.testable.begin(),
                                         curve.testable.end());
            std::vector<double> duplicates(curve.duplicates.begin(),
                                           curve.duplicates.end());
            figchaos::write_table(
                dir / "fnn.csv",
                {"dimension", "fraction", "testable", "duplicates"},
                {dims, curve.fractions, testable, duplicates});
            print_json({{"dimension", minimum.dimension},
                        {"unfolded", minimum.unfolded},
                        {"curve", (dir / "fnn.csv").string()}});
            return 0;
        }));
    });

    // ---- corrdim --------------------------------------------------------
    auto *corrdim = app.add_subcommand(
        "corrdim", "correlation-dimension scan over delays and dimensions");
    CommonOpts cd_common;
    add_common(corrdim, cd_common);
    std::string cd_input, cd_column;
    std::vector<std::size_t> cd_delays{1};
    std::size_t cd_m_max = 0, cd_n_radii = 0;
    long long cd_theiler = -1;
    double cd_plateau_tol = 0.0;
    corrdim->add_option("--input", cd_input, "series CSV")->required();
    corrdim->add_option("--column", cd_column, "column name or index");
    corrdim->add_option("--delay", cd_delays, "delays scanned")
        ->expected(0, -1);
    corrdim->add_option("--m-max", cd_m_max, "largest dimension scanned");
    corrdim->add_option("--n-radii", cd_n_radii, "radii per curve");
    corrdim->add_option("--theiler", cd_theiler,
                        "temporal exclusion window (default: the delay)");
    corrdim->add_option("--plateau-tol", cd_plateau_tol,
                        "successive-estimate settling tolerance");
    corrdim->callback([&] {
        std::exit(guarded([&] {
            const auto defaults = effective_config(cd_common).scan;
            const std::size_t m_max = cd_m_max ? cd_m_max : defaults.m_max;
            figchaos::ScanOptions options;
            options.n_radii = cd_n_radii ? cd_n_radii : defaults.n_radii;
            options.plateau_tol = cd_plateau_tol > 0.0 ? cd_plateau_tol
                                                       : defaults.plateau_tol;
            const auto series = load_series(cd_input, cd_column);
            std::vector<std::size_t> dims(m_max);
            for (std::size_t m = 1; m <= m_max; ++m) {
                dims[m - 1] = m;
            }
            const auto dir = ensure_out_dir(cd_common);
            std::ofstream out(dir / "corrdim.csv");
            if (!out) {
                throw std::runtime_error("cannot open corrdim.csv");
            }
            out << "delay,dimension,estimate,r_squared,fit_lo,fit_hi,"
                   "stable_window,converged,error\n";
            json plateau = json::array();
            for (std::size_t delay : cd_delays) {
                options.theiler = cd_theiler >= 0
                                      ? static_cast<std::size_t>(cd_theiler)
                                      : delay;
                const std::size_t one_delay[] = {delay};
                const auto scan = figchaos::dimension_scan(
                    series.values, one_delay, dims, options);
                plateau.push_back(
                    {{"delay", delay}, {"plateau", scan.plateau.at(0)}});
                for (std::size_t j = 0; j < dims.size(); ++j) {
                    out << delay << ',' << dims[j] << ',';
                    if (const auto &cell = scan.cell(0, j)) {
                        out << figchaos::detail::format_double(cell->value)
                            << ','
                            << figchaos::detail::format_double(
                                   cell->r_squared)
                            << ','
                            << figchaos::detail::format_double(cell->fit_lo)
                            << ','
                            << figchaos::detail::format_double(cell->fit_hi)
                            << ',' << (cell->stable_window ? 1 : 0) << ','
                            << (cell->converged ? 1 : 0) << ',';
                    } else {
                        out << ",,,,,,"
                            << scan.errors[j];
                    }
                    out << '\n';
                }
            }
            print_json({{"plateau", plateau},
                        {"scan", (dir / "corrdim.csv").string()}});
            return 0;
        }));
    });

    // ---- lyap-wolf ------------------------------------------------------
    auto *wolf = app.add_subcommand(
        "lyap-wolf", "Wolf trajectory-following Lyapunov estimate");
    CommonOpts wolf_common;
    add_common(wolf, wolf_common);
    std::string wolf_input, wolf_column;
    std::size_t wolf_delay = 0, wolf_dim = 0, wolf_t_evolv = 0;
    wolf->add_option("--input", wolf_input, "series CSV")->required();
    wolf->add_option("--column", wolf_column, "column name or index");
    wolf->add_option("--delay", wolf_delay, "embedding delay")->required();
    wolf->add_option("--dim", wolf_dim, "embedding dimension")->required();
    wolf->add_option("--t-evolv", wolf_t_evolv, "steps per evolution leg");
    wolf->callback([&] {
        std::exit(guarded([&] {
            const auto defaults = effective_config(wolf_common).wolf;
            const auto series = load_series(wolf_input, wolf_column);
            const double size = figchaos::sample_stddev(series.values);
            const auto embedded =
                figchaos::embed(series, {wolf_delay, wolf_dim});
            const figchaos::NeighborIndex index(embedded);
            auto options = figchaos::wolf_defaults(size, wolf_delay);
            if (wolf_t_evolv > 0) {
                options.t_evolv = wolf_t_evolv;
            } else if (defaults.t_evolv > 0) {
                options.t_evolv = defaults.t_evolv;
            }
            options.theta_max_deg = defaults.theta_max_deg;
            const double scale =
                size * std::sqrt(static_cast<double>(wolf_dim));
            options.eps_min = defaults.eps_min_frac * scale;
            options.eps_max = defaults.eps_max_frac * scale;
            options.min_replacements = defaults.min_replacements;
            const auto estimate = figchaos::wolf_mle(index, options);
            print_json(figchaos::detail::lyap_json(estimate));
            return 0;
        }));
    });

    // ---- lyap-kantz -----------------------------------------------------
    auto *kantz = app.add_subcommand(
        "lyap-kantz", "Kantz neighborhood-growth Lyapunov estimate");
    CommonOpts kantz_common;
    add_common(kantz, kantz_common);
    std::string kantz_input, kantz_column;
    std::size_t kantz_delay = 0, kantz_dim = 0, kantz_t_max = 0;
    double kantz_eps = 0.0;
    kantz->add_option("--input", kantz_input, "series CSV")->required();
    kantz->add_option("--column", kantz_column, "column name or index");
    kantz->add_option("--delay", kantz_delay, "embedding delay")->required();
    kantz->add_option("--dim", kantz_dim, "embedding dimension")->required();
    kantz->add_option("--epsilon", kantz_eps,
                      "neighborhood radius (absolute)");
    kantz->add_option("--t-max", kantz_t_max, "largest horizon");
    kantz->callback([&] {
        std::exit(guarded([&] {
            const auto defaults = effective_config(kantz_common).kantz;
            const auto series = load_series(kantz_input, kantz_column);
            const double size = figchaos::sample_stddev(series.values);
            const auto embedded =
                figchaos::embed(series, {kantz_delay, kantz_dim});
            const figchaos::NeighborIndex index(embedded);
            figchaos::KantzOptions options;
            const double scale =
                size * std::sqrt(static_cast<double>(kantz_dim));
            options.epsilon =
                kantz_eps > 0.0 ? kantz_eps : defaults.eps_frac * scale;
            options.t_max = kantz_t_max ? kantz_t_max : defaults.t_max;
            options.theiler = kantz_delay;
            options.min_neighbors = defaults.min_neighbors;
            const auto curve = figchaos::kantz_curve(index, options);
            const auto estimate = figchaos::kantz_mle(curve, defaults.fit_lo,
                                                      defaults.fit_hi);
            const auto dir = ensure_out_dir(kantz_common);
            figchaos::write_curve(dir / "kantz.csv", "t", "S", curve.s);
            auto j = figchaos::detail::lyap_json(estimate);
            j["curve"] = (dir / "kantz.csv").string();
            print_json(j);
            return 0;
        }));
    });

    // ---- lyap-map -------------------------------------------------------
    auto *map = app.add_subcommand(
        "lyap-map", "direct two-trajectory exponent of the volatility map");
    CommonOpts map_common;
    add_common(map, map_common);
    double map_d = 0.5, map_omega = 0.01, map_d0 = 0.0;
    std::vector<double> map_phi{0.01}, map_beta{0.01};
    std::size_t map_burn = 2000, map_trunc = 1000, map_iter = 0;
    map->add_option("--d", map_d, "fractional order");
    map->add_option("--omega", map_omega, "variance level");
    map->add_option("--phi", map_phi, "phi coefficients")->expected(0, -1);
    map->add_option("--beta", map_beta, "beta coefficients")->expected(0, -1);
    map->add_option("--burn-in", map_burn, "warmup steps");
    map->add_option("--truncation", map_trunc, "ARCH(inf) lags kept");
    map->add_option("--d0", map_d0, "initial separation");
    map->add_option("--n-iter", map_iter, "averaging steps");
    map->callback([&] {
        std::exit(guarded([&] {
            const auto defaults = effective_config(map_common).map;
            figchaos::FigarchParams params;
            params.d = map_d;
            params.omega = map_omega;
            params.phi = map_phi;
            params.beta = map_beta;
            params.p = static_cast<int>(map_phi.size());
            params.q = static_cast<int>(map_beta.size());
            figchaos::SimConfig config;
            config.burn_in = map_burn;
            config.truncation = map_trunc;
            config.seed = map_common.seed;
            const double d0 = map_d0 > 0.0 ? map_d0 : defaults.d0;
            const std::size_t n_iter = map_iter ? map_iter : defaults.n_iter;
            const auto estimate =
                figchaos::direct_map_lle(params, config, d0, n_iter);
            print_json(figchaos::detail::lyap_json(estimate));
            return 0;
        }));
    });

    // ---- pipeline -------------------------------------------------------
    auto *pipeline = app.add_subcommand(
        "pipeline", "config-driven end-to-end suite with report and tables");
    CommonOpts pipe_common;
    add_common(pipeline, pipe_common);
    std::size_t pipe_replicates = 0;
    pipeline->add_option("--replicates", pipe_replicates,
                         "replicates per simulated model");
    pipeline->callback([&] {
        std::exit(guarded([&] {
            auto config = effective_config(pipe_common);
            if (pipeline->count("--seed") > 0) {
                config.seed = pipe_common.seed;
            }
            if (pipeline->count("--out-dir") > 0 ||
                pipe_common.config_path.empty()) {
                config.out_dir = pipe_common.out_dir;
            }
            if (pipe_replicates > 0) {
                config.replicates = pipe_replicates;
            }
            const auto report = figchaos::run_pipeline(config);
            print_json({{"report",
                         (fs::path(config.out_dir) / "report.json").string()},
                        {"config_hash", report.hash},
                        {"records", report.records.size()},
                        {"errors", report.error_count}});
            if (report.error_count > 0) {
                for (const auto &record : report.records) {
                    for (const auto &error : record.errors) {
                        std::cerr << record.model_name << " replicate "
                                  << record.replicate << ": " << error << '\n';
                    }
                }
                return 1;
            }
            return 0;
        }));
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}
