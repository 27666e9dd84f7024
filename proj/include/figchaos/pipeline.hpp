#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "figchaos/corr_dim.hpp"
#include "figchaos/csv.hpp"
#include "figchaos/embedding.hpp"
#include "figchaos/figarch.hpp"
#include "figchaos/fnn.hpp"
#include "figchaos/lyapunov.hpp"
#include "figchaos/mutual_info.hpp"
#include "figchaos/neighbors.hpp"
#include "figchaos/rng.hpp"
#include "figchaos/stats.hpp"
#include "figchaos/types.hpp"

namespace figchaos
{

constexpr const char *kArtifactVersion = "0.1.0";

/// One suite entry: either a FIGARCH parameter set to simulate or an
/// external series file to ingest.
struct ModelSpec {
    std::string name;
    std::optional<FigarchParams> params;
    std::string series_path;    // used when params is empty
    std::string series_column;  // header name or 0-based index; "" = first
};

struct MiStageConfig {
    std::size_t max_lag = 20;
    std::size_t bins = 64;
};

struct FnnStageConfig {
    std::size_t m_max = 10;
    double r_tol = 15.0;
    double a_tol = 2.0;
    double drop = 0.01;
};

struct ScanStageConfig {
    std::size_t m_max = 10;
    std::size_t n_radii = 32;
    std::size_t theiler = 0;
    double plateau_tol = 0.2;
};

struct WolfStageConfig {
    std::size_t t_evolv = 0;  // 0: use the embedding delay
    double theta_max_deg = 30.0;
    // Fractions of the embedded-cloud scale A*sqrt(m): per-coordinate spread
    // grows with dimension, so raw-series fractions starve high-m searches.
    double eps_min_frac = 1e-3;
    double eps_max_frac = 0.5;
    std::size_t min_replacements = 50;
};

struct KantzStageConfig {
    double eps_frac = 0.5;  // of the embedded-cloud scale A*sqrt(m)
    std::size_t t_max = 15;
    std::size_t min_neighbors = 5;
    double fit_lo = 1.0;
    double fit_hi = 6.0;
};

struct MapStageConfig {
    double d0 = 1e-8;
    std::size_t n_iter = 5000;
};

struct RunConfig {
    std::uint64_t seed = 42;
    std::size_t replicates = 5;
    std::string out_dir = "out";
    bool export_series = true;
    SimConfig sim;
    std::vector<ModelSpec> models;  // empty: default FIGARCH grid
    MiStageConfig mi;
    FnnStageConfig fnn;
    ScanStageConfig scan;
    WolfStageConfig wolf;
    KantzStageConfig kantz;
    MapStageConfig map;
};

/// The ten-model FIGARCH(1, d, 1) grid with omega = phi_1 = beta_1 = 0.01.
inline std::vector<ModelSpec> default_model_grid()
{
    std::vector<ModelSpec> models;
    for (double d : {0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.8, 0.9}) {
        FigarchParams params;
        params.p = 1;
        params.q = 1;
        params.d = d;
        params.omega = 0.01;
        params.phi = {0.01};
        params.beta = {0.01};
        ModelSpec spec;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "figarch_d%.2f", d);
        spec.name = buf;
        spec.params = params;
        models.push_back(std::move(spec));
    }
    return models;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace detail
{

template <typename T>
T field_or(const nlohmann::json &j, const char *key, T fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument(std::string("config field '") + key +
                                    "': " + e.what());
    }
}

inline ModelSpec parse_model(const nlohmann::json &j, std::size_t index)
{
    require(j.is_object(), "models[] entries must be objects");
    ModelSpec spec;
    if (j.contains("series")) {
        spec.series_path = j.at("series").get<std::string>();
        spec.series_column = field_or<std::string>(j, "column", "");
        spec.name = field_or<std::string>(j, "name",
                                          "external_" + std::to_string(index));
        return spec;
    }
    FigarchParams params;
    params.d = field_or<double>(j, "d", 0.0);
    params.omega = field_or<double>(j, "omega", 0.01);
    params.phi = field_or<std::vector<double>>(j, "phi", {});
    params.beta = field_or<std::vector<double>>(j, "beta", {});
    params.p = static_cast<int>(params.phi.size());
    params.q = static_cast<int>(params.beta.size());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "figarch_d%.2f", params.d);
    spec.name = field_or<std::string>(j, "name", buf);
    spec.params = std::move(params);
    return spec;
}

} // namespace detail

inline RunConfig parse_run_config(const nlohmann::json &j)
{
    require(j.is_object(), "config root must be a JSON object");
    RunConfig config;
    config.seed = detail::field_or<std::uint64_t>(j, "seed", config.seed);
    config.replicates =
        detail::field_or<std::size_t>(j, "replicates", config.replicates);
    require(config.replicates >= 1, "replicates must be >= 1");
    config.out_dir =
        detail::field_or<std::string>(j, "out_dir", config.out_dir);
    config.export_series =
        detail::field_or<bool>(j, "export_series", config.export_series);

    if (j.contains("sim")) {
        const auto &s = j.at("sim");
        config.sim.n_points =
            detail::field_or<std::size_t>(s, "n_points", config.sim.n_points);
        config.sim.burn_in =
            detail::field_or<std::size_t>(s, "burn_in", config.sim.burn_in);
        config.sim.truncation = detail::field_or<std::size_t>(
            s, "truncation", config.sim.truncation);
        config.sim.variance_ceiling = detail::field_or<double>(
            s, "variance_ceiling", config.sim.variance_ceiling);
    }
    if (j.contains("models")) {
        const auto &models = j.at("models");
        require(models.is_array() && !models.empty(),
                "models must be a non-empty array");
        for (std::size_t i = 0; i < models.size(); ++i) {
            config.models.push_back(detail::parse_model(models[i], i));
        }
    }
    if (j.contains("mi")) {
        const auto &s = j.at("mi");
        config.mi.max_lag =
            detail::field_or<std::size_t>(s, "max_lag", config.mi.max_lag);
        config.mi.bins = detail::field_or<std::size_t>(s, "bins", config.mi.bins);
        require(config.mi.max_lag >= 2, "mi.max_lag must be >= 2");
        require(config.mi.bins >= 2, "mi.bins must be >= 2");
    }
    if (j.contains("fnn")) {
        const auto &s = j.at("fnn");
        config.fnn.m_max =
            detail::field_or<std::size_t>(s, "m_max", config.fnn.m_max);
        config.fnn.r_tol = detail::field_or<double>(s, "r_tol", config.fnn.r_tol);
        config.fnn.a_tol = detail::field_or<double>(s, "a_tol", config.fnn.a_tol);
        config.fnn.drop = detail::field_or<double>(s, "drop", config.fnn.drop);
        require(config.fnn.m_max >= 1, "fnn.m_max must be >= 1");
        require(config.fnn.r_tol > 0.0 && config.fnn.a_tol > 0.0,
                "fnn tolerances must be positive");
        require(config.fnn.drop > 0.0 && config.fnn.drop < 1.0,
                "fnn.drop must lie in (0, 1)");
    }
    if (j.contains("corrdim")) {
        const auto &s = j.at("corrdim");
        config.scan.m_max =
            detail::field_or<std::size_t>(s, "m_max", config.scan.m_max);
        config.scan.n_radii =
            detail::field_or<std::size_t>(s, "n_radii", config.scan.n_radii);
        config.scan.theiler =
            detail::field_or<std::size_t>(s, "theiler", config.scan.theiler);
        config.scan.plateau_tol = detail::field_or<double>(
            s, "plateau_tol", config.scan.plateau_tol);
        require(config.scan.m_max >= 1, "corrdim.m_max must be >= 1");
        require(config.scan.n_radii >= 2, "corrdim.n_radii must be >= 2");
        require(config.scan.plateau_tol > 0.0,
                "corrdim.plateau_tol must be positive");
    }
    if (j.contains("wolf")) {
        const auto &s = j.at("wolf");
        config.wolf.t_evolv =
            detail::field_or<std::size_t>(s, "t_evolv", config.wolf.t_evolv);
        config.wolf.theta_max_deg = detail::field_or<double>(
            s, "theta_max_deg", config.wolf.theta_max_deg);
        config.wolf.eps_min_frac = detail::field_or<double>(
            s, "eps_min_frac", config.wolf.eps_min_frac);
        config.wolf.eps_max_frac = detail::field_or<double>(
            s, "eps_max_frac", config.wolf.eps_max_frac);
        config.wolf.min_replacements = detail::field_or<std::size_t>(
            s, "min_replacements", config.wolf.min_replacements);
        require(config.wolf.eps_min_frac >= 0.0 &&
                    config.wolf.eps_max_frac > config.wolf.eps_min_frac,
                "wolf scale fractions must satisfy 0 <= min < max");
    }
    if (j.contains("kantz")) {
        const auto &s = j.at("kantz");
        config.kantz.eps_frac =
            detail::field_or<double>(s, "eps_frac", config.kantz.eps_frac);
        config.kantz.t_max =
            detail::field_or<std::size_t>(s, "t_max", config.kantz.t_max);
        config.kantz.min_neighbors = detail::field_or<std::size_t>(
            s, "min_neighbors", config.kantz.min_neighbors);
        config.kantz.fit_lo =
            detail::field_or<double>(s, "fit_lo", config.kantz.fit_lo);
        config.kantz.fit_hi =
            detail::field_or<double>(s, "fit_hi", config.kantz.fit_hi);
        require(config.kantz.eps_frac > 0.0, "kantz.eps_frac must be positive");
        require(config.kantz.t_max >= 1, "kantz.t_max must be >= 1");
        require(config.kantz.fit_hi > config.kantz.fit_lo,
                "kantz fit range must be non-empty");
    }
    if (j.contains("map")) {
        const auto &s = j.at("map");
        config.map.d0 = detail::field_or<double>(s, "d0", config.map.d0);
        config.map.n_iter =
            detail::field_or<std::size_t>(s, "n_iter", config.map.n_iter);
        require(config.map.d0 > 0.0, "map.d0 must be positive");
        require(config.map.n_iter >= 1, "map.n_iter must be >= 1");
    }
    if (config.models.empty()) {
        config.models = default_model_grid();
    }
    return config;
}

inline RunConfig load_run_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error &e) {
        throw std::invalid_argument("config parse error in " + path.string() +
                                    ": " + e.what());
    }
    return parse_run_config(j);
}

/// Every default materialized, so the report pins the exact settings used.
inline nlohmann::json config_json(const RunConfig &config)
{
    nlohmann::json models = nlohmann::json::array();
    for (const auto &model : config.models) {
        nlohmann::json m;
        m["name"] = model.name;
        if (model.params) {
            m["d"] = model.params->d;
            m["omega"] = model.params->omega;
            m["phi"] = model.params->phi;
            m["beta"] = model.params->beta;
        } else {
            m["series"] = model.series_path;
            m["column"] = model.series_column;
        }
        models.push_back(std::move(m));
    }
    return nlohmann::json{
        {"seed", config.seed},
        {"replicates", config.replicates},
        {"out_dir", config.out_dir},
        {"export_series", config.export_series},
        {"sim",
         {{"n_points", config.sim.n_points},
          {"burn_in", config.sim.burn_in},
          {"truncation", config.sim.truncation},
          {"variance_ceiling", config.sim.variance_ceiling}}},
        {"models", std::move(models)},
        {"mi", {{"max_lag", config.mi.max_lag}, {"bins", config.mi.bins}}},
        {"fnn",
         {{"m_max", config.fnn.m_max},
          {"r_tol", config.fnn.r_tol},
          {"a_tol", config.fnn.a_tol},
          {"drop", config.fnn.drop}}},
        {"corrdim",
         {{"m_max", config.scan.m_max},
          {"n_radii", config.scan.n_radii},
          {"theiler", config.scan.theiler},
          {"plateau_tol", config.scan.plateau_tol}}},
        {"wolf",
         {{"t_evolv", config.wolf.t_evolv},
          {"theta_max_deg", config.wolf.theta_max_deg},
          {"eps_min_frac", config.wolf.eps_min_frac},
          {"eps_max_frac", config.wolf.eps_max_frac},
          {"min_replacements", config.wolf.min_replacements}}},
        {"kantz",
         {{"eps_frac", config.kantz.eps_frac},
          {"t_max", config.kantz.t_max},
          {"min_neighbors", config.kantz.min_neighbors},
          {"fit_lo", config.kantz.fit_lo},
          {"fit_hi", config.kantz.fit_hi}}},
        {"map", {{"d0", config.map.d0}, {"n_iter", config.map.n_iter}}}};
}

inline std::string fnv1a_hex(const std::string &bytes)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

inline std::string config_hash(const RunConfig &config)
{
    return fnv1a_hex(config_json(config).dump());
}

// ---------------------------------------------------------------------------
// Records and reports
// ---------------------------------------------------------------------------

struct CellRecord {
    std::size_t model_index = 0;
    std::string model_name;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    std::optional<std::size_t> delay;
    bool delay_clear = false;
    std::optional<std::size_t> dimension;
    bool unfolded = false;
    std::optional<bool> scan_converged;
    std::optional<double> corr_dim;
    std::optional<LyapunovEstimate> wolf;
    std::optional<LyapunovEstimate> kantz;
    std::optional<LyapunovEstimate> map;
    std::vector<std::string> errors;  // "stage: message"
};

struct ModelAggregate {
    std::size_t model_index = 0;
    std::string name;
    std::optional<double> d;
    std::size_t replicates = 0;
    std::optional<std::size_t> modal_delay;
    std::optional<std::size_t> modal_dimension;
    std::size_t wolf_total = 0, wolf_positive = 0;
    std::size_t kantz_total = 0, kantz_negative = 0;
    std::size_t map_total = 0, map_negative = 0;
    std::size_t scan_total = 0, scan_converged = 0;
    std::optional<double> wolf_median;
    std::optional<double> kantz_median;
    std::optional<double> map_median;
    std::size_t error_cells = 0;
};

struct RunReport {
    std::string hash;
    nlohmann::json config;
    std::vector<CellRecord> records;
    std::vector<ModelAggregate> aggregates;
    std::size_t error_count = 0;
};

/// Reads one numeric column from a CSV file. The column spec is a header
/// name, a 0-based index, or "" for the first column.
inline TimeSeries ingest_series(const std::filesystem::path &path,
                                const std::string &column = "")
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    const std::string name = path.string();

    std::string line;
    if (!std::getline(in, line)) {
        throw CsvFormatError(name, 1, "missing header row");
    }
    const auto header = detail::split_fields(detail::strip_line(line));

    std::size_t col = 0;
    if (!column.empty()) {
        bool named = false;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == column) {
                col = c;
                named = true;
                break;
            }
        }
        if (!named) {
            try {
                std::size_t pos = 0;
                col = std::stoul(column, &pos);
                if (pos != column.size()) {
                    throw std::invalid_argument(column);
                }
            } catch (const std::exception &) {
                throw CsvFormatError(name, 1,
                                     "no column named '" + column + "'");
            }
        }
        if (col >= header.size()) {
            throw CsvFormatError(name, 1,
                                 "column index " + std::to_string(col) +
                                     " out of range, file has " +
                                     std::to_string(header.size()));
        }
    }

    TimeSeries series;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = detail::strip_line(line);
        if (line.empty()) {
            continue;
        }
        const auto fields = detail::split_fields(line);
        if (col >= fields.size()) {
            throw CsvFormatError(name, row,
                                 "missing field " + std::to_string(col));
        }
        series.values.push_back(detail::parse_double(fields[col], name, row));
    }
    if (series.values.empty()) {
        throw CsvFormatError(name, row, "no data rows");
    }
    return series;
}

// ---------------------------------------------------------------------------
// Stage driver
// ---------------------------------------------------------------------------

namespace detail
{

inline void record_error(CellRecord &record, const char *stage,
                         const std::exception &e)
{
    record.errors.push_back(std::string(stage) + ": " + e.what());
}

template <typename T>
std::optional<T> modal_value(const std::vector<T> &xs)
{
    if (xs.empty()) {
        return std::nullopt;
    }
    std::map<T, std::size_t> counts;
    for (const T &x : xs) {
        ++counts[x];
    }
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) {
            best = it;  // ties keep the smallest value
        }
    }
    return best->first;
}

inline std::optional<double> median_value(std::vector<double> xs)
{
    if (xs.empty()) {
        return std::nullopt;
    }
    return percentile(std::move(xs), 50.0);
}

} // namespace detail

/// Runs the analysis chain on one series: MI delay, FNN dimension,
/// correlation-dimension scan, then the Wolf and Kantz estimators at the
/// selected embedding. Stage failures are recorded and later stages that
/// depend on the failed output are skipped.
inline void analyze_series(const TimeSeries &series, const RunConfig &config,
                           CellRecord &record)
{
    try {
        const auto curve =
            mi_curve(series, config.mi.max_lag, config.mi.bins);
        const auto minimum = first_minimum(curve);
        record.delay = minimum.lag;
        record.delay_clear = minimum.clear;
    } catch (const std::exception &e) {
        detail::record_error(record, "mi", e);
        return;
    }
    const std::size_t delay = *record.delay;

    try {
        FnnOptions options;
        options.m_max = config.fnn.m_max;
        options.r_tol = config.fnn.r_tol;
        options.a_tol = config.fnn.a_tol;
        const auto curve = fnn_fractions(series, delay, options);
        const auto minimum = min_embedding_dim(curve, config.fnn.drop);
        record.dimension = minimum.dimension;
        record.unfolded = minimum.unfolded;
    } catch (const std::exception &e) {
        detail::record_error(record, "fnn", e);
    }

    try {
        std::vector<std::size_t> dims(config.scan.m_max);
        for (std::size_t m = 1; m <= config.scan.m_max; ++m) {
            dims[m - 1] = m;
        }
        const std::size_t delays[] = {delay};
        ScanOptions options;
        options.n_radii = config.scan.n_radii;
        options.theiler = config.scan.theiler;
        options.plateau_tol = config.scan.plateau_tol;
        const auto scan =
            dimension_scan(series.values, delays, dims, options);
        record.scan_converged = scan.plateau.at(0);
        std::size_t column = dims.size();  // last cell with an estimate
        if (record.dimension && *record.dimension <= config.scan.m_max) {
            column = *record.dimension;
        }
        for (std::size_t j = column; j >= 1; --j) {
            if (const auto &cell = scan.cell(0, j - 1)) {
                record.corr_dim = cell->value;
                break;
            }
        }
    } catch (const std::exception &e) {
        detail::record_error(record, "corrdim", e);
    }

    if (!record.dimension) {
        return;
    }
    const std::size_t m = *record.dimension;

    double attractor_size = 0.0;
    try {
        attractor_size = sample_stddev(series.values);
        if (attractor_size <= 0.0) {
            throw DegenerateSeriesError("constant series has no scale");
        }
    } catch (const std::exception &e) {
        detail::record_error(record, "scale", e);
        return;
    }

    std::optional<DelayVectors> embedded;
    try {
        embedded = embed(series, {delay, m});
    } catch (const std::exception &e) {
        detail::record_error(record, "embed", e);
        return;
    }
    const NeighborIndex index(*embedded);
    const double neighbor_scale =
        attractor_size * std::sqrt(static_cast<double>(m));

    try {
        WolfOptions options = wolf_defaults(attractor_size, delay);
        if (config.wolf.t_evolv > 0) {
            options.t_evolv = config.wolf.t_evolv;
        }
        options.theta_max_deg = config.wolf.theta_max_deg;
        options.eps_min = config.wolf.eps_min_frac * neighbor_scale;
        options.eps_max = config.wolf.eps_max_frac * neighbor_scale;
        options.min_replacements = config.wolf.min_replacements;
        for (int attempt = 0;; ++attempt) {
            try {
                record.wolf = wolf_mle(index, options);
                break;
            } catch (const NoAdmissibleNeighborError &) {
                if (attempt == 2) {
                    throw;  // bounds widened twice already
                }
                options.eps_min *= 0.5;
                options.eps_max *= 2.0;
            }
        }
    } catch (const std::exception &e) {
        detail::record_error(record, "lyap-wolf", e);
    }

    try {
        KantzOptions options;
        options.epsilon = config.kantz.eps_frac * neighbor_scale;
        options.t_max = config.kantz.t_max;
        options.theiler = delay;
        options.min_neighbors = config.kantz.min_neighbors;
        for (int attempt = 0;; ++attempt) {
            try {
                const auto curve = kantz_curve(index, options);
                record.kantz =
                    kantz_mle(curve, config.kantz.fit_lo, config.kantz.fit_hi);
                break;
            } catch (const NoAdmissibleNeighborError &) {
                if (attempt == 3) {
                    throw;  // radius doubled three times already
                }
                options.epsilon *= 2.0;
            }
        }
    } catch (const std::exception &e) {
        detail::record_error(record, "lyap-kantz", e);
    }
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

namespace detail
{

inline nlohmann::json lyap_json(const LyapunovEstimate &estimate)
{
    nlohmann::json j;
    j["value"] = estimate.value;
    j["method"] = to_string(estimate.method);
    if (const auto *w = std::get_if<WolfDiagnostics>(&estimate.diagnostics)) {
        j["replacements"] = w->replacements;
        j["fallbacks"] = w->fallbacks;
        j["skipped_legs"] = w->skipped_legs;
        j["t_evolv"] = w->t_evolv;
        j["enough_replacements"] = w->enough_replacements;
    } else if (const auto *k =
                   std::get_if<KantzDiagnostics>(&estimate.diagnostics)) {
        j["fit_lo"] = k->fit_lo;
        j["fit_hi"] = k->fit_hi;
        j["r_squared"] = k->r_squared;
        j["fit_points"] = k->fit_points;
        j["references"] = k->references;
    } else if (const auto *m =
                   std::get_if<MapDiagnostics>(&estimate.diagnostics)) {
        j["iterations"] = m->iterations;
        j["d0"] = m->d0;
        j["floor_hits"] = m->floor_hits;
    }
    return j;
}

inline nlohmann::json record_json(const CellRecord &record)
{
    nlohmann::json j;
    j["model"] = record.model_index;
    j["model_name"] = record.model_name;
    j["replicate"] = record.replicate;
    j["seed"] = record.seed;
    j["delay"] = record.delay ? nlohmann::json(*record.delay)
                              : nlohmann::json(nullptr);
    j["delay_clear"] = record.delay_clear;
    j["dimension"] = record.dimension ? nlohmann::json(*record.dimension)
                                      : nlohmann::json(nullptr);
    j["unfolded"] = record.unfolded;
    j["scan_converged"] = record.scan_converged
                              ? nlohmann::json(*record.scan_converged)
                              : nlohmann::json(nullptr);
    j["corr_dim"] = record.corr_dim ? nlohmann::json(*record.corr_dim)
                                    : nlohmann::json(nullptr);
    j["wolf"] = record.wolf ? lyap_json(*record.wolf)
                            : nlohmann::json(nullptr);
    j["kantz"] = record.kantz ? lyap_json(*record.kantz)
                              : nlohmann::json(nullptr);
    j["map"] = record.map ? lyap_json(*record.map) : nlohmann::json(nullptr);
    j["errors"] = record.errors;
    return j;
}

inline nlohmann::json aggregate_json(const ModelAggregate &a)
{
    nlohmann::json j;
    j["model"] = a.model_index;
    j["name"] = a.name;
    j["d"] = a.d ? nlohmann::json(*a.d) : nlohmann::json(nullptr);
    j["replicates"] = a.replicates;
    j["modal_delay"] = a.modal_delay ? nlohmann::json(*a.modal_delay)
                                     : nlohmann::json(nullptr);
    j["modal_dimension"] = a.modal_dimension
                               ? nlohmann::json(*a.modal_dimension)
                               : nlohmann::json(nullptr);
    j["wolf_total"] = a.wolf_total;
    j["wolf_positive"] = a.wolf_positive;
    j["kantz_total"] = a.kantz_total;
    j["kantz_negative"] = a.kantz_negative;
    j["map_total"] = a.map_total;
    j["map_negative"] = a.map_negative;
    j["scan_total"] = a.scan_total;
    j["scan_converged"] = a.scan_converged;
    j["wolf_median"] = a.wolf_median ? nlohmann::json(*a.wolf_median)
                                     : nlohmann::json(nullptr);
    j["kantz_median"] = a.kantz_median ? nlohmann::json(*a.kantz_median)
                                       : nlohmann::json(nullptr);
    j["map_median"] = a.map_median ? nlohmann::json(*a.map_median)
                                   : nlohmann::json(nullptr);
    j["error_cells"] = a.error_cells;
    return j;
}

} // namespace detail

inline nlohmann::json report_json(const RunReport &report)
{
    nlohmann::json j;
    j["artifact_version"] = kArtifactVersion;
    j["config_hash"] = report.hash;
    j["config"] = report.config;
    j["error_count"] = report.error_count;
    nlohmann::json records = nlohmann::json::array();
    for (const auto &record : report.records) {
        records.push_back(detail::record_json(record));
    }
    j["records"] = std::move(records);
    nlohmann::json aggregates = nlohmann::json::array();
    for (const auto &aggregate : report.aggregates) {
        aggregates.push_back(detail::aggregate_json(aggregate));
    }
    j["aggregates"] = std::move(aggregates);
    return j;
}

inline void write_json_atomic(const std::filesystem::path &path,
                              const nlohmann::json &j)
{
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp + " for writing");
        }
        out << j.dump(2) << '\n';
        if (!out) {
            throw std::runtime_error("write failed for " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

/// One paper-style summary table per estimator plus the delay/dimension
/// tables, one row per model.
inline void emit_tables(const RunReport &report,
                        const std::filesystem::path &dir)
{
    const auto open = [&](const char *name) {
        std::ofstream out(dir / name);
        if (!out) {
            throw std::runtime_error(std::string("cannot open ") + name);
        }
        return out;
    };
    const auto d_field = [](const ModelAggregate &a) {
        return a.d ? detail::format_double(*a.d) : std::string();
    };

    auto delays = open("table_delay.csv");
    delays << "model,d,modal_delay\n";
    auto dims = open("table_dimension.csv");
    dims << "model,d,modal_dimension\n";
    auto wolf = open("table_wolf.csv");
    wolf << "model,d,median_exponent,positive,total\n";
    auto kantz = open("table_kantz.csv");
    kantz << "model,d,median_slope,negative,total\n";
    auto map = open("table_map.csv");
    map << "model,d,median_exponent,negative,total\n";

    for (const auto &a : report.aggregates) {
        delays << a.name << ',' << d_field(a) << ',';
        if (a.modal_delay) {
            delays << *a.modal_delay;
        }
        delays << '\n';

        dims << a.name << ',' << d_field(a) << ',';
        if (a.modal_dimension) {
            dims << *a.modal_dimension;
        }
        dims << '\n';

        wolf << a.name << ',' << d_field(a) << ',';
        if (a.wolf_median) {
            wolf << detail::format_double(*a.wolf_median);
        }
        wolf << ',' << a.wolf_positive << ',' << a.wolf_total << '\n';

        kantz << a.name << ',' << d_field(a) << ',';
        if (a.kantz_median) {
            kantz << detail::format_double(*a.kantz_median);
        }
        kantz << ',' << a.kantz_negative << ',' << a.kantz_total << '\n';

        map << a.name << ',' << d_field(a) << ',';
        if (a.map_median) {
            map << detail::format_double(*a.map_median);
        }
        map << ',' << a.map_negative << ',' << a.map_total << '\n';
    }
}

inline std::vector<ModelAggregate>
aggregate_records(const std::vector<ModelSpec> &models,
                  const std::vector<CellRecord> &records)
{
    std::vector<ModelAggregate> aggregates(models.size());
    std::vector<std::vector<std::size_t>> delays(models.size());
    std::vector<std::vector<std::size_t>> dims(models.size());
    std::vector<std::vector<double>> wolf(models.size());
    std::vector<std::vector<double>> kantz(models.size());
    std::vector<std::vector<double>> map(models.size());

    for (std::size_t i = 0; i < models.size(); ++i) {
        aggregates[i].model_index = i;
        aggregates[i].name = models[i].name;
        if (models[i].params) {
            aggregates[i].d = models[i].params->d;
        }
    }
    for (const auto &record : records) {
        auto &a = aggregates.at(record.model_index);
        ++a.replicates;
        if (!record.errors.empty()) {
            ++a.error_cells;
        }
        if (record.delay) {
            delays[record.model_index].push_back(*record.delay);
        }
        if (record.dimension) {
            dims[record.model_index].push_back(*record.dimension);
        }
        if (record.scan_converged) {
            ++a.scan_total;
            if (*record.scan_converged) {
                ++a.scan_converged;
            }
        }
        if (record.wolf) {
            ++a.wolf_total;
            if (record.wolf->value > 0.0) {
                ++a.wolf_positive;
            }
            wolf[record.model_index].push_back(record.wolf->value);
        }
        if (record.kantz) {
            ++a.kantz_total;
            if (record.kantz->value < 0.0) {
                ++a.kantz_negative;
            }
            kantz[record.model_index].push_back(record.kantz->value);
        }
        if (record.map) {
            ++a.map_total;
            if (record.map->value < 0.0) {
                ++a.map_negative;
            }
            map[record.model_index].push_back(record.map->value);
        }
    }
    for (std::size_t i = 0; i < models.size(); ++i) {
        aggregates[i].modal_delay = detail::modal_value(delays[i]);
        aggregates[i].modal_dimension = detail::modal_value(dims[i]);
        aggregates[i].wolf_median = detail::median_value(wolf[i]);
        aggregates[i].kantz_median = detail::median_value(kantz[i]);
        aggregates[i].map_median = detail::median_value(map[i]);
    }
    return aggregates;
}

/// Full suite: every (model, replicate) cell simulated or ingested, analyzed,
/// and aggregated; report.json is written atomically at the end. External
/// series carry no sampling randomness and run once.
inline RunReport run_pipeline(const RunConfig &config)
{
    require(!config.models.empty(), "model grid must be non-empty");
    require(config.replicates >= 1, "replicates must be >= 1");
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);

    RunReport report;
    report.config = config_json(config);
    report.hash = fnv1a_hex(report.config.dump());

    for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
        const auto &model = config.models[mi];
        const std::size_t replicates = model.params ? config.replicates : 1;
        for (std::size_t rep = 0; rep < replicates; ++rep) {
            CellRecord record;
            record.model_index = mi;
            record.model_name = model.name;
            record.replicate = rep;
            record.seed = derive_seed(config.seed, mi, rep);

            std::optional<TimeSeries> series;
            if (model.params) {
                SimConfig sim = config.sim;
                sim.seed = record.seed;
                try {
                    series = simulate(*model.params, sim);
                } catch (const std::exception &e) {
                    detail::record_error(record, "simulate", e);
                }
            } else {
                try {
                    series =
                        ingest_series(model.series_path, model.series_column);
                } catch (const std::exception &e) {
                    detail::record_error(record, "ingest", e);
                }
            }

            if (series) {
                if (config.export_series) {
                    char buf[64];
                    std::snprintf(buf, sizeof(buf), "series_m%02zu_r%02zu.csv",
                                  mi, rep);
                    write_series(dir / buf, *series);
                }
                analyze_series(*series, config, record);
                if (model.params) {
                    try {
                        SimConfig sim = config.sim;
                        sim.seed = record.seed;
                        record.map = direct_map_lle(*model.params, sim,
                                                    config.map.d0,
                                                    config.map.n_iter);
                    } catch (const std::exception &e) {
                        detail::record_error(record, "lyap-map", e);
                    }
                }
            }
            report.records.push_back(std::move(record));
        }
    }

    report.aggregates = aggregate_records(config.models, report.records);
    for (const auto &record : report.records) {
        report.error_count += record.errors.size();
    }
    emit_tables(report, dir);
    write_json_atomic(dir / "report.json", report_json(report));
    return report;
}

} // namespace figchaos
