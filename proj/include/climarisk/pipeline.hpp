#ifndef CLIMARISK_PIPELINE_HPP
#define CLIMARISK_PIPELINE_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "climarisk/clustering.hpp"
#include "climarisk/elasticity.hpp"
#include "climarisk/json_writer.hpp"
#include "climarisk/mcdm.hpp"
#include "climarisk/model_io.hpp"
#include "climarisk/panel.hpp"
#include "climarisk/sampling.hpp"
#include "climarisk/svg.hpp"
#include "climarisk/svm.hpp"
#include "climarisk/version.hpp"

namespace climarisk {

// Exit codes are a stable contract:
//   0 success, 1 stage failure, 2 invalid config, 3 consistency-gate failure.
inline constexpr int exit_ok = 0;
inline constexpr int exit_stage_failure = 1;
inline constexpr int exit_config_invalid = 2;
inline constexpr int exit_inconsistent = 3;

struct InsureConfig {
    std::string panel_path;
    PanelSchema schema;
    // labeling
    std::string label_policy = "lowest_npm"; // lowest_npm | npm_quantile | column
    std::size_t lowest_count = 1;
    double quantile = 0.1;
    std::string label_column;
    std::string premium_column;
    std::string claim_column;
    std::string npm_column; // precomputed alternative to premium/claim
    bool npm_as_feature = false;
    std::vector<std::string> feature_columns; // empty: every non-money column
    // smote
    std::size_t smote_k = 5;
    NeighborPool smote_pool = NeighborPool::minority;
    std::optional<std::size_t> smote_count;
    // svm
    double C = 1.0;
    double tol = 1e-6;
    std::size_t max_sweeps = 0;
    std::size_t folds = 5;
    // elasticity
    std::string weather_column;
    std::vector<std::string> weather_categories; // optional multivariate diagnostics
    std::vector<std::string> targets;
    double offset = 1.0;
    // sweep
    double lambda_min = 0.0;
    double lambda_max = 1.0;
    std::size_t lambda_steps = 101;
};

struct DevelopConfig {
    std::string panel_path;
    PanelSchema schema;
    std::string population_column;
    double k_percent = 15.0;
    bool reweight_after_normalize = true;
    std::size_t clusters = 2;
    std::size_t restarts = 10;
    std::size_t max_iter = 200;
    std::string benchmark_path;
    std::string benchmark_column;
};

struct PreserveConfig {
    std::string panel_path;
    PanelSchema schema;
    std::string ahp_matrix_path;
    double alpha = 0.5;
    bool allow_inconsistent = false;
    bool run_robustness = false;
    double sigma = 0.5;
    std::size_t trials = 100;
    bool recompute_topsis = true;
    bool clamp = false;
};

struct RunConfig {
    std::string pipeline; // insure | develop | preserve
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    unsigned threads = 1;
    bool emit_svg = true;
    InsureConfig insure;
    DevelopConfig develop;
    PreserveConfig preserve;
    nlohmann::json raw; // echoed into the summary
};

struct StageStatus {
    std::string name;
    std::string status = "ok"; // ok | failed | skipped
    std::vector<std::string> warnings;
    std::string error;
};

struct RunSummary {
    std::string pipeline;
    int exit_code = exit_ok;
    std::vector<StageStatus> stages;
    Json headline = Json::object();
    std::vector<std::string> outputs;
};

// ---------------------------------------------------------------------------
// config parsing (strict: unknown keys are errors)

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& object, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        (void)value;
        if (!allowed.contains(key))
            throw Error(Errc::config_invalid, "unknown key \"" + key + "\" in " + where);
    }
}

inline PanelSchema parse_schema(const nlohmann::json& input, const std::string& where) {
    PanelSchema schema;
    if (!input.contains("directions")) return schema;
    const auto& directions = input.at("directions");
    if (!directions.is_object())
        throw Error(Errc::config_invalid, where + ".directions must be an object");
    for (const auto& [column, dir] : directions.items()) {
        const auto parsed = parse_direction(dir.get<std::string>());
        if (!parsed)
            throw Error(Errc::config_invalid,
                        where + ".directions[\"" + column + "\"] must be positive or negative");
        schema.directions[column] = *parsed;
    }
    return schema;
}

template <typename T>
T get_or(const nlohmann::json& object, const char* key, T fallback) {
    if (!object.contains(key)) return fallback;
    try {
        return object.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(Errc::config_invalid, std::string("key \"") + key + "\" has the wrong type");
    }
}

inline void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw Error(Errc::config_invalid, what + " path is missing");
    if (!std::filesystem::exists(path))
        throw Error(Errc::config_invalid, what + " file \"" + path + "\" does not exist");
}

} // namespace detail

/// Parses and validates a run configuration. Throws ConfigInvalid on any
/// unknown key, type error, out-of-range value, or missing input file, so a
/// failed validation never produces partial outputs.
inline RunConfig parse_config(const nlohmann::json& doc) {
    using detail::get_or;
    if (!doc.is_object()) throw Error(Errc::config_invalid, "config root must be an object");
    detail::reject_unknown_keys(
        doc, {"pipeline", "seed", "out_dir", "threads", "emit_svg", "input", "label", "smote",
              "svm", "elasticity", "sweep", "population", "kmeans", "benchmark", "ahp", "combine",
              "robustness"},
        "config root");

    RunConfig config;
    config.raw = doc;
    if (!doc.contains("pipeline"))
        throw Error(Errc::config_invalid, "config needs a \"pipeline\" discriminator");
    config.pipeline = doc.at("pipeline").get<std::string>();
    if (config.pipeline != "insure" && config.pipeline != "develop" &&
        config.pipeline != "preserve")
        throw Error(Errc::config_invalid, "pipeline must be insure, develop, or preserve");

    config.seed = get_or<std::uint64_t>(doc, "seed", 0);
    config.out_dir = get_or<std::string>(doc, "out_dir", "out");
    config.threads = get_or<unsigned>(doc, "threads", 1);
    config.emit_svg = get_or<bool>(doc, "emit_svg", true);
    if (config.threads == 0) throw Error(Errc::config_invalid, "threads must be >= 1");

    if (!doc.contains("input") || !doc.at("input").is_object())
        throw Error(Errc::config_invalid, "config needs an \"input\" object");
    const auto& input = doc.at("input");
    detail::reject_unknown_keys(input, {"panel", "directions"}, "input");
    const std::string panel_path = get_or<std::string>(input, "panel", "");
    const PanelSchema schema = detail::parse_schema(input, "input");

    auto forbid = [&](const char* key, const char* pipeline_name) {
        if (doc.contains(key))
            throw Error(Errc::config_invalid, std::string("section \"") + key +
                                                  "\" does not belong to the " + pipeline_name +
                                                  " pipeline");
    };

    if (config.pipeline == "insure") {
        forbid("population", "insure");
        forbid("kmeans", "insure");
        forbid("benchmark", "insure");
        forbid("ahp", "insure");
        forbid("combine", "insure");
        forbid("robustness", "insure");
        auto& insure = config.insure;
        insure.panel_path = panel_path;
        insure.schema = schema;

        if (doc.contains("label")) {
            const auto& label = doc.at("label");
            detail::reject_unknown_keys(label,
                                        {"policy", "count", "quantile", "column",
                                         "premium_column", "claim_column", "npm_column",
                                         "npm_as_feature", "feature_columns"},
                                        "label");
            insure.label_policy = get_or<std::string>(label, "policy", "lowest_npm");
            insure.lowest_count = get_or<std::size_t>(label, "count", 1);
            insure.quantile = get_or<double>(label, "quantile", 0.1);
            insure.label_column = get_or<std::string>(label, "column", "");
            insure.premium_column = get_or<std::string>(label, "premium_column", "");
            insure.claim_column = get_or<std::string>(label, "claim_column", "");
            insure.npm_column = get_or<std::string>(label, "npm_column", "");
            insure.npm_as_feature = get_or<bool>(label, "npm_as_feature", false);
            insure.feature_columns =
                get_or<std::vector<std::string>>(label, "feature_columns", {});
        }
        if (insure.label_policy != "lowest_npm" && insure.label_policy != "npm_quantile" &&
            insure.label_policy != "column")
            throw Error(Errc::config_invalid,
                        "label.policy must be lowest_npm, npm_quantile, or column");
        if (insure.label_policy == "column" && insure.label_column.empty())
            throw Error(Errc::config_invalid, "label.policy \"column\" needs label.column");
        if (insure.label_policy == "npm_quantile" &&
            !(insure.quantile > 0.0 && insure.quantile < 1.0))
            throw Error(Errc::config_invalid, "label.quantile must lie in (0,1)");
        if (insure.label_policy == "lowest_npm" && insure.lowest_count < 1)
            throw Error(Errc::config_invalid, "label.count must be >= 1");

        if (doc.contains("smote")) {
            const auto& smote = doc.at("smote");
            detail::reject_unknown_keys(smote, {"k", "pool", "count"}, "smote");
            insure.smote_k = get_or<std::size_t>(smote, "k", 5);
            const std::string pool = get_or<std::string>(smote, "pool", "minority");
            if (pool == "minority")
                insure.smote_pool = NeighborPool::minority;
            else if (pool == "majority")
                insure.smote_pool = NeighborPool::majority;
            else
                throw Error(Errc::config_invalid, "smote.pool must be minority or majority");
            if (smote.contains("count"))
                insure.smote_count = smote.at("count").get<std::size_t>();
        }
        if (insure.smote_k < 1) throw Error(Errc::config_invalid, "smote.k must be >= 1");

        if (doc.contains("svm")) {
            const auto& svm = doc.at("svm");
            detail::reject_unknown_keys(svm, {"C", "tol", "max_sweeps", "folds"}, "svm");
            insure.C = get_or<double>(svm, "C", 1.0);
            insure.tol = get_or<double>(svm, "tol", 1e-6);
            insure.max_sweeps = get_or<std::size_t>(svm, "max_sweeps", 0);
            insure.folds = get_or<std::size_t>(svm, "folds", 5);
        }
        if (!(insure.C > 0.0)) throw Error(Errc::config_invalid, "svm.C must be > 0");
        if (!(insure.tol > 0.0)) throw Error(Errc::config_invalid, "svm.tol must be > 0");
        if (insure.folds < 2) throw Error(Errc::config_invalid, "svm.folds must be >= 2");

        if (!doc.contains("elasticity"))
            throw Error(Errc::config_invalid, "insure pipeline needs an \"elasticity\" section");
        const auto& elasticity = doc.at("elasticity");
        detail::reject_unknown_keys(
            elasticity, {"weather_column", "weather_categories", "targets", "offset"},
            "elasticity");
        insure.weather_column = get_or<std::string>(elasticity, "weather_column", "");
        insure.weather_categories =
            get_or<std::vector<std::string>>(elasticity, "weather_categories", {});
        insure.targets = get_or<std::vector<std::string>>(elasticity, "targets", {});
        insure.offset = get_or<double>(elasticity, "offset", 1.0);
        if (insure.weather_column.empty())
            throw Error(Errc::config_invalid, "elasticity.weather_column is required");
        if (insure.targets.empty())
            throw Error(Errc::config_invalid, "elasticity.targets must not be empty");
        for (const auto& target : insure.targets)
            if (target == insure.weather_column)
                throw Error(Errc::config_invalid,
                            "elasticity.targets must not contain the weather column itself");
        if (insure.offset < 0.0)
            throw Error(Errc::config_invalid, "elasticity.offset must be >= 0");

        if (doc.contains("sweep")) {
            const auto& sweep_section = doc.at("sweep");
            detail::reject_unknown_keys(sweep_section, {"lambda_min", "lambda_max", "steps"},
                                        "sweep");
            insure.lambda_min = get_or<double>(sweep_section, "lambda_min", 0.0);
            insure.lambda_max = get_or<double>(sweep_section, "lambda_max", 1.0);
            insure.lambda_steps = get_or<std::size_t>(sweep_section, "steps", 101);
        }
        if (!(insure.lambda_min > -1.0))
            throw Error(Errc::config_invalid, "sweep.lambda_min must be > -1");
        if (!(insure.lambda_max > insure.lambda_min))
            throw Error(Errc::config_invalid, "sweep.lambda_max must exceed lambda_min");
        if (insure.lambda_steps < 2)
            throw Error(Errc::config_invalid, "sweep.steps must be >= 2");

        detail::require_file(insure.panel_path, "input.panel");
    } else if (config.pipeline == "develop") {
        forbid("label", "develop");
        forbid("smote", "develop");
        forbid("svm", "develop");
        forbid("elasticity", "develop");
        forbid("sweep", "develop");
        forbid("ahp", "develop");
        forbid("combine", "develop");
        forbid("robustness", "develop");
        auto& develop = config.develop;
        develop.panel_path = panel_path;
        develop.schema = schema;

        if (!doc.contains("population"))
            throw Error(Errc::config_invalid, "develop pipeline needs a \"population\" section");
        const auto& population = doc.at("population");
        detail::reject_unknown_keys(population, {"column", "k_percent", "after_normalize"},
                                    "population");
        develop.population_column = get_or<std::string>(population, "column", "");
        develop.k_percent = get_or<double>(population, "k_percent", 15.0);
        develop.reweight_after_normalize = get_or<bool>(population, "after_normalize", true);
        if (develop.population_column.empty())
            throw Error(Errc::config_invalid, "population.column is required");
        if (!(develop.k_percent > -100.0))
            throw Error(Errc::config_invalid, "population.k_percent must be > -100");

        if (doc.contains("kmeans")) {
            const auto& kmeans_section = doc.at("kmeans");
            detail::reject_unknown_keys(kmeans_section, {"k", "restarts", "max_iter"}, "kmeans");
            develop.clusters = get_or<std::size_t>(kmeans_section, "k", 2);
            develop.restarts = get_or<std::size_t>(kmeans_section, "restarts", 10);
            develop.max_iter = get_or<std::size_t>(kmeans_section, "max_iter", 200);
        }
        if (develop.clusters != 2)
            throw Error(Errc::config_invalid, "kmeans.k must be 2 for the develop pipeline");
        if (develop.restarts < 1) throw Error(Errc::config_invalid, "kmeans.restarts must be >= 1");

        if (!doc.contains("benchmark"))
            throw Error(Errc::config_invalid, "develop pipeline needs a \"benchmark\" section");
        const auto& benchmark = doc.at("benchmark");
        detail::reject_unknown_keys(benchmark, {"file", "column"}, "benchmark");
        develop.benchmark_path = get_or<std::string>(benchmark, "file", "");
        develop.benchmark_column = get_or<std::string>(benchmark, "column", "");
        if (develop.benchmark_column.empty())
            throw Error(Errc::config_invalid, "benchmark.column is required");

        detail::require_file(develop.panel_path, "input.panel");
        detail::require_file(develop.benchmark_path, "benchmark.file");
    } else {
        forbid("label", "preserve");
        forbid("smote", "preserve");
        forbid("svm", "preserve");
        forbid("elasticity", "preserve");
        forbid("sweep", "preserve");
        forbid("population", "preserve");
        forbid("kmeans", "preserve");
        forbid("benchmark", "preserve");
        auto& preserve = config.preserve;
        preserve.panel_path = panel_path;
        preserve.schema = schema;

        if (!doc.contains("ahp"))
            throw Error(Errc::config_invalid, "preserve pipeline needs an \"ahp\" section");
        const auto& ahp = doc.at("ahp");
        detail::reject_unknown_keys(ahp, {"matrix", "allow_inconsistent"}, "ahp");
        preserve.ahp_matrix_path = get_or<std::string>(ahp, "matrix", "");
        preserve.allow_inconsistent = get_or<bool>(ahp, "allow_inconsistent", false);

        if (doc.contains("combine")) {
            const auto& combine = doc.at("combine");
            detail::reject_unknown_keys(combine, {"alpha"}, "combine");
            preserve.alpha = get_or<double>(combine, "alpha", 0.5);
        }
        if (!(preserve.alpha >= 0.0 && preserve.alpha <= 1.0))
            throw Error(Errc::config_invalid, "combine.alpha must lie in [0,1]");

        if (doc.contains("robustness")) {
            const auto& robustness_section = doc.at("robustness");
            detail::reject_unknown_keys(
                robustness_section, {"enabled", "sigma", "trials", "recompute_topsis", "clamp"},
                "robustness");
            preserve.run_robustness = get_or<bool>(robustness_section, "enabled", true);
            preserve.sigma = get_or<double>(robustness_section, "sigma", 0.5);
            preserve.trials = get_or<std::size_t>(robustness_section, "trials", 100);
            preserve.recompute_topsis = get_or<bool>(robustness_section, "recompute_topsis", true);
            preserve.clamp = get_or<bool>(robustness_section, "clamp", false);
        }
        if (preserve.run_robustness && preserve.sigma < 0.0)
            throw Error(Errc::config_invalid, "robustness.sigma must be >= 0");
        if (preserve.run_robustness && preserve.trials < 1)
            throw Error(Errc::config_invalid, "robustness.trials must be >= 1");

        detail::require_file(preserve.panel_path, "input.panel");
        detail::require_file(preserve.ahp_matrix_path, "ahp.matrix");
    }
    return config;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::config_invalid, "cannot open config \"" + path + "\"");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::config_invalid, "malformed config JSON: " + std::string(e.what()));
    }
    return parse_config(doc);
}

// ---------------------------------------------------------------------------
// summary plumbing

namespace detail {

inline Json to_writer_json(const nlohmann::json& v) {
    switch (v.type()) {
        case nlohmann::json::value_t::object: {
            Json out = Json::object();
            for (const auto& [key, child] : v.items()) out.set(key, to_writer_json(child));
            return out;
        }
        case nlohmann::json::value_t::array: {
            Json out = Json::array();
            for (const auto& child : v) out.push(to_writer_json(child));
            return out;
        }
        case nlohmann::json::value_t::string: return Json(v.get<std::string>());
        case nlohmann::json::value_t::boolean: return Json(v.get<bool>());
        case nlohmann::json::value_t::number_integer: return Json(v.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned: return Json(v.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float: return Json(v.get<double>());
        default: return Json(nullptr);
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write \"" + path.string() + "\"");
    out << text;
}

template <typename Fn>
void write_stream_file(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write \"" + path.string() + "\"");
    fn(out);
}

} // namespace detail

inline Json summary_to_json(const RunSummary& summary, const RunConfig& config) {
    Json doc = Json::object();
    doc.set("tool", "climarisk");
    doc.set("version", version());
    doc.set("pipeline", summary.pipeline);
    doc.set("seed", config.seed);
    doc.set("status", summary.exit_code == exit_ok ? "ok" : "failed");
    doc.set("exit_code", static_cast<std::int64_t>(summary.exit_code));
    Json stages = Json::array();
    for (const auto& stage : summary.stages) {
        Json s = Json::object();
        s.set("name", stage.name);
        s.set("status", stage.status);
        s.set("warnings", Json(stage.warnings));
        if (!stage.error.empty()) s.set("error", stage.error);
        stages.push(std::move(s));
    }
    doc.set("stages", std::move(stages));
    doc.set("headline", summary.headline);
    doc.set("outputs", Json(summary.outputs));
    // threads is an execution knob, not semantics: outputs are identical for
    // any thread count, so the echo must not record it
    nlohmann::json echo = config.raw;
    echo.erase("threads");
    doc.set("config_echo", detail::to_writer_json(echo));
    return doc;
}

inline void write_summary(const RunSummary& summary, const RunConfig& config) {
    const std::filesystem::path out_dir(config.out_dir);
    std::filesystem::create_directories(out_dir);
    detail::write_text_file(out_dir / "summary.json", summary_to_json(summary, config).dump());
}

// ---------------------------------------------------------------------------
// pipelines

namespace detail {

/// Runs one stage, recording ok/failed plus warnings. Returns false when the
/// stage failed and the pipeline should stop.
template <typename Fn>
bool run_stage(RunSummary& summary, const std::string& name, int failure_code, Fn&& fn) {
    StageStatus stage;
    stage.name = name;
    try {
        fn(stage);
        summary.stages.push_back(std::move(stage));
        return true;
    } catch (const Error& e) {
        stage.status = "failed";
        stage.error = e.what();
        summary.stages.push_back(std::move(stage));
        summary.exit_code =
            e.code() == Errc::inconsistent_matrix ? exit_inconsistent : failure_code;
        return false;
    } catch (const std::exception& e) {
        stage.status = "failed";
        stage.error = e.what();
        summary.stages.push_back(std::move(stage));
        summary.exit_code = failure_code;
        return false;
    }
}

} // namespace detail

/// SSC pipeline: normalize, label from net premium margin, SMOTE-balance,
/// cross-validate, train + calibrate, fit elasticities, sweep the weather
/// scenario grid for the underwriting-probability curve.
inline RunSummary run_insure(const RunConfig& config) {
    const auto& cfg = config.insure;
    RunSummary summary;
    summary.pipeline = "insure";
    const std::filesystem::path out_dir(config.out_dir);
    std::filesystem::create_directories(out_dir);

    IndicatorPanel panel;
    std::vector<double> npm;
    std::vector<int> labels;
    IndicatorPanel features_raw;
    NormalizedPanel features;
    LabeledDataset dataset;
    BalanceResult balanced;
    CvReport cv;
    SvmModel model;
    Calibration calibration;
    std::vector<ElasticityModel> fits;
    std::vector<ElasticityModel> category_fits;
    ProbabilityCurve curve;

    bool ok = detail::run_stage(summary, "load", exit_stage_failure, [&](StageStatus&) {
        panel = load_panel_file(cfg.panel_path, cfg.schema);
        if (panel.n() < 3) throw Error(Errc::empty_panel, "panel needs at least 3 rows");
    });

    ok = ok && detail::run_stage(summary, "label", exit_stage_failure, [&](StageStatus& stage) {
        const bool needs_npm = cfg.label_policy != "column";
        if (needs_npm) {
            if (!cfg.npm_column.empty()) {
                const auto idx = panel.column_index(cfg.npm_column);
                if (!idx)
                    throw Error(Errc::config_invalid,
                                "npm_column \"" + cfg.npm_column + "\" not in panel");
                npm = panel.values.column(*idx);
            } else {
                if (cfg.premium_column.empty() || cfg.claim_column.empty())
                    throw Error(Errc::config_invalid,
                                "label policy needs premium_column and claim_column (or npm_column)");
                const auto premium_idx = panel.column_index(cfg.premium_column);
                const auto claim_idx = panel.column_index(cfg.claim_column);
                if (!premium_idx || !claim_idx)
                    throw Error(Errc::config_invalid, "premium/claim columns not in panel");
                npm.resize(panel.n());
                for (std::size_t i = 0; i < panel.n(); ++i)
                    npm[i] = net_premium_margin(panel.values(i, *premium_idx),
                                                panel.values(i, *claim_idx));
            }
        }

        labels.assign(panel.n(), +1);
        if (cfg.label_policy == "column") {
            const auto idx = panel.column_index(cfg.label_column);
            if (!idx)
                throw Error(Errc::config_invalid,
                            "label column \"" + cfg.label_column + "\" not in panel");
            for (std::size_t i = 0; i < panel.n(); ++i) {
                const double v = panel.values(i, *idx);
                if (v != 1.0 && v != -1.0)
                    throw Error(Errc::non_numeric, "label column must contain +1/-1, got " +
                                                       format_double(v) + " at row " +
                                                       std::to_string(i + 1));
                labels[i] = v > 0 ? +1 : -1;
            }
        } else if (cfg.label_policy == "lowest_npm") {
            std::vector<std::size_t> order(panel.n());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return npm[a] < npm[b]; });
            const std::size_t count = std::min(cfg.lowest_count, panel.n() - 1);
            for (std::size_t r = 0; r < count; ++r) labels[order[r]] = -1;
            stage.warnings.push_back("negative rows: " + std::to_string(count) +
                                     " lowest-NPM year(s)");
        } else { // npm_quantile
            std::vector<double> sorted(npm);
            std::sort(sorted.begin(), sorted.end());
            const double cut =
                sorted[static_cast<std::size_t>(cfg.quantile * (sorted.size() - 1))];
            for (std::size_t i = 0; i < panel.n(); ++i)
                if (npm[i] <= cut) labels[i] = -1;
        }
        std::size_t negatives = 0;
        for (int y : labels) negatives += (y == -1);
        if (negatives == 0 || negatives == panel.n())
            throw Error(Errc::single_class, "labeling produced a single class");
    });

    ok = ok && detail::run_stage(summary, "normalize", exit_stage_failure, [&](StageStatus& stage) {
        // feature columns: explicit list, or everything except the money columns
        std::vector<std::string> names = cfg.feature_columns;
        if (names.empty()) {
            for (const auto& name : panel.indicator_names) {
                if (name == cfg.premium_column || name == cfg.claim_column ||
                    name == cfg.npm_column || name == cfg.label_column)
                    continue;
                names.push_back(name);
            }
        }
        if (names.empty()) throw Error(Errc::empty_panel, "no feature columns left");

        features_raw.row_ids = panel.row_ids;
        features_raw.values = Matrix(panel.n(), 0);
        Matrix columns(panel.n(), names.size());
        for (std::size_t c = 0; c < names.size(); ++c) {
            const auto idx = panel.column_index(names[c]);
            if (!idx)
                throw Error(Errc::config_invalid, "feature column \"" + names[c] + "\" not in panel");
            features_raw.indicator_names.push_back(names[c]);
            features_raw.directions.push_back(panel.directions[*idx]);
            for (std::size_t i = 0; i < panel.n(); ++i) columns(i, c) = panel.values(i, *idx);
        }
        if (cfg.npm_as_feature) {
            if (npm.empty()) throw Error(Errc::config_invalid, "npm_as_feature needs NPM inputs");
            Matrix widened(panel.n(), names.size() + 1);
            for (std::size_t i = 0; i < panel.n(); ++i) {
                for (std::size_t c = 0; c < names.size(); ++c) widened(i, c) = columns(i, c);
                widened(i, names.size()) = npm[i];
            }
            columns = std::move(widened);
            features_raw.indicator_names.push_back("npm");
            features_raw.directions.push_back(Direction::positive);
        }
        features_raw.values = std::move(columns);
        features = normalize(features_raw);
        for (const auto& warning : features.warnings) stage.warnings.push_back(warning);
        detail::write_stream_file(out_dir / "normalized.csv",
                                  [&](std::ostream& s) { write_panel_csv(s, features); });
        summary.outputs.push_back("normalized.csv");
    });

    ok = ok && detail::run_stage(summary, "balance", exit_stage_failure, [&](StageStatus& stage) {
        dataset.features = features.values;
        dataset.labels = labels;
        dataset.provenance.assign(labels.size(), Provenance::real);
        SmoteConfig smote_config;
        smote_config.k = cfg.smote_k;
        smote_config.n_synthetic = cfg.smote_count;
        smote_config.seed = config.seed;
        smote_config.neighbor_pool = cfg.smote_pool;
        smote_config.clamp_k = true;
        balanced = balance(dataset, smote_config);
        stage.warnings.push_back("synthesized " + std::to_string(balanced.synthesized) +
                                 " minority rows (" + std::to_string(balanced.dataset.size()) +
                                 " total)");
        detail::write_stream_file(out_dir / "smote_trace.csv",
                                  [&](std::ostream& s) { write_trace_csv(s, balanced.trace); });
        summary.outputs.push_back("smote_trace.csv");
    });

    ok = ok && detail::run_stage(summary, "cross_validate", exit_stage_failure, [&](StageStatus& stage) {
        cv = cross_validate(balanced.dataset, cfg.folds,
                            {.C = cfg.C, .tol = cfg.tol, .max_sweeps = cfg.max_sweeps},
                            config.seed);
        for (const auto& warning : cv.warnings) stage.warnings.push_back(warning);
        for (std::size_t f = 0; f < cv.folds; ++f) {
            if (cv.fold_roc[f].points.empty()) continue;
            const std::string name = "roc_fold" + std::to_string(f + 1) + ".csv";
            detail::write_stream_file(out_dir / name,
                                      [&](std::ostream& s) { write_roc_csv(s, cv.fold_roc[f]); });
            summary.outputs.push_back(name);
        }
    });

    ok = ok && detail::run_stage(summary, "train", exit_stage_failure, [&](StageStatus& stage) {
        model = train_svm(balanced.dataset, {.C = cfg.C, .tol = cfg.tol, .max_sweeps = cfg.max_sweeps});
        for (const auto& warning : model.warnings) stage.warnings.push_back(warning);
        calibration = fit_calibration(model, balanced.dataset);
        detail::write_text_file(out_dir / "model.json",
                                model_to_json(model, calibration).dump());
        summary.outputs.push_back("model.json");
    });

    ok = ok && detail::run_stage(summary, "elasticity", exit_stage_failure, [&](StageStatus&) {
        const auto weather_idx = panel.column_index(cfg.weather_column);
        if (!weather_idx)
            throw Error(Errc::config_invalid,
                        "weather_column \"" + cfg.weather_column + "\" not in panel");
        Matrix weather(panel.n(), 1);
        for (std::size_t i = 0; i < panel.n(); ++i)
            weather(i, 0) = panel.values(i, *weather_idx);

        Matrix categories(panel.n(), cfg.weather_categories.size());
        for (std::size_t c = 0; c < cfg.weather_categories.size(); ++c) {
            const auto idx = panel.column_index(cfg.weather_categories[c]);
            if (!idx)
                throw Error(Errc::config_invalid, "weather category \"" +
                                                      cfg.weather_categories[c] +
                                                      "\" not in panel");
            for (std::size_t i = 0; i < panel.n(); ++i)
                categories(i, c) = panel.values(i, *idx);
        }

        for (const auto& target : cfg.targets) {
            const auto idx = panel.column_index(target);
            if (!idx)
                throw Error(Errc::config_invalid, "target \"" + target + "\" not in panel");
            const auto series = panel.values.column(*idx);
            fits.push_back(fit_cdc(series, weather, cfg.offset, {cfg.weather_column}));
            fits.back().regressor_names = {target}; // label the fit by its target
            if (!cfg.weather_categories.empty()) {
                category_fits.push_back(
                    fit_cdc(series, categories, cfg.offset, cfg.weather_categories));
                category_fits.back().regressor_names.insert(
                    category_fits.back().regressor_names.begin(), target);
            }
        }
    });

    ok = ok && detail::run_stage(summary, "sweep", exit_stage_failure, [&](StageStatus& stage) {
        std::vector<double> betas(features.m(), 0.0);
        std::vector<double> baseline(features.m());
        for (std::size_t j = 0; j < features.m(); ++j)
            baseline[j] = features_raw.values(panel.n() - 1, j);
        for (std::size_t j = 0; j < features.m(); ++j) {
            const auto& name = features.indicator_names[j];
            if (name == cfg.weather_column) betas[j] = 1.0; // the shocked index itself
            for (std::size_t t = 0; t < cfg.targets.size(); ++t)
                if (name == cfg.targets[t]) betas[j] = fits[t].betas[0];
        }

        std::vector<double> grid(cfg.lambda_steps);
        const double step =
            (cfg.lambda_max - cfg.lambda_min) / static_cast<double>(cfg.lambda_steps - 1);
        for (std::size_t i = 0; i < cfg.lambda_steps; ++i)
            grid[i] = cfg.lambda_min + step * static_cast<double>(i);

        curve = sweep(make_svm_scorer(model, calibration), baseline, betas, features, grid,
                      config.threads);
        for (const auto& warning : curve.warnings) stage.warnings.push_back(warning);

        detail::write_stream_file(out_dir / "curve.csv",
                                  [&](std::ostream& s) { write_curve_csv(s, curve); });
        summary.outputs.push_back("curve.csv");
        if (config.emit_svg) {
            detail::write_text_file(
                out_dir / "curve.svg",
                svg_line_chart("Underwriting probability vs weather change", "lambda",
                               "probability", curve.lambdas, curve.probabilities, 0.5));
            summary.outputs.push_back("curve.svg");
        }
    });

    Json headline = Json::object();
    if (ok) {
        Json cv_json = Json::object();
        cv_json.set("folds", cv.folds);
        cv_json.set("fold_accuracy", Json(cv.fold_accuracy));
        cv_json.set("mean_accuracy", cv.mean_accuracy);
        Json aucs = Json::array();
        for (const auto& roc : cv.fold_roc)
            aucs.push(roc.points.empty() ? Json(nullptr) : Json(roc.auc));
        cv_json.set("fold_auc", std::move(aucs));
        headline.set("cv", std::move(cv_json));

        Json calib_json = Json::object();
        calib_json.set("A", calibration.A);
        calib_json.set("B", calibration.B);
        headline.set("calibration", std::move(calib_json));

        Json elasticity_json = Json::array();
        for (std::size_t t = 0; t < fits.size(); ++t) {
            Json fit = Json::object();
            fit.set("target", cfg.targets[t]);
            fit.set("mode", "collapsed");
            fit.set("beta", fits[t].betas[0]);
            fit.set("intercept", fits[t].intercept);
            fit.set("r_squared", fits[t].r_squared);
            fit.set("offset", fits[t].offset);
            elasticity_json.push(std::move(fit));
        }
        for (std::size_t t = 0; t < category_fits.size(); ++t) {
            Json fit = Json::object();
            fit.set("target", cfg.targets[t]);
            fit.set("mode", "multivariate");
            fit.set("betas", Json(category_fits[t].betas));
            fit.set("intercept", category_fits[t].intercept);
            fit.set("r_squared", category_fits[t].r_squared);
            elasticity_json.push(std::move(fit));
        }
        headline.set("elasticity", std::move(elasticity_json));

        headline.set("lambda_star",
                     curve.lambda_star ? Json(*curve.lambda_star) : Json(nullptr));
        headline.set("baseline_probability",
                     curve.probabilities.empty() ? Json(nullptr) : Json(curve.probabilities.front()));
    }
    summary.headline = std::move(headline);
    summary.outputs.push_back("summary.json");
    write_summary(summary, config);
    return summary;
}

/// KSSC pipeline: normalize city indicators, amplify the population column,
/// cluster with K-Means (K=2), label clusters against benchmark scores, and
/// report build decisions plus the indicator deviation table.
inline RunSummary run_develop(const RunConfig& config) {
    const auto& cfg = config.develop;
    RunSummary summary;
    summary.pipeline = "develop";
    const std::filesystem::path out_dir(config.out_dir);
    std::filesystem::create_directories(out_dir);

    IndicatorPanel panel;
    NormalizedPanel normalized;
    Clustering clustering;
    ClusterLabels cluster_labels;
    std::vector<double> benchmark;

    bool ok = detail::run_stage(summary, "load", exit_stage_failure, [&](StageStatus&) {
        panel = load_panel_file(cfg.panel_path, cfg.schema);
        if (panel.n() < 2) throw Error(Errc::empty_panel, "need at least 2 cities");
    });

    ok = ok && detail::run_stage(summary, "normalize", exit_stage_failure, [&](StageStatus& stage) {
        if (!cfg.reweight_after_normalize) {
            // min-max normalization absorbs a uniform column scaling, so
            // reweighting before it cannot change anything downstream
            stage.warnings.push_back(
                "reweighting before normalization is a no-op under min-max scaling");
            auto reweighted = panel;
            const auto idx = panel.column_index(cfg.population_column);
            if (!idx)
                throw Error(Errc::no_population_column,
                            "panel has no column \"" + cfg.population_column + "\"");
            for (std::size_t i = 0; i < reweighted.n(); ++i)
                reweighted.values(i, *idx) *= 1.0 + cfg.k_percent / 100.0;
            normalized = normalize(reweighted);
        } else {
            normalized = normalize(panel);
            normalized = reweight_population(normalized, cfg.population_column, cfg.k_percent);
        }
        for (const auto& warning : normalized.warnings) stage.warnings.push_back(warning);
        detail::write_stream_file(out_dir / "normalized.csv",
                                  [&](std::ostream& s) { write_panel_csv(s, normalized); });
        summary.outputs.push_back("normalized.csv");
    });

    ok = ok && detail::run_stage(summary, "cluster", exit_stage_failure, [&](StageStatus&) {
        clustering = kmeans(normalized.values, cfg.clusters,
                            {.seed = config.seed, .max_iter = cfg.max_iter,
                             .restarts = cfg.restarts});
    });

    ok = ok && detail::run_stage(summary, "label", exit_stage_failure, [&](StageStatus& stage) {
        const auto table = [&] {
            std::ifstream in(cfg.benchmark_path);
            if (!in) throw Error(Errc::io_error, "cannot open \"" + cfg.benchmark_path + "\"");
            return read_csv(in);
        }();
        std::size_t score_column = table.header.size();
        for (std::size_t c = 1; c < table.header.size(); ++c)
            if (table.header[c] == cfg.benchmark_column) score_column = c;
        if (score_column == table.header.size())
            throw Error(Errc::config_invalid,
                        "benchmark file has no column \"" + cfg.benchmark_column + "\"");
        std::map<std::string, double> by_id;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            if (table.rows[r].size() <= score_column)
                throw Error(Errc::missing_cell,
                            "benchmark row " + std::to_string(r + 1) + " is too short");
            const auto value = parse_double(table.rows[r][score_column]);
            if (!value)
                throw Error(Errc::non_numeric, "benchmark row " + std::to_string(r + 1) +
                                                   " has a non-numeric score");
            by_id[table.rows[r][0]] = *value;
        }
        benchmark.resize(panel.n());
        for (std::size_t i = 0; i < panel.n(); ++i) {
            const auto it = by_id.find(panel.row_ids[i]);
            if (it == by_id.end())
                throw Error(Errc::config_invalid,
                            "benchmark file has no row for \"" + panel.row_ids[i] + "\"");
            benchmark[i] = it->second;
        }
        cluster_labels = label_clusters(clustering, benchmark);
        for (const auto& warning : cluster_labels.warnings) stage.warnings.push_back(warning);

        detail::write_stream_file(out_dir / "clusters.csv", [&](std::ostream& s) {
            write_clusters_csv(s, panel.row_ids, clustering, cluster_labels);
        });
        detail::write_stream_file(out_dir / "centroids.csv", [&](std::ostream& s) {
            write_centroids_csv(s, normalized.indicator_names, clustering);
        });
        summary.outputs.push_back("clusters.csv");
        summary.outputs.push_back("centroids.csv");
    });

    DeviationTable deviations;
    ok = ok && detail::run_stage(summary, "deviation", exit_stage_failure, [&](StageStatus&) {
        deviations = indicator_deviation(panel);
        detail::write_stream_file(out_dir / "deviations.csv", [&](std::ostream& s) {
            write_deviation_csv(s, deviations);
        });
        summary.outputs.push_back("deviations.csv");
    });

    Json headline = Json::object();
    if (ok) {
        Json decisions = Json::array();
        for (std::size_t i = 0; i < panel.n(); ++i) {
            Json d = Json::object();
            d.set("id", panel.row_ids[i]);
            d.set("cluster", clustering.assignment[i]);
            d.set("build", cluster_labels.labels[i] > 0);
            decisions.push(std::move(d));
        }
        headline.set("decisions", std::move(decisions));
        headline.set("inertia", clustering.inertia);
        headline.set("iterations", clustering.iterations);
        headline.set("positive_cluster", cluster_labels.positive_cluster);
        headline.set("cluster_mean_benchmark", Json(cluster_labels.cluster_mean_benchmark));
        headline.set("k_percent", cfg.k_percent);

        Json deviation_json = Json::object();
        Json means = Json::object();
        for (std::size_t j = 0; j < deviations.indicator_names.size(); ++j)
            means.set(deviations.indicator_names[j], deviations.means[j]);
        deviation_json.set("means", std::move(means));
        deviation_json.set("file", "deviations.csv");
        headline.set("deviation", std::move(deviation_json));
    }
    summary.headline = std::move(headline);
    summary.outputs.push_back("summary.json");
    write_summary(summary, config);
    return summary;
}

/// TOA pipeline: TOPSIS-ORM weights from the data, AHP weights from the
/// comparison matrix (gated on CR <= 0.1), combined scoring with gradient
/// classes and protect decisions, optional Gaussian robustness study.
inline RunSummary run_preserve(const RunConfig& config) {
    const auto& cfg = config.preserve;
    RunSummary summary;
    summary.pipeline = "preserve";
    const std::filesystem::path out_dir(config.out_dir);
    std::filesystem::create_directories(out_dir);

    IndicatorPanel panel;
    NormalizedPanel normalized;
    WeightVector orm;
    AhpResult ahp;
    WeightVector combined;
    ScoreReport scores;
    RobustnessReport stability;

    bool ok = detail::run_stage(summary, "load", exit_stage_failure, [&](StageStatus& stage) {
        panel = load_panel_file(cfg.panel_path, cfg.schema);
        normalized = normalize(panel);
        for (const auto& warning : normalized.warnings) stage.warnings.push_back(warning);
        detail::write_stream_file(out_dir / "normalized.csv",
                                  [&](std::ostream& s) { write_panel_csv(s, normalized); });
        summary.outputs.push_back("normalized.csv");
    });

    ok = ok && detail::run_stage(summary, "topsis_orm", exit_stage_failure, [&](StageStatus&) {
        orm = orm_weights(indicator_importance(interaction_matrix(normalized)));
    });

    ok = ok && detail::run_stage(summary, "ahp", exit_stage_failure, [&](StageStatus& stage) {
        std::ifstream in(cfg.ahp_matrix_path);
        if (!in) throw Error(Errc::io_error, "cannot open \"" + cfg.ahp_matrix_path + "\"");
        const auto matrix = load_ahp_matrix(in);
        if (matrix.rows() != normalized.m())
            throw Error(Errc::dimension_mismatch,
                        "comparison matrix is " + std::to_string(matrix.rows()) + "x" +
                            std::to_string(matrix.cols()) + " but the panel has " +
                            std::to_string(normalized.m()) + " indicators");
        ahp = ahp_weights(matrix);
        if (!ahp.consistent) {
            if (!cfg.allow_inconsistent)
                throw Error(Errc::inconsistent_matrix,
                            "comparison matrix fails the consistency test: CR = " +
                                format_double(ahp.cr) + " > 0.1");
            stage.warnings.push_back("comparison matrix is inconsistent (CR = " +
                                     format_double(ahp.cr) + "), continuing as requested");
        }
    });

    ok = ok && detail::run_stage(summary, "score", exit_stage_failure, [&](StageStatus&) {
        WeightVector ahp_vector{.weights = ahp.weights, .kind = WeightVector::Kind::ahp};
        combined = combine_weights(orm, ahp_vector, cfg.alpha);
        scores = score(normalized, combined);

        detail::write_stream_file(out_dir / "weights.csv", [&](std::ostream& s) {
            write_weights_csv(s, normalized.indicator_names, orm, ahp, combined);
        });
        detail::write_stream_file(out_dir / "scores.csv",
                                  [&](std::ostream& s) { write_scores_csv(s, scores); });
        summary.outputs.push_back("weights.csv");
        summary.outputs.push_back("scores.csv");
        if (config.emit_svg) {
            std::vector<std::string> labels;
            std::vector<double> values;
            for (const auto& entry : scores.entries) {
                labels.push_back(entry.id);
                values.push_back(entry.score);
            }
            detail::write_text_file(out_dir / "scores.svg",
                                    svg_bar_chart("Preservation scores", labels, values, 0.5));
            summary.outputs.push_back("scores.svg");
        }
    });

    if (ok && cfg.run_robustness) {
        ok = detail::run_stage(summary, "robustness", exit_stage_failure, [&](StageStatus&) {
            WeightVector ahp_vector{.weights = ahp.weights, .kind = WeightVector::Kind::ahp};
            RobustnessOptions options;
            options.sigma = cfg.sigma;
            options.trials = cfg.trials;
            options.seed = config.seed;
            options.recompute_topsis = cfg.recompute_topsis;
            options.clamp = cfg.clamp;
            options.alpha = cfg.alpha;
            options.threads = config.threads;
            stability = robustness(normalized, ahp_vector, options);

            Json doc = Json::object();
            doc.set("sigma", stability.sigma);
            doc.set("trials", stability.trials);
            doc.set("recompute_topsis", cfg.recompute_topsis);
            doc.set("clamp", cfg.clamp);
            doc.set("spearman_mean", stability.spearman_mean);
            doc.set("total_decision_flips", stability.total_flips);
            Json entities = Json::array();
            for (std::size_t i = 0; i < stability.ids.size(); ++i) {
                Json e = Json::object();
                e.set("id", stability.ids[i]);
                e.set("baseline_score", stability.baseline_scores[i]);
                e.set("score_mean", stability.score_mean[i]);
                e.set("score_stddev", stability.score_stddev[i]);
                e.set("decision_flips", stability.decision_flips[i]);
                entities.push(std::move(e));
            }
            doc.set("entities", std::move(entities));
            detail::write_text_file(out_dir / "robustness.json", doc.dump());
            summary.outputs.push_back("robustness.json");
            if (config.emit_svg) {
                detail::write_text_file(
                    out_dir / "robustness.svg",
                    svg_bar_chart("Scores before (bars) and after (markers) perturbation",
                                  stability.ids, stability.baseline_scores, 0.5,
                                  stability.score_mean));
                summary.outputs.push_back("robustness.svg");
            }
        });
    }

    bool scored = false;
    for (const auto& stage : summary.stages)
        scored = scored || (stage.name == "score" && stage.status == "ok");

    Json headline = Json::object();
    if (scored) {
        Json weights_json = Json::object();
        weights_json.set("orm", Json(orm.weights));
        weights_json.set("ahp", Json(ahp.weights));
        weights_json.set("combined", Json(combined.weights));
        weights_json.set("alpha", cfg.alpha);
        headline.set("weights", std::move(weights_json));

        Json ahp_json = Json::object();
        ahp_json.set("lambda_max", ahp.lambda_max);
        ahp_json.set("ci", ahp.ci);
        ahp_json.set("cr", ahp.cr);
        ahp_json.set("consistent", ahp.consistent);
        headline.set("ahp", std::move(ahp_json));

        Json scores_json = Json::array();
        for (const auto& entry : scores.entries) {
            Json e = Json::object();
            e.set("id", entry.id);
            e.set("score", entry.score);
            e.set("gradient", gradient_name(entry.gradient));
            e.set("protect", entry.protect);
            scores_json.push(std::move(e));
        }
        headline.set("scores", std::move(scores_json));
        if (cfg.run_robustness && ok) {
            Json r = Json::object();
            r.set("spearman_mean", stability.spearman_mean);
            r.set("total_decision_flips", stability.total_flips);
            headline.set("robustness", std::move(r));
        }
    }
    summary.headline = std::move(headline);
    summary.outputs.push_back("summary.json");
    write_summary(summary, config);
    return summary;
}

inline RunSummary run_pipeline(const RunConfig& config) {
    if (config.pipeline == "insure") return run_insure(config);
    if (config.pipeline == "develop") return run_develop(config);
    return run_preserve(config);
}

} // namespace climarisk

#endif // CLIMARISK_PIPELINE_HPP
