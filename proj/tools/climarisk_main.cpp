// climarisk: batch CLI for the climate-risk decision toolkit.
//
// Subcommands mirror the three pipelines (insure, develop, preserve) plus a
// config validator. Exit codes: 0 ok, 1 stage failure, 2 invalid config,
// 3 consistency-gate failure.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "climarisk/climarisk.hpp"

namespace {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

LogLevel log_level_from_env() {
    const char* env = std::getenv("CLIMARISK_LOG");
    if (!env) return LogLevel::warn;
    const std::string value(env);
    if (value == "debug") return LogLevel::debug;
    if (value == "info") return LogLevel::info;
    if (value == "error") return LogLevel::error;
    return LogLevel::warn;
}

LogLevel g_log_level = LogLevel::warn;

void log_at(LogLevel level, const std::string& message) {
    static const char* names[] = {"debug", "info", "warn", "error"};
    if (level < g_log_level) return;
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], message.c_str());
}

struct CommonOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    unsigned threads = 1;
    bool allow_inconsistent = false;
    CLI::Option* seed_option = nullptr;
    CLI::Option* out_option = nullptr;
    CLI::Option* threads_option = nullptr;
};

void add_common_options(CLI::App* cmd, CommonOptions& options, bool with_gate_flag) {
    cmd->add_option("--config", options.config_path, "Path to the JSON run configuration")
        ->required();
    options.seed_option = cmd->add_option("--seed", options.seed, "Override the config seed (u64)");
    options.out_option = cmd->add_option("--out", options.out_dir, "Override the output directory");
    options.threads_option =
        cmd->add_option("--threads", options.threads, "Worker threads (default 1)");
    if (with_gate_flag)
        cmd->add_flag("--allow-inconsistent", options.allow_inconsistent,
                      "Continue past a failed AHP consistency test");
}

climarisk::RunConfig load_with_overrides(const CommonOptions& options,
                                         const std::string& expected_pipeline) {
    using climarisk::Errc;
    using climarisk::Error;
    auto config = climarisk::load_config_file(options.config_path);
    if (config.pipeline != expected_pipeline)
        throw Error(Errc::config_invalid, "config is for pipeline \"" + config.pipeline +
                                              "\", expected \"" + expected_pipeline + "\"");
    if (options.seed_option && options.seed_option->count()) {
        config.seed = options.seed;
        config.raw["seed"] = options.seed;
    }
    if (options.out_option && options.out_option->count()) {
        config.out_dir = options.out_dir;
        config.raw["out_dir"] = options.out_dir;
    }
    if (options.threads_option && options.threads_option->count()) {
        if (options.threads == 0)
            throw Error(Errc::config_invalid, "threads must be >= 1");
        config.threads = options.threads;
        config.raw["threads"] = options.threads;
    }
    if (options.allow_inconsistent) {
        config.preserve.allow_inconsistent = true;
        config.raw["ahp"]["allow_inconsistent"] = true;
    }
    return config;
}

int run_command(const CommonOptions& options, const std::string& pipeline) {
    using climarisk::Errc;
    using climarisk::Error;
    try {
        const auto config = load_with_overrides(options, pipeline);
        log_at(LogLevel::info, "running " + pipeline + " (seed " + std::to_string(config.seed) +
                                   ", out " + config.out_dir + ")");
        const auto summary = climarisk::run_pipeline(config);
        for (const auto& stage : summary.stages) {
            for (const auto& warning : stage.warnings)
                log_at(LogLevel::info, stage.name + ": " + warning);
            if (stage.status == "failed")
                log_at(LogLevel::error, stage.name + ": " + stage.error);
        }
        std::printf("%s: %s (summary: %s/summary.json)\n", pipeline.c_str(),
                    summary.exit_code == climarisk::exit_ok ? "ok" : "failed",
                    config.out_dir.c_str());
        return summary.exit_code;
    } catch (const Error& e) {
        log_at(LogLevel::error, e.what());
        std::fprintf(stderr, "%s\n", e.what());
        return e.code() == Errc::config_invalid ? climarisk::exit_config_invalid
                                                : climarisk::exit_stage_failure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return climarisk::exit_stage_failure;
    }
}

} // namespace

int main(int argc, char** argv) {
    g_log_level = log_level_from_env();

    CLI::App app{"climarisk: climate-risk insurance, development, and preservation toolkit"};
    app.require_subcommand(1);

    CommonOptions insure_options, develop_options, preserve_options, validate_options;

    auto* insure = app.add_subcommand("insure", "SSC insurance pipeline");
    auto* insure_run = insure->add_subcommand("run", "Run the insurance pipeline");
    add_common_options(insure_run, insure_options, false);

    auto* develop = app.add_subcommand("develop", "KSSC real-estate development pipeline");
    auto* develop_run = develop->add_subcommand("run", "Run the development pipeline");
    add_common_options(develop_run, develop_options, false);

    auto* preserve = app.add_subcommand("preserve", "TOA preservation pipeline");
    auto* preserve_run = preserve->add_subcommand("run", "Run the preservation pipeline");
    add_common_options(preserve_run, preserve_options, true);

    auto* validate = app.add_subcommand("validate", "Validate a config without running");
    validate->add_option("--config", validate_options.config_path, "Path to the JSON run configuration")
        ->required();

    auto* version_cmd = app.add_subcommand("version", "Print the tool version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e); // prints the message / help text
        // flag and usage mistakes fall under the invalid-config exit code
        return rc == 0 ? climarisk::exit_ok : climarisk::exit_config_invalid;
    }

    if (version_cmd->parsed()) {
        std::printf("climarisk %s\n", climarisk::version());
        return climarisk::exit_ok;
    }
    if (validate->parsed()) {
        try {
            const auto config = climarisk::load_config_file(validate_options.config_path);
            std::printf("config ok: pipeline %s\n", config.pipeline.c_str());
            return climarisk::exit_ok;
        } catch (const climarisk::Error& e) {
            std::fprintf(stderr, "%s\n", e.what());
            return climarisk::exit_config_invalid;
        }
    }
    if (insure_run->parsed()) return run_command(insure_options, "insure");
    if (develop_run->parsed()) return run_command(develop_options, "develop");
    if (preserve_run->parsed()) return run_command(preserve_options, "preserve");

    std::fprintf(stderr, "%s\n", app.help().c_str());
    return climarisk::exit_config_invalid;
}
