// geodl: run class-incremental distillation experiments and property suites.
//
//   geodl run --config <path> [--out <dir>]
//   geodl verify <geometry|losses|sim|all>
//   geodl defaults
//
// Exit codes: 0 success, 1 run failure, 2 config error, 3 verification failure.
// GEODL_SEED overrides the configured master seed.

#include "geodl/config.hpp"
#include "geodl/runner.hpp"
#include "geodl/verify.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <iostream>

namespace {

constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitVerifyFailure = 3;

void apply_seed_override(geodl::ExperimentConfig& config) {
    const char* env = std::getenv("GEODL_SEED");
    if (env == nullptr || *env == '\0') return;
    std::uint64_t value = 0;
    const char* end = env + std::strlen(env);
    const auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec != std::errc() || ptr != end)
        throw geodl::ConfigError({std::string("GEODL_SEED: cannot parse \"") + env + "\" as an unsigned integer"});
    config.master_seed = value;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    geodl::ExperimentConfig config;
    try {
        config = geodl::load_config(config_path);
        apply_seed_override(config);
    } catch (const geodl::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfigError;
    }
    const std::string dir = out_dir.empty() ? config.output_path : out_dir;
    try {
        const auto records = geodl::run_and_write(config, dir);
        std::cerr << "wrote " << records.size() << " runs to " << dir << "/results.csv and "
                  << dir << "/summary.csv\n";
        for (const auto& row : geodl::summarize(records))
            std::cerr << "  " << geodl::to_string(row.mode) << ": A = " << geodl::format_fixed6(row.mean_avg_acc)
                      << ", F = " << geodl::format_fixed6(row.mean_forgetting) << " over " << row.n_seeds
                      << " seeds\n";
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kExitRunFailure;
    }
    return 0;
}

int cmd_verify(const std::string& suite_name) {
    const auto suite = geodl::parse_suite(suite_name);
    if (!suite) {
        std::cerr << "unknown suite \"" << suite_name << "\" (expected geometry, losses, sim or all)\n";
        return kExitVerifyFailure;
    }
    try {
        return geodl::print_report(std::cout, geodl::run_suite(*suite)) ? 0 : kExitVerifyFailure;
    } catch (const std::exception& e) {
        std::cout << "[FAIL] suite aborted: " << e.what() << '\n';
        return kExitVerifyFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geodesic-flow knowledge distillation for class-incremental learning"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Run every (mode, seed) pair of a config and write CSV results");
    run->add_option("--config", config_path, "Config file of `key = value` lines")->required();
    run->add_option("--out", out_dir, "Output directory (overrides output_path)");

    std::string suite = "all";
    auto* verify = app.add_subcommand("verify", "Run a property suite and report pass/fail per property");
    verify->add_option("suite", suite, "geometry, losses, sim or all")->required();

    auto* defaults = app.add_subcommand("defaults", "Print the default configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfigError;
    }

    if (*run) return cmd_run(config_path, out_dir);
    if (*verify) return cmd_verify(suite);
    if (*defaults) {
        std::cout << geodl::format_config(geodl::ExperimentConfig{});
        return 0;
    }
    return 0;
}
