// Command-line front end: runs a figure scenario from a JSON configuration
// and writes CSV/JSON artifacts with a hashed manifest.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "paramode/errors.hpp"
#include "paramode/parallel.hpp"
#include "paramode/scenario.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

int run(const std::string& subcommand, const std::string& config_path, const std::string& out_dir,
        unsigned threads, double dt_override)
{
    using namespace paramode;
    try {
        if (subcommand == "validate") {
            const ValidationReport report = validate_config(config_path);
            if (!report.ok()) {
                for (const auto& e : report.errors)
                    std::cerr << "error: " << e << '\n';
                return exit_config;
            }
            std::cout << "OK\n" << report.config->normalized.dump(2) << '\n';
            return exit_ok;
        }
        const ScenarioConfig cfg = load_config(config_path);
        if (to_string(cfg.scenario) != subcommand) {
            std::cerr << "error: /scenario: configuration describes '" << to_string(cfg.scenario)
                      << "' but the subcommand is '" << subcommand << "'\n";
            return exit_config;
        }
        RunOptions opt;
        if (!out_dir.empty())
            opt.out_dir = out_dir;
        opt.threads = threads == 0 ? default_thread_count() : threads;
        if (dt_override > 0.0)
            opt.dt_override = dt_override;
        const RunResult res = run_scenario(cfg, opt);
        std::cout << "wrote " << res.artifacts.size() << " artifacts to " << res.directory.string() << '\n';
        return exit_ok;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"paramode: parametric normal-mode splitting simulator and fitter"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    unsigned threads = 0;
    double dt_override = 0.0;
    app.add_option("--threads", threads, "Cap on sweep parallelism (default: available cores)");

    const char* subcommands[][2] = {
        {"spectrum", "Steady-state reflection spectrum"},
        {"splitting-map", "Anti-crossing maps versus modulation frequency"},
        {"splitting-sweep", "Spectra versus modulation amplitude with Lambda fits"},
        {"beating", "Gaussian-pulse time traces versus coupling"},
        {"memory", "Storage and retrieval versus storage time"},
        {"flux-arch", "Mode frequencies versus DC flux with a joint fit"},
        {"fit", "Fit a measured or synthetic spectrum"},
        {"validate", "Validate a configuration and print it normalized"},
    };
    for (const auto& [name, help] : subcommands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Scenario configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory (overrides the configuration)");
        sub->add_option("--threads", threads, "Cap on sweep parallelism (default: available cores)");
        sub->add_option("--dt-override", dt_override, "Integration step in seconds")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }
    return run(app.get_subcommands().front()->get_name(), config_path, out_dir, threads, dt_override);
}
