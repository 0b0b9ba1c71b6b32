// bdcs: pilot design, Monte-Carlo sweeps and self-verification.
//
// Exit codes: 0 ok, 1 verification failure, 2 config error, 3 infeasible
// parameters.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "bdcs/config.hpp"
#include "bdcs/errors.hpp"
#include "bdcs/experiment.hpp"
#include "bdcs/pilot.hpp"
#include "bdcs/verify.hpp"

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kInfeasible = 3 };

int cmd_verify()
{
    const auto checks = bdcs::run_builtin_checks();
    const bdcs::CheckResult* first_failure = nullptr;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  (" << c.detail << ")\n";
        if (!c.passed && !first_failure)
            first_failure = &c;
    }
    if (first_failure) {
        std::cerr << "verification failed: " << first_failure->name << '\n';
        return kVerifyFailed;
    }
    return kOk;
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

struct DesignOptions
{
    std::string config;
    std::optional<std::string> scheme;
    std::optional<int> iterations;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

int cmd_design_pilots(const DesignOptions& opt)
{
    bdcs::RunConfig rc = bdcs::load_run_config(opt.config);
    if (opt.scheme)
        rc.spec.pilot_scheme = bdcs::parse_scheme(*opt.scheme);
    if (opt.iterations)
        rc.spec.pilot_iterations = *opt.iterations;
    if (opt.seed)
        rc.spec.seed = *opt.seed;
    if (opt.out)
        rc.pattern_path = *opt.out;

    const auto pilots =
        bdcs::design_pilots(rc.spec.base_config, rc.spec.pilot_scheme, rc.spec.pilot_iterations, rc.spec.seed);

    std::ostringstream pattern_text;
    bdcs::write_pilot_pattern(pattern_text, pilots.pattern);
    std::vector<bdcs::TraceRow> trace;
    for (std::size_t m = 0; m < pilots.design.mu_trace.size(); ++m)
        trace.push_back({bdcs::scheme_name(rc.spec.pilot_scheme), rc.spec.seed, static_cast<int>(m),
                         pilots.design.mu_trace[m]});
    std::ostringstream trace_text;
    bdcs::write_trace_csv(trace_text, trace);

    write_file(rc.pattern_path, pattern_text.str());
    write_file(rc.pattern_path + ".mu.csv", trace_text.str());
    std::cout << "wrote " << rc.pattern_path << " (mu = " << pilots.design.mu_trace.back() << ")\n";
    if (!rc.spec.base_config.common_support_valid())
        std::cerr << "warning: antenna spacing violates the common-support condition\n";
    return kOk;
}

int cmd_sweep(const std::string& config_path, std::optional<int> threads)
{
    bdcs::RunConfig rc = bdcs::load_run_config(config_path);
    if (threads)
        rc.spec.threads = *threads;
    const bdcs::ExperimentResult result = bdcs::run_experiment(rc.spec);

    std::ostringstream csv;
    if (rc.spec.sweep_variable == bdcs::SweepVariable::Iterations)
        bdcs::write_trace_csv(csv, result.traces);
    else
        bdcs::write_result_csv(csv, result.rows);

    std::ostringstream manifest;
    manifest << "# resolved run configuration\n" << bdcs::format_run_config(rc);
    if (rc.spec.sweep_variable != bdcs::SweepVariable::Iterations) {
        manifest << "\n# pilot pattern (mu = " << result.pattern_mu << ")\n";
        bdcs::write_pilot_pattern(manifest, result.pattern);
    }
    for (const auto& w : result.warnings)
        manifest << "# warning: " << w << '\n';
    std::size_t failed = 0;
    for (const auto& r : result.rows)
        failed += r.failed ? 1 : 0;
    if (failed)
        manifest << "# failed rows: " << failed << '\n';

    write_file(rc.results_path, csv.str());
    write_file(rc.resolved_manifest_path(), manifest.str());
    for (const auto& w : result.warnings)
        std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << rc.results_path << " and " << rc.resolved_manifest_path() << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Doubly selective MIMO-OFDM channel estimation: pilot design, sweeps, verification"};
    app.require_subcommand(0, 1);

    bool verify_flag = false;
    app.add_flag("--verify", verify_flag, "Run the built-in verification suite");
    bool inject_fault = false;
    app.add_flag("--inject-offset-sign-fault", inject_fault)->group("");

    DesignOptions design;
    auto* design_cmd = app.add_subcommand("design-pilots", "Design a pilot pattern and write it with its mu trace");
    design_cmd->add_option("--config", design.config, "Run configuration file")->required();
    design_cmd->add_option("--scheme", design.scheme, "equidistant | ga | bdso")
        ->check(CLI::IsMember({"equidistant", "ga", "bdso"}));
    design_cmd->add_option("--iterations", design.iterations, "BDSO iterations or GA generations");
    design_cmd->add_option("--seed", design.seed, "Root seed");
    design_cmd->add_option("--out", design.out, "Pattern file; the mu trace goes to <out>.mu.csv");

    std::string sweep_config;
    std::optional<int> threads;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a Monte-Carlo sweep and write CSV plus manifest");
    sweep_cmd->add_option("--config", sweep_config, "Run configuration file")->required();
    sweep_cmd->add_option("--threads", threads, "Worker cap (default: available parallelism)");

    auto* verify_cmd = app.add_subcommand("verify", "Run the built-in verification suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    bdcs::testing::set_offset_sign_fault(inject_fault);
    try {
        if (verify_flag || *verify_cmd)
            return cmd_verify();
        if (*design_cmd)
            return cmd_design_pilots(design);
        if (*sweep_cmd)
            return cmd_sweep(sweep_config, threads);
        std::cout << app.help();
        return kOk;
    } catch (const bdcs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const bdcs::ParameterError& e) {
        std::cerr << "infeasible parameters: " << e.what() << '\n';
        return kInfeasible;
    } catch (const bdcs::DimensionError& e) {
        std::cerr << "infeasible parameters: " << e.what() << '\n';
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
}
