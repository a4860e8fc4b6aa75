// Command-line front end. Exit codes:
//   0  success (for verify: every applicable flag passed)
//   1  verification flags failed
//   2  usage or configuration problem
//   3  runtime stage failure (numeric, resource, regime, estimate)

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "smalldev/config.hpp"
#include "smalldev/io.hpp"
#include "smalldev/pipeline.hpp"
#include "smalldev/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> samples;
    std::optional<std::string> out_dir;
    bool json_output = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "run configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "override run.seed");
    cmd->add_option("--samples", args.samples, "override run.samples");
    cmd->add_option("-o,--out", args.out_dir, "override output.dir");
    cmd->add_flag("--json", args.json_output, "print the full result envelope as JSON");
}

smalldev::RunConfig load(const CommonArgs& args) {
    smalldev::RunConfig cfg = smalldev::load_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (args.samples) cfg.samples = *args.samples;
    if (args.out_dir) cfg.output_dir = *args.out_dir;
    return cfg;
}

void print_constants(const nlohmann::json& env) {
    const auto& c = env.at("constants");
    std::printf("p            %s\n", smalldev::format_double(c.at("p").get<double>()).c_str());
    std::printf("B_p          %s\n", smalldev::format_double(c.at("B_p").get<double>()).c_str());
    std::printf("C            %s\n", smalldev::format_double(c.at("C").get<double>()).c_str());
    std::printf("delta_mu     %s\n",
                smalldev::format_double(c.at("delta_mu").get<double>()).c_str());
    std::printf("sd_exponent  %s\n",
                smalldev::format_double(c.at("sd_exponent").get<double>()).c_str());
    std::printf("quadrature   grid=%lld rel_change=%s\n",
                static_cast<long long>(c.at("quadrature").at("grid").get<std::int64_t>()),
                smalldev::format_double(
                    c.at("quadrature").at("rel_change").get<double>())
                    .c_str());
    if (c.at("heavy_tail_warning").get<bool>())
        std::printf("warning: p < 1 and the model cannot certify the stronger "
                    "summability the asymptotics assume\n");
}

void print_spectrum(const nlohmann::json& env) {
    if (!env.contains("spectrum")) return;
    std::printf("%8s %10s %14s %14s %10s\n", "N", "modes", "lambda_1", "c_hat", "gap");
    for (const auto& row : env.at("spectrum")) {
        std::printf("%8d %10lld %14.6g %14.6g %10.4g\n", row.at("N").get<int>(),
                    static_cast<long long>(row.at("modes").get<std::int64_t>()),
                    row.at("lambda_1").get<double>(),
                    row.at("fit").at("c_hat").get<double>(), row.at("gap").get<double>());
    }
}

void print_rows(const nlohmann::json& env) {
    if (!env.contains("rows")) return;
    std::printf("%8s %8s %-22s %14s %12s %10s\n", "N", "eps", "method", "log_prob",
                "std_err", "ratio");
    for (const auto& row : env.at("rows")) {
        std::printf("%8d %8.4g %-22s %14.6f %12s %10.4f\n", row.at("N").get<int>(),
                    row.at("eps").get<double>(),
                    row.at("method").get<std::string>().c_str(),
                    row.at("log_prob").get<double>(),
                    row.contains("std_err")
                        ? smalldev::format_double(row.at("std_err").get<double>()).c_str()
                        : "-",
                    row.at("ratio").get<double>());
    }
    for (const auto& skip : env.value("regime_skipped", nlohmann::json::array()))
        std::printf("skipped (outside small-deviation regime): N=%d eps=%s method=%s\n",
                    skip.at("N").get<int>(),
                    smalldev::format_double(skip.at("eps").get<double>()).c_str(),
                    skip.at("method").get<std::string>().c_str());
    for (const auto& bad : env.value("failed", nlohmann::json::array()))
        std::printf("failed: N=%d eps=%s method=%s: %s\n", bad.at("N").get<int>(),
                    smalldev::format_double(bad.at("eps").get<double>()).c_str(),
                    bad.at("method").get<std::string>().c_str(),
                    bad.at("error").get<std::string>().c_str());
}

void print_flags(const nlohmann::json& env) {
    if (!env.contains("flags")) return;
    for (const auto& [name, fl] : env.at("flags").items()) {
        const bool applicable = fl.value("applicable", false);
        std::printf("%-20s %s\n", name.c_str(),
                    !applicable        ? "n/a"
                    : fl.value("pass", false) ? "pass"
                                              : "FAIL");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted moving-average small-deviation toolkit"};
    app.set_version_flag("--version", smalldev::version);
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* cmd_theory = app.add_subcommand("theory", "closed-form constants");
    CLI::App* cmd_spectrum =
        app.add_subcommand("spectrum", "truncated-operator eigenvalues and decay fit");
    CLI::App* cmd_smallball =
        app.add_subcommand("smallball", "small-deviation probability estimates");
    CLI::App* cmd_verify =
        app.add_subcommand("verify", "full pipeline with verification flags");
    for (CLI::App* cmd : {cmd_theory, cmd_spectrum, cmd_smallball, cmd_verify})
        add_common(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const smalldev::RunConfig cfg = load(args);
        nlohmann::json env;
        if (cmd_theory->parsed()) {
            env = smalldev::run_theory(cfg);
        } else if (cmd_spectrum->parsed()) {
            env = smalldev::run_spectrum(cfg);
        } else if (cmd_smallball->parsed()) {
            env = smalldev::run_smallball(cfg);
        } else {
            env = smalldev::run_verify(cfg);
        }

        if (args.json_output) {
            std::printf("%s\n", env.dump(2).c_str());
        } else {
            print_constants(env);
            print_spectrum(env);
            print_rows(env);
            print_flags(env);
        }

        if (cmd_verify->parsed() && !smalldev::all_flags_pass(env)) {
            std::fprintf(stderr, "verification failed\n");
            return 1;
        }
        return 0;
    } catch (const smalldev::StageError& e) {
        std::fprintf(stderr, "error in %s stage: %s\n", e.stage.c_str(), e.what());
        return 3;
    } catch (const smalldev::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const smalldev::DomainError& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return 2;
    } catch (const smalldev::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 3;
    }
}
