#include "glrds/cli.hpp"

#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "glrds/experiment.hpp"
#include "glrds/selftest.hpp"

namespace glrds {

namespace {

struct RunOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> threads;
    std::string out;
    std::string algo;
    bool full_scale = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
    cmd->add_option("--config", o.config, "key = value configuration file");
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--runs", o.runs, "Monte-Carlo runs")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
    cmd->add_option("--out", o.out, "CSV output path (default: stdout)");
    cmd->add_option("--algo", o.algo, "comma separated subset of glrds,full_rls,eig,mmse_oracle");
    cmd->add_flag("--full-scale", o.full_scale, "200 runs");
}

ExperimentConfig resolve(const RunOptions& o) {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    std::string overrides;
    if (o.full_scale) overrides += "runs = 200\n";
    if (o.runs) overrides += "runs = " + std::to_string(*o.runs) + "\n";
    if (o.seed) overrides += "seed = " + std::to_string(*o.seed) + "\n";
    if (o.threads) overrides += "threads = " + std::to_string(*o.threads) + "\n";
    if (!o.algo.empty()) overrides += "algorithms = " + o.algo + "\n";
    return parse_config(overrides, c);
}

void deliver(const std::vector<CurvePoint>& points, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        write_csv(points, out);
    } else {
        emit_csv(points, path);
    }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"GLRDS adaptive reduced-rank receiver experiments", "glrds"};
    app.require_subcommand(1);

    RunOptions mse_opts;
    auto* mse = app.add_subcommand("mse-vs-rank", "steady-state MSE against rank");
    add_run_options(mse, mse_opts);

    RunOptions ber_opts;
    auto* ber = app.add_subcommand("ber-vs-symbols", "BER against received symbols");
    add_run_options(ber, ber_opts);

    std::uint64_t test_seed = 1;
    std::string test_out;
    auto* self = app.add_subcommand("selftest", "oracle-equivalence and invariant checks");
    self->add_option("--seed", test_seed, "seed for the randomized checks");
    self->add_option("--out", test_out, "CSV output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*mse) {
            const auto cfg = resolve(mse_opts);
            deliver(run_mse_vs_rank(cfg), mse_opts.out, out);
        } else if (*ber) {
            const auto cfg = resolve(ber_opts);
            deliver(run_ber_vs_symbols(cfg), ber_opts.out, out);
        } else if (*self) {
            const auto results = run_selftest(test_seed);
            bool ok = true;
            for (const auto& r : results) {
                err << (r.passed ? "PASS " : "FAIL ") << r.name << "  value=" << r.value
                    << " tol=" << r.tolerance << "  " << r.detail << "\n";
                ok = ok && r.passed;
            }
            deliver(selftest_points(results, test_seed), test_out, out);
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace glrds
