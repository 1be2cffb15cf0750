#pragma once

// Monte-Carlo experiment runner: MSE against rank and BER against received
// symbols, with a training prefix followed by decision-directed adaptation.
//
// Config files are flat `key = value` text with `#` comments. Every key
// mirrors a field below; unknown keys are rejected.
//
//   users, spreading_gain, antennas, channel_length       geometry
//   snr_db, power_std_db, jammer, jammer_offset_db,       scenario
//   jammer_doa, doppler, sinusoids, path_powers_db, isi
//   rank, basis_length, branches, iterations, lambda,     GLRDS
//   delta
//   algorithms, receiver, eig_interval                     receivers
//   packet_length, training_length, runs, seed, ranks,     protocol
//   steady_fraction, threads
//
// Lists are comma separated. Booleans accept true/false/1/0.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "glrds/dscdma.hpp"

namespace glrds {

struct GlrdsSettings {
    std::size_t rank = 4;
    std::size_t basis_length = 3;
    std::size_t branches = 4;
    std::size_t iterations = 2;
    double lambda = 0.999;
    double delta = 0.01;
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    GlrdsSettings glrds;
    std::vector<std::string> algorithms{"glrds", "full_rls", "eig", "mmse_oracle"};
    bool joint = false;  // one GLRDS with K outputs instead of one per user
    std::size_t eig_interval = 10;
    std::size_t packet_length = 1500;
    std::size_t training_length = 200;
    std::size_t runs = 20;
    std::uint64_t seed = 1;
    std::vector<std::size_t> ranks{1, 2, 3, 4, 5, 6, 7, 8};
    double steady_fraction = 0.2;  // tail of the packet averaged for steady-state MSE
    std::size_t threads = 0;       // 0: hardware concurrency

    [[nodiscard]] bool uses(const std::string& algo) const;
    void validate() const;
};

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
/// Inverse of parse_config; every key is written.
std::string format_config(const ExperimentConfig& config);

/// One CSV row: `x,algo,metric,mean,stderr,runs,seed`.
struct CurvePoint {
    double x = 0.0;
    std::string algo;
    std::string metric;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t runs = 0;
    std::uint64_t seed = 0;
};

struct Summary {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Mean and standard error of the mean, reduced in index order.
Summary summarize(const std::vector<double>& values);

/// Per-run outcome of one packet for a set of receivers.
struct RunTrace {
    std::vector<std::string> labels;            // receiver labels, e.g. "glrds@4"
    std::vector<std::vector<double>> sq_error;  // [receiver][symbol], per-user mean |x - x_hat|^2
    std::vector<std::vector<unsigned>> bit_errors;  // [receiver][symbol], over K users
    std::vector<double> oracle_mse;             // per rank, per-user mean, if requested
};

/// Simulates run `run` of the configuration for the given GLRDS/EIG ranks.
RunTrace simulate_run(const ExperimentConfig& config, std::size_t run,
                      const std::vector<std::size_t>& ranks);

/// Steady-state MSE of a trace row: mean of the final `fraction` of symbols.
double steady_state_mse(const std::vector<double>& sq_error, double fraction);

std::vector<CurvePoint> run_mse_vs_rank(const ExperimentConfig& config);
std::vector<CurvePoint> run_ber_vs_symbols(const ExperimentConfig& config);

void write_csv(const std::vector<CurvePoint>& points, std::ostream& out);
void emit_csv(const std::vector<CurvePoint>& points, const std::string& path);
std::vector<CurvePoint> read_csv(std::istream& in);

}  // namespace glrds
