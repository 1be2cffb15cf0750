#include "glrds/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "glrds/baselines.hpp"
#include "glrds/rals.hpp"

namespace glrds {

namespace {

const std::vector<std::string> kAlgorithms{"glrds", "full_rls", "eig", "mmse_oracle"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) {
        out.push_back(trim(item));
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw std::invalid_argument("invalid value for '" + key + "': '" + value + "'");
}

double to_double(const std::string& key, const std::string& v, bool finite = true) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        bad_value(key, v);
    }
    if (used != v.size() || (finite && !std::isfinite(out))) {
        bad_value(key, v);
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        bad_value(key, v);
    }
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        bad_value(key, v);
    }
}

std::size_t to_size(const std::string& key, const std::string& v) {
    return static_cast<std::size_t>(to_u64(key, v));
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") {
        return true;
    }
    if (v == "false" || v == "0") {
        return false;
    }
    bad_value(key, v);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& f) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += (i ? "," : "") + f(items[i]);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Key {
    Setter set;
    Getter get;
};

template <typename Field>
Key size_key(Field field) {
    return {[field](ExperimentConfig& c, const std::string& k, const std::string& v) {
                field(c) = to_size(k, v);
            },
            [field](ExperimentConfig c) { return std::to_string(field(c)); }};
}

template <typename Field>
Key double_key(Field field) {
    return {[field](ExperimentConfig& c, const std::string& k, const std::string& v) {
                field(c) = to_double(k, v);
            },
            [field](ExperimentConfig c) { return fmt(field(c)); }};
}

template <typename Field>
Key bool_key(Field field) {
    return {[field](ExperimentConfig& c, const std::string& k, const std::string& v) {
                field(c) = to_bool(k, v);
            },
            [field](ExperimentConfig c) { return std::string(field(c) ? "true" : "false"); }};
}

// Ordered so format_config output is stable.
const std::vector<std::pair<std::string, Key>>& keys() {
    using C = ExperimentConfig;
    static const std::vector<std::pair<std::string, Key>> table{
        {"users", size_key([](C& c) -> std::size_t& { return c.scenario.geometry.users; })},
        {"spreading_gain",
         size_key([](C& c) -> std::size_t& { return c.scenario.geometry.spreading_gain; })},
        {"antennas", size_key([](C& c) -> std::size_t& { return c.scenario.geometry.antennas; })},
        {"channel_length",
         size_key([](C& c) -> std::size_t& { return c.scenario.geometry.channel_length; })},
        {"snr_db", double_key([](C& c) -> double& { return c.scenario.snr_db; })},
        {"power_std_db", double_key([](C& c) -> double& { return c.scenario.power_std_db; })},
        {"jammer", bool_key([](C& c) -> bool& { return c.scenario.jammer; })},
        {"jammer_offset_db", double_key([](C& c) -> double& { return c.scenario.jammer_offset_db; })},
        {"jammer_doa", bool_key([](C& c) -> bool& { return c.scenario.jammer_doa; })},
        {"noise", bool_key([](C& c) -> bool& { return c.scenario.noise; })},
        {"isi", bool_key([](C& c) -> bool& { return c.scenario.isi; })},
        {"fading", bool_key([](C& c) -> bool& { return c.scenario.channel.fading; })},
        {"doppler", double_key([](C& c) -> double& { return c.scenario.channel.doppler; })},
        {"sinusoids", size_key([](C& c) -> std::size_t& { return c.scenario.channel.sinusoids; })},
        {"path_powers_db",
         {[](C& c, const std::string& k, const std::string& v) {
              std::vector<double> out;
              for (const auto& item : split(v, ',')) {
                  out.push_back(to_double(k, item));
              }
              c.scenario.channel.powers_db = out;
          },
          [](const C& c) { return join(c.scenario.channel.powers_db, fmt); }}},
        {"rank", size_key([](C& c) -> std::size_t& { return c.glrds.rank; })},
        {"basis_length", size_key([](C& c) -> std::size_t& { return c.glrds.basis_length; })},
        {"branches", size_key([](C& c) -> std::size_t& { return c.glrds.branches; })},
        {"iterations", size_key([](C& c) -> std::size_t& { return c.glrds.iterations; })},
        {"lambda", double_key([](C& c) -> double& { return c.glrds.lambda; })},
        {"delta", double_key([](C& c) -> double& { return c.glrds.delta; })},
        {"algorithms",
         {[](C& c, const std::string&, const std::string& v) { c.algorithms = split(v, ','); },
          [](const C& c) { return join(c.algorithms, [](const std::string& s) { return s; }); }}},
        {"receiver",
         {[](C& c, const std::string& k, const std::string& v) {
              if (v == "joint") {
                  c.joint = true;
              } else if (v == "per_user") {
                  c.joint = false;
              } else {
                  bad_value(k, v);
              }
          },
          [](const C& c) { return std::string(c.joint ? "joint" : "per_user"); }}},
        {"eig_interval", size_key([](C& c) -> std::size_t& { return c.eig_interval; })},
        {"packet_length", size_key([](C& c) -> std::size_t& { return c.packet_length; })},
        {"training_length", size_key([](C& c) -> std::size_t& { return c.training_length; })},
        {"runs", size_key([](C& c) -> std::size_t& { return c.runs; })},
        {"seed",
         {[](C& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); },
          [](const C& c) { return std::to_string(c.seed); }}},
        {"ranks",
         {[](C& c, const std::string& k, const std::string& v) {
              std::vector<std::size_t> out;
              for (const auto& item : split(v, ',')) {
                  out.push_back(to_size(k, item));
              }
              c.ranks = out;
          },
          [](const C& c) {
              return join(c.ranks, [](std::size_t d) { return std::to_string(d); });
          }}},
        {"steady_fraction", double_key([](C& c) -> double& { return c.steady_fraction; })},
        {"threads", size_key([](C& c) -> std::size_t& { return c.threads; })},
    };
    return table;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t run_seed(std::uint64_t seed, std::size_t run) {
    return splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(run));
}

GlrdsParams glrds_params(const ExperimentConfig& c, std::size_t rank, std::size_t outputs) {
    GlrdsParams p;
    p.ambient = c.scenario.geometry.dim();
    p.rank = rank;
    p.outputs = outputs;
    p.basis_length = c.glrds.basis_length;
    p.branches = c.glrds.branches;
    p.lambda = c.glrds.lambda;
    p.iterations = c.glrds.iterations;
    p.delta = c.glrds.delta;
    return p;
}

// Runs fn(0..count-1) on up to `threads` workers. Results go to per-index
// slots, so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

// One adaptive receiver under the training / decision-directed protocol.
class Receiver {
public:
    virtual ~Receiver() = default;
    /// Returns the a priori estimate of all K symbols, then adapts.
    virtual CVec process(const CVec& r, const CVec& x, bool training) = 0;
};

class GlrdsReceiver : public Receiver {
public:
    GlrdsReceiver(const ExperimentConfig& c, std::size_t rank) : users_(c.scenario.geometry.users) {
        if (c.joint) {
            filters_.emplace_back(glrds_params(c, rank, users_));
        } else {
            for (std::size_t k = 0; k < users_; ++k) {
                filters_.emplace_back(glrds_params(c, rank, 1));
            }
        }
    }

    CVec process(const CVec& r, const CVec& x, bool training) override {
        const GlrdsFilter::DesiredFn decide = [](std::size_t, const CVec& prev) {
            return qpsk_decide(prev);
        };
        CVec out(static_cast<Eigen::Index>(users_));
        if (filters_.size() == 1 && users_ > 1) {
            out = filters_[0].predict(r);
            training ? filters_[0].step(r, x) : filters_[0].step(r, decide);
            return out;
        }
        for (std::size_t k = 0; k < filters_.size(); ++k) {
            auto& f = filters_[k];
            const auto kk = static_cast<Eigen::Index>(k);
            out(kk) = f.predict(r)(0);
            if (training) {
                f.step(r, CVec(x.segment(kk, 1)));
            } else {
                f.step(r, decide);
            }
        }
        return out;
    }

private:
    std::size_t users_;
    std::vector<GlrdsFilter> filters_;
};

class RlsReceiver : public Receiver {
public:
    explicit RlsReceiver(const ExperimentConfig& c)
        : rls_(c.scenario.geometry.dim(), c.scenario.geometry.users, c.glrds.lambda, c.glrds.delta) {}

    CVec process(const CVec& r, const CVec& x, bool training) override {
        const CVec est = rls_.predict(r);
        rls_.step(r, training ? x : qpsk_decide(est));
        return est;
    }

private:
    FullRankRls rls_;
};

}  // namespace

bool ExperimentConfig::uses(const std::string& algo) const {
    return std::find(algorithms.begin(), algorithms.end(), algo) != algorithms.end();
}

void ExperimentConfig::validate() const {
    scenario.geometry.validate();
    const std::size_t M = scenario.geometry.dim();
    require(runs >= 1, "runs must be at least 1");
    require(packet_length >= 1, "packet length must be positive");
    require(training_length <= packet_length, "training length exceeds the packet length");
    require(steady_fraction > 0.0 && steady_fraction <= 1.0, "steady_fraction must lie in (0, 1]");
    require(eig_interval >= 1, "eig_interval must be positive");
    require(scenario.snr_db == scenario.snr_db, "SNR must be a number");
    require(scenario.power_std_db >= 0.0, "power_std_db must be non-negative");
    require(!algorithms.empty(), "at least one algorithm is required");
    for (const auto& a : algorithms) {
        require(std::find(kAlgorithms.begin(), kAlgorithms.end(), a) != kAlgorithms.end(),
                "unknown algorithm '" + a + "' (known: glrds, full_rls, eig, mmse_oracle)");
    }
    require(!ranks.empty(), "rank sweep is empty");
    auto ranks_all = ranks;
    ranks_all.push_back(glrds.rank);
    for (auto D : ranks_all) {
        require(D >= 1 && D <= M, "rank " + std::to_string(D) + " outside 1.." + std::to_string(M));
        const auto p = glrds_params(*this, D, 1);
        glrds::validate(p);
        // Throws if a branch pattern does not fit the observation.
        for (std::size_t b = 0; b < p.branches; ++b) {
            branch_patterns(b, M, D, p.basis_length, p.branches);
        }
    }
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
    std::map<std::string, const Key*> lookup;
    for (const auto& [name, key] : keys()) {
        lookup[name] = &key;
    }
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = lookup.find(key);
        if (it == lookup.end()) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        it->second->set(base, key, value);
    }
    base.validate();
    return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config(text.str(), std::move(base));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

std::string format_config(const ExperimentConfig& config) {
    std::string out;
    for (const auto& [name, key] : keys()) {
        out += name + " = " + key.get(config) + "\n";
    }
    return out;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) {
        return s;
    }
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    s.mean = sum / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    }
    return s;
}

double steady_state_mse(const std::vector<double>& sq_error, double fraction) {
    require(!sq_error.empty(), "empty error trace");
    require(fraction > 0.0 && fraction <= 1.0, "fraction must lie in (0, 1]");
    const auto n = sq_error.size();
    const auto tail = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))), 1, n);
    double sum = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) {
        sum += sq_error[i];
    }
    return sum / static_cast<double>(tail);
}

RunTrace simulate_run(const ExperimentConfig& config, std::size_t run,
                      const std::vector<std::size_t>& ranks) {
    Scenario scenario(config.scenario, run_seed(config.seed, run));
    const std::size_t P = config.packet_length;
    const std::size_t K = config.scenario.geometry.users;
    const std::size_t M = scenario.dim();
    const auto symbols = scenario.draw_symbols(P);
    std::vector<CVec> received(P);
    for (std::size_t i = 0; i < P; ++i) {
        const CVec none;
        received[i] = scenario.received_vector(i, symbols[i], i > 0 ? symbols[i - 1] : none,
                                               i + 1 < P ? symbols[i + 1] : none);
    }

    RunTrace trace;
    std::vector<std::unique_ptr<Receiver>> receivers;
    if (config.uses("glrds")) {
        for (auto D : ranks) {
            trace.labels.push_back("glrds@" + std::to_string(D));
            receivers.push_back(std::make_unique<GlrdsReceiver>(config, D));
        }
    }
    if (config.uses("full_rls")) {
        trace.labels.push_back("full_rls");
        receivers.push_back(std::make_unique<RlsReceiver>(config));
    }
    std::unique_ptr<EigenReceiver> eig;
    if (config.uses("eig")) {
        for (auto D : ranks) {
            trace.labels.push_back("eig@" + std::to_string(D));
        }
        eig = std::make_unique<EigenReceiver>(M, K, ranks, config.glrds.lambda, config.glrds.delta,
                                              config.eig_interval);
    }

    const std::size_t R = trace.labels.size();
    trace.sq_error.assign(R, std::vector<double>(P, 0.0));
    trace.bit_errors.assign(R, std::vector<unsigned>(P, 0U));
    const double inv_k = 1.0 / static_cast<double>(K);

    auto record = [&](std::size_t slot, std::size_t i, const CVec& est) {
        const CVec& x = symbols[i];
        trace.sq_error[slot][i] = (x - est).squaredNorm() * inv_k;
        unsigned bits = 0;
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            bits += qpsk_bit_errors(qpsk_decide(est(k)), x(k));
        }
        trace.bit_errors[slot][i] = bits;
    };

    for (std::size_t i = 0; i < P; ++i) {
        const bool training = i < config.training_length;
        const CVec& r = received[i];
        std::size_t slot = 0;
        for (auto& rx : receivers) {
            record(slot++, i, rx->process(r, symbols[i], training));
        }
        if (eig) {
            std::vector<CVec> desired(ranks.size());
            for (std::size_t k = 0; k < ranks.size(); ++k) {
                const CVec est = eig->predict(r, k);
                record(slot++, i, est);
                desired[k] = training ? symbols[i] : qpsk_decide(est);
            }
            eig->update(r, desired);
        }
    }

    if (config.uses("mmse_oracle")) {
        const auto cov = estimate_covariances(received, symbols);
        const CMat full = eigen_subspace(cov.R, M);
        for (auto D : ranks) {
            trace.oracle_mse.push_back(
                mmse_value(full.leftCols(static_cast<Eigen::Index>(D)), cov) * inv_k);
        }
    }
    return trace;
}

std::vector<CurvePoint> run_mse_vs_rank(const ExperimentConfig& config) {
    config.validate();
    const std::size_t runs = config.runs;
    std::vector<RunTrace> traces(runs);
    parallel_for(runs, config.threads,
                 [&](std::size_t run) { traces[run] = simulate_run(config, run, config.ranks); });

    std::vector<CurvePoint> out;
    out.push_back({0.0, "scenario", "snr_db", config.scenario.snr_db, 0.0, runs, config.seed});

    auto emit = [&](double x, const std::string& algo, const std::vector<double>& per_run) {
        const Summary s = summarize(per_run);
        out.push_back({x, algo, "mse", s.mean, s.stderr_, runs, config.seed});
        const double db = 10.0 * std::log10(s.mean);
        const double db_err = s.mean > 0.0 ? 10.0 / std::log(10.0) * s.stderr_ / s.mean : 0.0;
        out.push_back({x, algo, "mse_db", db, db_err, runs, config.seed});
    };
    auto column = [&](const std::string& label) {
        std::vector<double> per_run(runs);
        for (std::size_t run = 0; run < runs; ++run) {
            const auto& t = traces[run];
            const auto pos = std::find(t.labels.begin(), t.labels.end(), label) - t.labels.begin();
            per_run[run] = steady_state_mse(t.sq_error[static_cast<std::size_t>(pos)],
                                            config.steady_fraction);
        }
        return per_run;
    };

    std::vector<double> rls;
    if (config.uses("full_rls")) {
        rls = column("full_rls");
    }
    for (std::size_t n = 0; n < config.ranks.size(); ++n) {
        const auto D = config.ranks[n];
        const double x = static_cast<double>(D);
        for (const auto& algo : config.algorithms) {
            if (algo == "glrds" || algo == "eig") {
                emit(x, algo, column(algo + "@" + std::to_string(D)));
            } else if (algo == "full_rls") {
                emit(x, algo, rls);
            } else if (algo == "mmse_oracle") {
                std::vector<double> per_run(runs);
                for (std::size_t run = 0; run < runs; ++run) {
                    per_run[run] = traces[run].oracle_mse[n];
                }
                emit(x, algo, per_run);
            }
        }
    }
    return out;
}

std::vector<CurvePoint> run_ber_vs_symbols(const ExperimentConfig& config) {
    config.validate();
    const std::size_t runs = config.runs;
    const std::size_t P = config.packet_length;
    const double bits = 2.0 * static_cast<double>(config.scenario.geometry.users);
    ExperimentConfig cfg = config;
    // The oracle has no per-symbol decisions.
    cfg.algorithms.erase(std::remove(cfg.algorithms.begin(), cfg.algorithms.end(), "mmse_oracle"),
                         cfg.algorithms.end());

    std::vector<RunTrace> traces(runs);
    parallel_for(runs, cfg.threads, [&](std::size_t run) {
        traces[run] = simulate_run(cfg, run, {cfg.glrds.rank});
    });

    std::vector<CurvePoint> out;
    out.push_back({0.0, "scenario", "snr_db", cfg.scenario.snr_db, 0.0, runs, cfg.seed});
    if (traces.empty() || traces[0].labels.empty()) {
        return out;
    }
    const auto& labels = traces[0].labels;
    std::vector<double> per_run(runs);
    for (std::size_t i = 0; i < P; ++i) {
        for (std::size_t slot = 0; slot < labels.size(); ++slot) {
            for (std::size_t run = 0; run < runs; ++run) {
                per_run[run] = traces[run].bit_errors[slot][i] / bits;
            }
            const Summary s = summarize(per_run);
            const auto& label = labels[slot];
            const std::string algo = label.substr(0, label.find('@'));
            out.push_back({static_cast<double>(i + 1), algo, "ber", s.mean, s.stderr_, runs, cfg.seed});
        }
    }
    return out;
}

void write_csv(const std::vector<CurvePoint>& points, std::ostream& out) {
    out << "x,algo,metric,mean,stderr,runs,seed\n";
    for (const auto& p : points) {
        out << fmt(p.x) << ',' << p.algo << ',' << p.metric << ',' << fmt(p.mean) << ','
            << fmt(p.stderr_) << ',' << p.runs << ',' << p.seed << '\n';
    }
}

void emit_csv(const std::vector<CurvePoint>& points, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    write_csv(points, out);
    out.flush();
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

std::vector<CurvePoint> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "x,algo,metric,mean,stderr,runs,seed") {
        throw std::invalid_argument("missing or unexpected CSV header");
    }
    std::vector<CurvePoint> out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 7) {
            throw std::invalid_argument("CSV row needs 7 fields: " + line);
        }
        out.push_back({to_double("x", f[0]), f[1], f[2], to_double("mean", f[3], false),
                       to_double("stderr", f[4], false), to_size("runs", f[5]), to_u64("seed", f[6])});
    }
    return out;
}

}  // namespace glrds
