#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "glrds/baselines.hpp"
#include "glrds/experiment.hpp"
#include "glrds/rals.hpp"
#include "helpers.hpp"

using namespace glrds;

namespace {

ExperimentConfig tiny() {
    return parse_config(R"(
        # small packet for quick tests
        packet_length = 120
        training_length = 60
        runs = 3
        ranks = 2, 4
        branches = 2
        users = 3
        seed = 5
    )");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("default protocol") {
    const ExperimentConfig c;
    CHECK(c.packet_length == 1500);
    CHECK(c.training_length == 200);
    CHECK(c.runs == 20);
    CHECK(c.scenario.geometry.dim() == 75);
    CHECK(c.glrds.basis_length == 3);
    CHECK(c.glrds.iterations == 2);
    CHECK(c.glrds.branches == 4);
    CHECK(c.glrds.lambda == 0.999);
    CHECK(c.glrds.delta == 0.01);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config parsing") {
    const auto c = parse_config("snr_db = 8.5  # comment\nalgorithms = glrds, full_rls\n"
                                "receiver = joint\njammer = false\nranks = 1,3\n");
    CHECK(c.scenario.snr_db == 8.5);
    CHECK(c.algorithms == std::vector<std::string>{"glrds", "full_rls"});
    CHECK(c.joint);
    CHECK_FALSE(c.scenario.jammer);
    CHECK(c.ranks == std::vector<std::size_t>{1, 3});
    CHECK(c.uses("glrds"));
    CHECK_FALSE(c.uses("eig"));
}

TEST_CASE("config errors") {
    CHECK_THROWS_WITH_AS(parse_config("bogus = 1"), doctest::Contains("unknown key 'bogus'"),
                         std::invalid_argument);
    CHECK_THROWS_AS(parse_config("runs"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("runs = 0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("runs = -3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("snr_db = 12dB"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("jammer = maybe"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("training_length = 1600"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("algorithms = glrds, mswf"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("ranks = 2, 76"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("receiver = both"), std::invalid_argument);
    CHECK_THROWS_AS(load_config("/nonexistent/glrds.cfg"), std::runtime_error);
}

TEST_CASE("format_config round-trips") {
    auto c = tiny();
    c.scenario.snr_db = 7.25;
    c.scenario.channel.powers_db = {0.0, -2.5};
    const auto back = parse_config(format_config(c));
    CHECK(format_config(back) == format_config(c));
    CHECK(back.scenario.channel.powers_db == c.scenario.channel.powers_db);
}

TEST_CASE("summarize against a Welford accumulator") {
    testutil::Gen g(1);
    std::vector<double> v(257);
    for (auto& x : v) x = g.uniform(-2.0, 5.0);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t n = 0; n < v.size(); ++n) {
        const double d = v[n] - mean;
        mean += d / static_cast<double>(n + 1);
        m2 += d * (v[n] - mean);
    }
    const auto s = summarize(v);
    CHECK(s.mean == doctest::Approx(mean).epsilon(1e-13));
    CHECK(s.stderr_ == doctest::Approx(std::sqrt(m2 / 256.0 / 257.0)).epsilon(1e-12));
    CHECK(summarize({4.0}).stderr_ == 0.0);
    CHECK(summarize({}).mean == 0.0);
}

TEST_CASE("standard error scales as 1/sqrt(runs)") {
    // Doubling the runs divides the standard error by sqrt(2); quadrupling halves it.
    testutil::Gen g(2);
    std::vector<double> v(40000);
    for (auto& x : v) x = g.uniform(0.0, 1.0);
    const auto se = [&](std::size_t n) {
        return summarize(std::vector<double>(v.begin(), v.begin() + static_cast<long>(n))).stderr_;
    };
    CHECK(se(20000) / se(10000) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
    CHECK(se(40000) / se(10000) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("steady-state window") {
    std::vector<double> e(100, 1.0);
    for (int i = 80; i < 100; ++i) e[static_cast<std::size_t>(i)] = 3.0;
    CHECK(steady_state_mse(e, 0.2) == doctest::Approx(3.0));
    CHECK(steady_state_mse(e, 1.0) == doctest::Approx(1.4));
    CHECK_THROWS_AS(steady_state_mse({}, 0.2), std::invalid_argument);
}

TEST_CASE("reported MSE equals the mean of independently recomputed per-run values") {
    const auto cfg = tiny();
    const auto pts = run_mse_vs_rank(cfg);
    for (std::size_t n = 0; n < cfg.ranks.size(); ++n) {
        const auto D = cfg.ranks[n];
        double glrds = 0.0, oracle = 0.0;
        for (std::size_t run = 0; run < cfg.runs; ++run) {
            const auto t = simulate_run(cfg, run, {D});
            REQUIRE(t.labels.front() == "glrds@" + std::to_string(D));
            glrds += steady_state_mse(t.sq_error[0], 0.2);
            oracle += t.oracle_mse[0];
        }
        glrds /= static_cast<double>(cfg.runs);
        oracle /= static_cast<double>(cfg.runs);
        int found = 0;
        for (const auto& p : pts) {
            if (p.x != static_cast<double>(D) || p.metric != "mse") continue;
            if (p.algo == "glrds") {
                CHECK(p.mean == doctest::Approx(glrds).epsilon(1e-12));
                ++found;
            }
            if (p.algo == "mmse_oracle") {
                CHECK(p.mean == doctest::Approx(oracle).epsilon(1e-12));
                ++found;
            }
            CHECK(p.mean >= 0.0);
            CHECK(p.runs == 3);
            CHECK(p.seed == 5);
        }
        CHECK(found == 2);
    }
    CHECK(pts.front().algo == "scenario");
    CHECK(pts.front().metric == "snr_db");
    CHECK(pts.front().mean == 12.0);
}

TEST_CASE("oracle MSE is non-increasing in rank") {
    auto cfg = tiny();
    cfg.ranks = {1, 2, 3, 4, 5, 6};
    cfg.algorithms = {"mmse_oracle"};
    const auto t = simulate_run(cfg, 0, cfg.ranks);
    for (std::size_t k = 1; k < t.oracle_mse.size(); ++k) {
        CHECK(t.oracle_mse[k] <= t.oracle_mse[k - 1] + 1e-12);
    }
}

TEST_CASE("BER curve: one row per symbol and algorithm, values in [0, 1]") {
    auto cfg = tiny();
    cfg.algorithms = {"glrds", "full_rls", "eig", "mmse_oracle"};
    const auto pts = run_ber_vs_symbols(cfg);
    CHECK(pts.size() == 1 + 120 * 3);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        CHECK(pts[k].metric == "ber");
        CHECK(pts[k].mean >= 0.0);
        CHECK(pts[k].mean <= 1.0);
    }
    CHECK(pts[1].x == 1.0);
    CHECK(pts.back().x == 120.0);
}

TEST_CASE("noiseless single user without jammer: no bit errors after convergence") {
    auto cfg = parse_config(R"(
        users = 1
        noise = false
        jammer = false
        packet_length = 800
        runs = 2
        algorithms = glrds, full_rls
        rank = 4
    )");
    const auto t = simulate_run(cfg, 0, {4});
    for (std::size_t slot = 0; slot < t.labels.size(); ++slot) {
        unsigned errs = 0;
        for (std::size_t i = 300; i < 800; ++i) errs += t.bit_errors[slot][i];
        CHECK_MESSAGE(errs == 0, t.labels[slot]);
    }
}

TEST_CASE("GLRDS with D = M, unit taps and frozen S tracks full-rank RLS") {
    ScenarioConfig sc;
    Scenario s(sc, 3);
    const std::size_t M = s.dim();
    GlrdsParams p;
    p.ambient = M;
    p.rank = M;
    p.basis_length = 1;
    p.adapt_basis = false;
    GlrdsFilter f(p);
    REQUIRE(f.decomposition(0).dense().isIdentity());
    FullRankRls rls(M, 1, p.lambda, p.delta);
    const auto x = s.draw_symbols(1500);
    double eg = 0.0, er = 0.0;
    for (std::size_t i = 0; i < 1500; ++i) {
        const CVec r = s.received_vector(i, x[i]);
        const CVec d = x[i].head(1);
        const CVec yg = f.predict(r);
        const CVec yr = rls.step(r, d);
        f.step(r, d);
        if (i >= 1200) {
            eg += (d - yg).squaredNorm();
            er += (d - yr).squaredNorm();
        }
    }
    CHECK(std::abs(eg / er - 1.0) < 0.05);
}

TEST_CASE("CSV output") {
    const auto dir = std::filesystem::temp_directory_path() / "glrds_csv_test";
    std::filesystem::create_directories(dir);
    const std::string empty = (dir / "empty.csv").string();
    emit_csv({}, empty);
    CHECK(slurp(empty) == "x,algo,metric,mean,stderr,runs,seed\n");

    const std::vector<CurvePoint> pts{{4, "glrds", "mse", 0.1 + 0.2, 1.0 / 3.0, 20, 7},
                                      {1e-300, "eig", "mse_db", -12.5, 0.0, 1, 18446744073709551615ULL}};
    const std::string path = (dir / "pts.csv").string();
    emit_csv(pts, path);
    std::ifstream in(path);
    const auto back = read_csv(in);
    REQUIRE(back.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(back[k].x == pts[k].x);
        CHECK(back[k].algo == pts[k].algo);
        CHECK(back[k].metric == pts[k].metric);
        CHECK(back[k].mean == pts[k].mean);
        CHECK(back[k].stderr_ == pts[k].stderr_);
        CHECK(back[k].runs == pts[k].runs);
        CHECK(back[k].seed == pts[k].seed);
    }
    CHECK_THROWS(emit_csv(pts, (dir / "missing" / "x.csv").string()));
    std::istringstream bad("a,b\n");
    CHECK_THROWS_AS(read_csv(bad), std::invalid_argument);
}

TEST_CASE("results do not depend on the thread count") {
    auto cfg = tiny();
    cfg.threads = 1;
    std::ostringstream a, b;
    write_csv(run_mse_vs_rank(cfg), a);
    cfg.threads = 3;
    write_csv(run_mse_vs_rank(cfg), b);
    CHECK(a.str() == b.str());
}
