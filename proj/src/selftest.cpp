#include "glrds/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "glrds/baselines.hpp"
#include "glrds/ls_design.hpp"
#include "glrds/rals.hpp"

namespace glrds {

namespace {

using Index = Eigen::Index;

struct Gen {
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    std::mt19937_64 rng;
    std::normal_distribution<double> n{0.0, std::sqrt(0.5)};

    cd c() { return {n(rng), n(rng)}; }
    CVec vec(Index m) {
        CVec v(m);
        for (Index k = 0; k < m; ++k) v(k) = c();
        return v;
    }
    CMat mat(Index r, Index k) {
        CMat m(r, k);
        for (Index j = 0; j < k; ++j) m.col(j) = vec(r);
        return m;
    }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    std::size_t pick(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    }
};

double rel(const CMat& a, const CMat& ref) {
    return (a - ref).norm() / std::max(ref.norm(), 1e-300);
}

CheckResult finish(std::string name, double value, double tol, std::string detail = {}) {
    return CheckResult{std::move(name), value, tol, value <= tol, std::move(detail)};
}

// W after n steps of frozen-S GLRDS with lambda = 1 and the batch solution
// (sum r_D r_D^H + I/delta)^{-1} (sum r_D x^H + W0/delta), built from dense S.
double glrds_batch_error(std::uint64_t seed, double delta, bool with_prior) {
    Gen g(seed);
    GlrdsParams p;
    p.ambient = 24;
    p.rank = 4;
    p.outputs = 2;
    p.basis_length = 3;
    p.lambda = 1.0;
    p.delta = delta;
    p.adapt_basis = false;
    GlrdsFilter f(p);
    std::vector<CVec> basis;
    for (std::size_t d = 0; d < p.rank; ++d) basis.push_back(g.vec(3));
    f.set_basis(0, basis);
    const CMat W0 = f.weights();
    const CMat S = f.decomposition(0).dense();

    CMat A = CMat::Zero(4, 4);
    CMat b = CMat::Zero(4, 2);
    for (int n = 0; n < 100; ++n) {
        const CVec r = g.vec(24);
        const CVec x = g.vec(2);
        f.step(r, x);
        const CVec rd = S.adjoint() * r;
        A += rd * rd.adjoint();
        b += rd * x.adjoint();
    }
    if (with_prior) {
        A += CMat::Identity(4, 4) / delta;
        b += W0 / delta;
    }
    const CMat W = A.fullPivLu().solve(b);
    return rel(f.weights(), W);
}

double full_rank_batch_error(std::uint64_t seed, double delta, bool with_prior) {
    Gen g(seed);
    const Index M = 16;
    FullRankRls rls(16, 2, 1.0, delta);
    CMat A = CMat::Zero(M, M);
    CMat b = CMat::Zero(M, 2);
    for (int n = 0; n < 100; ++n) {
        const CVec r = g.vec(M);
        const CVec x = g.vec(2);
        rls.step(r, x);
        A += r * r.adjoint();
        b += r * x.adjoint();
    }
    if (with_prior) {
        A += CMat::Identity(M, M) / delta;
    }
    return rel(rls.weights(), A.fullPivLu().solve(b));
}

// Signal-plus-white-noise covariance: r = G x + n, E[x x^H] = I.
CovariancePair random_covariance(Gen& g, Index M, Index K) {
    const CMat G = g.mat(M, K);
    const double noise = g.uniform(0.05, 1.0);
    return CovariancePair{G * G.adjoint() + noise * CMat::Identity(M, M), G, static_cast<double>(K)};
}

}  // namespace

CheckResult check_glrds_batch(std::uint64_t seed) {
    const double exact = glrds_batch_error(seed, 0.01, true);
    const double vanishing = glrds_batch_error(seed, 1e6, false);
    std::ostringstream d;
    d << "with prior " << exact << ", prior 1e-6 vs plain normal equations " << vanishing;
    return finish("glrds_rls_batch", std::max(exact, vanishing), 1e-6, d.str());
}

CheckResult check_full_rank_batch(std::uint64_t seed) {
    const double exact = full_rank_batch_error(seed, 0.01, true);
    const double vanishing = full_rank_batch_error(seed, 1e6, false);
    std::ostringstream d;
    d << "with prior " << exact << ", prior 1e-6 vs plain normal equations " << vanishing;
    return finish("full_rank_rls_batch", std::max(exact, vanishing), 1e-6, d.str());
}

CheckResult check_hankel(std::uint64_t seed, std::size_t trials) {
    Gen g(seed);
    const std::size_t M = 75;
    const std::size_t I = 3;
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t D = g.pick(1, 8);
        const std::size_t B = g.pick(1, 4);
        const auto pat = build_shaping_pattern(g.pick(0, D - 1), g.pick(0, B - 1), M, D, I, B);
        const CVec r = g.vec(M);
        const CVec s = g.vec(I);
        const cd hankel = pat.shaping_vector(M).dot(build_hankel(r, I) * s.conjugate());
        const DecompositionMatrix S({s}, {pat}, M);
        const cd windowed = S.reduce(r)(0);
        const cd dense = S.dense().col(0).dot(r);
        const double scale = std::max(std::abs(dense), 1e-300);
        worst = std::max({worst, std::abs(hankel - windowed) / scale, std::abs(dense - windowed) / scale});
    }
    return finish("hankel_commutation", worst, 1e-12, std::to_string(trials) + " triples at M=75");
}

CheckResult check_alternating(std::uint64_t seed, std::size_t sweeps) {
    Gen g(seed);
    const std::size_t M = 24;
    const std::size_t D = 3;
    const std::size_t I = 3;
    std::vector<TrainingSample> block;
    const CMat H = g.mat(24, 2);
    for (int n = 0; n < 50; ++n) {
        const CVec x = g.vec(2);
        block.push_back({H * x + 0.3 * g.vec(24), x});
    }
    DecompositionMatrix S(unit_basis_filters(D, I), branch_patterns(0, M, D, I), M);
    const auto res = alternating_ls(block, S, g.mat(3, 2), 0.999, sweeps);
    double worst_rise = 0.0;
    for (std::size_t k = 1; k < res.costs.size(); ++k) {
        worst_rise = std::max(worst_rise, res.costs[k] - res.costs[k - 1]);
    }
    std::ostringstream d;
    d << "cost " << res.costs.front() << " -> " << res.costs.back() << " over " << sweeps
      << " sweeps";
    return finish("alternating_monotone", worst_rise, 1e-10, d.str());
}

CheckResult check_switching(std::uint64_t seed, std::size_t steps) {
    Gen g(seed);
    GlrdsParams p;
    p.ambient = 24;
    p.rank = 3;
    p.outputs = 1;
    p.basis_length = 3;
    p.branches = 4;
    p.iterations = 2;
    p.lambda = 0.99;
    GlrdsFilter f(p);
    const CVec h = g.vec(24);
    std::size_t violations = 0;
    for (std::size_t n = 0; n < steps; ++n) {
        CVec x(1);
        x(0) = g.c();
        const auto out = f.step(CVec(h * x(0) + 0.5 * g.vec(24)), x);
        const auto& e = out.branch_errors;
        if (e[out.selected_branch] != *std::min_element(e.begin(), e.end())) {
            ++violations;
        }
        auto scaled = e;
        const double c = std::exp(g.uniform(-10.0, 10.0));
        for (auto& v : scaled) v *= c;
        if (select_branch(scaled) != select_branch(e) || select_branch(e) != out.selected_branch) {
            ++violations;
        }
    }
    return finish("branch_selection", static_cast<double>(violations), 0.0,
                  std::to_string(steps) + " steps, B=4");
}

CheckResult check_eigen_mmse(std::uint64_t seed, std::size_t covariances) {
    Gen g(seed);
    double worst = 0.0;
    double worst_mono = 0.0;
    double worst_full = 0.0;
    double worst_subset = 0.0;
    for (std::size_t c = 0; c < covariances; ++c) {
        const auto cov = random_covariance(g, 8, 3);
        const CMat U = eigen_subspace(cov.R, 8);
        double prev = cov.sigma_x2;
        for (Index D = 1; D <= 8; ++D) {
            const double m = mmse_value(U.leftCols(D), cov);
            worst_mono = std::max(worst_mono, m - prev);
            prev = m;
        }
        const double full = cov.sigma_x2 - (cov.P.adjoint() * cov.R.ldlt().solve(cov.P)).trace().real();
        worst_full = std::max(worst_full, std::abs(prev - full));

        // All 20 three-column subsets of the eigenvectors at M = 6.
        const auto small = random_covariance(g, 6, 3);
        const CMat V = eigen_subspace(small.R, 6);
        const double principal = mmse_value(V.leftCols(3), small);
        double best = principal;
        for (Index a = 0; a < 6; ++a)
            for (Index b = a + 1; b < 6; ++b)
                for (Index e = b + 1; e < 6; ++e) {
                    CMat S(6, 3);
                    S << V.col(a), V.col(b), V.col(e);
                    best = std::min(best, mmse_value(S, small));
                }
        worst_subset = std::max(worst_subset, principal - best);
    }
    worst = std::max({worst_mono, worst_full, worst_subset});
    std::ostringstream d;
    d << "rise " << worst_mono << ", full-rank gap " << worst_full << ", subset gap " << worst_subset;
    return finish("eigen_mmse", worst, 1e-10, d.str());
}

CheckResult check_inverse_correlation(std::uint64_t seed) {
    Gen g(seed);
    GlrdsParams p;
    p.ambient = 24;
    p.rank = 4;
    p.outputs = 1;
    p.basis_length = 3;
    p.lambda = 0.98;
    p.delta = 0.01;
    p.adapt_basis = false;
    GlrdsFilter f(p);
    std::vector<CVec> basis;
    for (int d = 0; d < 4; ++d) basis.push_back(g.vec(3));
    f.set_basis(0, basis);
    const CMat S = f.decomposition(0).dense();
    CMat R = CMat::Identity(4, 4) / p.delta;
    double worst = 0.0;
    for (int n = 0; n < 200; ++n) {
        const CVec r = g.vec(24);
        CVec x(1);
        x(0) = g.c();
        f.step(r, x);
        const CVec rd = S.adjoint() * r;
        R = p.lambda * R + rd * rd.adjoint();
        const CMat& P = f.inverse_correlation();
        const double herm = (P - P.adjoint()).norm() / P.norm();
        Eigen::SelfAdjointEigenSolver<CMat> eig(P);
        const double pd = eig.eigenvalues().minCoeff() > 0.0 ? 0.0 : 1.0;
        worst = std::max({worst, herm, pd, rel(P, R.inverse())});
    }
    return finish("inverse_correlation", worst, 1e-8, "200 steps, lambda=0.98");
}

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
    return {check_glrds_batch(seed),       check_full_rank_batch(seed + 1),
            check_hankel(seed + 2),        check_alternating(seed + 3),
            check_switching(seed + 4),     check_eigen_mmse(seed + 5),
            check_inverse_correlation(seed + 6)};
}

std::vector<CurvePoint> selftest_points(const std::vector<CheckResult>& results,
                                        std::uint64_t seed) {
    std::vector<CurvePoint> out;
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        const double x = static_cast<double>(k + 1);
        out.push_back({x, r.name, "value", r.value, 0.0, 1, seed});
        out.push_back({x, r.name, "tolerance", r.tolerance, 0.0, 1, seed});
        out.push_back({x, r.name, "passed", r.passed ? 1.0 : 0.0, 0.0, 1, seed});
    }
    return out;
}

}  // namespace glrds
