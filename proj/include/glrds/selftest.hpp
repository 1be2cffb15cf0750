#pragma once

// Oracle-equivalence and invariant checks. Each check is seeded and returns
// the worst observed deviation next to the tolerance it is judged against.

#include <cstdint>
#include <string>
#include <vector>

#include "glrds/experiment.hpp"

namespace glrds {

struct CheckResult {
    std::string name;
    double value = 0.0;      // worst deviation (or violation count)
    double tolerance = 0.0;  // pass if value <= tolerance
    bool passed = false;
    std::string detail;
};

/// GLRDS with frozen S and lambda = 1 against the batch normal equations,
/// both with the delta prior (exact identity) and with a vanishing prior.
CheckResult check_glrds_batch(std::uint64_t seed);
/// Full-rank RLS at M = 16 against the batch normal equations.
CheckResult check_full_rank_batch(std::uint64_t seed);
/// Windowed reduction against the Hankel form and the dense S^H r.
CheckResult check_hankel(std::uint64_t seed, std::size_t trials = 1000);
/// Exact alternating solves never increase the block cost.
CheckResult check_alternating(std::uint64_t seed, std::size_t sweeps = 10);
/// Branch selection is scale invariant and always picks the minimum error.
CheckResult check_switching(std::uint64_t seed, std::size_t steps = 10000);
/// Eigen-subspace MMSE: non-increasing in D, full-rank limit, subset optimality.
CheckResult check_eigen_mmse(std::uint64_t seed, std::size_t covariances = 20);
/// P_D stays Hermitian positive definite and equals the inverse of the
/// weighted reduced correlation when S is frozen.
CheckResult check_inverse_correlation(std::uint64_t seed);

std::vector<CheckResult> run_selftest(std::uint64_t seed);

/// CSV rows: x = check index, algo = check name, metrics value/tolerance/passed.
std::vector<CurvePoint> selftest_points(const std::vector<CheckResult>& results,
                                        std::uint64_t seed);

}  // namespace glrds
