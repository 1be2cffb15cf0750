#pragma once

// Exact least-squares design of the constrained decomposition on a frozen
// block of samples. Used to check the recursive algorithm and to study the
// alternating cost surface; not part of the per-sample path.

#include <cstddef>
#include <span>
#include <vector>

#include "glrds/lowrank_core.hpp"
#include "glrds/types.hpp"

namespace glrds {

struct TrainingSample {
    CVec r;  // M x 1 observation
    CVec x;  // K x 1 desired signal
};

/// sum_l lambda^{n-1-l} ||x[l] - W^H S^H r[l]||^2
double ls_cost(std::span<const TrainingSample> block, const DecompositionMatrix& S,
               const CMat& weights, double lambda);

/// Minimises the cost over basis filter `dim` with the other filters and W
/// fixed. Returns false (and leaves S unchanged) when row `dim` of W is zero
/// or the normal equations are singular.
bool solve_basis_filter(std::span<const TrainingSample> block, DecompositionMatrix& S,
                        const CMat& weights, double lambda, std::size_t dim);

/// Minimises the cost over W with S fixed: W = (sum r_D r_D^H)^{-1} sum r_D x^H.
CMat solve_filter_bank(std::span<const TrainingSample> block, const DecompositionMatrix& S,
                       double lambda);

struct AlternatingResult {
    std::vector<double> costs;  // cost after each sweep, preceded by the initial cost
    std::vector<CVec> basis;
    CMat weights;
};

/// `sweeps` rounds of: every basis filter in order, then W.
AlternatingResult alternating_ls(std::span<const TrainingSample> block, DecompositionMatrix S,
                                 CMat weights, double lambda, std::size_t sweeps);

}  // namespace glrds
