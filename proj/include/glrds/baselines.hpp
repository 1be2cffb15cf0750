#pragma once

// Reference filters: the analytic reduced-rank Wiener solution and its MMSE,
// the principal eigen-subspace, exponentially weighted full-rank RLS, and an
// adaptive receiver that periodically re-projects onto the eigen-subspace of
// the running correlation estimate.

#include <cstddef>
#include <span>
#include <vector>

#include "glrds/types.hpp"

namespace glrds {

struct CovariancePair {
    CMat R;                 // M x M, E[r r^H]
    CMat P;                 // M x K, E[r x^H]
    double sigma_x2 = 0.0;  // E[||x||^2]
};

/// W = (S^H R S)^{-1} S^H P. Throws numerical_error if S^H R S is singular.
CMat optimal_reduced_filter(const CMat& S, const CovariancePair& cov);

/// sigma_x^2 - tr[P^H S (S^H R S)^{-1} S^H P]
double mmse_value(const CMat& S, const CovariancePair& cov);

/// Unit-norm eigenvectors of the D largest eigenvalues of Hermitian R, in
/// descending eigenvalue order.
CMat eigen_subspace(const CMat& R, std::size_t rank);

/// Sample averages over paired observations and desired vectors.
CovariancePair estimate_covariances(std::span<const CVec> observations,
                                    std::span<const CVec> desired);

/// Streaming form of estimate_covariances.
class CovarianceAccumulator {
public:
    CovarianceAccumulator(std::size_t ambient, std::size_t outputs);
    void add(const CVec& r, const CVec& x);
    [[nodiscard]] std::size_t count() const { return count_; }
    [[nodiscard]] CovariancePair mean() const;

private:
    CMat R_;
    CMat P_;
    double sx_ = 0.0;
    std::size_t count_ = 0;
};

/// Exponentially weighted RLS over the full M-dimensional observation.
class FullRankRls {
public:
    FullRankRls(std::size_t ambient, std::size_t outputs, double lambda, double delta);

    [[nodiscard]] CVec predict(const CVec& r) const { return weights_.adjoint() * r; }
    /// A priori estimate; adapts with e = x - estimate.
    CVec step(const CVec& r, const CVec& desired);

    [[nodiscard]] const CMat& weights() const { return weights_; }
    [[nodiscard]] const CMat& inverse_correlation() const { return inv_corr_; }
    void set_weights(const CMat& weights);
    [[nodiscard]] unsigned resets() const { return resets_; }

private:
    double lambda_;
    double delta_;
    CMat weights_;   // M x K
    CMat inv_corr_;  // M x M
    unsigned resets_ = 0;
};

/// Tracks lambda-weighted R and P and every `interval` samples recomputes the
/// principal eigen-subspace and the optimal reduced filter on it. One
/// eigen-decomposition serves every requested rank; each rank keeps its own P
/// so decision-directed operation can feed it its own decisions.
class EigenReceiver {
public:
    EigenReceiver(std::size_t ambient, std::size_t outputs, std::vector<std::size_t> ranks,
                  double lambda, double delta, std::size_t interval);

    [[nodiscard]] std::size_t rank_count() const { return ranks_.size(); }
    /// Estimate of the receiver with ranks[which].
    [[nodiscard]] CVec predict(const CVec& r, std::size_t which) const;
    /// Same desired vector for every rank.
    void update(const CVec& r, const CVec& desired);
    /// One desired vector per rank, in construction order.
    void update(const CVec& r, const std::vector<CVec>& desired);

private:
    void refresh();

    std::vector<std::size_t> ranks_;
    double lambda_;
    std::size_t interval_;
    CMat R_;
    std::vector<CMat> P_;
    std::vector<CMat> filters_;  // M x K effective filter S W per rank
    std::size_t seen_ = 0;
};

}  // namespace glrds
