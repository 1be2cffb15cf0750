#pragma once

// Switched low-rank decomposition adapted by recursive alternating least
// squares.
//
// Each branch b owns D basis filters s_{d,b} (length I_d) placed by the
// default pattern rule. Per branch and dimension d the state tracks
//
//   R_{d,b}   = sum_l lambda^{i-l} w_d u_d u_d^H            (kept as its inverse)
//   X_{d,j,b} = sum_l lambda^{i-l} (W W^H)_{j,d} u_d u_j^H   for j != d
//   p_{d,b}   = sum_l lambda^{i-l} conj((W x)_d) u_d
//
// where u_d is the length-I_d window of r at the pattern offset and
// w_d = sum_k |W_{d,k}|^2. Each iteration recomputes
//
//   s_{d,b} = R_{d,b}^{-1} (p_{d,b} - sum_{j != d} X_{d,j,b} s_{j,b})
//
// sweeping d = 0..D-1 with the freshest neighbours. The reduced filter bank
// W (D x K) follows an exponentially weighted RLS on r_D = S_{b_s}^H r of the
// branch with the smallest instantaneous error.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "glrds/lowrank_core.hpp"
#include "glrds/types.hpp"

namespace glrds {

struct GlrdsParams {
    std::size_t ambient = 0;       // M
    std::size_t rank = 0;          // D
    std::size_t outputs = 1;       // K
    std::size_t basis_length = 3;  // I_d
    std::size_t branches = 1;      // B
    double lambda = 0.999;
    std::size_t iterations = 1;  // T
    double delta = 0.01;         // initial inverse-correlation scale
    bool adapt_basis = true;     // false freezes S at its initial value
    double max_condition = 1e12;
};

void validate(const GlrdsParams& params);

struct BranchState {
    std::vector<ShapingPattern> patterns;
    std::vector<CVec> basis;       // s_{d,b}
    std::vector<CMat> inv_corr;    // R_{d,b}^{-1}
    std::vector<CMat> cross_corr;  // X_{d,j,b} at index d * D + j; diagonal entries unused
    std::vector<CVec> cross_vec;   // p_{d,b}

    [[nodiscard]] DecompositionMatrix decomposition(std::size_t ambient) const;
};

/// Complex multiply-accumulate counts, split by stage.
struct OpCounts {
    std::uint64_t filter_bank = 0;  // gain, inverse-correlation and W updates
    std::uint64_t basis = 0;        // accumulators and basis-filter sweeps
    std::uint64_t selection = 0;    // per-branch reductions and outputs
};

struct BasisUpdateReport {
    unsigned skipped_dimensions = 0;  // rows of W with zero energy
    unsigned resets = 0;              // inverse-correlation matrices reset to delta * I
};

struct StepOutput {
    CVec estimate;                     // x_hat of the selected branch after the last iteration
    std::vector<double> branch_errors; // ||x - x_hat_b||^2 after the last iteration
    std::size_t selected_branch = 0;
    unsigned skipped_dimensions = 0;
    unsigned resets = 0;
};

/// Argmin over finite entries, ties to the lowest index. Throws if none is finite.
std::size_t select_branch(const std::vector<double>& errors);

class GlrdsFilter {
public:
    /// Desired signal for iteration t given the previous iteration's estimate
    /// (for t = 0, the a priori estimate).
    using DesiredFn = std::function<CVec(std::size_t iteration, const CVec& previous_estimate)>;

    explicit GlrdsFilter(GlrdsParams params);

    [[nodiscard]] const GlrdsParams& params() const { return params_; }
    [[nodiscard]] const CMat& weights() const { return weights_; }
    [[nodiscard]] const CMat& inverse_correlation() const { return inv_corr_; }
    [[nodiscard]] const BranchState& branch(std::size_t b) const { return branches_.at(b); }
    [[nodiscard]] std::size_t selected_branch() const { return selected_; }
    [[nodiscard]] const OpCounts& op_counts() const { return ops_; }
    [[nodiscard]] DecompositionMatrix decomposition(std::size_t b) const;

    void set_weights(const CMat& weights);
    /// Replaces the basis filters of branch b (D filters of length I_d).
    void set_basis(std::size_t b, const std::vector<CVec>& filters);
    void reset_op_counts() { ops_ = {}; }

    /// A priori estimate with the current filter bank and selected branch.
    [[nodiscard]] CVec predict(const CVec& r) const;

    /// One received vector with a known desired signal (training).
    StepOutput step(const CVec& r, const CVec& desired);

    /// One received vector where the desired signal is derived per iteration,
    /// e.g. hard decisions in decision-directed mode.
    StepOutput step(const CVec& r, const DesiredFn& desired);

    /// Recursions of one branch for one iteration. Accumulators and inverse
    /// correlations advance only on iteration 0; every iteration re-solves the
    /// basis filters.
    BasisUpdateReport update_basis_filters(std::size_t b, const CVec& r, const CVec& desired,
                                           std::size_t iteration);

    /// RLS update of W and R^{-1} from one reduced vector and its a priori error.
    /// Returns true if the inverse correlation had to be reset.
    bool update_filter_bank(const CVec& reduced, const CVec& error);

    // Snapshot support.
    friend struct GlrdsSnapshotAccess;

private:
    CVec rls_gain(const CVec& reduced, bool& reset);
    bool needs_reset(const CMat& inverse) const;

    GlrdsParams params_;
    CMat weights_;   // D x K
    CMat inv_corr_;  // D x D
    std::vector<BranchState> branches_;
    std::size_t selected_ = 0;
    OpCounts ops_;
};

GlrdsFilter init_state(const GlrdsParams& params);

}  // namespace glrds
