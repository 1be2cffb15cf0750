#pragma once

// Constrained low-rank decomposition building blocks.
//
// A decomposition matrix S (M x D) is never stored densely. Column d holds a
// short basis filter s_d (length I_d) starting at row `offset`; every other
// entry is zero. Reducing an observation r therefore costs O(D * I_d):
//
//     (S^H r)_d = sum_m conj(s_d[m]) * r[offset_d + m]
//
// with samples past the end of r treated as zero. All indices are zero-based.

#include <cstddef>
#include <span>
#include <vector>

#include "glrds/types.hpp"

namespace glrds {

/// Placement of one basis filter inside the ambient vector.
struct ShapingPattern {
    std::size_t dim = 0;     // column of S this filter moulds
    std::size_t branch = 0;  // switching branch
    std::size_t offset = 0;  // leading zeros of the shaping vector
    std::size_t length = 1;  // basis filter length I_d

    /// Dense length-M selector with a single one at `offset`.
    [[nodiscard]] CVec shaping_vector(std::size_t ambient) const;

    bool operator==(const ShapingPattern&) const = default;
};

/// Default pattern rule: offset = dim * floor(M / D) + branch.
/// Throws if the indices are out of range or the offset falls off the vector.
ShapingPattern build_shaping_pattern(std::size_t dim, std::size_t branch, std::size_t ambient,
                                     std::size_t rank, std::size_t basis_length,
                                     std::size_t branches = 1);

/// The patterns of one branch for all D dimensions.
std::vector<ShapingPattern> branch_patterns(std::size_t branch, std::size_t ambient,
                                            std::size_t rank, std::size_t basis_length,
                                            std::size_t branches = 1);

/// M x I Hankel matrix, entry (m, k) = x[m + k] or 0 past the end.
CMat build_hankel(const CVec& x, std::size_t window);

/// Zero-padded slice x[offset .. offset + length).
CVec window(const CVec& x, std::size_t offset, std::size_t length);

/// M x D decomposition assembled from D short basis filters.
class DecompositionMatrix {
public:
    DecompositionMatrix(std::vector<CVec> basis_filters, std::vector<ShapingPattern> patterns,
                        std::size_t ambient);

    [[nodiscard]] std::size_t ambient() const { return ambient_; }
    [[nodiscard]] std::size_t rank() const { return patterns_.size(); }
    [[nodiscard]] const std::vector<CVec>& basis_filters() const { return filters_; }
    [[nodiscard]] const std::vector<ShapingPattern>& patterns() const { return patterns_; }

    /// r_D = S^H r through the windowed form.
    [[nodiscard]] CVec reduce(const CVec& r) const;

    /// Explicit M x D matrix. Only for inspection and oracles.
    [[nodiscard]] CMat dense() const;

private:
    std::vector<CVec> filters_;
    std::vector<ShapingPattern> patterns_;
    std::size_t ambient_;
};

DecompositionMatrix assemble_decomposition(std::vector<CVec> basis_filters,
                                           std::vector<ShapingPattern> patterns,
                                           std::size_t ambient);

CVec reduce_dimension(const DecompositionMatrix& S, const CVec& r);

/// x_hat = W^H r_D for a D x K filter bank W.
CVec filter_output(const CMat& weights, const CVec& reduced);

/// Patterns with offset d for d = 0..D-1; with unit leading taps this is
/// S = [I_D 0]^T.
std::vector<ShapingPattern> identity_top_patterns(std::size_t rank, std::size_t basis_length);

/// Basis filters equal to the first unit vector, one per dimension.
std::vector<CVec> unit_basis_filters(std::size_t rank, std::size_t basis_length);

}  // namespace glrds
