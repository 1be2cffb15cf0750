#include "glrds/lowrank_core.hpp"

#include <string>

namespace glrds {

CVec ShapingPattern::shaping_vector(std::size_t ambient) const {
    require(offset < ambient, "shaping vector offset outside the ambient vector");
    CVec d = CVec::Zero(static_cast<Eigen::Index>(ambient));
    d(static_cast<Eigen::Index>(offset)) = 1.0;
    return d;
}

ShapingPattern build_shaping_pattern(std::size_t dim, std::size_t branch, std::size_t ambient,
                                     std::size_t rank, std::size_t basis_length,
                                     std::size_t branches) {
    require(rank >= 1 && rank <= ambient, "rank must satisfy 1 <= D <= M");
    require(basis_length >= 1, "basis length must be positive");
    require(branches >= 1, "at least one branch is required");
    require(dim < rank, "dimension index " + std::to_string(dim) + " out of range");
    require(branch < branches, "branch index " + std::to_string(branch) + " out of range");

    const std::size_t offset = dim * (ambient / rank) + branch;
    if (offset >= ambient) {
        throw std::invalid_argument("pattern (d=" + std::to_string(dim) + ", b=" +
                                    std::to_string(branch) + ") has offset " +
                                    std::to_string(offset) + " >= M=" + std::to_string(ambient));
    }
    return ShapingPattern{dim, branch, offset, basis_length};
}

std::vector<ShapingPattern> branch_patterns(std::size_t branch, std::size_t ambient,
                                            std::size_t rank, std::size_t basis_length,
                                            std::size_t branches) {
    std::vector<ShapingPattern> out;
    out.reserve(rank);
    for (std::size_t d = 0; d < rank; ++d) {
        out.push_back(build_shaping_pattern(d, branch, ambient, rank, basis_length, branches));
    }
    return out;
}

CMat build_hankel(const CVec& x, std::size_t window) {
    require(window >= 1, "Hankel window must be positive");
    require(x.size() >= 1, "Hankel input must be non-empty");
    const Eigen::Index m = x.size();
    const auto w = static_cast<Eigen::Index>(window);
    CMat h = CMat::Zero(m, w);
    for (Eigen::Index row = 0; row < m; ++row) {
        for (Eigen::Index k = 0; k < w && row + k < m; ++k) {
            h(row, k) = x(row + k);
        }
    }
    return h;
}

CVec window(const CVec& x, std::size_t offset, std::size_t length) {
    CVec u = CVec::Zero(static_cast<Eigen::Index>(length));
    const auto m = static_cast<std::size_t>(x.size());
    for (std::size_t k = 0; k < length && offset + k < m; ++k) {
        u(static_cast<Eigen::Index>(k)) = x(static_cast<Eigen::Index>(offset + k));
    }
    return u;
}

DecompositionMatrix::DecompositionMatrix(std::vector<CVec> basis_filters,
                                         std::vector<ShapingPattern> patterns,
                                         std::size_t ambient)
    : filters_(std::move(basis_filters)), patterns_(std::move(patterns)), ambient_(ambient) {
    require(!patterns_.empty(), "decomposition needs at least one column");
    require(filters_.size() == patterns_.size(),
            "number of basis filters does not match number of patterns");
    for (std::size_t d = 0; d < patterns_.size(); ++d) {
        require(patterns_[d].offset < ambient_, "pattern offset outside the ambient vector");
        require(static_cast<std::size_t>(filters_[d].size()) == patterns_[d].length,
                "basis filter " + std::to_string(d) + " length does not match its pattern");
    }
}

CVec DecompositionMatrix::reduce(const CVec& r) const {
    require(static_cast<std::size_t>(r.size()) == ambient_, "observation length does not match M");
    CVec out(static_cast<Eigen::Index>(patterns_.size()));
    for (std::size_t d = 0; d < patterns_.size(); ++d) {
        const auto& p = patterns_[d];
        const std::size_t n = std::min(p.length, ambient_ - p.offset);
        cd acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            acc += std::conj(filters_[d](static_cast<Eigen::Index>(m))) *
                   r(static_cast<Eigen::Index>(p.offset + m));
        }
        out(static_cast<Eigen::Index>(d)) = acc;
    }
    return out;
}

CMat DecompositionMatrix::dense() const {
    CMat s = CMat::Zero(static_cast<Eigen::Index>(ambient_),
                        static_cast<Eigen::Index>(patterns_.size()));
    for (std::size_t d = 0; d < patterns_.size(); ++d) {
        const auto& p = patterns_[d];
        for (std::size_t m = 0; m < p.length && p.offset + m < ambient_; ++m) {
            s(static_cast<Eigen::Index>(p.offset + m), static_cast<Eigen::Index>(d)) =
                filters_[d](static_cast<Eigen::Index>(m));
        }
    }
    return s;
}

DecompositionMatrix assemble_decomposition(std::vector<CVec> basis_filters,
                                           std::vector<ShapingPattern> patterns,
                                           std::size_t ambient) {
    return DecompositionMatrix(std::move(basis_filters), std::move(patterns), ambient);
}

CVec reduce_dimension(const DecompositionMatrix& S, const CVec& r) { return S.reduce(r); }

CVec filter_output(const CMat& weights, const CVec& reduced) {
    require(weights.rows() == reduced.size(), "filter bank rows do not match reduced dimension");
    return weights.adjoint() * reduced;
}

std::vector<ShapingPattern> identity_top_patterns(std::size_t rank, std::size_t basis_length) {
    std::vector<ShapingPattern> out;
    for (std::size_t d = 0; d < rank; ++d) {
        out.push_back(ShapingPattern{d, 0, d, basis_length});
    }
    return out;
}

std::vector<CVec> unit_basis_filters(std::size_t rank, std::size_t basis_length) {
    std::vector<CVec> out(rank, CVec::Zero(static_cast<Eigen::Index>(basis_length)));
    for (auto& s : out) {
        s(0) = 1.0;
    }
    return out;
}

}  // namespace glrds
