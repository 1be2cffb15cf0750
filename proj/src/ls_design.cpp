#include "glrds/ls_design.hpp"

#include <cmath>

namespace glrds {

namespace {

double weight(double lambda, std::size_t n, std::size_t l) {
    return std::pow(lambda, static_cast<double>(n - 1 - l));
}

}  // namespace

double ls_cost(std::span<const TrainingSample> block, const DecompositionMatrix& S,
               const CMat& weights, double lambda) {
    double cost = 0.0;
    for (std::size_t l = 0; l < block.size(); ++l) {
        const CVec e = block[l].x - filter_output(weights, S.reduce(block[l].r));
        cost += weight(lambda, block.size(), l) * e.squaredNorm();
    }
    return cost;
}

bool solve_basis_filter(std::span<const TrainingSample> block, DecompositionMatrix& S,
                        const CMat& weights, double lambda, std::size_t dim) {
    require(dim < S.rank(), "basis filter index out of range");
    require(static_cast<std::size_t>(weights.rows()) == S.rank(), "W rows != D");
    if (weights.row(static_cast<Eigen::Index>(dim)).squaredNorm() == 0.0) {
        return false;
    }

    // conj(e) = conj(x) - sum_j g_j u_j^H s_j with g_j = W(j,:)^T. With the
    // other filters fixed this is linear regression on s_dim with regressor
    // A = g_dim u_dim^H (K x I).
    const auto& patterns = S.patterns();
    auto filters = S.basis_filters();
    const std::size_t I = patterns[dim].length;
    CMat normal = CMat::Zero(static_cast<Eigen::Index>(I), static_cast<Eigen::Index>(I));
    CVec rhs = CVec::Zero(static_cast<Eigen::Index>(I));

    for (std::size_t l = 0; l < block.size(); ++l) {
        const CVec& r = block[l].r;
        CVec target = block[l].x.conjugate();
        for (std::size_t j = 0; j < S.rank(); ++j) {
            if (j == dim) {
                continue;
            }
            const CVec u = window(r, patterns[j].offset, patterns[j].length);
            const cd coord = u.dot(filters[j]);  // u^H s
            target -= weights.row(static_cast<Eigen::Index>(j)).transpose() * coord;
        }
        const CVec g = weights.row(static_cast<Eigen::Index>(dim)).transpose();
        const CVec u = window(r, patterns[dim].offset, I);
        const CMat A = g * u.adjoint();
        const double w = weight(lambda, block.size(), l);
        normal += w * A.adjoint() * A;
        rhs += w * A.adjoint() * target;
    }

    Eigen::FullPivLU<CMat> lu(normal);
    if (!lu.isInvertible()) {
        return false;
    }
    filters[dim] = lu.solve(rhs);
    S = DecompositionMatrix(std::move(filters), patterns, S.ambient());
    return true;
}

CMat solve_filter_bank(std::span<const TrainingSample> block, const DecompositionMatrix& S,
                       double lambda) {
    require(!block.empty(), "empty training block");
    const auto D = static_cast<Eigen::Index>(S.rank());
    const auto K = block.front().x.size();
    CMat R = CMat::Zero(D, D);
    CMat P = CMat::Zero(D, K);
    for (std::size_t l = 0; l < block.size(); ++l) {
        const CVec rd = S.reduce(block[l].r);
        const double w = weight(lambda, block.size(), l);
        R += w * rd * rd.adjoint();
        P += w * rd * block[l].x.adjoint();
    }
    Eigen::FullPivLU<CMat> lu(R);
    if (!lu.isInvertible()) {
        throw numerical_error("reduced correlation matrix is singular");
    }
    return lu.solve(P);
}

AlternatingResult alternating_ls(std::span<const TrainingSample> block, DecompositionMatrix S,
                                 CMat weights, double lambda, std::size_t sweeps) {
    AlternatingResult out;
    out.costs.push_back(ls_cost(block, S, weights, lambda));
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
        for (std::size_t d = 0; d < S.rank(); ++d) {
            solve_basis_filter(block, S, weights, lambda, d);
        }
        weights = solve_filter_bank(block, S, lambda);
        out.costs.push_back(ls_cost(block, S, weights, lambda));
    }
    out.basis = S.basis_filters();
    out.weights = std::move(weights);
    return out;
}

}  // namespace glrds
