#include "glrds/rals.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace glrds {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

void hermitize(CMat& m) { m = 0.5 * (m + m.adjoint()).eval(); }

}  // namespace

void validate(const GlrdsParams& p) {
    require(p.ambient >= 1, "M must be positive");
    require(p.rank >= 1 && p.rank <= p.ambient, "rank must satisfy 1 <= D <= M");
    require(p.outputs >= 1, "K must be positive");
    require(p.basis_length >= 1, "basis length must be positive");
    require(p.branches >= 1, "at least one branch is required");
    require(p.iterations >= 1, "at least one iteration is required");
    require(p.lambda > 0.0 && p.lambda <= 1.0, "forgetting factor must lie in (0, 1]");
    require(p.delta > 0.0 && std::isfinite(p.delta), "delta must be positive");
    require(p.max_condition > 1.0, "condition threshold must exceed 1");
}

DecompositionMatrix BranchState::decomposition(std::size_t ambient) const {
    return DecompositionMatrix(basis, patterns, ambient);
}

std::size_t select_branch(const std::vector<double>& errors) {
    require(!errors.empty(), "no branch errors to select from");
    std::size_t best = errors.size();
    for (std::size_t b = 0; b < errors.size(); ++b) {
        if (!std::isfinite(errors[b])) {
            continue;
        }
        if (best == errors.size() || errors[b] < errors[best]) {
            best = b;
        }
    }
    if (best == errors.size()) {
        throw numerical_error("every branch error is non-finite");
    }
    return best;
}

GlrdsFilter::GlrdsFilter(GlrdsParams params) : params_(params) {
    validate(params_);
    const auto D = idx(params_.rank);
    const auto I = idx(params_.basis_length);

    weights_ = CMat::Zero(D, idx(params_.outputs));
    weights_.row(0).setOnes();
    inv_corr_ = params_.delta * CMat::Identity(D, D);

    branches_.resize(params_.branches);
    for (std::size_t b = 0; b < params_.branches; ++b) {
        auto& br = branches_[b];
        br.patterns = branch_patterns(b, params_.ambient, params_.rank, params_.basis_length,
                                      params_.branches);
        br.basis = unit_basis_filters(params_.rank, params_.basis_length);
        br.inv_corr.assign(params_.rank, params_.delta * CMat::Identity(I, I));
        br.cross_corr.assign(params_.rank * params_.rank, CMat::Zero(I, I));
        br.cross_vec.assign(params_.rank, CVec::Zero(I));
    }
}

GlrdsFilter init_state(const GlrdsParams& params) { return GlrdsFilter(params); }

DecompositionMatrix GlrdsFilter::decomposition(std::size_t b) const {
    return branches_.at(b).decomposition(params_.ambient);
}

void GlrdsFilter::set_weights(const CMat& weights) {
    require(weights.rows() == weights_.rows() && weights.cols() == weights_.cols(),
            "filter bank dimensions are fixed at construction");
    require(weights.allFinite(), "filter bank entries must be finite");
    weights_ = weights;
}

void GlrdsFilter::set_basis(std::size_t b, const std::vector<CVec>& filters) {
    require(b < branches_.size(), "branch index out of range");
    require(filters.size() == params_.rank, "need one basis filter per dimension");
    for (const auto& s : filters) {
        require(static_cast<std::size_t>(s.size()) == params_.basis_length,
                "basis filter length != I_d");
        require(s.allFinite(), "basis filter entries must be finite");
    }
    branches_[b].basis = filters;
}

CVec GlrdsFilter::predict(const CVec& r) const {
    return filter_output(weights_, decomposition(selected_).reduce(r));
}

bool GlrdsFilter::needs_reset(const CMat& inverse) const {
    if (!inverse.allFinite()) {
        return true;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Index k = 0; k < inverse.rows(); ++k) {
        const double v = inverse(k, k).real();
        if (!(v > 0.0)) {
            return true;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // The diagonal spread is a lower bound on the condition number.
    return hi / lo > params_.max_condition;
}

BasisUpdateReport GlrdsFilter::update_basis_filters(std::size_t b, const CVec& r,
                                                    const CVec& desired, std::size_t iteration) {
    require(b < branches_.size(), "branch index out of range");
    require(static_cast<std::size_t>(r.size()) == params_.ambient, "observation length != M");
    require(static_cast<std::size_t>(desired.size()) == params_.outputs, "desired length != K");

    BasisUpdateReport report;
    if (!params_.adapt_basis) {
        return report;
    }

    const std::size_t D = params_.rank;
    const std::size_t I = params_.basis_length;
    const std::uint64_t I2 = static_cast<std::uint64_t>(I) * I;
    const double lambda = params_.lambda;
    auto& br = branches_[b];

    // (W W^H)_{j,d} couples dimensions; w_d = (W W^H)_{d,d}.
    const CMat coupling = weights_ * weights_.adjoint();
    ops_.basis += static_cast<std::uint64_t>(D) * D * params_.outputs;

    if (iteration == 0) {
        const CVec drive = (weights_ * desired).conjugate();
        ops_.basis += static_cast<std::uint64_t>(D) * params_.outputs;

        std::vector<CVec> u(D);
        for (std::size_t d = 0; d < D; ++d) {
            u[d] = window(r, br.patterns[d].offset, I);
        }

        for (std::size_t d = 0; d < D; ++d) {
            const double energy = coupling(idx(d), idx(d)).real();
            CMat& P = br.inv_corr[d];
            if (energy > 0.0) {
                const CVec Pu = P * u[d];
                const cd quad = u[d].dot(Pu);  // u^H P u
                const cd denom = 1.0 / energy + quad / lambda;
                if (!std::isfinite(denom.real()) || !std::isfinite(denom.imag()) ||
                    std::abs(denom) == 0.0) {
                    P = params_.delta * CMat::Identity(idx(I), idx(I));
                    ++report.resets;
                } else {
                    const CVec gain = Pu / (lambda * denom);
                    P = (P - gain * Pu.adjoint()) / lambda;
                    hermitize(P);
                }
                ops_.basis += 3 * I2 + 2 * I;
            } else {
                P /= lambda;
                ops_.basis += I2;
            }
            if (needs_reset(P)) {
                P = params_.delta * CMat::Identity(idx(I), idx(I));
                ++report.resets;
            }

            for (std::size_t j = 0; j < D; ++j) {
                if (j == d) {
                    continue;
                }
                CMat& X = br.cross_corr[d * D + j];
                X = lambda * X + coupling(idx(j), idx(d)) * (u[d] * u[j].adjoint());
                ops_.basis += 2 * I2;
            }

            br.cross_vec[d] = lambda * br.cross_vec[d] + drive(idx(d)) * u[d];
            ops_.basis += 2 * I;
        }
    }

    // Gauss-Seidel sweep with the most recent neighbours.
    for (std::size_t d = 0; d < D; ++d) {
        if (!(coupling(idx(d), idx(d)).real() > 0.0)) {
            ++report.skipped_dimensions;
            continue;
        }
        CVec rhs = br.cross_vec[d];
        for (std::size_t j = 0; j < D; ++j) {
            if (j != d) {
                rhs.noalias() -= br.cross_corr[d * D + j] * br.basis[j];
                ops_.basis += I2;
            }
        }
        CVec next = br.inv_corr[d] * rhs;
        ops_.basis += I2;
        if (next.allFinite()) {
            br.basis[d] = std::move(next);
        } else {
            br.inv_corr[d] = params_.delta * CMat::Identity(idx(I), idx(I));
            ++report.resets;
        }
    }
    return report;
}

CVec GlrdsFilter::rls_gain(const CVec& reduced, bool& reset) {
    const double lambda = params_.lambda;
    const std::uint64_t D = params_.rank;
    const CVec Pr = inv_corr_ * reduced;
    const cd denom = 1.0 + reduced.dot(Pr) / lambda;  // 1 + lambda^{-1} r^H P r
    ops_.filter_bank += D * D + 2 * D;
    reset = false;
    if (!std::isfinite(denom.real()) || !std::isfinite(denom.imag()) || std::abs(denom) == 0.0) {
        inv_corr_ = params_.delta * CMat::Identity(idx(D), idx(D));
        reset = true;
        return CVec::Zero(idx(D));
    }
    CVec gain = Pr / (lambda * denom);
    inv_corr_ = (inv_corr_ - gain * Pr.adjoint()) / lambda;
    hermitize(inv_corr_);
    ops_.filter_bank += 3 * D * D;
    if (needs_reset(inv_corr_)) {
        inv_corr_ = params_.delta * CMat::Identity(idx(D), idx(D));
        reset = true;
    }
    return gain;
}

bool GlrdsFilter::update_filter_bank(const CVec& reduced, const CVec& error) {
    require(static_cast<std::size_t>(reduced.size()) == params_.rank, "reduced length != D");
    require(static_cast<std::size_t>(error.size()) == params_.outputs, "error length != K");
    bool reset = false;
    const CVec gain = rls_gain(reduced, reset);
    weights_ += gain * error.adjoint();
    ops_.filter_bank += static_cast<std::uint64_t>(params_.rank) * params_.outputs;
    return reset;
}

StepOutput GlrdsFilter::step(const CVec& r, const CVec& desired) {
    return step(r, [&desired](std::size_t, const CVec&) { return desired; });
}

StepOutput GlrdsFilter::step(const CVec& r, const DesiredFn& desired_fn) {
    require(static_cast<std::size_t>(r.size()) == params_.ambient, "observation length != M");

    const std::size_t B = params_.branches;
    const std::uint64_t reduce_ops =
        static_cast<std::uint64_t>(params_.rank) * (params_.basis_length + params_.outputs);
    const CMat start_weights = weights_;

    StepOutput out;
    out.branch_errors.assign(B, 0.0);
    CVec previous = predict(r);
    ops_.selection += reduce_ops;
    CVec gain;

    for (std::size_t t = 0; t < params_.iterations; ++t) {
        const CVec desired = desired_fn(t, previous);
        require(static_cast<std::size_t>(desired.size()) == params_.outputs,
                "desired length != K");

        for (std::size_t b = 0; b < B; ++b) {
            const auto rep = update_basis_filters(b, r, desired, t);
            out.skipped_dimensions += rep.skipped_dimensions;
            out.resets += rep.resets;
        }

        std::vector<CVec> estimates(B);
        std::vector<CVec> reduced(B);
        for (std::size_t b = 0; b < B; ++b) {
            reduced[b] = decomposition(b).reduce(r);
            estimates[b] = filter_output(start_weights, reduced[b]);
            out.branch_errors[b] = (desired - estimates[b]).squaredNorm();
            ops_.selection += reduce_ops;
        }
        const std::size_t chosen = select_branch(out.branch_errors);

        selected_ = chosen;
        if (t == 0) {
            // r_D and the gain come from the first iteration's selection.
            bool reset = false;
            gain = rls_gain(reduced[chosen], reset);
            out.resets += reset ? 1U : 0U;
        }
        const CVec error = desired - estimates[chosen];
        weights_ = start_weights + gain * error.adjoint();
        ops_.filter_bank += static_cast<std::uint64_t>(params_.rank) * params_.outputs;

        out.estimate = estimates[chosen];
        out.selected_branch = chosen;
        previous = estimates[chosen];
    }
    return out;
}

}  // namespace glrds
