#include "glrds/baselines.hpp"

#include <cmath>
#include <sstream>

namespace glrds {

namespace {

Eigen::LDLT<CMat> factor_reduced(const CMat& S, const CMat& R) {
    require(S.rows() == R.rows() && R.rows() == R.cols(), "basis and correlation sizes differ");
    CMat reduced = S.adjoint() * R * S;
    reduced = 0.5 * (reduced + reduced.adjoint()).eval();
    Eigen::LDLT<CMat> ldlt(reduced);
    double rcond = 0.0;
    if (ldlt.info() == Eigen::Success) {
        // The norm-based estimate alone misses exactly singular inputs; the
        // pivot spread catches them.
        const RVec piv = ldlt.vectorD().cwiseAbs();
        rcond = std::min(ldlt.rcond(), piv.minCoeff() / piv.maxCoeff());
    }
    if (!(rcond > 1e-14)) {
        std::ostringstream msg;
        msg << "reduced correlation S^H R S (" << reduced.rows() << "x" << reduced.cols()
            << ") is singular: reciprocal condition estimate " << rcond;
        throw numerical_error(msg.str());
    }
    return ldlt;
}

void hermitize(CMat& m) { m = 0.5 * (m + m.adjoint()).eval(); }

}  // namespace

CMat optimal_reduced_filter(const CMat& S, const CovariancePair& cov) {
    require(cov.P.rows() == S.rows(), "cross-correlation rows != M");
    return factor_reduced(S, cov.R).solve(S.adjoint() * cov.P);
}

double mmse_value(const CMat& S, const CovariancePair& cov) {
    const CMat SP = S.adjoint() * cov.P;
    const CMat W = factor_reduced(S, cov.R).solve(SP);
    return cov.sigma_x2 - (SP.adjoint() * W).trace().real();
}

CMat eigen_subspace(const CMat& R, std::size_t rank) {
    require(R.rows() == R.cols(), "correlation matrix must be square");
    require(rank >= 1 && rank <= static_cast<std::size_t>(R.rows()), "rank must satisfy 1 <= D <= M");
    Eigen::SelfAdjointEigenSolver<CMat> eig(R);
    if (eig.info() != Eigen::Success) {
        throw numerical_error("Hermitian eigen-solver failed to converge");
    }
    // Eigenvalues come back in increasing order.
    const auto M = R.rows();
    const auto D = static_cast<Eigen::Index>(rank);
    CMat out(M, D);
    for (Eigen::Index d = 0; d < D; ++d) {
        out.col(d) = eig.eigenvectors().col(M - 1 - d);
    }
    return out;
}

CovariancePair estimate_covariances(std::span<const CVec> observations,
                                    std::span<const CVec> desired) {
    require(!observations.empty(), "need at least one sample");
    require(observations.size() == desired.size(), "observation and desired counts differ");
    CovarianceAccumulator acc(static_cast<std::size_t>(observations.front().size()),
                              static_cast<std::size_t>(desired.front().size()));
    for (std::size_t l = 0; l < observations.size(); ++l) {
        acc.add(observations[l], desired[l]);
    }
    return acc.mean();
}

CovarianceAccumulator::CovarianceAccumulator(std::size_t ambient, std::size_t outputs)
    : R_(CMat::Zero(static_cast<Eigen::Index>(ambient), static_cast<Eigen::Index>(ambient))),
      P_(CMat::Zero(static_cast<Eigen::Index>(ambient), static_cast<Eigen::Index>(outputs))) {}

void CovarianceAccumulator::add(const CVec& r, const CVec& x) {
    require(r.size() == R_.rows() && x.size() == P_.cols(), "sample dimensions mismatch");
    R_.selfadjointView<Eigen::Lower>().rankUpdate(r);
    P_.noalias() += r * x.adjoint();
    sx_ += x.squaredNorm();
    ++count_;
}

CovariancePair CovarianceAccumulator::mean() const {
    require(count_ > 0, "no samples accumulated");
    const double n = static_cast<double>(count_);
    CMat R = R_.selfadjointView<Eigen::Lower>();
    return CovariancePair{R / n, P_ / n, sx_ / n};
}

FullRankRls::FullRankRls(std::size_t ambient, std::size_t outputs, double lambda, double delta)
    : lambda_(lambda), delta_(delta) {
    require(ambient >= 1 && outputs >= 1, "sizes must be positive");
    require(lambda > 0.0 && lambda <= 1.0, "forgetting factor must lie in (0, 1]");
    require(delta > 0.0, "delta must be positive");
    const auto M = static_cast<Eigen::Index>(ambient);
    weights_ = CMat::Zero(M, static_cast<Eigen::Index>(outputs));
    inv_corr_ = delta * CMat::Identity(M, M);
}

void FullRankRls::set_weights(const CMat& weights) {
    require(weights.rows() == weights_.rows() && weights.cols() == weights_.cols(),
            "weight dimensions are fixed at construction");
    weights_ = weights;
}

CVec FullRankRls::step(const CVec& r, const CVec& desired) {
    require(r.size() == weights_.rows() && desired.size() == weights_.cols(),
            "sample dimensions mismatch");
    const CVec estimate = predict(r);
    const CVec Pr = inv_corr_ * r;
    const cd denom = 1.0 + r.dot(Pr) / lambda_;
    if (!std::isfinite(denom.real()) || !std::isfinite(denom.imag()) || std::abs(denom) == 0.0) {
        inv_corr_ = delta_ * CMat::Identity(weights_.rows(), weights_.rows());
        ++resets_;
        return estimate;
    }
    const CVec gain = Pr / (lambda_ * denom);
    inv_corr_ = (inv_corr_ - gain * Pr.adjoint()) / lambda_;
    hermitize(inv_corr_);
    weights_ += gain * (desired - estimate).adjoint();
    if (!inv_corr_.allFinite()) {
        inv_corr_ = delta_ * CMat::Identity(weights_.rows(), weights_.rows());
        ++resets_;
    }
    return estimate;
}

EigenReceiver::EigenReceiver(std::size_t ambient, std::size_t outputs,
                             std::vector<std::size_t> ranks, double lambda, double delta,
                             std::size_t interval)
    : ranks_(std::move(ranks)), lambda_(lambda), interval_(interval) {
    require(!ranks_.empty(), "at least one rank is required");
    for (auto D : ranks_) {
        require(D >= 1 && D <= ambient, "rank must satisfy 1 <= D <= M");
    }
    require(interval_ >= 1, "refresh interval must be positive");
    require(delta > 0.0, "delta must be positive");
    const auto M = static_cast<Eigen::Index>(ambient);
    const auto K = static_cast<Eigen::Index>(outputs);
    R_ = CMat::Identity(M, M) / delta;
    P_.assign(ranks_.size(), CMat::Zero(M, K));
    filters_.assign(ranks_.size(), CMat::Zero(M, K));
}

CVec EigenReceiver::predict(const CVec& r, std::size_t which) const {
    return filters_.at(which).adjoint() * r;
}

void EigenReceiver::update(const CVec& r, const CVec& desired) {
    update(r, std::vector<CVec>(ranks_.size(), desired));
}

void EigenReceiver::update(const CVec& r, const std::vector<CVec>& desired) {
    require(desired.size() == ranks_.size(), "need one desired vector per rank");
    require(r.size() == R_.rows(), "observation length != M");
    R_ *= lambda_;
    R_.selfadjointView<Eigen::Lower>().rankUpdate(r);
    for (std::size_t k = 0; k < ranks_.size(); ++k) {
        require(desired[k].size() == P_[k].cols(), "desired length != K");
        P_[k] = lambda_ * P_[k] + r * desired[k].adjoint();
    }
    if (++seen_ % interval_ == 0) {
        refresh();
    }
}

void EigenReceiver::refresh() {
    const CMat R = R_.selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<CMat> eig(R);
    if (eig.info() != Eigen::Success) {
        return;
    }
    for (std::size_t k = 0; k < ranks_.size(); ++k) {
        const auto D = static_cast<Eigen::Index>(ranks_[k]);
        const CMat S = eig.eigenvectors().rightCols(D).rowwise().reverse();
        try {
            filters_[k] = S * optimal_reduced_filter(S, CovariancePair{R, P_[k], 0.0});
        } catch (const numerical_error&) {
            // keep the previous filter
        }
    }
}

}  // namespace glrds
