#pragma once

#include <random>

#include "glrds/types.hpp"

namespace testutil {

using glrds::cd;
using glrds::CMat;
using glrds::CVec;

struct Gen {
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    std::mt19937_64 rng;
    std::normal_distribution<double> n{0.0, std::sqrt(0.5)};

    cd c() { return {n(rng), n(rng)}; }
    CVec vec(Eigen::Index m) {
        CVec v(m);
        for (Eigen::Index k = 0; k < m; ++k) v(k) = c();
        return v;
    }
    CMat mat(Eigen::Index r, Eigen::Index k) {
        CMat m(r, k);
        for (Eigen::Index j = 0; j < k; ++j) m.col(j) = vec(r);
        return m;
    }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }
};

inline double rel(const CMat& a, const CMat& ref) { return (a - ref).norm() / ref.norm(); }

}  // namespace testutil
