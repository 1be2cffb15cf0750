#include <doctest.h>

#include "glrds/snapshot.hpp"
#include "helpers.hpp"

using namespace glrds;
using testutil::Gen;

namespace {

GlrdsParams params() {
    GlrdsParams p;
    p.ambient = 20;
    p.rank = 3;
    p.outputs = 2;
    p.branches = 3;
    p.iterations = 2;
    p.lambda = 0.98;
    return p;
}

}  // namespace

TEST_CASE("restored filter continues bit-identically") {
    Gen g(1);
    GlrdsFilter a(params());
    for (int n = 0; n < 50; ++n) a.step(g.vec(20), g.vec(2));
    GlrdsFilter b = load_snapshot(save_snapshot(a));
    CHECK(b.selected_branch() == a.selected_branch());
    for (int n = 0; n < 50; ++n) {
        const CVec r = g.vec(20);
        const CVec x = g.vec(2);
        const auto oa = a.step(r, x);
        const auto ob = b.step(r, x);
        CHECK(oa.selected_branch == ob.selected_branch);
    }
    CHECK(a.weights() == b.weights());
    CHECK(a.inverse_correlation() == b.inverse_correlation());
    for (std::size_t br = 0; br < 3; ++br) {
        for (std::size_t d = 0; d < 3; ++d) {
            CHECK(a.branch(br).basis[d] == b.branch(br).basis[d]);
            CHECK(a.branch(br).inv_corr[d] == b.branch(br).inv_corr[d]);
        }
        CHECK(a.branch(br).cross_corr[1] == b.branch(br).cross_corr[1]);
    }
}

TEST_CASE("snapshot validation") {
    GlrdsFilter a(params());
    auto j = to_json(a);
    CHECK(j["params"]["D"] == 3);
    auto bad = j;
    bad["format"] = "other";
    CHECK_THROWS_AS(filter_from_json(bad), std::invalid_argument);
    bad = j;
    bad["version"] = 2;
    CHECK_THROWS_AS(filter_from_json(bad), std::invalid_argument);
    bad = j;
    bad["selected_branch"] = 7;
    CHECK_THROWS_AS(filter_from_json(bad), std::invalid_argument);
    bad = j;
    bad["branches"].erase(0);
    CHECK_THROWS_AS(filter_from_json(bad), std::invalid_argument);
    CHECK_THROWS(load_snapshot("{not json"));
}
