#include "glrds/snapshot.hpp"

namespace glrds {

using nlohmann::json;

namespace {

json matrix_to_json(const CMat& m) {
    json re = json::array();
    json im = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            re.push_back(m(r, c).real());
            im.push_back(m(r, c).imag());
        }
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

CMat matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    require(re.size() == static_cast<std::size_t>(rows * cols) && im.size() == re.size(),
            "snapshot matrix has inconsistent size");
    CMat m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r, ++k) {
            m(r, c) = cd(re[k].get<double>(), im[k].get<double>());
        }
    }
    return m;
}

template <typename Container>
json list_to_json(const Container& items) {
    json out = json::array();
    for (const auto& item : items) {
        out.push_back(matrix_to_json(item));
    }
    return out;
}

}  // namespace

struct GlrdsSnapshotAccess {
    static json dump(const GlrdsFilter& f) {
        const auto& p = f.params_;
        json branches = json::array();
        for (const auto& br : f.branches_) {
            branches.push_back(json{{"basis", list_to_json(br.basis)},
                                    {"inverse_correlation", list_to_json(br.inv_corr)},
                                    {"cross_correlation", list_to_json(br.cross_corr)},
                                    {"cross_vector", list_to_json(br.cross_vec)}});
        }
        return json{{"format", "glrds-state"},
                    {"version", 1},
                    {"params",
                     {{"M", p.ambient},
                      {"D", p.rank},
                      {"K", p.outputs},
                      {"I", p.basis_length},
                      {"B", p.branches},
                      {"lambda", p.lambda},
                      {"T", p.iterations},
                      {"delta", p.delta},
                      {"adapt_basis", p.adapt_basis},
                      {"max_condition", p.max_condition}}},
                    {"weights", matrix_to_json(f.weights_)},
                    {"inverse_correlation", matrix_to_json(f.inv_corr_)},
                    {"selected_branch", f.selected_},
                    {"branches", branches}};
    }

    static GlrdsFilter load(const json& j) {
        require(j.at("format") == "glrds-state", "not a glrds-state snapshot");
        require(j.at("version") == 1, "unsupported snapshot version");
        const auto& jp = j.at("params");
        GlrdsParams p;
        p.ambient = jp.at("M");
        p.rank = jp.at("D");
        p.outputs = jp.at("K");
        p.basis_length = jp.at("I");
        p.branches = jp.at("B");
        p.lambda = jp.at("lambda");
        p.iterations = jp.at("T");
        p.delta = jp.at("delta");
        p.adapt_basis = jp.at("adapt_basis");
        p.max_condition = jp.at("max_condition");

        GlrdsFilter f(p);
        f.set_weights(matrix_from_json(j.at("weights")));
        f.inv_corr_ = matrix_from_json(j.at("inverse_correlation"));
        require(f.inv_corr_.rows() == static_cast<Eigen::Index>(p.rank) &&
                    f.inv_corr_.cols() == static_cast<Eigen::Index>(p.rank),
                "snapshot inverse correlation has wrong size");
        f.selected_ = j.at("selected_branch");
        require(f.selected_ < p.branches, "snapshot selected branch out of range");

        const auto& jb = j.at("branches");
        require(jb.size() == p.branches, "snapshot branch count mismatch");
        const auto I = static_cast<Eigen::Index>(p.basis_length);
        for (std::size_t b = 0; b < p.branches; ++b) {
            auto& br = f.branches_[b];
            const auto& src = jb[b];
            require(src.at("basis").size() == p.rank &&
                        src.at("inverse_correlation").size() == p.rank &&
                        src.at("cross_correlation").size() == p.rank * p.rank &&
                        src.at("cross_vector").size() == p.rank,
                    "snapshot branch has wrong number of entries");
            for (std::size_t d = 0; d < p.rank; ++d) {
                br.basis[d] = matrix_from_json(src["basis"][d]);
                br.inv_corr[d] = matrix_from_json(src["inverse_correlation"][d]);
                br.cross_vec[d] = matrix_from_json(src["cross_vector"][d]);
                require(br.basis[d].size() == I && br.cross_vec[d].size() == I &&
                            br.inv_corr[d].rows() == I && br.inv_corr[d].cols() == I,
                        "snapshot branch entry has wrong size");
            }
            for (std::size_t k = 0; k < p.rank * p.rank; ++k) {
                br.cross_corr[k] = matrix_from_json(src["cross_correlation"][k]);
                require(br.cross_corr[k].rows() == I && br.cross_corr[k].cols() == I,
                        "snapshot cross correlation has wrong size");
            }
        }
        return f;
    }
};

json to_json(const GlrdsFilter& filter) { return GlrdsSnapshotAccess::dump(filter); }

GlrdsFilter filter_from_json(const json& snapshot) { return GlrdsSnapshotAccess::load(snapshot); }

std::string save_snapshot(const GlrdsFilter& filter) { return to_json(filter).dump(); }

GlrdsFilter load_snapshot(const std::string& text) { return filter_from_json(json::parse(text)); }

}  // namespace glrds
