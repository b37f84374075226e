// SPDX-License-Identifier: Apache-2.0

#include "lyacert/algorithm_model.hpp"

#include <cmath>
#include <set>

namespace lyacert {

void IterationMap::map_point(const PointExpr& pre_leaf, const PointExpr& post) {
    const auto& c = pre_leaf.coeffs();
    if (c.size() != 1 || c.begin()->second != 1.0) throw ModelingError("map_point expects a leaf as pre-image");
    const LeafIndex idx{c.begin()->first};
    for (const auto& [pre, img] : point_pairs) {
        if (pre == idx) throw ModelingError("leaf mapped twice");
    }
    point_pairs.emplace_back(idx, post);
    lyapunov_support.insert(idx.id);
}

void IterationMap::map_value(FSymbol pre, const ScalarExpr& post) {
    if (post.has_quad()) throw ModelingError("value images must not depend on the Gram matrix");
    for (const auto& [p, img] : f_pairs) {
        if (p == pre) throw ModelingError("symbol mapped twice");
    }
    f_pairs.emplace_back(pre, post);
}

void OutcomeSet::validate() const {
    if (outcomes.empty()) throw ModelingError("outcome set is empty");
    Scalar total = 0.0;
    for (const auto& o : outcomes) {
        if (!(o.prob > 0.0) || !(o.prob <= 1.0)) throw ModelingError("outcome probability outside (0, 1]");
        total += o.prob;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ModelingError("outcome probabilities do not sum to 1");
}

TransitionPair build_sigma(const PepModel& model, const IterationMap& map) {
    const auto n = static_cast<Eigen::Index>(model.leaf_count());
    const auto nf = static_cast<Eigen::Index>(model.f_count());
    TransitionPair t{Matrix::Zero(n, n), Matrix::Zero(nf, nf), Vector::Zero(nf)};
    for (std::size_t s : map.lyapunov_support) {
        bool mapped = false;
        for (const auto& [pre, post] : map.point_pairs) mapped = mapped || pre.id == s;
        if (!mapped) throw ModelingError("Lyapunov support contains an unmapped leaf");
    }
    for (const auto& [pre, post] : map.point_pairs) {
        if (pre.id >= model.leaf_count()) throw ModelingError("pre-image leaf outside the model");
        if (post.extent() > model.leaf_count()) throw ModelingError("image refers to a leaf outside the model");
        const std::size_t space = model.subspace_of(pre.id);
        for (auto [k, c] : post.coeffs()) {
            if (model.subspace_of(k) != space) throw ModelingError("image leaves the subspace of its pre-image");
            t.sigma(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(pre.id)) = c;
        }
    }
    for (const auto& [pre, post] : map.f_pairs) {
        if (pre.id >= model.f_count() || post.f_extent() > model.f_count())
            throw ModelingError("value map refers to a symbol outside the model");
        for (auto [k, c] : post.lin()) t.sigma_f(static_cast<Eigen::Index>(pre.id), static_cast<Eigen::Index>(k)) = c;
        t.sigma_f_offset(static_cast<Eigen::Index>(pre.id)) = post.constant();
    }
    return t;
}

ScalarExpr transport(const ScalarExpr& expr, const TransitionPair& t) {
    const auto n = static_cast<std::size_t>(t.sigma.rows());
    const auto nf = static_cast<std::size_t>(t.sigma_f.rows());
    const Vector lin = expr.lin_dense(nf);
    Scalar constant = expr.constant();
    if (t.sigma_f_offset.size() == lin.size()) constant += lin.dot(t.sigma_f_offset);
    Matrix quad;
    if (expr.has_quad()) {
        quad = t.sigma * expr.quad_dense(n) * t.sigma.transpose();
    } else {
        quad = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    }
    return ScalarExpr::from_dense(constant, t.sigma_f.transpose() * lin, quad);
}

ScalarExpr expect(const OutcomeSet& outcomes, const ScalarExpr& expr) {
    outcomes.validate();
    ScalarExpr out;
    for (const auto& o : outcomes.outcomes) out += o.prob * transport(expr, o.transition);
    return out;
}

}  // namespace lyacert
