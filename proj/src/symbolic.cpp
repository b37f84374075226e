// SPDX-License-Identifier: Apache-2.0

#include "lyacert/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

namespace lyacert {

namespace {

template <typename Map, typename Key>
void accumulate(Map& map, const Key& key, Scalar value) {
    if (value == 0.0) return;
    auto [it, inserted] = map.try_emplace(key, value);
    if (!inserted) {
        it->second += value;
        if (it->second == 0.0) map.erase(it);
    }
}

void require_finite(Scalar value, const char* what) {
    if (!std::isfinite(value)) throw ModelingError(std::string("non-finite ") + what);
}

}  // namespace

// ---------------------------------------------------------------- PointExpr

PointExpr PointExpr::leaf(LeafIndex idx) {
    PointExpr p;
    p.coeffs_.emplace(idx.id, 1.0);
    return p;
}

Scalar PointExpr::coeff(std::size_t leaf) const {
    auto it = coeffs_.find(leaf);
    return it == coeffs_.end() ? 0.0 : it->second;
}

std::size_t PointExpr::extent() const { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first + 1; }

Vector PointExpr::dense(std::size_t leaf_count) const {
    if (extent() > leaf_count) throw ModelingError("point refers to a leaf outside the basis");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(leaf_count));
    for (auto [k, c] : coeffs_) v(static_cast<Eigen::Index>(k)) = c;
    return v;
}

void PointExpr::add_term(std::size_t leaf, Scalar value) {
    require_finite(value, "point coefficient");
    accumulate(coeffs_, leaf, value);
}

PointExpr& PointExpr::operator+=(const PointExpr& other) {
    for (auto [k, c] : other.coeffs_) add_term(k, c);
    return *this;
}

PointExpr& PointExpr::operator-=(const PointExpr& other) {
    for (auto [k, c] : other.coeffs_) add_term(k, -c);
    return *this;
}

PointExpr& PointExpr::operator*=(Scalar t) {
    require_finite(t, "scale factor");
    if (t == 0.0) {
        coeffs_.clear();
        return *this;
    }
    for (auto& [k, c] : coeffs_) c *= t;
    return *this;
}

PointExpr combine(const std::vector<PointExpr>& points, const std::vector<Scalar>& weights) {
    if (points.size() != weights.size() || points.empty())
        throw ModelingError("combine: points and weights must have the same nonzero length");
    PointExpr out;
    for (std::size_t i = 0; i < points.size(); ++i) out += weights[i] * points[i];
    return out;
}

// --------------------------------------------------------------- ScalarExpr

Scalar ScalarExpr::quad_entry(std::size_t i, std::size_t j) const {
    auto it = quad_.find({std::min(i, j), std::max(i, j)});
    return it == quad_.end() ? 0.0 : it->second;
}

Scalar ScalarExpr::lin_entry(std::size_t f) const {
    auto it = lin_.find(f);
    return it == lin_.end() ? 0.0 : it->second;
}

std::size_t ScalarExpr::leaf_extent() const {
    std::size_t e = 0;
    for (const auto& [key, v] : quad_) e = std::max(e, key.second + 1);
    return e;
}

std::size_t ScalarExpr::f_extent() const { return lin_.empty() ? 0 : lin_.rbegin()->first + 1; }

void ScalarExpr::add_lin(std::size_t f, Scalar value) {
    require_finite(value, "linear coefficient");
    accumulate(lin_, f, value);
}

void ScalarExpr::add_quad(std::size_t i, std::size_t j, Scalar value) {
    require_finite(value, "quadratic coefficient");
    accumulate(quad_, Key{std::min(i, j), std::max(i, j)}, value);
}

Matrix ScalarExpr::quad_dense(std::size_t leaf_count) const {
    if (leaf_extent() > leaf_count) throw ModelingError("expression refers to a leaf outside the basis");
    const auto n = static_cast<Eigen::Index>(leaf_count);
    Matrix q = Matrix::Zero(n, n);
    for (const auto& [key, v] : quad_) {
        const auto i = static_cast<Eigen::Index>(key.first);
        const auto j = static_cast<Eigen::Index>(key.second);
        q(i, j) = v;
        q(j, i) = v;
    }
    return q;
}

Vector ScalarExpr::lin_dense(std::size_t f_count) const {
    if (f_extent() > f_count) throw ModelingError("expression refers to a symbol outside the basis");
    Vector l = Vector::Zero(static_cast<Eigen::Index>(f_count));
    for (auto [k, v] : lin_) l(static_cast<Eigen::Index>(k)) = v;
    return l;
}

ScalarExpr ScalarExpr::from_dense(Scalar constant, const Vector& lin, const Matrix& quad) {
    if (quad.rows() != quad.cols()) throw ModelingError("quadratic part must be square");
    ScalarExpr e(constant);
    for (Eigen::Index k = 0; k < lin.size(); ++k) e.add_lin(static_cast<std::size_t>(k), lin(k));
    for (Eigen::Index j = 0; j < quad.cols(); ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            // symmetrize so that round-off asymmetry cannot leak in
            const Scalar v = i == j ? quad(i, i) : 0.5 * (quad(i, j) + quad(j, i));
            e.add_quad(static_cast<std::size_t>(i), static_cast<std::size_t>(j), v);
        }
    }
    return e;
}

ScalarExpr& ScalarExpr::operator+=(const ScalarExpr& other) {
    constant_ += other.constant_;
    for (auto [k, v] : other.lin_) accumulate(lin_, k, v);
    for (const auto& [key, v] : other.quad_) accumulate(quad_, key, v);
    return *this;
}

ScalarExpr& ScalarExpr::operator-=(const ScalarExpr& other) {
    constant_ -= other.constant_;
    for (auto [k, v] : other.lin_) accumulate(lin_, k, -v);
    for (const auto& [key, v] : other.quad_) accumulate(quad_, key, -v);
    return *this;
}

ScalarExpr& ScalarExpr::operator*=(Scalar t) {
    require_finite(t, "scale factor");
    if (t == 0.0) {
        *this = ScalarExpr();
        return *this;
    }
    constant_ *= t;
    for (auto& [k, v] : lin_) v *= t;
    for (auto& [k, v] : quad_) v *= t;
    return *this;
}

ScalarExpr dot(const PointExpr& p, const PointExpr& r) {
    ScalarExpr e;
    for (auto [i, a] : p.coeffs()) {
        for (auto [j, b] : r.coeffs()) {
            // the (i, j) and (j, i) halves each contribute a*b/2
            e.add_quad(i, j, i == j ? a * b : 0.5 * a * b);
        }
    }
    return e;
}

ScalarExpr f_value(FSymbol symbol) {
    ScalarExpr e;
    e.add_lin(symbol.id, 1.0);
    return e;
}

// ------------------------------------------------------------------ PepModel

PointExpr PepModel::new_leaf(std::size_t subspace) {
    require_mutable();
    leaf_subspace_.push_back(subspace);
    return PointExpr::leaf(LeafIndex{leaf_subspace_.size() - 1});
}

FSymbol PepModel::new_f_symbol() {
    require_mutable();
    return FSymbol{f_count_++};
}

std::size_t PepModel::subspace_count() const {
    std::size_t n = 0;
    for (auto s : leaf_subspace_) n = std::max(n, s + 1);
    return n;
}

std::vector<std::vector<std::size_t>> PepModel::subspace_leaves() const {
    std::vector<std::vector<std::size_t>> out(subspace_count());
    for (std::size_t k = 0; k < leaf_subspace_.size(); ++k) out[leaf_subspace_[k]].push_back(k);
    return out;
}

ScalarExpr PepModel::canonicalize(const ScalarExpr& expr) const {
    check(expr);
    ScalarExpr out(expr.constant());
    for (auto [k, v] : expr.lin()) out.add_lin(k, v);
    for (const auto& [key, v] : expr.quad()) {
        if (leaf_subspace_[key.first] == leaf_subspace_[key.second]) out.add_quad(key.first, key.second, v);
    }
    return out;
}

void PepModel::check(const ScalarExpr& expr) const {
    if (expr.leaf_extent() > leaf_count()) throw ModelingError("expression refers to an unknown leaf");
    if (expr.f_extent() > f_count()) throw ModelingError("expression refers to an unknown function value");
}

std::size_t PepModel::add_constraint(const ScalarExpr& expr, Sense sense, std::string tag) {
    require_mutable();
    if (tag.empty()) throw ModelingError("constraint tag must be nonempty");
    constraints_.push_back(Constraint{canonicalize(expr), sense, std::move(tag)});
    return constraints_.size() - 1;
}

std::size_t PepModel::add_lmi_block(LmiBlock block) {
    require_mutable();
    if (block.dim == 0 || block.entries.size() != block.dim * block.dim)
        throw ModelingError("LMI block entries do not match its dimension");
    for (std::size_t i = 0; i < block.dim; ++i) {
        for (std::size_t j = i + 1; j < block.dim; ++j) {
            if (!(block.at(i, j) == block.at(j, i))) throw ModelingError("LMI block is not symmetric");
        }
    }
    for (auto& e : block.entries) e = canonicalize(e);
    if (block.tag.empty()) block.tag = "lmi" + std::to_string(lmi_blocks_.size());
    lmi_blocks_.push_back(std::move(block));
    return lmi_blocks_.size() - 1;
}

void PepModel::name(const std::string& key, NamedEntity entity) {
    require_mutable();
    names_.insert_or_assign(key, std::move(entity));
}

std::optional<NamedEntity> PepModel::lookup(const std::string& key) const {
    auto it = names_.find(key);
    if (it == names_.end()) return std::nullopt;
    return it->second;
}

void PepModel::require_mutable() const {
    if (frozen_) throw ModelingError("model is frozen");
}

// ---------------------------------------------------------------- evaluation

Scalar evaluate(const ScalarExpr& expr, const Matrix& gram, const Vector& values) {
    Scalar out = expr.constant();
    for (auto [k, v] : expr.lin()) out += v * values(static_cast<Eigen::Index>(k));
    for (const auto& [key, v] : expr.quad()) {
        const auto i = static_cast<Eigen::Index>(key.first);
        const auto j = static_cast<Eigen::Index>(key.second);
        out += (i == j ? 1.0 : 2.0) * v * gram(i, j);
    }
    return out;
}

Scalar evaluate(const ScalarExpr& expr, const Valuation& valuation) {
    Scalar out = expr.constant();
    for (auto [k, v] : expr.lin()) out += v * valuation.values(static_cast<Eigen::Index>(k));
    for (const auto& [key, v] : expr.quad()) {
        const auto i = static_cast<Eigen::Index>(key.first);
        const auto j = static_cast<Eigen::Index>(key.second);
        out += (i == j ? 1.0 : 2.0) * v * valuation.leaves.col(i).dot(valuation.leaves.col(j));
    }
    return out;
}

Vector evaluate(const PointExpr& point, const Valuation& valuation) {
    Vector v = Vector::Zero(valuation.leaves.rows());
    for (auto [k, c] : point.coeffs()) v += c * valuation.leaves.col(static_cast<Eigen::Index>(k));
    return v;
}

Matrix realize_gram(const Matrix& gram) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace lyacert
