// SPDX-License-Identifier: Apache-2.0
//
// Symbolic layer for performance estimation: leaf points, linear point
// combinations, function-value symbols and scalar expressions that are
// quadratic in points and linear in function values.
//
// A scalar expression e evaluates against a Gram matrix G of the leaf points
// and a vector F of function values as
//
//     e(G, F) = const + lin^T F + <quad, G>
//
// where quad is symmetric. Leaves may be assigned to mutually orthogonal
// subspaces; the Gram matrix is then block diagonal and cross-subspace
// entries of quad carry no information (PepModel::canonicalize drops them).

#ifndef LYACERT_SYMBOLIC_HPP
#define LYACERT_SYMBOLIC_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace lyacert {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Raised when a model is used inconsistently (dimension mismatch,
/// asymmetric LMI, bad probabilities, ...).
class ModelingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for invalid numeric parameters (L <= 0, mu >= L, step <= 0, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct LeafIndex {
    std::size_t id = 0;
    friend bool operator==(LeafIndex, LeafIndex) = default;
    friend auto operator<=>(LeafIndex, LeafIndex) = default;
};

struct FSymbol {
    std::size_t id = 0;
    friend bool operator==(FSymbol, FSymbol) = default;
    friend auto operator<=>(FSymbol, FSymbol) = default;
};

/// A point of the model expressed in the leaf basis: y = sum_k coeffs[k] xi_k.
/// The empty point is the origin (used for x* = 0).
class PointExpr {
public:
    PointExpr() = default;
    static PointExpr leaf(LeafIndex idx);

    Scalar coeff(std::size_t leaf) const;
    const std::map<std::size_t, Scalar>& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }
    /// One past the largest leaf index referenced (0 for the origin).
    std::size_t extent() const;

    Vector dense(std::size_t leaf_count) const;

    PointExpr& operator+=(const PointExpr& other);
    PointExpr& operator-=(const PointExpr& other);
    PointExpr& operator*=(Scalar t);

    friend PointExpr operator+(PointExpr a, const PointExpr& b) { return a += b; }
    friend PointExpr operator-(PointExpr a, const PointExpr& b) { return a -= b; }
    friend PointExpr operator-(PointExpr a) { return a *= -1.0; }
    friend PointExpr operator*(Scalar t, PointExpr a) { return a *= t; }
    friend PointExpr operator*(PointExpr a, Scalar t) { return a *= t; }
    friend bool operator==(const PointExpr&, const PointExpr&) = default;

private:
    void add_term(std::size_t leaf, Scalar value);
    std::map<std::size_t, Scalar> coeffs_;
};

/// const + lin^T F + <quad, G>. quad is stored as its upper triangle
/// (row <= col); the represented matrix is symmetric by construction.
class ScalarExpr {
public:
    using Key = std::pair<std::size_t, std::size_t>;

    ScalarExpr() = default;
    explicit ScalarExpr(Scalar constant) : constant_(constant) {}

    Scalar constant() const { return constant_; }
    const std::map<std::size_t, Scalar>& lin() const { return lin_; }
    const std::map<Key, Scalar>& quad() const { return quad_; }

    /// Symmetric matrix entry Q(i, j) = Q(j, i).
    Scalar quad_entry(std::size_t i, std::size_t j) const;
    Scalar lin_entry(std::size_t f) const;

    bool has_quad() const { return !quad_.empty(); }
    bool is_zero() const { return constant_ == 0.0 && lin_.empty() && quad_.empty(); }
    std::size_t leaf_extent() const;
    std::size_t f_extent() const;

    void add_constant(Scalar value) { constant_ += value; }
    void add_lin(std::size_t f, Scalar value);
    /// Adds value to Q(i, j) and Q(j, i) (once on the diagonal).
    void add_quad(std::size_t i, std::size_t j, Scalar value);

    Matrix quad_dense(std::size_t leaf_count) const;
    Vector lin_dense(std::size_t f_count) const;
    static ScalarExpr from_dense(Scalar constant, const Vector& lin, const Matrix& quad);

    ScalarExpr& operator+=(const ScalarExpr& other);
    ScalarExpr& operator-=(const ScalarExpr& other);
    ScalarExpr& operator*=(Scalar t);

    friend ScalarExpr operator+(ScalarExpr a, const ScalarExpr& b) { return a += b; }
    friend ScalarExpr operator-(ScalarExpr a, const ScalarExpr& b) { return a -= b; }
    friend ScalarExpr operator-(ScalarExpr a) { return a *= -1.0; }
    friend ScalarExpr operator*(Scalar t, ScalarExpr a) { return a *= t; }
    friend ScalarExpr operator*(ScalarExpr a, Scalar t) { return a *= t; }
    friend bool operator==(const ScalarExpr&, const ScalarExpr&) = default;

private:
    Scalar constant_ = 0.0;
    std::map<std::size_t, Scalar> lin_;
    std::map<Key, Scalar> quad_;
};

/// Linear combination sum_i weights[i] * points[i]. No leaf is created.
PointExpr combine(const std::vector<PointExpr>& points, const std::vector<Scalar>& weights);

/// <p, r> as a pure quadratic expression: quad = (pi(p) pi(r)^T + pi(r) pi(p)^T) / 2.
ScalarExpr dot(const PointExpr& p, const PointExpr& r);
inline ScalarExpr sqnorm(const PointExpr& p) { return dot(p, p); }

/// The function value symbol as an expression (lin = e_symbol).
ScalarExpr f_value(FSymbol symbol);

inline ScalarExpr add(const ScalarExpr& a, const ScalarExpr& b) { return a + b; }
inline ScalarExpr scale(const ScalarExpr& a, Scalar t) { return t * a; }

enum class Sense { Leq0, Eq0 };

struct Constraint {
    ScalarExpr expr;
    Sense sense = Sense::Leq0;
    std::string tag;
};

/// Symmetric matrix whose entries are scalar expressions; required PSD.
struct LmiBlock {
    std::size_t dim = 0;
    /// Row-major dim x dim entries.
    std::vector<ScalarExpr> entries;
    std::string tag;

    const ScalarExpr& at(std::size_t i, std::size_t j) const { return entries[i * dim + j]; }
    ScalarExpr& at(std::size_t i, std::size_t j) { return entries[i * dim + j]; }
};

using NamedEntity = std::variant<PointExpr, FSymbol>;

/// Append-only registry of leaves, function-value symbols, constraints and
/// LMI blocks. Once frozen, every mutating call throws.
class PepModel {
public:
    PepModel() = default;

    /// Creates a leaf in `subspace`; leaves of distinct subspaces are orthogonal.
    PointExpr new_leaf(std::size_t subspace = 0);
    FSymbol new_f_symbol();

    std::size_t leaf_count() const { return leaf_subspace_.size(); }
    std::size_t f_count() const { return f_count_; }
    std::size_t subspace_of(std::size_t leaf) const { return leaf_subspace_.at(leaf); }
    const std::vector<std::size_t>& leaf_subspaces() const { return leaf_subspace_; }
    std::size_t subspace_count() const;
    /// Leaves of each subspace, in creation order.
    std::vector<std::vector<std::size_t>> subspace_leaves() const;

    /// Drops quad entries pairing leaves of different subspaces (they vanish
    /// on every admissible Gram matrix).
    ScalarExpr canonicalize(const ScalarExpr& expr) const;
    /// Throws ModelingError if expr refers to unknown leaves or symbols.
    void check(const ScalarExpr& expr) const;

    std::size_t add_constraint(const ScalarExpr& expr, Sense sense, std::string tag);
    std::size_t add_lmi_block(LmiBlock block);

    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<LmiBlock>& lmi_blocks() const { return lmi_blocks_; }

    void name(const std::string& key, NamedEntity entity);
    const std::map<std::string, NamedEntity>& names() const { return names_; }
    std::optional<NamedEntity> lookup(const std::string& key) const;

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

private:
    void require_mutable() const;

    std::vector<std::size_t> leaf_subspace_;
    std::size_t f_count_ = 0;
    std::vector<Constraint> constraints_;
    std::vector<LmiBlock> lmi_blocks_;
    std::map<std::string, NamedEntity> names_;
    bool frozen_ = false;
};

/// Explicit values for every leaf (columns of `leaves`) and symbol.
struct Valuation {
    Matrix leaves;  // n x leaf_count
    Vector values;  // f_count

    Matrix gram() const { return leaves.transpose() * leaves; }
};

/// const + lin^T F + <quad, G> with G the Gram matrix of the valuation.
Scalar evaluate(const ScalarExpr& expr, const Valuation& valuation);
Scalar evaluate(const ScalarExpr& expr, const Matrix& gram, const Vector& values);
Vector evaluate(const PointExpr& point, const Valuation& valuation);

/// Vectors realizing a PSD Gram matrix: returns V (n x n) with V^T V = G.
/// Singular G are accepted; tiny negative eigenvalues are clipped.
Matrix realize_gram(const Matrix& gram);

}  // namespace lyacert

#endif  // LYACERT_SYMBOLIC_HPP
