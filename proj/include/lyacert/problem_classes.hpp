// SPDX-License-Identifier: Apache-2.0
//
// Function classes and linear operators. A handle records every
// (point, gradient, value) triple queried during modeling; the class
// constraints are emitted over all registered triples once the iteration
// has been described.

#ifndef LYACERT_PROBLEM_CLASSES_HPP
#define LYACERT_PROBLEM_CLASSES_HPP

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "lyacert/symbolic.hpp"

namespace lyacert {

struct Convex {};

struct SmoothConvex {
    Scalar L = 1.0;
};

struct SmoothStronglyConvex {
    Scalar mu = 0.0;
    Scalar L = 1.0;
};

/// Convex function whose partial gradient along block i is L[i]-Lipschitz.
/// Block i lives in model subspace subspaces[i]; a point of the function's
/// domain is the (orthogonal) sum of its block components.
struct BlockSmoothConvex {
    std::vector<Scalar> L;
    std::vector<std::size_t> subspaces;
};

using FunctionClass = std::variant<Convex, SmoothConvex, SmoothStronglyConvex, BlockSmoothConvex>;

std::string class_name(const FunctionClass& cls);
void validate(const FunctionClass& cls);

struct Triple {
    PointExpr point;
    PointExpr grad;
    FSymbol value;
};

class FunctionHandle {
public:
    FunctionHandle(PepModel& model, FunctionClass cls, std::string name, std::size_t subspace);

    const FunctionClass& function_class() const { return class_; }
    const std::string& name() const { return name_; }
    const std::vector<Triple>& triples() const { return triples_; }
    PepModel& model() const { return *model_; }
    /// Subspace of gradient leaves for non-block classes.
    std::size_t subspace() const { return subspace_; }

    /// Gradient (or subgradient) and value at `point`; creates the gradient
    /// leaf (one per block for block classes) and a value symbol. Repeated
    /// calls on an identical point return the cached triple.
    Triple oracle(const PointExpr& point);

    /// Registers a triple without creating leaves, e.g. a minimizer with
    /// zero gradient. Creates a value symbol.
    Triple register_stationary(const PointExpr& point);
    Triple register_triple(const PointExpr& point, const PointExpr& grad);

    /// prox_{step * f}(anchor): creates the subgradient leaf g' at the output
    /// and defines output = anchor - step * g'.
    Triple prox(const PointExpr& anchor, Scalar step);

    /// Block component of a point (block classes only).
    PointExpr block_part(const PointExpr& point, std::size_t block) const;

    /// Pairwise class inequalities over every ordered pair of triples.
    std::vector<std::size_t> emit_class_constraints();

    /// f(post) <= f(pre) + <grad f(pre), post - pre> + (L_block / 2) ||post - pre||^2.
    /// post - pre must be supported on `block`; this is not verified.
    std::vector<std::size_t> emit_block_smooth_constraints(const PointExpr& pre, const PointExpr& post,
                                                          std::size_t block);

private:
    const Triple* find(const PointExpr& point) const;

    PepModel* model_;
    FunctionClass class_;
    std::string name_;
    std::size_t subspace_;
    std::vector<Triple> triples_;
};

FunctionHandle declare_function(PepModel& model, FunctionClass cls, std::string name = "f",
                                std::size_t subspace = 0);

/// Pairwise inequality "expr <= 0" of the class between triples i and j
/// (block-smooth classes return one expression per block).
std::vector<ScalarExpr> interpolation_inequalities(const FunctionClass& cls, const Triple& i, const Triple& j,
                                                   const FunctionHandle* handle = nullptr);

/// Linear operator M: X -> Y with ||M|| <= norm_bound. X-points live in
/// `in_subspace`, Y-points in `out_subspace`.
class OperatorHandle {
public:
    struct Application {
        PointExpr input;
        PointExpr output;
    };

    OperatorHandle(PepModel& model, Scalar norm_bound, std::string name, std::size_t in_subspace,
                   std::size_t out_subspace);

    Scalar norm_bound() const { return norm_bound_; }
    const std::string& name() const { return name_; }
    const std::vector<Application>& forward() const { return forward_; }
    const std::vector<Application>& adjoint() const { return adjoint_; }

    /// M point; one new leaf per distinct input point.
    PointExpr apply(const PointExpr& point);
    /// M^T point; one new leaf per distinct input point.
    PointExpr apply_adjoint(const PointExpr& point);

    /// Adjoint equalities <M u_i, v_j> = <u_i, M^T v_j> for all tracked pairs
    /// and the Gram-domination LMIs [L^2 <u_i,u_j> - <M u_i, M u_j>] >= 0
    /// (and likewise for the adjoint inputs).
    std::vector<std::size_t> emit_operator_constraints();

private:
    PepModel* model_;
    Scalar norm_bound_;
    std::string name_;
    std::size_t in_subspace_;
    std::size_t out_subspace_;
    std::vector<Application> forward_;
    std::vector<Application> adjoint_;
};

OperatorHandle declare_operator(PepModel& model, Scalar norm_bound, std::string name = "M",
                                std::size_t in_subspace = 0, std::size_t out_subspace = 0);

}  // namespace lyacert

#endif  // LYACERT_PROBLEM_CLASSES_HPP
