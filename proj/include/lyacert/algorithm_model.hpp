// SPDX-License-Identifier: Apache-2.0
//
// One algorithm iteration as a linear map on the leaf basis.
//
// Orientation (read this before touching sigma):
//
//   * Point transition Sigma is stored COLUMN per pre-iteration leaf:
//       Sigma e_i = pi(image of leaf i),
//     so the post-iteration Gram matrix is G+ = Sigma^T G Sigma and a
//     quadratic form transports as quad -> Sigma quad Sigma^T.
//
//   * Value transition sigma_f is stored ROW per pre-iteration symbol:
//       F+ = sigma_f F,   row j = lin part of the image of symbol j,
//     so a linear form transports as lin -> sigma_f^T lin.
//
// Columns (resp. rows) of untracked leaves (resp. symbols) are zero.

#ifndef LYACERT_ALGORITHM_MODEL_HPP
#define LYACERT_ALGORITHM_MODEL_HPP

#include <set>
#include <utility>
#include <vector>

#include "lyacert/symbolic.hpp"

namespace lyacert {

struct IterationMap {
    std::vector<std::pair<LeafIndex, PointExpr>> point_pairs;
    /// Post images must be affine in F (no quadratic part).
    std::vector<std::pair<FSymbol, ScalarExpr>> f_pairs;
    std::set<std::size_t> lyapunov_support;

    void map_point(const PointExpr& pre_leaf, const PointExpr& post);
    void map_value(FSymbol pre, const ScalarExpr& post);
    void map_value(FSymbol pre, FSymbol post) { map_value(pre, f_value(post)); }
};

struct TransitionPair {
    Matrix sigma;    // leaf_count x leaf_count, column per pre leaf
    Matrix sigma_f;  // f_count x f_count, row per pre symbol
    /// Constant offsets of the value images (zero unless an image has a constant).
    Vector sigma_f_offset;
};

struct Outcome {
    Scalar prob = 1.0;
    TransitionPair transition;
};

struct OutcomeSet {
    std::vector<Outcome> outcomes;

    static OutcomeSet deterministic(TransitionPair t) { return OutcomeSet{{Outcome{1.0, std::move(t)}}}; }
    /// Throws ModelingError unless probabilities lie in (0, 1] and sum to 1 within 1e-12.
    void validate() const;
};

TransitionPair build_sigma(const PepModel& model, const IterationMap& map);

/// Expression evaluated after the iteration, written in pre-iteration terms.
ScalarExpr transport(const ScalarExpr& expr, const TransitionPair& t);

/// sum_w prob_w * transport(expr, transition_w).
ScalarExpr expect(const OutcomeSet& outcomes, const ScalarExpr& expr);

}  // namespace lyacert

#endif  // LYACERT_ALGORITHM_MODEL_HPP
