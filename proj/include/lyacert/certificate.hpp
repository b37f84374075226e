// SPDX-License-Identifier: Apache-2.0
//
// Lyapunov certificate synthesis. The candidate
//
//     V(G, F) = <Q, G> + sum_k q_k N_k(G, F),   Q >= 0 on the support, q >= 0,
//
// must satisfy a target inequality T(G, F) <= 0 on every (G, F) allowed by
// the model, where T is affine in (Q, q). Weak duality over the inner
// maximization gives the sufficient conditions, for multipliers lambda >= 0
// (inequalities), nu free (equalities), Lambda_k >= 0 (LMI blocks):
//
//   Lagrangian  L = T - sum lambda_i c_i - sum nu_j e_j + sum <Lambda_k, Phi_k>
//   (a) quad(L) <= 0 on every subspace block
//   (b) lin(L)  = 0
//   (c) const(L) <= 0
//
// Descent:    T = E[V+] + R - V
// LinearRate: T1 = E[R+] - E[V+] and T2 = E[V+] - rho V, with independent
//             multipliers for each system.
// MinMaxValue: the inner problem is normalized by G_ii <= 1 on designated
//             leaves (multipliers mu >= 0) and the outer by
//             tr(Q) + sum q <= B; the program minimizes const(L) + sum mu.

#ifndef LYACERT_CERTIFICATE_HPP
#define LYACERT_CERTIFICATE_HPP

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lyacert/algorithm_model.hpp"
#include "lyacert/conic.hpp"
#include "lyacert/symbolic.hpp"

namespace lyacert {

enum class LyapunovMode { Descent, LinearRate, MinMaxValue };

std::string to_string(LyapunovMode mode);

struct MinMaxNormalization {
    /// Bound B in tr(Q) + sum q <= B.
    Scalar trace_bound = 100.0;
    /// Leaves whose Gram diagonal is capped at 1; empty means every leaf.
    std::vector<std::size_t> unit_leaves;
};

struct LyapunovSpec {
    /// Leaves on which Q may be nonzero.
    std::set<std::size_t> support;
    /// Entries of N; each should be nonnegative on the function class.
    std::vector<ScalarExpr> nonneg;
    /// Required decrease R.
    ScalarExpr decrease;
    LyapunovMode mode = LyapunovMode::Descent;
    Scalar rho = 1.0;
    /// Entries with a value are constants instead of unknowns.
    std::vector<std::optional<Scalar>> fixed_q;
    /// Objective: minimize q[k] (otherwise a pure feasibility problem).
    std::optional<std::size_t> minimize_q;
    std::optional<MinMaxNormalization> normalization;

    bool q_fixed(std::size_t k) const { return k < fixed_q.size() && fixed_q[k].has_value(); }
    /// Throws ModelingError or ParameterError.
    void validate(const PepModel& model) const;
};

enum class SystemKind { Descent, RateBound, RateContraction, MinMax };

std::string to_string(SystemKind kind);

/// Solver-variable offsets of one dualized inner problem.
struct SystemIndex {
    SystemKind kind = SystemKind::Descent;
    /// One offset per model constraint (lambda for Leq0, nu for Eq0).
    std::vector<std::size_t> multiplier;
    /// svec offset of each LMI multiplier block.
    std::vector<std::size_t> lmi;
    /// MinMax only: leaf -> offset of mu.
    std::vector<std::pair<std::size_t, std::size_t>> mu;
};

struct QBlockIndex {
    std::size_t subspace = 0;
    std::vector<std::size_t> leaves;
    std::size_t offset = 0;  // svec offset in the solver vector
};

struct CertificateProblem {
    PepModel model;
    OutcomeSet outcomes;
    LyapunovSpec spec;

    conic::ConicProgram program;
    /// Constant added to c^T x to obtain the reported objective.
    Scalar objective_offset = 0.0;

    std::vector<QBlockIndex> q_blocks;
    /// Offset of each free q entry, or nullopt when fixed.
    std::vector<std::optional<std::size_t>> q_offset;
    std::vector<SystemIndex> systems;
};

struct SystemMultipliers {
    SystemKind kind = SystemKind::Descent;
    Vector constraint;  // per model constraint
    std::vector<Matrix> lmi;
    std::vector<std::pair<std::size_t, Scalar>> mu;
};

struct VerificationReport {
    Scalar eig_max = 0.0;
    Scalar lin_res = 0.0;
    Scalar const_slack = 0.0;
    /// Largest violation of sign, PSD, pinning and fixed-value requirements.
    Scalar sign_violation = 0.0;
    bool passed = false;
    std::string failure;
};

struct Certificate {
    Matrix Q;  // leaf_count x leaf_count
    Vector q;
    std::vector<SystemMultipliers> systems;
    /// MinMax value or minimized q entry; 0 for pure feasibility.
    Scalar objective = 0.0;
    conic::Status status = conic::Status::Inaccurate;
    conic::Residuals solver_residuals;
    int iterations = 0;
    VerificationReport verification;
};

/// Dualizes the inner problem of `spec`. The model must be frozen.
CertificateProblem assemble(const PepModel& model, const OutcomeSet& outcomes, const LyapunovSpec& spec);

/// MinMaxValue variant; refuses specs without a normalization.
CertificateProblem assemble_minmax_value(const PepModel& model, const OutcomeSet& outcomes, LyapunovSpec spec,
                                         const std::optional<MinMaxNormalization>& normalization);

/// Lyapunov function V as an expression for given (Q, q).
ScalarExpr lyapunov_expr(const LyapunovSpec& spec, const Matrix& Q, const Vector& q);

/// Target expression T of one system for given (Q, q) (before dualization).
ScalarExpr system_target(const CertificateProblem& problem, SystemKind kind, const Matrix& Q, const Vector& q);

/// Runs the solver, extracts the certificate and verifies it.
Certificate solve_certificate(const CertificateProblem& problem, const conic::SolveOptions& options = {},
                              Scalar verify_tol = 1e-6);

/// Feasible = solver Optimal and verification passed.
inline bool certified(const Certificate& c) {
    return c.status == conic::Status::Optimal && c.verification.passed;
}

struct RateProbe {
    Scalar rho = 0.0;
    bool feasible = false;
    conic::Status status = conic::Status::Inaccurate;
};

struct RateSearch {
    bool feasible_at_hi = false;
    Scalar rho = 1.0;  // smallest certified rate found (hi when infeasible)
    std::vector<RateProbe> trace;
    /// Every feasible probe lies above every infeasible one.
    bool monotone = true;
    std::optional<Certificate> certificate;
};

/// Bisection on rho in [lo, hi] for the LinearRate mode of `spec_template`.
RateSearch bisect_rate(const PepModel& model, const OutcomeSet& outcomes, const LyapunovSpec& spec_template,
                       Scalar lo, Scalar hi, Scalar tol, const conic::SolveOptions& options = {});

}  // namespace lyacert

#endif  // LYACERT_CERTIFICATE_HPP
