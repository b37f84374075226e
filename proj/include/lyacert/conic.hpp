// SPDX-License-Identifier: Apache-2.0
//
// Standard-form conic programs and an embedded primal-dual interior-point
// solver.
//
//     minimize    c^T x
//     subject to  A x + s = b,   s in K = Zero(n0) x NonNeg(n1) x PSD(k1) x ...
//
//     dual:  maximize -b^T y  subject to  A^T y + c = 0,  y in K*.
//
// PSD segments occupy k(k+1)/2 rows holding the scaled lower triangle (see
// cone_ops.hpp). Cone segments partition the rows in the listed order.

#ifndef LYACERT_CONIC_HPP
#define LYACERT_CONIC_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace lyacert::conic {

using Scalar = double;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<Scalar>;

enum class ConeType { Zero, NonNeg, Psd };

struct Cone {
    ConeType type = ConeType::Zero;
    /// Number of rows for Zero/NonNeg; matrix order k for Psd.
    std::size_t dim = 0;

    std::size_t rows() const { return type == ConeType::Psd ? dim * (dim + 1) / 2 : dim; }
};

std::string to_string(ConeType type);

struct ConicProgram {
    Vector c;
    SparseMatrix A;
    Vector b;
    std::vector<Cone> cones;

    std::size_t num_vars() const { return static_cast<std::size_t>(c.size()); }
    std::size_t num_rows() const { return static_cast<std::size_t>(b.size()); }
    std::size_t cone_rows() const;
    /// Throws std::invalid_argument on inconsistent dimensions.
    void validate() const;
};

/// Dual of a program, restated in standard form: minimize b^T y subject to
/// [A^T; -I] y + s' = [-c; 0], s' in Zero(n) x K*. Optimal values are negated.
ConicProgram dual_program(const ConicProgram& p);

enum class Status { Optimal, PrimalInfeasible, DualInfeasible, Inaccurate, IterLimit };

std::string to_string(Status status);

struct Residuals {
    Scalar primal = 0.0;
    Scalar dual = 0.0;
    Scalar gap = 0.0;

    Scalar max() const;
};

struct SolveOptions {
    Scalar eps = 1e-8;
    Scalar accept_eps = 1e-6;
    int max_iter = 100;
    bool verbose = false;
};

struct SolveReport {
    Status status = Status::Inaccurate;
    Vector x;
    Vector s;
    Vector y;
    Residuals residuals;
    int iterations = 0;
    double wall_time = 0.0;
    Scalar primal_objective = 0.0;
    Scalar dual_objective = 0.0;
};

/// Residuals recomputed from the vectors alone:
///   primal = max(||A x + s - b||, dist(s, K)) / (1 + ||b||)
///   dual   = max(||A^T y + c||, dist(y, K*)) / (1 + ||c||)
///   gap    = |c^T x + b^T y| / (1 + |c^T x| + |b^T y|)
Residuals certify_residuals(const ConicProgram& p, const Vector& x, const Vector& s, const Vector& y);

/// Deterministic for identical inputs. Status Optimal only if every residual
/// returned by certify_residuals is <= accept_eps. For PrimalInfeasible the
/// report carries y with b^T y = -1; for DualInfeasible x, s with c^T x = -1.
SolveReport solve(const ConicProgram& p, const SolveOptions& options = {});

/// Distance from v to the cone described by `cones` (or its dual).
Scalar cone_distance(const std::vector<Cone>& cones, const Vector& v, bool dual);

}  // namespace lyacert::conic

#endif  // LYACERT_CONIC_HPP
