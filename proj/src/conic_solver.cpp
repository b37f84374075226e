// SPDX-License-Identifier: Apache-2.0
//
// Primal-dual path-following method on the homogeneous self-dual embedding
// with Nesterov-Todd scaling and a Mehrotra predictor-corrector, after the
// cone LP algorithm of CVXOPT. Internally the Zero rows become equality
// constraints E x = f and the remaining rows G x + s = h, s in K.

#include "lyacert/conic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lyacert/cone_ops.hpp"

namespace lyacert::conic {

std::string to_string(ConeType type) {
    switch (type) {
        case ConeType::Zero: return "zero";
        case ConeType::NonNeg: return "nonneg";
        case ConeType::Psd: return "psd";
    }
    return "?";
}

std::string to_string(Status status) {
    switch (status) {
        case Status::Optimal: return "optimal";
        case Status::PrimalInfeasible: return "primal_infeasible";
        case Status::DualInfeasible: return "dual_infeasible";
        case Status::Inaccurate: return "inaccurate";
        case Status::IterLimit: return "iter_limit";
    }
    return "?";
}

Scalar Residuals::max() const { return std::max({primal, dual, gap}); }

std::size_t ConicProgram::cone_rows() const {
    std::size_t m = 0;
    for (const auto& k : cones) m += k.rows();
    return m;
}

void ConicProgram::validate() const {
    if (static_cast<std::size_t>(A.rows()) != num_rows() || static_cast<std::size_t>(A.cols()) != num_vars())
        throw std::invalid_argument("constraint matrix dimensions do not match c and b");
    if (cone_rows() != num_rows()) throw std::invalid_argument("cone dimensions do not partition the rows");
    for (const auto& k : cones) {
        if (k.dim == 0) throw std::invalid_argument("cone of dimension zero");
    }
    auto finite = [](const auto& v) { return v.allFinite(); };
    if (!finite(c) || !finite(b)) throw std::invalid_argument("non-finite data");
    for (Eigen::Index j = 0; j < A.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
            if (!std::isfinite(it.value())) throw std::invalid_argument("non-finite matrix entry");
        }
    }
}

ConicProgram dual_program(const ConicProgram& p) {
    p.validate();
    const auto n = static_cast<Eigen::Index>(p.num_vars());
    const auto m = static_cast<Eigen::Index>(p.num_rows());
    std::vector<Triplet> trip;
    for (Eigen::Index j = 0; j < p.A.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(p.A, j); it; ++it) trip.emplace_back(j, it.row(), it.value());
    }
    ConicProgram d;
    d.c = p.b;
    std::vector<Scalar> rhs(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) rhs[static_cast<std::size_t>(j)] = -p.c(j);
    d.cones.push_back(Cone{ConeType::Zero, static_cast<std::size_t>(n)});
    Eigen::Index row = n;
    Eigen::Index offset = 0;
    for (const auto& k : p.cones) {
        const auto r = static_cast<Eigen::Index>(k.rows());
        if (k.type != ConeType::Zero) {
            for (Eigen::Index i = 0; i < r; ++i) {
                trip.emplace_back(row + i, offset + i, -1.0);
                rhs.push_back(0.0);
            }
            d.cones.push_back(k);
            row += r;
        }
        offset += r;
    }
    if (n == 0) d.cones.erase(d.cones.begin());
    d.A.resize(row, m);
    d.A.setFromTriplets(trip.begin(), trip.end());
    d.b = Eigen::Map<Vector>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    return d;
}

// ------------------------------------------------------------ cone geometry

namespace {

Scalar segment_distance(const Cone& k, const Vector& v, bool dual) {
    switch (k.type) {
        case ConeType::Zero: return dual ? 0.0 : v.norm();
        case ConeType::NonNeg: return v.cwiseMin(0.0).norm();
        case ConeType::Psd: {
            const Matrix X = smat(v, static_cast<Eigen::Index>(k.dim));
            Eigen::SelfAdjointEigenSolver<Matrix> eig(X, Eigen::EigenvaluesOnly);
            return eig.eigenvalues().cwiseMin(0.0).norm();
        }
    }
    return 0.0;
}

}  // namespace

Scalar cone_distance(const std::vector<Cone>& cones, const Vector& v, bool dual) {
    Scalar sq = 0.0;
    Eigen::Index offset = 0;
    for (const auto& k : cones) {
        const auto r = static_cast<Eigen::Index>(k.rows());
        const Scalar d = segment_distance(k, v.segment(offset, r), dual);
        sq += d * d;
        offset += r;
    }
    return std::sqrt(sq);
}

Residuals certify_residuals(const ConicProgram& p, const Vector& x, const Vector& s, const Vector& y) {
    if (static_cast<std::size_t>(x.size()) != p.num_vars() || static_cast<std::size_t>(s.size()) != p.num_rows() ||
        static_cast<std::size_t>(y.size()) != p.num_rows())
        throw std::invalid_argument("certify_residuals: vector dimensions do not match the program");
    Residuals r;
    const Vector pr = p.A * x + s - p.b;
    r.primal = std::max(pr.norm(), cone_distance(p.cones, s, false)) / (1.0 + p.b.norm());
    const Vector dr = p.A.transpose() * y + p.c;
    r.dual = std::max(dr.norm(), cone_distance(p.cones, y, true)) / (1.0 + p.c.norm());
    const Scalar cx = p.c.dot(x);
    const Scalar by = p.b.dot(y);
    r.gap = std::abs(cx + by) / (1.0 + std::abs(cx) + std::abs(by));
    return r;
}

// ------------------------------------------------------------------ presolve

namespace {

struct Reduced {
    // kept original columns and rows (rows grouped: equality, nonneg, psd blocks)
    std::vector<Eigen::Index> cols;
    std::vector<Eigen::Index> eq_rows;
    std::vector<Eigen::Index> lp_rows;
    std::vector<std::pair<Eigen::Index, std::size_t>> psd_blocks;  // original row offset, order k

    SparseMatrix E;  // equality rows
    Vector f;
    SparseMatrix G;  // cone rows: lp rows first, then psd blocks
    Vector h;
    Vector c;

    std::size_t lp_count() const { return lp_rows.size(); }
    Eigen::Index m() const { return h.size(); }
    Eigen::Index n() const { return c.size(); }
    Eigen::Index p() const { return f.size(); }
};

enum class PresolveOutcome { Ok, PrimalInfeasible, DualInfeasible };

struct PresolveResult {
    PresolveOutcome outcome = PresolveOutcome::Ok;
    Reduced reduced;
    Eigen::Index witness = -1;  // offending row or column
};

PresolveResult presolve(const ConicProgram& p) {
    PresolveResult res;
    Reduced& r = res.reduced;
    const auto n = static_cast<Eigen::Index>(p.num_vars());
    const auto m = static_cast<Eigen::Index>(p.num_rows());
    const SparseMatrix At = p.A.transpose();

    std::vector<char> col_used(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> row_nnz(static_cast<std::size_t>(m), 0);
    for (Eigen::Index j = 0; j < p.A.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(p.A, j); it; ++it) {
            if (it.value() != 0.0) {
                col_used[static_cast<std::size_t>(j)] = 1;
                ++row_nnz[static_cast<std::size_t>(it.row())];
            }
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (col_used[static_cast<std::size_t>(j)]) {
            r.cols.push_back(j);
        } else if (p.c(j) != 0.0) {
            res.outcome = PresolveOutcome::DualInfeasible;
            res.witness = j;
        }
    }

    Eigen::Index offset = 0;
    for (const auto& k : p.cones) {
        const auto rows = static_cast<Eigen::Index>(k.rows());
        for (Eigen::Index i = offset; i < offset + rows && k.type != ConeType::Psd; ++i) {
            const bool empty = row_nnz[static_cast<std::size_t>(i)] == 0;
            if (k.type == ConeType::Zero) {
                if (!empty) {
                    r.eq_rows.push_back(i);
                } else if (p.b(i) != 0.0) {
                    res.outcome = PresolveOutcome::PrimalInfeasible;
                    res.witness = i;
                }
            } else {
                if (!empty) {
                    r.lp_rows.push_back(i);
                } else if (p.b(i) < 0.0) {
                    res.outcome = PresolveOutcome::PrimalInfeasible;
                    res.witness = i;
                }
            }
        }
        if (k.type == ConeType::Psd) r.psd_blocks.emplace_back(offset, k.dim);
        offset += rows;
    }
    if (res.outcome != PresolveOutcome::Ok) return res;

    std::vector<Eigen::Index> col_map(static_cast<std::size_t>(n), -1);
    for (std::size_t j = 0; j < r.cols.size(); ++j) col_map[static_cast<std::size_t>(r.cols[j])] = static_cast<Eigen::Index>(j);

    auto gather = [&](const std::vector<Eigen::Index>& rows, SparseMatrix& out, Vector& rhs) {
        std::vector<Triplet> trip;
        rhs.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Eigen::Index row = rows[i];
            rhs(static_cast<Eigen::Index>(i)) = p.b(row);
            for (SparseMatrix::InnerIterator it(At, row); it; ++it) {
                const Eigen::Index cj = col_map[static_cast<std::size_t>(it.row())];
                if (cj >= 0 && it.value() != 0.0) trip.emplace_back(static_cast<Eigen::Index>(i), cj, it.value());
            }
        }
        out.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(r.cols.size()));
        out.setFromTriplets(trip.begin(), trip.end());
    };
    gather(r.eq_rows, r.E, r.f);
    std::vector<Eigen::Index> cone_rows = r.lp_rows;
    for (auto [off, k] : r.psd_blocks) {
        for (std::size_t i = 0; i < triangle_size(k); ++i) cone_rows.push_back(off + static_cast<Eigen::Index>(i));
    }
    gather(cone_rows, r.G, r.h);
    r.c.resize(static_cast<Eigen::Index>(r.cols.size()));
    for (std::size_t j = 0; j < r.cols.size(); ++j) r.c(static_cast<Eigen::Index>(j)) = p.c(r.cols[j]);
    return res;
}

// ------------------------------------------------------- interior-point core

/// Cone-space vectors are laid out as [lp entries | svec(block 0) | ...].
struct ConeLayout {
    Eigen::Index lp = 0;
    std::vector<Eigen::Index> order;   // psd block orders
    std::vector<Eigen::Index> offset;  // row offset of each block
    Eigen::Index degree = 0;

    explicit ConeLayout(const Reduced& r) : lp(static_cast<Eigen::Index>(r.lp_count())) {
        Eigen::Index off = lp;
        degree = lp;
        for (auto [o, k] : r.psd_blocks) {
            order.push_back(static_cast<Eigen::Index>(k));
            offset.push_back(off);
            off += static_cast<Eigen::Index>(triangle_size(k));
            degree += static_cast<Eigen::Index>(k);
        }
    }
    std::size_t blocks() const { return order.size(); }
    Eigen::Index rows(std::size_t b) const { return order[b] * (order[b] + 1) / 2; }
};

/// Nesterov-Todd scaling W with W z = W^{-T} s = lambda.
/// LP: W = diag(d). PSD: W(Z) = R^T Z R, W^{-T}(S) = R^{-1} S R^{-T}.
struct Scaling {
    Vector d;
    Vector lambda_lp;
    std::vector<Matrix> R;
    std::vector<Matrix> Rinv;
    std::vector<Vector> lambda_psd;  // lambda is diagonal for psd blocks
};

Vector identity_element(const ConeLayout& L) {
    Vector e = Vector::Zero(L.lp + std::accumulate(L.order.begin(), L.order.end(), Eigen::Index(0),
                                                   [](Eigen::Index a, Eigen::Index k) { return a + k * (k + 1) / 2; }));
    e.head(L.lp).setOnes();
    for (std::size_t b = 0; b < L.blocks(); ++b) e.segment(L.offset[b], L.rows(b)) = svec(Matrix::Identity(L.order[b], L.order[b]));
    return e;
}

/// Largest t >= 0 with -t <= min eigenvalue, i.e. how far v is outside the cone.
Scalar cone_deficit(const ConeLayout& L, const Vector& v) {
    Scalar t = -std::numeric_limits<Scalar>::infinity();
    if (L.lp > 0) t = std::max(t, -v.head(L.lp).minCoeff());
    for (std::size_t b = 0; b < L.blocks(); ++b)
        t = std::max(t, -min_eigenvalue<Scalar>(smat(v.segment(L.offset[b], L.rows(b)), L.order[b])));
    return t;
}

Scaling compute_scaling(const ConeLayout& L, const Vector& s, const Vector& z) {
    Scaling w;
    w.d = (s.head(L.lp).array() / z.head(L.lp).array()).sqrt();
    w.lambda_lp = (s.head(L.lp).array() * z.head(L.lp).array()).sqrt();
    for (std::size_t b = 0; b < L.blocks(); ++b) {
        const Matrix S = smat(s.segment(L.offset[b], L.rows(b)), L.order[b]);
        const Matrix Z = smat(z.segment(L.offset[b], L.rows(b)), L.order[b]);
        Eigen::LLT<Matrix> ls(S), lz(Z);
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success)
            throw std::runtime_error("scaling: iterate left the cone interior");
        const Matrix Ls = ls.matrixL();
        const Matrix Lz = lz.matrixL();
        Eigen::JacobiSVD<Matrix> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vector lam = svd.singularValues();
        const Matrix V = svd.matrixV();
        w.R.push_back(Ls * V * lam.cwiseSqrt().cwiseInverse().asDiagonal());
        w.Rinv.push_back(lam.cwiseSqrt().asDiagonal() * V.transpose() *
                         Ls.triangularView<Eigen::Lower>().solve(Matrix::Identity(L.order[b], L.order[b])));
        w.lambda_psd.push_back(lam);
    }
    return w;
}

/// Updates the scaling in place from the new iterate expressed in the
/// current scaled coordinates (s~ = W^{-T} s+, z~ = W z+).
bool update_scaling(const ConeLayout& L, Scaling& w, const Vector& st, const Vector& zt) {
    if (L.lp > 0) {
        if ((st.head(L.lp).array() <= 0.0).any() || (zt.head(L.lp).array() <= 0.0).any()) return false;
        w.d.array() *= (st.head(L.lp).array() / zt.head(L.lp).array()).sqrt();
        w.lambda_lp = (st.head(L.lp).array() * zt.head(L.lp).array()).sqrt();
    }
    for (std::size_t b = 0; b < L.blocks(); ++b) {
        const Matrix S = smat(st.segment(L.offset[b], L.rows(b)), L.order[b]);
        const Matrix Z = smat(zt.segment(L.offset[b], L.rows(b)), L.order[b]);
        Eigen::LLT<Matrix> ls(S), lz(Z);
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
        const Matrix Ls = ls.matrixL();
        const Matrix Lz = lz.matrixL();
        Eigen::JacobiSVD<Matrix> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vector lam = svd.singularValues();
        if (!(lam.minCoeff() > 0.0)) return false;
        const Matrix V = svd.matrixV();
        const Matrix Rp = Ls * V * lam.cwiseSqrt().cwiseInverse().asDiagonal();
        const Matrix Rpinv = lam.cwiseSqrt().asDiagonal() * V.transpose() *
                             Ls.triangularView<Eigen::Lower>().solve(Matrix::Identity(L.order[b], L.order[b]));
        w.R[b] = w.R[b] * Rp;
        w.Rinv[b] = Rpinv * w.Rinv[b];
        w.lambda_psd[b] = lam;
    }
    return true;
}

Vector lambda_vector(const ConeLayout& L, const Scaling& w) {
    Vector v(L.lp + (L.blocks() ? L.offset.back() + L.rows(L.blocks() - 1) - L.lp : 0));
    v.head(L.lp) = w.lambda_lp;
    for (std::size_t b = 0; b < L.blocks(); ++b) v.segment(L.offset[b], L.rows(b)) = svec(Matrix(w.lambda_psd[b].asDiagonal()));
    return v;
}

// W^T v  (LP: d v; PSD: R V R^T)  -- maps scaled z-space to s-space
Vector apply_Wt(const ConeLayout& L, const Scaling& w, const Vector& v) {
    Vector out(v.size());
    out.head(L.lp) = w.d.cwiseProduct(v.head(L.lp));
    for (std::size_t b = 0; b < L.blocks(); ++b) {
        const Matrix V = smat(v.segment(L.offset[b], L.rows(b)), L.order[b]);
        out.segment(L.offset[b], L.rows(b)) = svec(Matrix(w.R[b] * V * w.R[b].transpose()));
    }
    return out;
}

// W v  (LP: d v; PSD: R^T V R)
Vector apply_W(const ConeLayout& L, const Scaling& w, const Vector& v) {
    Vector out(v.size());
    out.head(L.lp) = w.d.cwiseProduct(v.head(L.lp));
    for (std::size_t b = 0; b < L.blocks(); ++b) {
        const Matrix V = smat(v.segment(L.offset[b], L.rows(b)), L.order[b]);
        out.segment(L.offset[b], L.rows(b)) = svec(Matrix(w.R[b].transpose() * V * w.R[b]));
    }
    return out;
}

// W^{-1} v  (LP: v / d; PSD: R^{-T} V R^{-1})
Vector apply_Winv(const ConeLayout& L, const Scaling& w, const Vector& v) {
    Vector out(v.size());
    out.head(L.lp) = v.head(L.lp).cwiseQuotient(w.d);
    for (std::size_t b = 0; b < L.blocks(); ++b) {
        const Matrix V = smat(v.segment(L.offset[b], L.rows(b)), L.order[b]);
        out.segment(L.offset[b], L.rows(b)) = svec(Matrix(w.Rinv[b].transpose() * V * w.Rinv[b]));
    }
    return out;
}

// W^{-T} v  (LP: v / d; PSD: R^{-1} V R^{-T})
Vector apply_Wtinv(const ConeLayout& L, const Scaling& w, const Vector& v) {
    Vector out(v.size());
    out.head(L.lp) = v.head(L.lp).cwiseQuotient(w.d);
    for (std::size_t b = 0; b < L.blocks(); ++b) {
        const Matrix V = smat(v.segment(L.offset[b], L.rows(b)), L.order[b]);
        out.segment(L.offset[b], L.rows(b)) = svec(Matrix(w.Rinv[b] * V * w.Rinv[b].transpose()));
    }
    return out;
}

// Jordan product u o v: LP elementwise, PSD (UV + VU) / 2.
Vector jordan(const ConeLayout& L, const Vector& u, const Vector& v) {
    Vector out(u.size());
    out.head(L.lp) = u.head(L.lp).cwiseProduct(v.head(L.lp));
    for (std::size_t b = 0; b < L.blocks(); ++b) {
        const Matrix U = smat(u.segment(L.offset[b], L.rows(b)), L.order[b]);
        const Matrix V = smat(v.segment(L.offset[b], L.rows(b)), L.order[b]);
        out.segment(L.offset[b], L.rows(b)) = svec(Matrix(0.5 * (U * V + V * U)));
    }
    return out;
}

// lambda <> v: solves lambda o x = v for x with lambda the scaled point.
Vector jordan_divide(const ConeLayout& L, const Scaling& w, const Vector& v) {
    Vector out(v.size());
    out.head(L.lp) = v.head(L.lp).cwiseQuotient(w.lambda_lp);
    for (std::size_t b = 0; b < L.blocks(); ++b) {
        Matrix V = smat(v.segment(L.offset[b], L.rows(b)), L.order[b]);
        const Vector& lam = w.lambda_psd[b];
        for (Eigen::Index j = 0; j < V.cols(); ++j)
            for (Eigen::Index i = 0; i < V.rows(); ++i) V(i, j) *= 2.0 / (lam(i) + lam(j));
        out.segment(L.offset[b], L.rows(b)) = svec(V);
    }
    return out;
}

/// Largest step t (capped at `cap`) keeping lambda + t * dir in the cone.
Scalar max_step(const ConeLayout& L, const Scaling& w, const Vector& dir, Scalar cap) {
    Scalar t = cap;
    for (Eigen::Index i = 0; i < L.lp; ++i) {
        if (dir(i) < 0.0) t = std::min(t, -w.lambda_lp(i) / dir(i));
    }
    for (std::size_t b = 0; b < L.blocks(); ++b) {
        const Vector isq = w.lambda_psd[b].cwiseSqrt().cwiseInverse();
        const Matrix D = isq.asDiagonal() * smat(dir.segment(L.offset[b], L.rows(b)), L.order[b]) * isq.asDiagonal();
        const Scalar emin = min_eigenvalue<Scalar>(D);
        if (emin < 0.0) t = std::min(t, -1.0 / emin);
    }
    return t;
}

/// Solves  [ 0  E^T  G^T   ] [dx]   [r1]
///         [ E   0    0    ] [dy] = [r2]
///         [ G   0  -W^T W ] [dz]   [r3]
class KktSolver {
public:
    KktSolver(const Reduced& r, const ConeLayout& L) : r_(r), L_(L) {
        // columns touching each psd block, with the dense block slice of G
        const SparseMatrix& G = r.G;
        for (std::size_t b = 0; b < L.blocks(); ++b) {
            const Eigen::Index lo = L.offset[b], hi = lo + L.rows(b);
            std::vector<Eigen::Index> cols;
            for (Eigen::Index j = 0; j < G.outerSize(); ++j) {
                for (SparseMatrix::InnerIterator it(G, j); it; ++it) {
                    if (it.row() >= lo && it.row() < hi) {
                        cols.push_back(j);
                        break;
                    }
                }
            }
            Matrix slice = Matrix::Zero(hi - lo, static_cast<Eigen::Index>(cols.size()));
            for (std::size_t t = 0; t < cols.size(); ++t) {
                for (SparseMatrix::InnerIterator it(G, cols[t]); it; ++it) {
                    if (it.row() >= lo && it.row() < hi) slice(it.row() - lo, static_cast<Eigen::Index>(t)) = it.value();
                }
            }
            block_cols_.push_back(std::move(cols));
            block_slices_.push_back(std::move(slice));
        }
        Glp_ = G.topRows(L.lp);
        EtE_ = Matrix(r.E.transpose() * r.E);
    }

    bool factor(const Scaling& w) {
        w_ = &w;
        const Eigen::Index n = r_.n();
        Matrix H = EtE_;
        if (L_.lp > 0) {
            const Vector dinv2 = w.d.array().square().inverse();
            const SparseMatrix scaled = dinv2.asDiagonal() * Glp_;
            H += Matrix(Glp_.transpose() * scaled);
        }
        for (std::size_t b = 0; b < L_.blocks(); ++b) {
            const auto& cols = block_cols_[b];
            if (cols.empty()) continue;
            const Eigen::Index k = L_.order[b];
            Matrix B(L_.rows(b), static_cast<Eigen::Index>(cols.size()));
            for (Eigen::Index t = 0; t < B.cols(); ++t) {
                const Matrix U = smat(block_slices_[b].col(t), k);
                B.col(t) = svec(Matrix(w.Rinv[b] * U * w.Rinv[b].transpose()));
            }
            const Matrix BtB = B.transpose() * B;
            for (std::size_t a = 0; a < cols.size(); ++a)
                for (std::size_t c = 0; c < cols.size(); ++c)
                    H(cols[a], cols[c]) += BtB(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
        }
        const Scalar scale = std::max<Scalar>(1.0, H.diagonal().cwiseAbs().maxCoeff());
        Scalar delta = 1e-14 * scale;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Matrix Hr = H;
            Hr.diagonal().array() += delta;
            llt_.compute(Hr);
            if (llt_.info() == Eigen::Success) break;
            delta *= 100.0;
            if (attempt == 11) return false;
        }
        if (r_.p() > 0) {
            HinvEt_ = llt_.solve(Matrix(r_.E.transpose()));
            Matrix S = r_.E * HinvEt_;
            const Scalar sscale = std::max<Scalar>(1.0, S.diagonal().cwiseAbs().maxCoeff());
            Scalar sdelta = 1e-14 * sscale;
            for (int attempt = 0; attempt < 12; ++attempt) {
                Matrix Sr = S;
                Sr.diagonal().array() += sdelta;
                schur_.compute(Sr);
                if (schur_.info() == Eigen::Success) break;
                sdelta *= 100.0;
                if (attempt == 11) return false;
            }
        }
        (void)n;
        return true;
    }

    void solve(const Vector& r1, const Vector& r2, const Vector& r3, Vector& dx, Vector& dy, Vector& dz) const {
        solve_once(r1, r2, r3, dx, dy, dz);
        for (int it = 0; it < 3; ++it) {
            Vector e1, e2, e3;
            apply(dx, dy, dz, e1, e2, e3);
            e1 = r1 - e1;
            e2 = r2 - e2;
            e3 = r3 - e3;
            const Scalar err = std::max({e1.lpNorm<Eigen::Infinity>(), e2.size() ? e2.lpNorm<Eigen::Infinity>() : 0.0,
                                         e3.size() ? e3.lpNorm<Eigen::Infinity>() : 0.0});
            const Scalar ref = 1.0 + std::max({r1.lpNorm<Eigen::Infinity>(), r2.size() ? r2.lpNorm<Eigen::Infinity>() : 0.0,
                                               r3.size() ? r3.lpNorm<Eigen::Infinity>() : 0.0});
            if (err <= 1e-14 * ref) break;
            Vector cx, cy, cz;
            solve_once(e1, e2, e3, cx, cy, cz);
            dx += cx;
            dy += cy;
            dz += cz;
        }
    }

private:
    Vector wtw(const Vector& z) const { return apply_Wt(L_, *w_, apply_W(L_, *w_, z)); }
    Vector wtw_inv(const Vector& v) const { return apply_Winv(L_, *w_, apply_Wtinv(L_, *w_, v)); }

    void apply(const Vector& x, const Vector& y, const Vector& z, Vector& o1, Vector& o2, Vector& o3) const {
        o1 = r_.E.transpose() * y + r_.G.transpose() * z;
        o2 = r_.E * x;
        o3 = r_.G * x - wtw(z);
    }

    void solve_once(const Vector& r1, const Vector& r2, const Vector& r3, Vector& dx, Vector& dy, Vector& dz) const {
        Vector rhs = r1 + r_.G.transpose() * wtw_inv(r3);
        if (r_.p() > 0) rhs += r_.E.transpose() * r2;
        if (r_.p() > 0) {
            const Vector Hrhs = llt_.solve(rhs);
            dy = schur_.solve(Vector(r_.E * Hrhs - r2));
            dx = Hrhs - HinvEt_ * dy;
        } else {
            dy = Vector(0);
            dx = llt_.solve(rhs);
        }
        dz = wtw_inv(Vector(r_.G * dx - r3));
    }

    const Reduced& r_;
    const ConeLayout& L_;
    const Scaling* w_ = nullptr;
    std::vector<std::vector<Eigen::Index>> block_cols_;
    std::vector<Matrix> block_slices_;
    SparseMatrix Glp_;
    Matrix EtE_;
    Eigen::LLT<Matrix> llt_;
    Eigen::LLT<Matrix> schur_;
    Matrix HinvEt_;
};

struct IpmResult {
    Status status = Status::Inaccurate;
    Vector x, s, y, z;  // reduced-space solution (or certificate)
    int iterations = 0;
};

IpmResult run_ipm(const Reduced& r, const SolveOptions& opt) {
    const ConeLayout L(r);
    const Eigen::Index n = r.n(), p = r.p(), m = r.m();
    const Vector e = identity_element(L);
    KktSolver kkt(r, L);

    IpmResult out;
    out.x = Vector::Zero(n);
    out.y = Vector::Zero(p);
    out.z = Vector::Zero(m);
    out.s = Vector::Zero(m);

    // Starting point from two least-squares problems with W = I.
    Scaling w;
    w.d = Vector::Ones(L.lp);
    w.lambda_lp = Vector::Ones(L.lp);
    for (std::size_t b = 0; b < L.blocks(); ++b) {
        w.R.push_back(Matrix::Identity(L.order[b], L.order[b]));
        w.Rinv.push_back(Matrix::Identity(L.order[b], L.order[b]));
        w.lambda_psd.push_back(Vector::Ones(L.order[b]));
    }
    if (!kkt.factor(w)) return out;
    Vector x, y, z, s;
    {
        Vector ux, uy, uz;
        kkt.solve(Vector::Zero(n), r.f, r.h, ux, uy, uz);
        x = ux;
        s = -uz;
        kkt.solve(-r.c, Vector::Zero(p), Vector::Zero(m), ux, uy, uz);
        y = uy;
        z = uz;
    }
    auto shift = [&](Vector& v) {
        const Scalar deficit = cone_deficit(L, v);
        const Scalar nrm = v.norm();
        if (deficit >= -1e-8 * std::max<Scalar>(nrm, 1.0)) v += (1.0 + deficit) * e;
    };
    shift(s);
    shift(z);
    Scalar tau = 1.0, kappa = 1.0;

    const Scalar resx0 = std::max<Scalar>(1.0, r.c.norm());
    const Scalar resp0 = std::max<Scalar>(1.0, std::sqrt(r.f.squaredNorm() + r.h.squaredNorm()));

    Scalar best_merit = std::numeric_limits<Scalar>::infinity();
    Vector bx = x, by = y, bz = z, bs = s;
    Scalar btau = tau;
    int stalls = 0, best_iter = 0;

    try {
        w = compute_scaling(L, s, z);
    } catch (const std::runtime_error&) {
        return out;
    }

    for (int iter = 0; iter <= opt.max_iter; ++iter) {
        out.iterations = iter;
        const Vector hrx = r.E.transpose() * y + r.G.transpose() * z;
        const Vector hry = r.E * x;
        const Vector hrz = s + r.G * x;
        const Vector rx = hrx + r.c * tau;
        const Vector ry = r.f * tau - hry;
        const Vector rz = hrz - r.h * tau;
        const Scalar cx = r.c.dot(x), fy = r.f.dot(y), hz = r.h.dot(z);
        const Scalar rt = kappa + cx + fy + hz;
        const Scalar gap = s.dot(z);
        const Scalar mu = (gap + tau * kappa) / static_cast<Scalar>(L.degree + 1);

        const Scalar pres = std::sqrt(ry.squaredNorm() + rz.squaredNorm()) / tau / resp0;
        const Scalar dres = rx.norm() / tau / resx0;
        const Scalar pcost = cx / tau, dcost = -(fy + hz) / tau;
        const Scalar relgap = std::abs(pcost - dcost) / (1.0 + std::abs(pcost) + std::abs(dcost));
        const Scalar compl_gap = gap / (tau * tau) / (1.0 + std::abs(pcost) + std::abs(dcost));
        const Scalar merit = std::max({pres, dres, relgap, compl_gap});

        if (opt.verbose) {
            std::fprintf(stderr, "%3d  pcost % .6e  dcost % .6e  pres %.2e  dres %.2e  gap %.2e  tau %.2e  kappa %.2e\n",
                         iter, pcost, dcost, pres, dres, relgap, tau, kappa);
        }
        if (merit < best_merit) {
            best_merit = merit;
            bx = x;
            by = y;
            bz = z;
            bs = s;
            btau = tau;
            best_iter = iter;
        }
        if (pres <= opt.eps && dres <= opt.eps && relgap <= opt.eps && compl_gap <= opt.eps) {
            out.status = Status::Optimal;
            out.x = x / tau;
            out.y = y / tau;
            out.z = z / tau;
            out.s = s / tau;
            return out;
        }
        // infeasibility certificates
        if (fy + hz < 0.0) {
            const Scalar pinf = hrx.norm() / (-(fy + hz)) / resx0;
            if (pinf <= opt.eps) {
                const Scalar nrm = -(fy + hz);
                out.status = Status::PrimalInfeasible;
                out.x = Vector::Zero(n);
                out.s = Vector::Zero(m);
                out.y = y / nrm;
                out.z = z / nrm;
                return out;
            }
        }
        if (cx < 0.0) {
            const Scalar dinf = std::sqrt(hry.squaredNorm() + hrz.squaredNorm()) / (-cx) / resp0;
            if (dinf <= opt.eps) {
                out.status = Status::DualInfeasible;
                out.x = x / (-cx);
                out.s = s / (-cx);
                out.y = Vector::Zero(p);
                out.z = Vector::Zero(m);
                return out;
            }
        }
        if (iter == opt.max_iter) {
            out.status = Status::IterLimit;
            break;
        }
        // loss of accuracy near a degenerate solution; keep the best iterate
        if (iter - best_iter >= 8) {
            out.status = Status::Inaccurate;
            break;
        }

        if (!kkt.factor(w)) {
            out.status = Status::Inaccurate;
            break;
        }
        const Vector lambda = lambda_vector(L, w);

        // direction for the tau column
        Vector u1x, u1y, u1z;
        kkt.solve(-r.c, r.f, r.h, u1x, u1y, u1z);
        const Scalar denom_base = r.c.dot(u1x) + r.f.dot(u1y) + r.h.dot(u1z) - kappa / tau;

        Vector dx, dy, dz, dst, dzt;
        Scalar dtau = 0.0, dkappa = 0.0;
        Vector corr = Vector::Zero(m);
        Scalar corr_tau = 0.0;
        Scalar sigma = 0.0, eta = 0.0;
        Scalar step = 0.0;

        for (int phase = 0; phase < 2; ++phase) {
            const Vector rc = jordan_divide(L, w, Vector(sigma * mu * e - jordan(L, lambda, lambda) - corr));
            const Scalar rhs_tau = sigma * mu - tau * kappa - corr_tau;
            Vector u0x, u0y, u0z;
            kkt.solve(-(1.0 - eta) * rx, (1.0 - eta) * ry, Vector(-(1.0 - eta) * rz - apply_Wt(L, w, rc)), u0x, u0y, u0z);
            dtau = (-(1.0 - eta) * rt - rhs_tau / tau - (r.c.dot(u0x) + r.f.dot(u0y) + r.h.dot(u0z))) / denom_base;
            dx = u0x + dtau * u1x;
            dy = u0y + dtau * u1y;
            dz = u0z + dtau * u1z;
            dkappa = (rhs_tau - kappa * dtau) / tau;
            dzt = apply_W(L, w, dz);
            dst = rc - dzt;

            Scalar amax = max_step(L, w, dst, 1e30);
            amax = std::min(amax, max_step(L, w, dzt, 1e30));
            if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
            if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
            if (phase == 0) {
                const Scalar aff = std::min<Scalar>(1.0, amax);
                sigma = std::pow(1.0 - aff, 3);
                eta = sigma;
                corr = jordan(L, dst, dzt);
                corr_tau = dtau * dkappa;
            } else {
                step = std::min<Scalar>(1.0, 0.99 * amax);
            }
        }

        const Vector st = lambda + step * dst;
        const Vector zt = lambda + step * dzt;
        Scaling next = w;
        if (!update_scaling(L, next, st, zt)) {
            out.status = Status::Inaccurate;
            break;
        }
        w = std::move(next);
        x += step * dx;
        y += step * dy;
        tau += step * dtau;
        kappa += step * dkappa;
        const Vector lam_new = lambda_vector(L, w);
        s = apply_Wt(L, w, lam_new);
        z = apply_Winv(L, w, lam_new);

        if (step < 1e-9) {
            if (++stalls >= 3) {
                out.status = Status::Inaccurate;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    out.x = bx / btau;
    out.y = by / btau;
    out.z = bz / btau;
    out.s = bs / btau;
    return out;
}

}  // namespace

SolveReport solve(const ConicProgram& p, const SolveOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    p.validate();
    SolveReport rep;
    const auto n = static_cast<Eigen::Index>(p.num_vars());
    const auto m = static_cast<Eigen::Index>(p.num_rows());
    rep.x = Vector::Zero(n);
    rep.s = Vector::Zero(m);
    rep.y = Vector::Zero(m);

    auto finish = [&](Status st) {
        rep.status = st;
        rep.primal_objective = p.c.dot(rep.x);
        rep.dual_objective = -p.b.dot(rep.y);
        if (st == Status::PrimalInfeasible || st == Status::DualInfeasible) {
            rep.residuals = certify_residuals(p, rep.x, rep.s, rep.y);
        } else {
            rep.residuals = certify_residuals(p, rep.x, rep.s, rep.y);
            const bool ok = rep.residuals.max() <= options.accept_eps;
            if (ok) rep.status = Status::Optimal;
            else if (st == Status::Optimal) rep.status = Status::Inaccurate;
        }
        rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
    };

    const PresolveResult pre = presolve(p);
    if (pre.outcome == PresolveOutcome::PrimalInfeasible) {
        // y = -e_row / b_row scaled so that b^T y = -1 and A^T y = 0 (the row is empty)
        const Eigen::Index i = pre.witness;
        rep.y(i) = -1.0 / p.b(i);
        return finish(Status::PrimalInfeasible);
    }
    if (pre.outcome == PresolveOutcome::DualInfeasible) {
        const Eigen::Index j = pre.witness;
        rep.x(j) = -1.0 / p.c(j);
        return finish(Status::DualInfeasible);
    }
    const Reduced& r = pre.reduced;

    // s for rows dropped by presolve: b - A x restricted (A row is empty there)
    auto scatter = [&](const IpmResult& res) {
        for (std::size_t j = 0; j < r.cols.size(); ++j) rep.x(r.cols[j]) = res.x(static_cast<Eigen::Index>(j));
        for (std::size_t i = 0; i < r.eq_rows.size(); ++i) rep.y(r.eq_rows[i]) = res.y(static_cast<Eigen::Index>(i));
        Eigen::Index pos = 0;
        for (auto row : r.lp_rows) {
            rep.y(row) = res.z(pos);
            rep.s(row) = res.s(pos);
            ++pos;
        }
        for (auto [off, k] : r.psd_blocks) {
            for (std::size_t i = 0; i < triangle_size(k); ++i) {
                rep.y(off + static_cast<Eigen::Index>(i)) = res.z(pos);
                rep.s(off + static_cast<Eigen::Index>(i)) = res.s(pos);
                ++pos;
            }
        }
    };

    if (r.n() == 0) {
        // No free variable is left, so x = 0 and s = b. If b is outside K,
        // y = proj_{K*}(-b) has A^T y = 0 (every column is zero) and
        // b^T y = -|y|^2 < 0.
        Eigen::Index offset = 0;
        for (const auto& k : p.cones) {
            const auto rows = static_cast<Eigen::Index>(k.rows());
            const auto seg = p.b.segment(offset, rows);
            if (k.type == ConeType::NonNeg) {
                rep.y.segment(offset, rows) = (-seg).cwiseMax(0.0);
            } else if (k.type == ConeType::Psd) {
                const auto kk = static_cast<Eigen::Index>(k.dim);
                rep.y.segment(offset, rows) = svec(project_psd<Scalar>(smat(Vector(-seg), kk)));
            }
            if (k.type != ConeType::Zero) rep.s.segment(offset, rows) = seg;
            offset += rows;
        }
        const Scalar by = p.b.dot(rep.y);
        if (rep.y.norm() > options.eps * (1.0 + p.b.norm()) && by < 0.0) {
            rep.y /= -by;
            rep.s.setZero();
            return finish(Status::PrimalInfeasible);
        }
        rep.y.setZero();
        return finish(Status::Optimal);
    }

    IpmResult res = run_ipm(r, options);
    rep.iterations = res.iterations;
    scatter(res);
    if (res.status == Status::PrimalInfeasible || res.status == Status::DualInfeasible) return finish(res.status);
    // slack of rows removed by presolve
    {
        Eigen::Index offset = 0;
        for (const auto& k : p.cones) {
            const auto rows = static_cast<Eigen::Index>(k.rows());
            if (k.type == ConeType::NonNeg) {
                for (Eigen::Index i = offset; i < offset + rows; ++i) {
                    if (std::find(r.lp_rows.begin(), r.lp_rows.end(), i) == r.lp_rows.end()) rep.s(i) = p.b(i);
                }
            }
            offset += rows;
        }
    }
    return finish(res.status);
}

}  // namespace lyacert::conic
