// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "lyacert/problem_classes.hpp"

using namespace lyacert;

namespace {

Matrix gaussian(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> g;
    return Matrix::NullaryExpr(r, c, [&] { return g(rng); });
}

/// Symmetric matrix with spectrum drawn from [lo, hi], endpoints included.
Matrix spectrum(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector ev = Vector::NullaryExpr(n, [&] { return u(rng); });
    ev(0) = lo;
    ev(n - 1) = hi;
    const Matrix Q = Eigen::HouseholderQR<Matrix>(gaussian(rng, n, n)).householderQ();
    return Q * ev.asDiagonal() * Q.transpose();
}

double worst_constraint(const PepModel& m, const Valuation& v) {
    double worst = -1e300;
    for (const auto& c : m.constraints()) {
        const double val = evaluate(c.expr, v);
        worst = std::max(worst, c.sense == Sense::Eq0 ? std::abs(val) : val);
    }
    return worst;
}

/// Model with k free points and an oracle call at each; the valuation comes
/// from the quadratic f(x) = x^T A x / 2 + b^T x.
double quadratic_class_check(std::mt19937_64& rng, const FunctionClass& cls, const Matrix& A, int k) {
    const Eigen::Index n = A.rows();
    const Vector b = gaussian(rng, n, 1);
    PepModel m;
    FunctionHandle f = declare_function(m, cls);
    std::vector<PointExpr> pts;
    for (int i = 0; i < k; ++i) pts.push_back(m.new_leaf());
    std::vector<Triple> ts;
    for (const auto& p : pts) ts.push_back(f.oracle(p));
    CHECK(f.emit_class_constraints().size() == static_cast<std::size_t>(k * (k - 1)));

    Valuation v{Matrix::Zero(n, static_cast<Eigen::Index>(m.leaf_count())), Vector::Zero(static_cast<Eigen::Index>(m.f_count()))};
    for (int i = 0; i < k; ++i) {
        const Vector x = 3.0 * gaussian(rng, n, 1);
        v.leaves.col(static_cast<Eigen::Index>(pts[i].coeffs().begin()->first)) = x;
        v.leaves.col(static_cast<Eigen::Index>(ts[i].grad.coeffs().begin()->first)) = A * x + b;
        v.values(static_cast<Eigen::Index>(ts[i].value.id)) = 0.5 * x.dot(A * x) + b.dot(x);
    }
    return worst_constraint(m, v);
}

}  // namespace

TEST_CASE("declaring functions") {
    PepModel m;
    FunctionHandle f = declare_function(m, SmoothConvex{1.0});
    CHECK(f.triples().empty());
    CHECK(f.emit_class_constraints().empty());
    CHECK_THROWS_AS(declare_function(m, SmoothConvex{0.0}), ParameterError);
    CHECK_THROWS_AS(declare_function(m, SmoothStronglyConvex{2.0, 1.0}), ParameterError);
    CHECK_THROWS_AS(declare_function(m, BlockSmoothConvex{{1.0, 1.0}, {0}}), ParameterError);
    CHECK(class_name(BlockSmoothConvex{{1.0, 1.0}, {0, 1}}) == "block_smooth_convex");
}

TEST_CASE("oracle creates one gradient leaf and one value symbol") {
    PepModel m;
    const PointExpr x = m.new_leaf();
    FunctionHandle f = declare_function(m, SmoothConvex{1.0});
    const Triple t = f.oracle(x);
    CHECK(t.grad.dense(2) == Vector::Unit(2, 1));
    CHECK(t.value.id == 0);
    const Triple again = f.oracle(x);
    CHECK(again.grad == t.grad);
    CHECK(again.value == t.value);
    CHECK(m.leaf_count() == 2);
    CHECK(m.f_count() == 1);

    const Triple s = f.register_stationary(PointExpr{});
    CHECK(s.point.is_zero());
    CHECK(s.grad.is_zero());
    CHECK(m.leaf_count() == 2);
    CHECK(m.f_count() == 2);
}

TEST_CASE("prox output satisfies the optimality relation") {
    PepModel m;
    const PointExpr u = m.new_leaf();
    FunctionHandle g = declare_function(m, Convex{}, "g");
    const double tau = 0.3;
    const Triple t = g.prox(u, tau);
    const std::size_t gl = t.grad.coeffs().begin()->first;
    CHECK(t.point.coeff(0) == 1.0);
    CHECK(t.point.coeff(gl) == -tau);
    CHECK((t.point + tau * t.grad) == u);
    CHECK_THROWS_AS(g.prox(u, 0.0), ParameterError);
}

TEST_CASE("primal step composes combine, operator and prox") {
    PepModel m;
    const PointExpr x0 = m.new_leaf(0);
    const PointExpr y1 = m.new_leaf(1);
    FunctionHandle f = declare_function(m, Convex{}, "f", 0);
    OperatorHandle M = declare_operator(m, 1.0, "M", 0, 1);
    const double tau = 0.5;
    const PointExpr mty = M.apply_adjoint(y1);
    const Triple t = f.prox(combine({x0, mty}, {1.0, -tau}), tau);
    CHECK(t.point.coeff(0) == 1.0);
    CHECK(t.point.coeff(mty.coeffs().begin()->first) == -tau);
    CHECK(m.subspace_of(mty.coeffs().begin()->first) == 0);
}

TEST_CASE("smooth convex pair inequalities") {
    PepModel m;
    const double L = 2.0;
    const PointExpr x = m.new_leaf();
    FunctionHandle f = declare_function(m, SmoothConvex{L});
    const Triple t0 = f.oracle(x);
    const Triple ts = f.register_stationary(PointExpr{});
    const auto ids = f.emit_class_constraints();
    REQUIRE(ids.size() == 2);
    // f* >= f0 + <g0, x* - x0> + |g0|^2 / 2L
    const ScalarExpr& e = m.constraints()[ids[1]].expr;
    CHECK(e.lin_entry(t0.value.id) == 1.0);
    CHECK(e.lin_entry(ts.value.id) == -1.0);
    CHECK(e.quad_entry(1, 1) == doctest::Approx(0.5 / L));
    CHECK(e.quad_entry(0, 1) == doctest::Approx(-0.5));
}

TEST_CASE("convex subgradient pair") {
    PepModel m;
    const PointExpr x = m.new_leaf();
    FunctionHandle f = declare_function(m, Convex{});
    const Triple t0 = f.oracle(x);
    const Triple ts = f.register_stationary(PointExpr{});
    const auto ids = f.emit_class_constraints();
    REQUIRE(ids.size() == 2);
    // (x0, g0) against x*: f* >= f0 - <g0, x0>
    const ScalarExpr& a = m.constraints()[ids[1]].expr;
    CHECK(a.lin_entry(t0.value.id) == 1.0);
    CHECK(a.lin_entry(ts.value.id) == -1.0);
    CHECK(a.quad_entry(0, 1) == -0.5);
    // stationary x*: f0 >= f*
    const ScalarExpr& b = m.constraints()[ids[0]].expr;
    CHECK(b.lin_entry(ts.value.id) == 1.0);
    CHECK(b.lin_entry(t0.value.id) == -1.0);
    CHECK_FALSE(b.has_quad());
}

TEST_CASE("block descent lemma along a coordinate step") {
    const double L0 = 2.0;
    PepModel m;
    const PointExpr x0 = m.new_leaf(0) + m.new_leaf(1);
    FunctionHandle f = declare_function(m, BlockSmoothConvex{{L0, 1.0}, {0, 1}});
    const Triple t0 = f.oracle(x0);
    const PointExpr g00 = f.block_part(t0.grad, 0);
    const PointExpr x1 = x0 - (1.0 / L0) * g00;
    const auto ids = f.emit_block_smooth_constraints(x0, x1, 0);
    REQUIRE(ids.size() == 1);
    const Triple t1 = f.oracle(x1);
    const ScalarExpr& e = m.constraints()[ids[0]].expr;
    // f(x1) <= f(x0) - |grad_0 f(x0)|^2 / (2 L0)
    const std::size_t l = g00.coeffs().begin()->first;
    CHECK(e.lin_entry(t1.value.id) == 1.0);
    CHECK(e.lin_entry(t0.value.id) == -1.0);
    CHECK(e.quad_entry(l, l) == doctest::Approx(0.5 / L0));
    CHECK(e.quad().size() == 1);

    SUBCASE("a null step only compares values") {
        const auto id = f.emit_block_smooth_constraints(x0, x0, 1);
        const ScalarExpr& z = m.constraints()[id[0]].expr;
        CHECK_FALSE(z.has_quad());
        CHECK(z.lin().empty());
    }
}

TEST_CASE("class soundness on random quadratics") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 60; ++t) {
        const Eigen::Index n = 4;
        const double L = 0.5 + 2.0 * (t % 5);
        const double mu = 0.1 * L;
        CHECK(quadratic_class_check(rng, Convex{}, spectrum(rng, n, 0.0, 5.0), 4) <= 1e-9);
        CHECK(quadratic_class_check(rng, SmoothConvex{L}, spectrum(rng, n, 0.0, L), 4) <= 1e-9);
        CHECK(quadratic_class_check(rng, SmoothStronglyConvex{mu, L}, spectrum(rng, n, mu, L), 4) <= 1e-9);
    }
}

TEST_CASE("block class soundness on quadratics with block-bounded curvature") {
    std::mt19937_64 rng(23);
    const std::size_t d = 3;
    const Eigen::Index bs = 2, n = static_cast<Eigen::Index>(d) * bs;
    const std::vector<double> L{1.0, 0.5, 2.0};
    for (int t = 0; t < 40; ++t) {
        // A = C^T C with C = [sqrt(L_j) Q_j], so every diagonal block is L_j I
        Matrix C(n, n);
        for (std::size_t j = 0; j < d; ++j)
            C.middleCols(static_cast<Eigen::Index>(j) * bs, bs) =
                std::sqrt(L[j]) *
                Matrix(Eigen::HouseholderQR<Matrix>(gaussian(rng, n, bs)).householderQ()).leftCols(bs);
        const Matrix A = C.transpose() * C;

        PepModel m;
        FunctionHandle f = declare_function(m, BlockSmoothConvex{L, {0, 1, 2}});
        std::vector<PointExpr> pts;
        for (int i = 0; i < 3; ++i) pts.push_back(m.new_leaf(0) + m.new_leaf(1) + m.new_leaf(2));
        std::vector<Triple> ts;
        for (const auto& p : pts) ts.push_back(f.oracle(p));
        const PointExpr step = pts[0] - (1.0 / L[1]) * f.block_part(ts[0].grad, 1);
        f.emit_block_smooth_constraints(pts[0], step, 1);
        ts.push_back(f.oracle(step));
        f.emit_class_constraints();

        std::vector<Vector> xs;
        for (int i = 0; i < 3; ++i) xs.push_back(gaussian(rng, n, 1));
        xs.push_back(xs[0]);
        xs[3].segment(bs, bs) -= (1.0 / L[1]) * (A * xs[0]).segment(bs, bs);

        // leaf k of subspace s holds block s of its point
        Valuation v{Matrix::Zero(n, static_cast<Eigen::Index>(m.leaf_count())), Vector::Zero(static_cast<Eigen::Index>(m.f_count()))};
        auto put = [&](const PointExpr& p, const Vector& val) {
            for (auto [leaf, c] : p.coeffs()) {
                const Eigen::Index s = static_cast<Eigen::Index>(m.subspace_of(leaf));
                v.leaves.col(static_cast<Eigen::Index>(leaf)).segment(s * bs, bs) += val.segment(s * bs, bs) / c;
            }
        };
        for (int i = 0; i < 3; ++i) put(pts[i], xs[i]);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            put(ts[i].grad, A * xs[i]);
            v.values(static_cast<Eigen::Index>(ts[i].value.id)) = 0.5 * xs[i].dot(A * xs[i]);
        }
        // consistency of the composite point with the leaves
        CHECK((evaluate(step, v) - xs[3]).norm() <= 1e-12);
        CHECK(worst_constraint(m, v) <= 1e-9);
    }
}

TEST_CASE("operator constraints") {
    SUBCASE("single input gives a 1x1 norm block") {
        PepModel m;
        const PointExpr x = m.new_leaf();
        OperatorHandle M = declare_operator(m, 2.0);
        M.apply(x);
        M.emit_operator_constraints();
        REQUIRE(m.lmi_blocks().size() == 1);
        const ScalarExpr& e = m.lmi_blocks()[0].at(0, 0);
        CHECK(e.quad_entry(0, 0) == 4.0);
        CHECK(e.quad_entry(1, 1) == -1.0);
    }
    SUBCASE("repeated inputs reuse the leaf") {
        PepModel m;
        const PointExpr x = m.new_leaf();
        OperatorHandle M = declare_operator(m, 1.0);
        CHECK(M.apply(x) == M.apply(x));
        CHECK(m.leaf_count() == 2);
    }
    SUBCASE("soundness for explicit matrices") {
        std::mt19937_64 rng(29);
        for (int t = 0; t < 50; ++t) {
            PepModel m;
            const PointExpr x0 = m.new_leaf(0), y0 = m.new_leaf(1), y1 = m.new_leaf(1);
            OperatorHandle M = declare_operator(m, 1.5, "M", 0, 1);
            const PointExpr mx = M.apply(x0);
            const PointExpr mty0 = M.apply_adjoint(y0);
            const PointExpr mty1 = M.apply_adjoint(y1);
            const PointExpr mz = M.apply(x0 - 0.3 * mty1);
            M.emit_operator_constraints();
            CHECK(M.forward().size() == 2);
            CHECK(M.adjoint().size() == 2);

            const Eigen::Index nx = 3, ny = 2;
            Matrix A = gaussian(rng, ny, nx);
            A *= 1.5 / Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
            Valuation v{Matrix::Zero(nx + ny, static_cast<Eigen::Index>(m.leaf_count())), Vector()};
            auto xcol = [&](const PointExpr& p) { return v.leaves.col(static_cast<Eigen::Index>(p.coeffs().begin()->first)); };
            const Vector vx0 = gaussian(rng, nx, 1), vy0 = gaussian(rng, ny, 1), vy1 = gaussian(rng, ny, 1);
            xcol(x0).head(nx) = vx0;
            xcol(y0).tail(ny) = vy0;
            xcol(y1).tail(ny) = vy1;
            xcol(mx).tail(ny) = A * vx0;
            xcol(mty0).head(nx) = A.transpose() * vy0;
            xcol(mty1).head(nx) = A.transpose() * vy1;
            xcol(mz).tail(ny) = A * (vx0 - 0.3 * A.transpose() * vy1);
            CHECK(worst_constraint(m, v) <= 1e-9);
            for (const auto& blk : m.lmi_blocks()) {
                Matrix S(blk.dim, blk.dim);
                for (std::size_t i = 0; i < blk.dim; ++i)
                    for (std::size_t j = 0; j < blk.dim; ++j)
                        S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = evaluate(blk.at(i, j), v);
                CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues()(0) >= -1e-9);
            }
        }
    }
}
