// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "lyacert/problem_classes.hpp"
#include "lyacert/symbolic.hpp"

using namespace lyacert;

namespace {

Matrix dense(const PointExpr& p, std::size_t n) { return p.dense(n); }

PointExpr random_point(std::mt19937_64& rng, const std::vector<PointExpr>& leaves) {
    std::normal_distribution<double> g;
    std::bernoulli_distribution keep(0.6);
    PointExpr p;
    for (const auto& l : leaves)
        if (keep(rng)) p += g(rng) * l;
    return p;
}

bool symmetric(const ScalarExpr& e, std::size_t n) {
    const Matrix Q = e.quad_dense(n);
    return (Q - Q.transpose()).norm() == 0.0;
}

}  // namespace

TEST_CASE("leaves are appended in order") {
    PepModel m;
    const PointExpr a = m.new_leaf();
    CHECK(m.leaf_count() == 1);
    CHECK(dense(a, 1) == Vector::Unit(1, 0));
    m.new_leaf();
    const PointExpr c = m.new_leaf();
    CHECK(m.leaf_count() == 3);
    CHECK(c.coeffs().size() == 1);
    CHECK(c.coeff(2) == 1.0);
}

TEST_CASE("gradient descent leaves and the next iterate") {
    const double gamma = 0.7;
    PepModel m;
    const PointExpr x = m.new_leaf();
    FunctionHandle f = declare_function(m, SmoothConvex{1.0});
    const Triple t0 = f.oracle(x);
    const PointExpr x1 = combine({x, t0.grad}, {1.0, -gamma});
    const Triple t1 = f.oracle(x1);
    CHECK(x.dense(3) == Vector::Unit(3, 0));
    CHECK(t0.grad.dense(3) == Vector::Unit(3, 1));
    CHECK(t1.grad.dense(3) == Vector::Unit(3, 2));
    CHECK(x1.dense(3) == (Vector(3) << 1.0, -gamma, 0.0).finished());

    SUBCASE("dot of the next iterate expands by hand") {
        const Matrix expected = (Matrix(3, 3) << 1, -gamma, 0, -gamma, gamma * gamma, 0, 0, 0, 0).finished();
        CHECK(sqnorm(x1).quad_dense(3) == expected);
    }
}

TEST_CASE("combine identities") {
    PepModel m;
    const PointExpr x = m.new_leaf();
    CHECK(combine({x}, {1.0}) == x);
    CHECK(combine({x, x}, {1.0, -1.0}).is_zero());
    CHECK_THROWS_AS(combine({x}, {1.0, 2.0}), ModelingError);
}

TEST_CASE("scalar arithmetic") {
    PepModel m;
    const PointExpr x = m.new_leaf();
    const FSymbol f0 = m.new_f_symbol();
    const FSymbol fs = m.new_f_symbol();
    CHECK(dot(x, x).quad_dense(1)(0, 0) == 1.0);
    CHECK(add(sqnorm(x), -sqnorm(x)).is_zero());
    CHECK(scale(f_value(f0), 2.0).lin_dense(2) == (Vector(2) << 2.0, 0.0).finished());
    const ScalarExpr gap = f_value(f0) - f_value(fs);
    CHECK(gap.lin_dense(2) == (Vector(2) << 1.0, -1.0).finished());
    CHECK_FALSE(gap.has_quad());
}

TEST_CASE("constraints keep the stored data") {
    PepModel m;
    const PointExpr x = m.new_leaf();
    const double R = 2.0;
    const std::size_t id = m.add_constraint(sqnorm(x - PointExpr{}) - ScalarExpr(R * R), Sense::Leq0, "ball");
    const Constraint& c = m.constraints().at(id);
    CHECK(c.expr.constant() == -R * R);
    CHECK(c.expr.quad_entry(0, 0) == 1.0);
    CHECK(c.tag == "ball");
    m.add_constraint(ScalarExpr{}, Sense::Eq0, "trivial");
    CHECK(m.constraints().size() == 2);
    m.freeze();
    CHECK_THROWS_AS(m.new_leaf(), ModelingError);
    CHECK_THROWS_AS(m.add_constraint(ScalarExpr{}, Sense::Eq0, "late"), ModelingError);
}

TEST_CASE("constraints on unknown leaves are rejected") {
    PepModel a;
    PepModel b;
    b.new_leaf();
    const PointExpr y = b.new_leaf();
    CHECK_THROWS_AS(a.add_constraint(sqnorm(y), Sense::Leq0, "foreign"), ModelingError);
}

TEST_CASE("bilinearity and symmetry of dot on random sparse points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    PepModel m;
    std::vector<PointExpr> leaves;
    for (int i = 0; i < 6; ++i) leaves.push_back(m.new_leaf());
    for (int t = 0; t < 200; ++t) {
        const PointExpr p = random_point(rng, leaves), r = random_point(rng, leaves);
        const double s = u(rng), w = u(rng);
        const ScalarExpr pr = dot(p, r);
        CHECK(pr == dot(r, p));
        CHECK(symmetric(pr, 6));
        const Matrix lhs = dot(s * p, w * r).quad_dense(6);
        const Matrix rhs = s * w * pr.quad_dense(6);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + rhs.cwiseAbs().maxCoeff()));
        CHECK(symmetric(pr + 0.5 * sqnorm(p) - w * pr, 6));
    }
}

TEST_CASE("evaluation matches const + lin F + tr(quad G)") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    PepModel m;
    std::vector<PointExpr> leaves;
    for (int i = 0; i < 5; ++i) leaves.push_back(m.new_leaf());
    std::vector<FSymbol> fs;
    for (int i = 0; i < 3; ++i) fs.push_back(m.new_f_symbol());
    for (int t = 0; t < 100; ++t) {
        ScalarExpr e(g(rng));
        for (const auto& f : fs) e += g(rng) * f_value(f);
        e += g(rng) * dot(random_point(rng, leaves), random_point(rng, leaves));
        Valuation v{Matrix::NullaryExpr(7, 5, [&] { return g(rng); }), Vector::NullaryExpr(3, [&] { return g(rng); })};
        const Matrix G = v.leaves.transpose() * v.leaves;
        const double direct = e.constant() + e.lin_dense(3).dot(v.values) + (e.quad_dense(5) * G).trace();
        CHECK(evaluate(e, v) == doctest::Approx(direct).epsilon(1e-12));
        // explicit vectors: <p, r> equals the dot of the evaluated points
        const PointExpr p = random_point(rng, leaves), r = random_point(rng, leaves);
        CHECK(evaluate(dot(p, r), v) == doctest::Approx(evaluate(p, v).dot(evaluate(r, v))).epsilon(1e-12));
    }
}

TEST_CASE("gram realization round trip") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int n : {1, 3, 6}) {
        for (int rank : {1, n}) {
            const Matrix B = Matrix::NullaryExpr(rank, n, [&] { return g(rng); });
            const Matrix G = B.transpose() * B;
            const Matrix V = realize_gram(G);
            CHECK((V.transpose() * V - G).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + G.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("cross-subspace entries vanish on canonicalization") {
    PepModel m;
    const PointExpr a = m.new_leaf(0);
    const PointExpr b = m.new_leaf(1);
    const ScalarExpr e = m.canonicalize(dot(a + b, a + b));
    CHECK(e.quad_entry(0, 1) == 0.0);
    CHECK(e.quad_entry(0, 0) == 1.0);
    CHECK(e.quad_entry(1, 1) == 1.0);
    CHECK(m.subspace_count() == 2);
}

TEST_CASE("named entities") {
    PepModel m;
    const PointExpr x = m.new_leaf();
    const FSymbol f = m.new_f_symbol();
    m.name("x", x);
    m.name("f", f);
    CHECK(std::get<PointExpr>(*m.lookup("x")) == x);
    CHECK(std::get<FSymbol>(*m.lookup("f")) == f);
    CHECK_FALSE(m.lookup("nope").has_value());
}
