// SPDX-License-Identifier: Apache-2.0

#include "lyacert/scenarios.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "lyacert/problem_classes.hpp"

namespace lyacert {

namespace {

std::size_t leaf_id(const PointExpr& p) {
    if (p.coeffs().size() != 1) throw ModelingError("expected a single leaf");
    return p.coeffs().begin()->first;
}

Matrix gaussian(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<Scalar> nd(0.0, 1.0);
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
    return m;
}

Matrix orthogonal(std::mt19937_64& rng, Eigen::Index n) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(rng, n, n));
    return qr.householderQ();
}

/// Symmetric matrix with spectrum in [lo, hi], both endpoints attained.
Matrix spectrum_matrix(std::mt19937_64& rng, Eigen::Index n, Scalar lo, Scalar hi) {
    std::uniform_real_distribution<Scalar> ud(lo, hi);
    Vector ev(n);
    for (Eigen::Index i = 0; i < n; ++i) ev(i) = ud(rng);
    ev(0) = hi;
    if (n > 1) ev(1) = lo;
    const Matrix U = orthogonal(rng, n);
    return U * ev.asDiagonal() * U.transpose();
}

// ------------------------------------------------------------------- GD

class GdIteration final : public ExplicitScenario {
public:
    Scalar gamma = 1.0, L = 1.0, mu = 0.0;
    Eigen::Index dim = 4;
    std::size_t lx0 = 0, lg0 = 0, lg1 = 0, leaves = 0;
    std::size_t f0 = 0, fs = 0, f1 = 0, symbols = 0;

    std::string name() const override { return "gd"; }

    Valuation at(const Matrix& A, const Vector& x) const {
        Valuation v{Matrix::Zero(dim, static_cast<Eigen::Index>(leaves)), Vector::Zero(static_cast<Eigen::Index>(symbols))};
        const Vector g = A * x;
        const Vector x1 = x - gamma * g;
        v.leaves.col(static_cast<Eigen::Index>(lx0)) = x;
        v.leaves.col(static_cast<Eigen::Index>(lg0)) = g;
        v.leaves.col(static_cast<Eigen::Index>(lg1)) = A * x1;
        v.values(static_cast<Eigen::Index>(f0)) = 0.5 * x.dot(A * x);
        v.values(static_cast<Eigen::Index>(f1)) = 0.5 * x1.dot(A * x1);
        v.values(static_cast<Eigen::Index>(fs)) = 0.0;
        return v;
    }

    ExplicitSample sample(std::mt19937_64& rng) const override {
        const Matrix A = spectrum_matrix(rng, dim, mu, L);
        const Vector x = gaussian(rng, dim, 1);
        ExplicitSample s;
        s.current = at(A, x);
        s.next.emplace_back(1.0, at(A, x - gamma * (A * x)));
        return s;
    }

    std::vector<std::vector<Scalar>> witness_family() const override {
        std::vector<std::vector<Scalar>> fam;
        for (int k = 20; k >= 1; --k) fam.push_back({mu + (L - mu) * k / 20.0});
        return fam;
    }

    std::vector<Scalar> trajectory(const std::vector<Scalar>& params, int steps) const override {
        // f(x) = a x^2 / 2 in one dimension, x* = 0
        const Scalar a = params.at(0);
        std::vector<Scalar> d{1.0};
        Scalar x = 1.0;
        for (int k = 0; k < steps; ++k) {
            x -= gamma * a * x;
            d.push_back(std::abs(x));
        }
        return d;
    }
};

// ------------------------------------------------------------------ RCD

class RcdIteration final : public ExplicitScenario {
public:
    std::size_t d = 2, bs = 2;
    std::vector<Scalar> L;
    std::vector<std::size_t> lx0, lg0;
    std::vector<std::vector<std::size_t>> lg1;  // [outcome][block]
    std::size_t f0 = 0, fs = 0, leaves = 0, symbols = 0;
    std::vector<std::size_t> f1;

    std::string name() const override { return "rcd"; }

    Eigen::Index n() const { return static_cast<Eigen::Index>(d * bs); }

    Vector block(const Vector& v, std::size_t j) const {
        Vector out = Vector::Zero(v.size());
        const auto b = static_cast<Eigen::Index>(bs);
        out.segment(static_cast<Eigen::Index>(j) * b, b) = v.segment(static_cast<Eigen::Index>(j) * b, b);
        return out;
    }

    Vector step(const Matrix& A, const Vector& x, std::size_t i) const { return x - block(A * x, i) / L[i]; }

    Valuation at(const Matrix& A, const Vector& x) const {
        Valuation v{Matrix::Zero(n(), static_cast<Eigen::Index>(leaves)), Vector::Zero(static_cast<Eigen::Index>(symbols))};
        const Vector g = A * x;
        for (std::size_t j = 0; j < d; ++j) {
            v.leaves.col(static_cast<Eigen::Index>(lx0[j])) = block(x, j);
            v.leaves.col(static_cast<Eigen::Index>(lg0[j])) = block(g, j);
        }
        v.values(static_cast<Eigen::Index>(f0)) = 0.5 * x.dot(g);
        v.values(static_cast<Eigen::Index>(fs)) = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const Vector x1 = step(A, x, i);
            const Vector g1 = A * x1;
            for (std::size_t j = 0; j < d; ++j) v.leaves.col(static_cast<Eigen::Index>(lg1[i][j])) = block(g1, j);
            v.values(static_cast<Eigen::Index>(f1[i])) = 0.5 * x1.dot(g1);
        }
        return v;
    }

    /// Convex quadratic A = C^T C whose diagonal blocks are L_i I: each block
    /// column of C has orthonormal columns.
    Matrix instance(std::mt19937_64& rng) const {
        const auto b = static_cast<Eigen::Index>(bs);
        std::uniform_int_distribution<Eigen::Index> rows(b, n());
        const Eigen::Index m = rows(rng);
        Matrix C(m, n());
        for (std::size_t j = 0; j < d; ++j) {
            Eigen::HouseholderQR<Matrix> qr(gaussian(rng, m, b));
            C.middleCols(static_cast<Eigen::Index>(j) * b, b) =
                std::sqrt(L[j]) * Matrix(qr.householderQ()).leftCols(b);
        }
        return C.transpose() * C;
    }

    ExplicitSample sample(std::mt19937_64& rng) const override {
        const Matrix A = instance(rng);
        const Vector x = gaussian(rng, n(), 1);
        ExplicitSample s;
        s.current = at(A, x);
        for (std::size_t i = 0; i < d; ++i) s.next.emplace_back(1.0 / static_cast<Scalar>(d), at(A, step(A, x, i)));
        return s;
    }
};

// ----------------------------------------------------------------- PDHG

class PdhgIteration final : public ExplicitScenario {
public:
    Scalar tau = 1.0, sigma = 1.0, beta = 1.0, eta = 0.1;
    Eigen::Index nx = 3, ny = 3;
    // X leaves
    std::size_t x0 = 0, sf0 = 0, mty0 = 0, mtyb = 0, sf1 = 0, mty1 = 0, sfp = 0;
    // Y leaves
    std::size_t y0 = 0, sg0 = 0, mx0 = 0, sg1 = 0, mx1 = 0, sgy1 = 0, sgp = 0;
    // dual prox of the following step, a function of (x1, y1)
    std::size_t sgb2 = 0, mtyb2 = 0, vgb2 = 0;
    std::size_t vf0 = 0, vfs = 0, vf1 = 0, vfp = 0, vg0 = 0, vgs = 0, vgb = 0, vgy1 = 0, vgp = 0;
    std::size_t leaves = 0, symbols = 0;

    struct Instance {
        Matrix A, B, M;
    };

    std::string name() const override { return "pdhg_qeb"; }

    static Matrix solve_shift(const Matrix& A, Scalar t, const Vector& u) {
        Matrix K = t * A;
        K.diagonal().array() += 1.0;
        return K.llt().solve(u);
    }

    std::pair<Vector, Vector> next_state(const Instance& in, const Vector& x, const Vector& y) const {
        const Vector yb = solve_shift(in.B, sigma, y + sigma * in.M * x);
        const Vector x1 = solve_shift(in.A, tau, x - tau * in.M.transpose() * yb);
        const Vector y1 = yb + sigma * in.M * (x1 - x);
        return {x1, y1};
    }

    Scalar smoothed_gap(const Instance& in, const Vector& x, const Vector& y) const {
        const Vector xp = solve_shift(in.A, 1.0 / beta, x - in.M.transpose() * y / beta);
        const Vector yp = solve_shift(in.B, 1.0 / beta, y + in.M * x / beta);
        auto f = [&](const Vector& v) { return 0.5 * v.dot(in.A * v); };
        auto g = [&](const Vector& v) { return 0.5 * v.dot(in.B * v); };
        return f(x) + (in.M * x).dot(yp) - g(yp) - f(xp) - (in.M * xp).dot(y) + g(y) -
               0.5 * beta * ((xp - x).squaredNorm() + (yp - y).squaredNorm());
    }

    Valuation at(const Instance& in, const Vector& x, const Vector& y) const {
        Valuation v{Matrix::Zero(nx + ny, static_cast<Eigen::Index>(leaves)), Vector::Zero(static_cast<Eigen::Index>(symbols))};
        auto X = [&](std::size_t id, const Vector& val) { v.leaves.col(static_cast<Eigen::Index>(id)).head(nx) = val; };
        auto Y = [&](std::size_t id, const Vector& val) { v.leaves.col(static_cast<Eigen::Index>(id)).tail(ny) = val; };
        auto F = [&](std::size_t id, Scalar val) { v.values(static_cast<Eigen::Index>(id)) = val; };
        auto f = [&](const Vector& u) { return 0.5 * u.dot(in.A * u); };
        auto g = [&](const Vector& u) { return 0.5 * u.dot(in.B * u); };

        const Vector yb = solve_shift(in.B, sigma, y + sigma * in.M * x);
        const Vector x1 = solve_shift(in.A, tau, x - tau * in.M.transpose() * yb);
        const Vector y1 = yb + sigma * in.M * (x1 - x);
        const Vector yb2 = solve_shift(in.B, sigma, y1 + sigma * in.M * x1);
        const Vector xp = solve_shift(in.A, 1.0 / beta, x1 - in.M.transpose() * yb / beta);
        const Vector yp = solve_shift(in.B, 1.0 / beta, yb + in.M * x1 / beta);

        X(x0, x);
        X(sf0, in.A * x);
        X(mty0, in.M.transpose() * y);
        X(mtyb, in.M.transpose() * yb);
        X(sf1, in.A * x1);
        X(mty1, in.M.transpose() * y1);
        X(sfp, in.A * xp);
        X(mtyb2, in.M.transpose() * yb2);
        Y(y0, y);
        Y(sg0, in.B * y);
        Y(mx0, in.M * x);
        Y(sg1, in.B * yb);
        Y(mx1, in.M * x1);
        Y(sgy1, in.B * y1);
        Y(sgp, in.B * yp);
        Y(sgb2, in.B * yb2);
        F(vf0, f(x));
        F(vf1, f(x1));
        F(vfp, f(xp));
        F(vg0, g(y));
        F(vgb, g(yb));
        F(vgy1, g(y1));
        F(vgp, g(yp));
        F(vgb2, g(yb2));
        F(vfs, 0.0);
        F(vgs, 0.0);
        return v;
    }

    Instance instance(std::mt19937_64& rng) const {
        std::uniform_real_distribution<Scalar> ud(0.0, 1.0);
        Instance in;
        in.A = spectrum_matrix(rng, nx, 0.05 + 0.5 * ud(rng), 1.0 + 4.0 * ud(rng));
        in.B = spectrum_matrix(rng, ny, 0.05 + 0.5 * ud(rng), 1.0 + 4.0 * ud(rng));
        in.M = gaussian(rng, ny, nx);
        Eigen::JacobiSVD<Matrix> svd(in.M);
        in.M /= svd.singularValues()(0);
        return in;
    }

    ExplicitSample sample(std::mt19937_64& rng) const override {
        for (int attempt = 0;; ++attempt) {
            const Instance in = instance(rng);
            const Vector x = gaussian(rng, nx, 1);
            const Vector y = gaussian(rng, ny, 1);
            const Vector yb = solve_shift(in.B, sigma, y + sigma * in.M * x);
            const Vector xb = solve_shift(in.A, tau, x - tau * in.M.transpose() * yb);
            if (smoothed_gap(in, xb, yb) < eta * (xb.squaredNorm() + yb.squaredNorm())) {
                if (attempt < 10000) continue;
                throw ModelingError("no instance satisfies the error bound; eta is too large for the sampler");
            }
            ExplicitSample s;
            s.current = at(in, x, y);
            const auto [x1, y1] = next_state(in, x, y);
            s.next.emplace_back(1.0, at(in, x1, y1));
            return s;
        }
    }

    std::vector<std::vector<Scalar>> witness_family() const override {
        std::vector<std::vector<Scalar>> fam;
        for (Scalar a : {0.0, 0.01, 0.1, 1.0})
            for (Scalar b : {0.0, 0.01, 0.1, 1.0})
                for (Scalar m : {1.0, -1.0}) fam.push_back({a, b, m});
        return fam;
    }

    std::vector<Scalar> trajectory(const std::vector<Scalar>& params, int steps) const override {
        const Scalar a = params.at(0), b = params.at(1), m = params.at(2);
        Scalar x = 1.0, y = 1.0;
        std::vector<Scalar> d{std::hypot(x, y)};
        for (int k = 0; k < steps; ++k) {
            const Scalar yb = (y + sigma * m * x) / (1.0 + sigma * b);
            const Scalar x1 = (x - tau * m * yb) / (1.0 + tau * a);
            y = yb + sigma * m * (x1 - x);
            x = x1;
            d.push_back(std::hypot(x, y));
        }
        return d;
    }
};

}  // namespace

Scenario gd_scenario(const GdConfig& cfg) {
    if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) throw ParameterError("step size must be > 0");
    FunctionClass cls = SmoothConvex{cfg.L};
    if (cfg.mu > 0.0) cls = SmoothStronglyConvex{cfg.mu, cfg.L};
    validate(cls);

    Scenario s;
    s.name = "gd";
    PepModel& m = s.model;
    const PointExpr x0 = m.new_leaf();
    FunctionHandle f = declare_function(m, cls, "f");
    const Triple t0 = f.oracle(x0);
    const Triple ts = f.register_stationary(PointExpr{});
    const PointExpr x1 = combine({x0, t0.grad}, {1.0, -cfg.gamma});
    const Triple t1 = f.oracle(x1);
    f.emit_class_constraints();
    m.name("x0", x0);
    m.name("g0", t0.grad);
    m.name("g1", t1.grad);
    m.name("f0", t0.value);
    m.name("f*", ts.value);
    m.name("f1", t1.value);
    m.freeze();

    IterationMap map;
    map.map_point(x0, x1);
    map.map_point(t0.grad, t1.grad);
    map.map_value(t0.value, t1.value);
    map.map_value(ts.value, ts.value);
    s.outcomes = OutcomeSet::deterministic(build_sigma(m, map));

    s.spec.support = {leaf_id(x0), leaf_id(t0.grad)};
    s.spec.nonneg = {f_value(t0.value) - f_value(ts.value)};
    s.nonneg_names = {"f(x0)-f*"};
    if (cfg.with_decrease) s.spec.decrease = f_value(t0.value) - f_value(ts.value);
    s.spec.mode = cfg.mode;
    s.spec.rho = cfg.rho;

    auto it = std::make_shared<GdIteration>();
    it->gamma = cfg.gamma;
    it->L = cfg.L;
    it->mu = cfg.mu;
    it->lx0 = leaf_id(x0);
    it->lg0 = leaf_id(t0.grad);
    it->lg1 = leaf_id(t1.grad);
    it->leaves = m.leaf_count();
    it->f0 = t0.value.id;
    it->fs = ts.value.id;
    it->f1 = t1.value.id;
    it->symbols = m.f_count();
    s.iteration = it;
    return s;
}

Scenario rcd_scenario(const RcdConfig& cfg) {
    if (cfg.d < 2) throw ParameterError("coordinate descent needs d >= 2");
    if (cfg.sample_block_size < 1) throw ParameterError("block size must be >= 1");
    std::vector<Scalar> L = cfg.L.empty() ? std::vector<Scalar>(cfg.d, 1.0) : cfg.L;
    if (L.size() != cfg.d) throw ParameterError("need one constant per block");
    const std::size_t d = cfg.d;

    Scenario s;
    s.name = "rcd";
    PepModel& m = s.model;
    std::vector<std::size_t> spaces(d);
    PointExpr x0;
    std::vector<PointExpr> x0_blocks;
    for (std::size_t j = 0; j < d; ++j) {
        spaces[j] = j;
        x0_blocks.push_back(m.new_leaf(j));
        x0 += x0_blocks.back();
    }
    FunctionHandle f = declare_function(m, BlockSmoothConvex{L, spaces}, "f");
    const Triple ts = f.register_stationary(PointExpr{});
    const Triple t0 = f.oracle(x0);
    std::vector<PointExpr> x1(d);
    std::vector<Triple> t1;
    for (std::size_t i = 0; i < d; ++i) {
        x1[i] = x0 - (1.0 / L[i]) * f.block_part(t0.grad, i);
        t1.push_back(f.oracle(x1[i]));
    }
    for (std::size_t i = 0; i < d; ++i) f.emit_block_smooth_constraints(x0, x1[i], i);
    f.emit_class_constraints();
    m.name("f0", t0.value);
    m.name("f*", ts.value);
    m.freeze();

    for (std::size_t i = 0; i < d; ++i) {
        IterationMap map;
        for (std::size_t j = 0; j < d; ++j) map.map_point(x0_blocks[j], f.block_part(x1[i], j));
        map.map_value(t0.value, t1[i].value);
        map.map_value(ts.value, ts.value);
        s.outcomes.outcomes.push_back(Outcome{1.0 / static_cast<Scalar>(d), build_sigma(m, map)});
    }

    ScalarExpr dist;
    for (std::size_t j = 0; j < d; ++j) dist += L[j] * sqnorm(x0_blocks[j]);
    const ScalarExpr gap = f_value(t0.value) - f_value(ts.value);
    s.spec.nonneg = {gap, dist};
    s.nonneg_names = {"f(x0)-f*", "||x0-x*||_L^2"};
    s.spec.decrease = gap;
    s.spec.mode = LyapunovMode::Descent;
    if (cfg.check_conjecture) {
        s.spec.fixed_q = {static_cast<Scalar>(d) - 1.0, 0.5 * static_cast<Scalar>(d)};
    } else {
        s.spec.minimize_q = 0;
    }

    auto it = std::make_shared<RcdIteration>();
    it->d = d;
    it->bs = cfg.sample_block_size;
    it->L = L;
    for (std::size_t j = 0; j < d; ++j) {
        it->lx0.push_back(leaf_id(x0_blocks[j]));
        it->lg0.push_back(leaf_id(f.block_part(t0.grad, j)));
    }
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<std::size_t> row;
        for (std::size_t j = 0; j < d; ++j) row.push_back(leaf_id(f.block_part(t1[i].grad, j)));
        it->lg1.push_back(std::move(row));
        it->f1.push_back(t1[i].value.id);
    }
    it->f0 = t0.value.id;
    it->fs = ts.value.id;
    it->leaves = m.leaf_count();
    it->symbols = m.f_count();
    s.iteration = it;
    return s;
}

RcdResult run_rcd(const RcdConfig& cfg, const conic::SolveOptions& options, Scalar q1_slack) {
    if (!(q1_slack >= 0.0)) throw ParameterError("slack must be >= 0");
    const Scenario s = rcd_scenario(cfg);
    RcdResult r;
    r.d = cfg.d;
    r.problem = assemble(s.model, s.outcomes, s.spec);
    r.certificate = solve_certificate(r.problem, options);
    if (certified(r.certificate) && !cfg.check_conjecture) {
        LyapunovSpec second = s.spec;
        second.fixed_q = {r.certificate.q(0) + q1_slack};
        second.minimize_q = 1;
        CertificateProblem p2 = assemble(s.model, s.outcomes, second);
        Certificate c2 = solve_certificate(p2, options);
        if (certified(c2)) {
            r.problem = std::move(p2);
            r.certificate = std::move(c2);
        }
    }
    r.feasible = certified(r.certificate);
    r.q1 = r.certificate.q(0);
    r.q2 = r.certificate.q(1);
    return r;
}

Scenario pdhg_qeb_scenario(const PdhgQebConfig& cfg) {
    if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) throw ParameterError("gamma must be > 0");
    if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) throw ParameterError("error bound constant must be > 0");
    if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta)) throw ParameterError("beta must be > 0");
    const Scalar tau = std::sqrt(cfg.gamma), sigma = tau, beta = cfg.beta;

    Scenario s;
    s.name = "pdhg_qeb";
    PepModel& m = s.model;
    constexpr std::size_t X = 0, Y = 1;
    const PointExpr x0 = m.new_leaf(X);
    const PointExpr y0 = m.new_leaf(Y);
    FunctionHandle f = declare_function(m, Convex{}, "f", X);
    FunctionHandle g = declare_function(m, Convex{}, "g", Y);
    OperatorHandle M = declare_operator(m, 1.0, "M", X, Y);

    const Triple tf0 = f.oracle(x0);
    const Triple tg0 = g.oracle(y0);
    const Triple tfs = f.register_stationary(PointExpr{});
    const Triple tgs = g.register_stationary(PointExpr{});
    const PointExpr mx0 = M.apply(x0);
    const PointExpr mty0 = M.apply_adjoint(y0);

    // one PDHG step
    const Triple tyb = g.prox(y0 + sigma * mx0, sigma);
    const PointExpr mtyb = M.apply_adjoint(tyb.point);
    const Triple tx1 = f.prox(x0 - tau * mtyb, tau);
    const PointExpr mx1 = M.apply(tx1.point);
    const PointExpr y1 = tyb.point + sigma * (mx1 - mx0);
    const Triple ty1 = g.oracle(y1);
    const PointExpr mty1 = M.apply_adjoint(y1);
    // the dual prox of the next step is a function of (x1, y1); it is tracked
    // so that V may depend on ybar1
    const Triple tyb2 = g.prox(y1 + sigma * mx1, sigma);
    const PointExpr mtyb2 = M.apply_adjoint(tyb2.point);

    // Smoothed gap at zbar1 = (x1, ybar1), centered at zbar1. Both points are
    // prox outputs, so their subgradients are pinned by the step; at z0 the
    // adversary could inflate f(x0) with a kink the iteration never sees.
    const Triple txp = f.prox(tx1.point - (1.0 / beta) * mtyb, 1.0 / beta);
    const Triple typ = g.prox(tyb.point + (1.0 / beta) * mx1, 1.0 / beta);
    ScalarExpr gap = f_value(tx1.value) + dot(mx1, typ.point) - f_value(typ.value) - f_value(txp.value) -
                     dot(txp.point, mtyb) + f_value(tyb.value);
    gap -= (0.5 * beta) * (sqnorm(txp.point - tx1.point) + sqnorm(typ.point - tyb.point));
    m.add_constraint(cfg.eta * (sqnorm(tx1.point) + sqnorm(tyb.point)) - gap, Sense::Leq0, "qeb:smoothed_gap");
    const ScalarExpr dist = sqnorm(x0) + sqnorm(y0);

    f.emit_class_constraints();
    g.emit_class_constraints();
    M.emit_operator_constraints();
    m.name("x0", x0);
    m.name("y0", y0);
    m.freeze();

    IterationMap map;
    map.map_point(x0, tx1.point);
    map.map_point(tf0.grad, tx1.grad);
    map.map_point(mty0, mty1);
    map.map_point(y0, y1);
    map.map_point(tg0.grad, ty1.grad);
    map.map_point(mx0, mx1);
    map.map_point(tyb.grad, tyb2.grad);
    map.map_point(mtyb, mtyb2);
    map.map_value(tyb.value, tyb2.value);
    map.map_value(tf0.value, tx1.value);
    map.map_value(tg0.value, ty1.value);
    map.map_value(tfs.value, tfs.value);
    map.map_value(tgs.value, tgs.value);
    s.outcomes = OutcomeSet::deterministic(build_sigma(m, map));

    for (const PointExpr* p : {&x0, &tf0.grad, &mty0, &mtyb, &y0, &tg0.grad, &mx0, &tyb.grad})
        s.spec.support.insert(leaf_id(*p));
    s.spec.nonneg = {f_value(tf0.value) - f_value(tfs.value), f_value(tg0.value) - f_value(tgs.value),
                     f_value(tyb.value) - f_value(tgs.value)};
    s.nonneg_names = {"f(x0)-f*", "g(y0)-g*", "g(ybar1)-g*"};
    s.spec.decrease = dist;
    s.spec.mode = LyapunovMode::LinearRate;

    auto it = std::make_shared<PdhgIteration>();
    it->tau = tau;
    it->sigma = sigma;
    it->beta = beta;
    it->eta = cfg.eta;
    it->nx = static_cast<Eigen::Index>(cfg.sample_dim);
    it->ny = static_cast<Eigen::Index>(cfg.sample_dim);
    it->x0 = leaf_id(x0);
    it->sf0 = leaf_id(tf0.grad);
    it->mty0 = leaf_id(mty0);
    it->mtyb = leaf_id(mtyb);
    it->sf1 = leaf_id(tx1.grad);
    it->mty1 = leaf_id(mty1);
    it->sfp = leaf_id(txp.grad);
    it->y0 = leaf_id(y0);
    it->sg0 = leaf_id(tg0.grad);
    it->mx0 = leaf_id(mx0);
    it->sg1 = leaf_id(tyb.grad);
    it->mx1 = leaf_id(mx1);
    it->sgy1 = leaf_id(ty1.grad);
    it->sgp = leaf_id(typ.grad);
    it->sgb2 = leaf_id(tyb2.grad);
    it->mtyb2 = leaf_id(mtyb2);
    it->vgb2 = tyb2.value.id;
    it->vf0 = tf0.value.id;
    it->vfs = tfs.value.id;
    it->vf1 = tx1.value.id;
    it->vfp = txp.value.id;
    it->vg0 = tg0.value.id;
    it->vgs = tgs.value.id;
    it->vgb = tyb.value.id;
    it->vgy1 = ty1.value.id;
    it->vgp = typ.value.id;
    it->leaves = m.leaf_count();
    it->symbols = m.f_count();
    s.iteration = it;
    return s;
}

}  // namespace lyacert
