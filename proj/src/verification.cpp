// SPDX-License-Identifier: Apache-2.0

#include "lyacert/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace lyacert {

namespace {

Scalar min_eig(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

Scalar max_eig(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(m.rows() - 1);
}

Matrix restrict(const Matrix& m, const std::vector<std::size_t>& idx) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    Matrix out(k, k);
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < k; ++i)
            out(i, j) = m(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                          static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
    return out;
}

struct Check {
    VerificationReport& rep;
    void sign(Scalar violation, const std::string& what) {
        if (violation > rep.sign_violation) {
            rep.sign_violation = violation;
            if (rep.failure.empty() || rep.failure.rfind("sign:", 0) == 0) rep.failure = "sign: " + what;
        }
    }
};

}  // namespace

VerificationReport verify_certificate(const CertificateProblem& problem, const Certificate& cert, Scalar tol) {
    VerificationReport rep;
    const PepModel& model = problem.model;
    const LyapunovSpec& spec = problem.spec;
    const auto n = static_cast<Eigen::Index>(model.leaf_count());
    if (cert.Q.rows() != n || cert.Q.cols() != n || cert.q.size() != static_cast<Eigen::Index>(spec.nonneg.size()) ||
        cert.systems.size() != problem.systems.size()) {
        rep.failure = "certificate dimensions do not match the problem";
        rep.sign_violation = std::numeric_limits<Scalar>::infinity();
        return rep;
    }
    Check check{rep};

    // Q: symmetric, pinned to zero off the support blocks, PSD on them.
    const auto spaces = model.subspace_leaves();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
            const bool free = spec.support.count(a) && spec.support.count(b) && model.subspace_of(a) == model.subspace_of(b);
            if (!free) check.sign(std::abs(cert.Q(i, j)), "Q entry outside the support");
            check.sign(std::abs(cert.Q(i, j) - cert.Q(j, i)), "Q not symmetric");
        }
    }
    for (const auto& leaves : spaces) {
        std::vector<std::size_t> sup;
        for (std::size_t l : leaves) {
            if (spec.support.count(l)) sup.push_back(l);
        }
        check.sign(-min_eig(restrict(cert.Q, sup)), "Q not PSD");
    }
    for (std::size_t k = 0; k < spec.nonneg.size(); ++k) {
        const Scalar v = cert.q(static_cast<Eigen::Index>(k));
        check.sign(-v, "q negative");
        if (spec.q_fixed(k)) check.sign(std::abs(v - *spec.fixed_q[k]), "fixed coefficient changed");
    }
    if (spec.mode == LyapunovMode::MinMaxValue && spec.normalization) {
        Scalar total = cert.q.sum();
        for (std::size_t l : spec.support) total += cert.Q(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l));
        check.sign(total - spec.normalization->trace_bound, "trace bound exceeded");
    }

    bool const_checked = false;
    for (std::size_t s = 0; s < problem.systems.size(); ++s) {
        const SystemMultipliers& m = cert.systems[s];
        const SystemKind kind = problem.systems[s].kind;
        if (m.kind != kind || m.constraint.size() != static_cast<Eigen::Index>(model.constraints().size()) ||
            m.lmi.size() != model.lmi_blocks().size()) {
            rep.failure = "multiplier layout does not match the problem";
            rep.sign_violation = std::numeric_limits<Scalar>::infinity();
            return rep;
        }
        ScalarExpr lag = system_target(problem, kind, cert.Q, cert.q);
        for (std::size_t i = 0; i < model.constraints().size(); ++i) {
            const auto& c = model.constraints()[i];
            const Scalar w = m.constraint(static_cast<Eigen::Index>(i));
            if (c.sense == Sense::Leq0) check.sign(-w, "negative multiplier for " + c.tag);
            if (w != 0.0) lag -= w * c.expr;
        }
        for (std::size_t b = 0; b < model.lmi_blocks().size(); ++b) {
            const auto& blk = model.lmi_blocks()[b];
            const Matrix& L = m.lmi[b];
            if (L.rows() != static_cast<Eigen::Index>(blk.dim)) {
                rep.failure = "LMI multiplier of wrong size";
                rep.sign_violation = std::numeric_limits<Scalar>::infinity();
                return rep;
            }
            check.sign(-min_eig(L), "LMI multiplier not PSD for " + blk.tag);
            for (std::size_t i = 0; i < blk.dim; ++i)
                for (std::size_t j = 0; j < blk.dim; ++j) {
                    const Scalar w = L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    if (w != 0.0) lag += w * blk.at(i, j);
                }
        }
        for (auto [leaf, mu] : m.mu) {
            check.sign(-mu, "negative normalization multiplier");
            const PointExpr p = PointExpr::leaf({leaf});
            lag += mu * (ScalarExpr(1.0) - dot(p, p));
        }
        lag = model.canonicalize(lag);

        const Matrix quad = lag.quad_dense(model.leaf_count());
        for (const auto& leaves : spaces) rep.eig_max = std::max(rep.eig_max, max_eig(restrict(quad, leaves)));
        for (const auto& [f, v] : lag.lin()) rep.lin_res = std::max(rep.lin_res, std::abs(v));
        if (kind != SystemKind::MinMax) {
            rep.const_slack = const_checked ? std::max(rep.const_slack, lag.constant()) : lag.constant();
            const_checked = true;
        } else if (!const_checked) {
            rep.const_slack = lag.constant();
        }
    }
    const bool const_ok = spec.mode == LyapunovMode::MinMaxValue || rep.const_slack <= tol;
    rep.passed = rep.eig_max <= tol && rep.lin_res <= tol && const_ok && rep.sign_violation <= tol;
    if (!rep.passed && rep.failure.empty()) {
        std::ostringstream os;
        os << "residuals eig_max " << rep.eig_max << " lin_res " << rep.lin_res << " const_slack " << rep.const_slack;
        rep.failure = os.str();
    }
    if (rep.passed) rep.failure.clear();
    return rep;
}

std::vector<Scalar> ExplicitScenario::trajectory(const std::vector<Scalar>&, int) const { return {}; }

SampleReport sample_check(const ExplicitScenario& scenario, const CertificateProblem& problem, const Certificate& cert,
                          std::size_t n_samples, std::uint64_t seed, Scalar tol) {
    SampleReport rep;
    rep.seed = seed;
    const LyapunovSpec& spec = problem.spec;
    const ScalarExpr V = lyapunov_expr(spec, cert.Q, cert.q);
    const ScalarExpr& R = spec.decrease;
    std::vector<std::size_t> unit;
    if (spec.mode == LyapunovMode::MinMaxValue && spec.normalization) {
        unit = spec.normalization->unit_leaves;
        if (unit.empty())
            for (std::size_t i = 0; i < problem.model.leaf_count(); ++i) unit.push_back(i);
    }
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < n_samples; ++s) {
        const ExplicitSample smp = scenario.sample(rng);
        const Scalar v = evaluate(V, smp.current);
        const Scalar r = evaluate(R, smp.current);
        Scalar ev = 0.0, er = 0.0, eabs = 0.0;
        for (const auto& [p, val] : smp.next) {
            const Scalar vn = evaluate(V, val);
            const Scalar rn = evaluate(R, val);
            ev += p * vn;
            er += p * rn;
            eabs += p * (std::abs(vn) + std::abs(rn));
        }
        const Scalar scale = 1.0 + std::abs(v) + std::abs(r) + eabs;
        for (const auto& sys : problem.systems) {
            Scalar t = 0.0;
            switch (sys.kind) {
                case SystemKind::Descent: t = ev + r - v; break;
                case SystemKind::RateBound: t = er - ev; break;
                case SystemKind::RateContraction: t = ev - spec.rho * v; break;
                case SystemKind::MinMax: {
                    Scalar diag = 0.0;
                    const Matrix g = smp.current.gram();
                    for (std::size_t l : unit) diag = std::max(diag, g(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l)));
                    t = ev + r - v - std::max<Scalar>(cert.objective, 0.0) * diag;
                    break;
                }
            }
            rep.worst = std::max(rep.worst, t / scale);
        }
        ++rep.samples;
    }
    rep.passed = rep.samples > 0 && rep.worst <= tol;
    return rep;
}

std::optional<DivergenceWitness> divergence_witness(const ExplicitScenario& scenario, int steps, Scalar growth) {
    for (const auto& params : scenario.witness_family()) {
        const std::vector<Scalar> d = scenario.trajectory(params, steps);
        if (d.size() < 2 || !(d.front() > 0.0)) continue;
        const Scalar g = d.back() / d.front();
        if (g >= growth || !std::isfinite(g)) return DivergenceWitness{params, d, g};
    }
    return std::nullopt;
}

}  // namespace lyacert
