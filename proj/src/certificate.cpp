// SPDX-License-Identifier: Apache-2.0

#include "lyacert/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lyacert/cone_ops.hpp"
#include "lyacert/verification.hpp"

namespace lyacert {

using conic::svec_index;
using conic::triangle_size;

std::string to_string(LyapunovMode mode) {
    switch (mode) {
        case LyapunovMode::Descent: return "descent";
        case LyapunovMode::LinearRate: return "linear_rate";
        case LyapunovMode::MinMaxValue: return "minmax_value";
    }
    return "?";
}

std::string to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::Descent: return "descent";
        case SystemKind::RateBound: return "rate_bound";
        case SystemKind::RateContraction: return "rate_contraction";
        case SystemKind::MinMax: return "minmax";
    }
    return "?";
}

void LyapunovSpec::validate(const PepModel& model) const {
    for (std::size_t leaf : support) {
        if (leaf >= model.leaf_count()) throw ModelingError("Lyapunov support refers to a leaf outside the model");
    }
    for (const auto& n : nonneg) model.check(n);
    model.check(decrease);
    if (mode == LyapunovMode::LinearRate && !(rho > 0.0 && rho <= 1.0)) throw ParameterError("rate must lie in (0, 1]");
    if (fixed_q.size() > nonneg.size()) throw ModelingError("more fixed coefficients than nonnegative quantities");
    for (const auto& v : fixed_q) {
        if (v && (!std::isfinite(*v) || *v < 0.0)) throw ParameterError("fixed coefficients must be finite and >= 0");
    }
    if (minimize_q) {
        if (*minimize_q >= nonneg.size()) throw ModelingError("minimized coefficient out of range");
        if (q_fixed(*minimize_q)) throw ModelingError("cannot minimize a fixed coefficient");
    }
    if (mode == LyapunovMode::MinMaxValue) {
        if (!normalization) throw ModelingError("MinMaxValue mode needs a normalization");
        if (!(normalization->trace_bound > 0.0)) throw ParameterError("trace bound must be > 0");
        for (std::size_t leaf : normalization->unit_leaves) {
            if (leaf >= model.leaf_count()) throw ModelingError("normalized leaf outside the model");
        }
    }
}

ScalarExpr lyapunov_expr(const LyapunovSpec& spec, const Matrix& Q, const Vector& q) {
    ScalarExpr v;
    for (auto i = spec.support.begin(); i != spec.support.end(); ++i) {
        for (auto j = i; j != spec.support.end(); ++j) {
            const Scalar w = Q(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j));
            if (w != 0.0) v.add_quad(*i, *j, w);
        }
    }
    for (std::size_t k = 0; k < spec.nonneg.size(); ++k) {
        if (k < static_cast<std::size_t>(q.size()) && q(static_cast<Eigen::Index>(k)) != 0.0)
            v += q(static_cast<Eigen::Index>(k)) * spec.nonneg[k];
    }
    return v;
}

namespace {

ScalarExpr target_from(SystemKind kind, const ScalarExpr& v, const ScalarExpr& v_next, const ScalarExpr& r,
                       const ScalarExpr& r_next, Scalar rho, bool with_r) {
    switch (kind) {
        case SystemKind::Descent:
        case SystemKind::MinMax: return with_r ? v_next + r - v : v_next - v;
        case SystemKind::RateBound: return with_r ? r_next - v_next : -v_next;
        case SystemKind::RateContraction: return v_next - rho * v;
    }
    return {};
}

std::vector<SystemKind> systems_for(LyapunovMode mode) {
    switch (mode) {
        case LyapunovMode::Descent: return {SystemKind::Descent};
        case LyapunovMode::LinearRate: return {SystemKind::RateBound, SystemKind::RateContraction};
        case LyapunovMode::MinMaxValue: return {SystemKind::MinMax};
    }
    return {};
}

std::vector<std::size_t> unit_leaves(const PepModel& model, const MinMaxNormalization& n) {
    if (!n.unit_leaves.empty()) return n.unit_leaves;
    std::vector<std::size_t> all(model.leaf_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

struct Term {
    std::size_t var;
    ScalarExpr coeff;
};

class Builder {
public:
    Builder(CertificateProblem& p) : P(p), model(p.model) {}

    void run() {
        const LyapunovSpec& spec = P.spec;
        // Q variables: one svec block per subspace touched by the support.
        std::map<std::size_t, std::vector<std::size_t>> by_space;
        for (std::size_t leaf : spec.support) by_space[model.subspace_of(leaf)].push_back(leaf);
        for (auto& [space, leaves] : by_space) {
            QBlockIndex b{space, leaves, nvars};
            const std::size_t k = leaves.size();
            for (std::size_t j = 0; j < k; ++j) {
                for (std::size_t i = j; i < k; ++i) {
                    const Scalar w = i == j ? 1.0 : std::sqrt(2.0);
                    basis.push_back(Term{nvars + svec_index(k, i, j),
                                         w * dot(PointExpr::leaf({leaves[i]}), PointExpr::leaf({leaves[j]}))});
                }
            }
            psd_vars.emplace_back(nvars, k);
            nvars += triangle_size(k);
            P.q_blocks.push_back(std::move(b));
        }
        ScalarExpr fixed_v;
        P.q_offset.assign(spec.nonneg.size(), std::nullopt);
        for (std::size_t k = 0; k < spec.nonneg.size(); ++k) {
            if (spec.q_fixed(k)) {
                fixed_v += *spec.fixed_q[k] * spec.nonneg[k];
            } else {
                P.q_offset[k] = nvars;
                basis.push_back(Term{nvars, spec.nonneg[k]});
                nonneg_vars.push_back(nvars);
                ++nvars;
            }
        }
        std::vector<ScalarExpr> basis_next;
        for (const auto& t : basis) basis_next.push_back(expect(P.outcomes, t.coeff));
        const ScalarExpr fixed_next = expect(P.outcomes, fixed_v);
        const ScalarExpr r_next = expect(P.outcomes, spec.decrease);
        const ScalarExpr& r = spec.decrease;

        for (SystemKind kind : systems_for(spec.mode)) {
            SystemIndex idx;
            idx.kind = kind;
            std::vector<Term> terms;
            for (std::size_t b = 0; b < basis.size(); ++b) {
                terms.push_back(Term{basis[b].var, model.canonicalize(target_from(kind, basis[b].coeff, basis_next[b], {},
                                                                                  {}, spec.rho, false))});
            }
            const ScalarExpr t0 =
                model.canonicalize(target_from(kind, fixed_v, fixed_next, r, r_next, spec.rho, true));

            for (const auto& c : model.constraints()) {
                idx.multiplier.push_back(nvars);
                terms.push_back(Term{nvars, -c.expr});
                if (c.sense == Sense::Leq0) nonneg_vars.push_back(nvars);
                ++nvars;
            }
            for (const auto& blk : model.lmi_blocks()) {
                idx.lmi.push_back(nvars);
                const std::size_t k = blk.dim;
                for (std::size_t j = 0; j < k; ++j) {
                    for (std::size_t i = j; i < k; ++i) {
                        const Scalar w = i == j ? 1.0 : std::sqrt(2.0);
                        terms.push_back(Term{nvars + svec_index(k, i, j), w * blk.at(i, j)});
                    }
                }
                psd_vars.emplace_back(nvars, k);
                nvars += triangle_size(k);
            }
            if (kind == SystemKind::MinMax) {
                for (std::size_t leaf : unit_leaves(model, *spec.normalization)) {
                    idx.mu.emplace_back(leaf, nvars);
                    const PointExpr p = PointExpr::leaf({leaf});
                    terms.push_back(Term{nvars, ScalarExpr(1.0) - dot(p, p)});
                    nonneg_vars.push_back(nvars);
                    ++nvars;
                }
            }
            emit_system(kind, terms, t0);
            P.systems.push_back(std::move(idx));
        }

        if (spec.mode == LyapunovMode::MinMaxValue) {
            // tr(Q) + sum q <= B
            const std::size_t row = nonneg_rows.size();
            Scalar rhs = spec.normalization->trace_bound;
            for (const auto& qb : P.q_blocks) {
                for (std::size_t i = 0; i < qb.leaves.size(); ++i)
                    nonneg_trip.emplace_back(row, qb.offset + svec_index(qb.leaves.size(), i, i), 1.0);
            }
            for (std::size_t k = 0; k < spec.nonneg.size(); ++k) {
                if (P.q_offset[k]) nonneg_trip.emplace_back(row, *P.q_offset[k], 1.0);
                else rhs -= *spec.fixed_q[k];
            }
            nonneg_rows.push_back(rhs);
        }
        for (std::size_t v : nonneg_vars) {
            nonneg_trip.emplace_back(nonneg_rows.size(), v, -1.0);
            nonneg_rows.push_back(0.0);
        }
        for (auto [off, k] : psd_vars) {
            const std::size_t base = psd_rhs.size();
            for (std::size_t t = 0; t < triangle_size(k); ++t) {
                psd_trip.emplace_back(base + t, off + t, -1.0);
                psd_rhs.push_back(0.0);
            }
            psd_cones.push_back(k);
        }
        finish();
    }

private:
    void emit_system(SystemKind kind, const std::vector<Term>& terms, const ScalarExpr& t0) {
        // active leaves per subspace and active symbols
        std::map<std::size_t, std::set<std::size_t>> active;
        std::set<std::size_t> syms;
        auto touch = [&](const ScalarExpr& e) {
            for (const auto& [key, v] : e.quad()) {
                active[model.subspace_of(key.first)].insert(key.first);
                active[model.subspace_of(key.second)].insert(key.second);
            }
            for (const auto& [f, v] : e.lin()) syms.insert(f);
        };
        touch(t0);
        for (const auto& t : terms) touch(t.coeff);

        // lin(L) = 0
        std::map<std::size_t, std::size_t> sym_row;
        for (std::size_t f : syms) {
            sym_row[f] = zero_rows.size();
            zero_rows.push_back(-t0.lin_entry(f));
        }
        for (const auto& t : terms) {
            for (const auto& [f, v] : t.coeff.lin()) zero_trip.emplace_back(sym_row[f], t.var, v);
        }
        // const(L) <= 0 or objective
        if (kind == SystemKind::MinMax) {
            objective_offset += t0.constant();
            for (const auto& t : terms) objective[t.var] += t.coeff.constant();
        } else {
            const std::size_t row = nonneg_rows.size();
            nonneg_rows.push_back(-t0.constant());
            for (const auto& t : terms) {
                if (t.coeff.constant() != 0.0) nonneg_trip.emplace_back(row, t.var, t.coeff.constant());
            }
        }
        // quad(L) <= 0 per subspace
        for (const auto& [space, leaves] : active) {
            const std::vector<std::size_t> list(leaves.begin(), leaves.end());
            std::map<std::size_t, std::size_t> local;
            for (std::size_t i = 0; i < list.size(); ++i) local[list[i]] = i;
            const std::size_t k = list.size();
            const std::size_t base = psd_rhs.size();
            psd_rhs.resize(base + triangle_size(k), 0.0);
            auto row_of = [&](std::size_t a, std::size_t b, Scalar& w) {
                std::size_t i = local.at(a), j = local.at(b);
                if (i < j) std::swap(i, j);
                w = i == j ? 1.0 : std::sqrt(2.0);
                return base + svec_index(k, i, j);
            };
            for (const auto& [key, v] : t0.quad()) {
                if (model.subspace_of(key.first) != space) continue;
                Scalar w;
                const std::size_t row = row_of(key.first, key.second, w);
                psd_rhs[row] -= w * v;
            }
            for (const auto& t : terms) {
                for (const auto& [key, v] : t.coeff.quad()) {
                    if (model.subspace_of(key.first) != space) continue;
                    Scalar w;
                    const std::size_t row = row_of(key.first, key.second, w);
                    psd_trip.emplace_back(row, t.var, w * v);
                }
            }
            psd_cones.push_back(k);
        }
    }

    void finish() {
        auto& prog = P.program;
        const std::size_t m0 = zero_rows.size(), m1 = nonneg_rows.size(), m2 = psd_rhs.size();
        std::vector<conic::Triplet> trip;
        trip.reserve(zero_trip.size() + nonneg_trip.size() + psd_trip.size());
        for (auto [r, c, v] : zero_trip) trip.emplace_back(r, c, v);
        for (auto [r, c, v] : nonneg_trip) trip.emplace_back(m0 + r, c, v);
        for (auto [r, c, v] : psd_trip) trip.emplace_back(m0 + m1 + r, c, v);
        const auto m = static_cast<Eigen::Index>(m0 + m1 + m2);
        prog.A.resize(m, static_cast<Eigen::Index>(nvars));
        prog.A.setFromTriplets(trip.begin(), trip.end());
        prog.b.resize(m);
        Eigen::Index pos = 0;
        for (Scalar v : zero_rows) prog.b(pos++) = v;
        for (Scalar v : nonneg_rows) prog.b(pos++) = v;
        for (Scalar v : psd_rhs) prog.b(pos++) = v;
        prog.c = Vector::Zero(static_cast<Eigen::Index>(nvars));
        for (auto [v, w] : objective) prog.c(static_cast<Eigen::Index>(v)) = w;
        if (P.spec.minimize_q) prog.c(static_cast<Eigen::Index>(*P.q_offset[*P.spec.minimize_q])) = 1.0;
        P.objective_offset = objective_offset;
        prog.cones.clear();
        if (m0) prog.cones.push_back({conic::ConeType::Zero, m0});
        if (m1) prog.cones.push_back({conic::ConeType::NonNeg, m1});
        for (std::size_t k : psd_cones) prog.cones.push_back({conic::ConeType::Psd, k});
        prog.validate();
    }

    CertificateProblem& P;
    const PepModel& model;
    std::size_t nvars = 0;
    std::vector<Term> basis;
    std::vector<std::size_t> nonneg_vars;
    std::vector<std::pair<std::size_t, std::size_t>> psd_vars;  // offset, order

    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> zero_trip, nonneg_trip, psd_trip;
    std::vector<Scalar> zero_rows, nonneg_rows, psd_rhs;
    std::vector<std::size_t> psd_cones;
    std::map<std::size_t, Scalar> objective;
    Scalar objective_offset = 0.0;
};

}  // namespace

ScalarExpr system_target(const CertificateProblem& problem, SystemKind kind, const Matrix& Q, const Vector& q) {
    const ScalarExpr v = lyapunov_expr(problem.spec, Q, q);
    const ScalarExpr v_next = expect(problem.outcomes, v);
    const ScalarExpr r_next = expect(problem.outcomes, problem.spec.decrease);
    return problem.model.canonicalize(
        target_from(kind, v, v_next, problem.spec.decrease, r_next, problem.spec.rho, true));
}

CertificateProblem assemble(const PepModel& model, const OutcomeSet& outcomes, const LyapunovSpec& spec) {
    if (!model.frozen()) throw ModelingError("assemble expects a frozen model");
    outcomes.validate();
    for (const auto& o : outcomes.outcomes) {
        if (static_cast<std::size_t>(o.transition.sigma.rows()) != model.leaf_count() ||
            static_cast<std::size_t>(o.transition.sigma_f.rows()) != model.f_count())
            throw ModelingError("transition dimensions do not match the model");
    }
    spec.validate(model);
    CertificateProblem p{model, outcomes, spec, {}, 0.0, {}, {}, {}};
    Builder(p).run();
    return p;
}

CertificateProblem assemble_minmax_value(const PepModel& model, const OutcomeSet& outcomes, LyapunovSpec spec,
                                         const std::optional<MinMaxNormalization>& normalization) {
    if (!normalization) throw ModelingError("MinMaxValue mode needs a normalization");
    spec.mode = LyapunovMode::MinMaxValue;
    spec.normalization = normalization;
    spec.minimize_q.reset();
    return assemble(model, outcomes, spec);
}

Certificate solve_certificate(const CertificateProblem& problem, const conic::SolveOptions& options, Scalar verify_tol) {
    const conic::SolveReport rep = conic::solve(problem.program, options);
    Certificate cert;
    cert.status = rep.status;
    cert.solver_residuals = rep.residuals;
    cert.iterations = rep.iterations;
    const auto n = static_cast<Eigen::Index>(problem.model.leaf_count());
    cert.Q = Matrix::Zero(n, n);
    const std::size_t nq = problem.spec.nonneg.size();
    cert.q = Vector::Zero(static_cast<Eigen::Index>(nq));
    const bool has_point = rep.status != conic::Status::PrimalInfeasible && rep.status != conic::Status::DualInfeasible;
    const Vector& x = rep.x;
    auto get = [&](std::size_t off) { return has_point ? x(static_cast<Eigen::Index>(off)) : 0.0; };

    for (const auto& qb : problem.q_blocks) {
        const std::size_t k = qb.leaves.size();
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = j; i < k; ++i) {
                Scalar v = get(qb.offset + svec_index(k, i, j));
                if (i != j) v /= std::sqrt(2.0);
                const auto a = static_cast<Eigen::Index>(qb.leaves[i]), b = static_cast<Eigen::Index>(qb.leaves[j]);
                cert.Q(a, b) = v;
                cert.Q(b, a) = v;
            }
        }
    }
    for (std::size_t k = 0; k < nq; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        cert.q(kk) = problem.q_offset[k] ? get(*problem.q_offset[k]) : *problem.spec.fixed_q[k];
    }
    for (const auto& sys : problem.systems) {
        SystemMultipliers m;
        m.kind = sys.kind;
        m.constraint = Vector::Zero(static_cast<Eigen::Index>(sys.multiplier.size()));
        for (std::size_t i = 0; i < sys.multiplier.size(); ++i) m.constraint(static_cast<Eigen::Index>(i)) = get(sys.multiplier[i]);
        for (std::size_t b = 0; b < sys.lmi.size(); ++b) {
            const std::size_t k = problem.model.lmi_blocks()[b].dim;
            Vector v(static_cast<Eigen::Index>(triangle_size(k)));
            for (Eigen::Index t = 0; t < v.size(); ++t) v(t) = get(sys.lmi[b] + static_cast<std::size_t>(t));
            m.lmi.push_back(conic::smat(v, static_cast<Eigen::Index>(k)));
        }
        for (auto [leaf, off] : sys.mu) m.mu.emplace_back(leaf, get(off));
        cert.systems.push_back(std::move(m));
    }
    if (has_point) {
        cert.objective = problem.program.c.dot(x) + problem.objective_offset;
    }
    cert.verification = verify_certificate(problem, cert, verify_tol);
    return cert;
}

RateSearch bisect_rate(const PepModel& model, const OutcomeSet& outcomes, const LyapunovSpec& spec_template, Scalar lo,
                       Scalar hi, Scalar tol, const conic::SolveOptions& options) {
    if (!(lo > 0.0) || !(lo < hi) || !(hi <= 1.0)) throw ParameterError("need 0 < lo < hi <= 1");
    if (!(tol > 0.0)) throw ParameterError("bisection tolerance must be > 0");
    RateSearch out;
    auto probe = [&](Scalar rho) {
        LyapunovSpec spec = spec_template;
        spec.mode = LyapunovMode::LinearRate;
        spec.rho = rho;
        spec.minimize_q.reset();
        Certificate cert = solve_certificate(assemble(model, outcomes, spec), options);
        const bool ok = certified(cert);
        out.trace.push_back(RateProbe{rho, ok, cert.status});
        if (ok && (!out.certificate || rho <= out.rho)) {
            out.certificate = std::move(cert);
            out.rho = rho;
        }
        return ok;
    };
    out.rho = hi;
    out.feasible_at_hi = probe(hi);
    if (!out.feasible_at_hi) {
        out.rho = hi;
        return out;
    }
    Scalar a = lo, b = hi;
    if (probe(lo)) {
        b = lo;
    } else {
        while (b - a > tol) {
            const Scalar mid = 0.5 * (a + b);
            if (probe(mid)) b = mid;
            else a = mid;
        }
    }
    out.rho = b;
    if (b < hi) probe(0.5 * (b + hi));
    Scalar max_infeasible = 0.0;
    for (const auto& p : out.trace) {
        if (!p.feasible) max_infeasible = std::max(max_infeasible, p.rho);
    }
    for (const auto& p : out.trace) {
        if (p.feasible && p.rho < max_infeasible) out.monotone = false;
    }
    return out;
}

}  // namespace lyacert
