// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "lyacert/certificate.hpp"
#include "lyacert/scenarios.hpp"
#include "lyacert/verification.hpp"

using namespace lyacert;

namespace {

double min_eig(const Matrix& Q) {
    if (Q.size() == 0) return 0.0;
    return Eigen::SelfAdjointEigenSolver<Matrix>(Q).eigenvalues()(0);
}

/// x+ = x / 2 with V = |x|^2 pinned through a fixed coefficient.
struct Contraction {
    PepModel model;
    OutcomeSet outcomes;
    LyapunovSpec spec;
};

Contraction contraction() {
    Contraction c;
    const PointExpr x = c.model.new_leaf();
    c.model.freeze();
    IterationMap map;
    map.map_point(x, 0.5 * x);
    c.outcomes = OutcomeSet::deterministic(build_sigma(c.model, map));
    c.spec.nonneg = {sqnorm(x)};
    c.spec.fixed_q = {1.0};
    c.spec.mode = LyapunovMode::LinearRate;
    return c;
}

}  // namespace

TEST_CASE("zero decrease admits the zero certificate") {
    GdConfig cfg;
    cfg.with_decrease = false;
    const Scenario s = gd_scenario(cfg);
    const CertificateProblem p = assemble(s.model, s.outcomes, s.spec);

    Certificate zero;
    zero.Q = Matrix::Zero(3, 3);
    zero.q = Vector::Zero(1);
    for (const auto& sys : p.systems) {
        SystemMultipliers m;
        m.kind = sys.kind;
        m.constraint = Vector::Zero(static_cast<Eigen::Index>(s.model.constraints().size()));
        zero.systems.push_back(m);
    }
    const VerificationReport r = verify_certificate(p, zero);
    CHECK(r.passed);
    CHECK(r.eig_max == 0.0);
    CHECK(r.lin_res == 0.0);
    CHECK(r.const_slack == 0.0);

    const Certificate solved = solve_certificate(p);
    CHECK(certified(solved));
}

TEST_CASE("gradient descent certificates") {
    for (double gamma : {0.5, 1.0, 1.5}) {
        CAPTURE(gamma);
        GdConfig cfg;
        cfg.gamma = gamma;
        const Scenario s = gd_scenario(cfg);
        const CertificateProblem p = assemble(s.model, s.outcomes, s.spec);
        const Certificate c = solve_certificate(p);
        REQUIRE(certified(c));
        CHECK(min_eig(c.Q) >= -1e-8);
        CHECK(c.q.minCoeff() >= -1e-10);
    }
    GdConfig bad;
    bad.gamma = 2.5;
    const Scenario s = gd_scenario(bad);
    const Certificate c = solve_certificate(assemble(s.model, s.outcomes, s.spec));
    CHECK_FALSE(certified(c));
    CHECK(c.status == conic::Status::PrimalInfeasible);
}

TEST_CASE("off-support perturbation of Q fails verification") {
    const Scenario s = gd_scenario(GdConfig{});
    const CertificateProblem p = assemble(s.model, s.outcomes, s.spec);
    Certificate c = solve_certificate(p);
    REQUIRE(certified(c));
    REQUIRE(s.spec.support.count(2) == 0);
    c.Q(2, 2) += 1e-3;
    const VerificationReport r = verify_certificate(p, c);
    CHECK_FALSE(r.passed);
    CHECK_FALSE(r.failure.empty());
}

TEST_CASE("min-max value") {
    SUBCASE("zero decrease has value zero") {
        GdConfig cfg;
        cfg.with_decrease = false;
        const Scenario s = gd_scenario(cfg);
        const Certificate c = solve_certificate(assemble_minmax_value(s.model, s.outcomes, s.spec, MinMaxNormalization{}));
        REQUIRE(certified(c));
        CHECK(std::abs(c.objective) <= 1e-6);
    }
    SUBCASE("agrees in sign with the descent mode") {
        for (double gamma : {0.5, 1.0, 1.9}) {
            CAPTURE(gamma);
            GdConfig cfg;
            cfg.gamma = gamma;
            const Scenario s = gd_scenario(cfg);
            const Certificate c =
                solve_certificate(assemble_minmax_value(s.model, s.outcomes, s.spec, MinMaxNormalization{}));
            REQUIRE(certified(c));
            CHECK(c.objective <= 1e-6);
        }
        GdConfig cfg;
        cfg.gamma = 2.5;
        const Scenario s = gd_scenario(cfg);
        const Certificate c = solve_certificate(assemble_minmax_value(s.model, s.outcomes, s.spec, MinMaxNormalization{}));
        REQUIRE(certified(c));
        CHECK(c.objective >= 0.1);
    }
    SUBCASE("normalization is required") {
        const Scenario s = gd_scenario(GdConfig{});
        CHECK_THROWS(assemble_minmax_value(s.model, s.outcomes, s.spec, std::nullopt));
    }
}

TEST_CASE("rate bisection on an exact contraction") {
    const Contraction c = contraction();
    const RateSearch r = bisect_rate(c.model, c.outcomes, c.spec, 1e-3, 1.0, 1e-4);
    REQUIRE(r.certificate.has_value());
    CHECK(r.monotone);
    CHECK(std::abs(r.rho - 0.25) <= 2e-4);
}

TEST_CASE("rate bisection without any rate") {
    const Contraction c = contraction();
    // below the true rate at both ends
    const RateSearch r = bisect_rate(c.model, c.outcomes, c.spec, 0.01, 0.2, 1e-3);
    CHECK_FALSE(r.feasible_at_hi);
    CHECK_FALSE(r.certificate.has_value());
}

TEST_CASE("linear rate of gradient descent under strong convexity") {
    GdConfig cfg;
    cfg.mu = 0.5;
    cfg.mode = LyapunovMode::LinearRate;
    const Scenario s = gd_scenario(cfg);
    const RateSearch r = bisect_rate(s.model, s.outcomes, s.spec, 1e-3, 1.0, 1e-3);
    REQUIRE(r.certificate.has_value());
    CHECK(r.monotone);
    // contraction factor of the distance is max(|1 - mu|, |1 - L|)^2 = 1/4
    CHECK(r.rho <= 0.25 + 2e-3);
    CHECK(r.rho >= 0.25 - 2e-3);
}

TEST_CASE("spec validation") {
    const Scenario s = gd_scenario(GdConfig{});
    LyapunovSpec spec = s.spec;
    spec.support.insert(99);
    CHECK_THROWS_AS(assemble(s.model, s.outcomes, spec), ModelingError);
    spec = s.spec;
    spec.mode = LyapunovMode::LinearRate;
    spec.rho = 1.5;
    CHECK_THROWS_AS(assemble(s.model, s.outcomes, spec), ParameterError);
    PepModel open;
    open.new_leaf();
    CHECK_THROWS_AS(assemble(open, s.outcomes, LyapunovSpec{}), ModelingError);
}

TEST_CASE("coordinate descent rows") {
    SUBCASE("three blocks, minimal first coefficient") {
        const RcdResult r = run_rcd(RcdConfig{3});
        REQUIRE(certified(r.certificate));
        CHECK(std::abs(r.q1 - 2.0) <= 0.05);
        CHECK(std::abs(r.q2 - 1.5) <= 0.05);
        CHECK(verify_certificate(r.problem, r.certificate, 1e-6).passed);
    }
    SUBCASE("conjectured coefficients, eight blocks") {
        RcdConfig cfg{8};
        cfg.check_conjecture = true;
        const RcdResult r = run_rcd(cfg);
        REQUIRE(certified(r.certificate));
        CHECK(r.q1 == 7.0);
        CHECK(r.q2 == 4.0);
        CHECK(r.certificate.verification.eig_max <= 1e-6);
        CHECK(r.certificate.verification.lin_res <= 1e-6);
    }
}
