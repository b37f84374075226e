// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "lyacert/scenarios.hpp"
#include "lyacert/verification.hpp"

using namespace lyacert;

namespace {

struct Solved {
    Scenario scenario;
    CertificateProblem problem;
    Certificate certificate;
};

Solved solve_gd(double gamma) {
    GdConfig cfg;
    cfg.gamma = gamma;
    Solved s{gd_scenario(cfg), {}, {}};
    s.problem = assemble(s.scenario.model, s.scenario.outcomes, s.scenario.spec);
    s.certificate = solve_certificate(s.problem);
    return s;
}

Solved solve_rcd_conjecture(std::size_t d) {
    RcdConfig cfg{d};
    cfg.check_conjecture = true;
    const RcdResult r = run_rcd(cfg);
    return Solved{rcd_scenario(cfg), r.problem, r.certificate};
}

}  // namespace

TEST_CASE("gradient descent certificate survives sampling") {
    const Solved s = solve_gd(1.0);
    REQUIRE(certified(s.certificate));
    const SampleReport r = sample_check(*s.scenario.iteration, s.problem, s.certificate, 1000, 1);
    CHECK(r.passed);
    CHECK(r.worst <= 1e-7);
    CHECK(r.samples == 1000);
}

TEST_CASE("conjectured coordinate descent inequality on samples") {
    const Solved s = solve_rcd_conjecture(2);
    REQUIRE(certified(s.certificate));
    const SampleReport r = sample_check(*s.scenario.iteration, s.problem, s.certificate, 1000, 1);
    CHECK(r.passed);

    SUBCASE("flipping the distance coefficient is caught") {
        Certificate wrong = s.certificate;
        REQUIRE(wrong.q.size() == 2);
        wrong.q(1) = -wrong.q(1);
        const SampleReport w = sample_check(*s.scenario.iteration, s.problem, wrong, 1000, 1);
        CHECK_FALSE(w.passed);
        CHECK(w.worst > 1e-7);
        CHECK_FALSE(verify_certificate(s.problem, wrong).passed);
    }
}

TEST_CASE("sampling is reproducible") {
    const Solved s = solve_gd(1.5);
    REQUIRE(certified(s.certificate));
    const SampleReport a = sample_check(*s.scenario.iteration, s.problem, s.certificate, 200, 42);
    const SampleReport b = sample_check(*s.scenario.iteration, s.problem, s.certificate, 200, 42);
    const SampleReport c = sample_check(*s.scenario.iteration, s.problem, s.certificate, 200, 43);
    CHECK(a.worst == b.worst);
    CHECK(a.seed == 42);
    CHECK(a.worst != c.worst);
}

TEST_CASE("divergence witnesses") {
    SUBCASE("too long a gradient step diverges on a quadratic") {
        const Scenario s = gd_scenario(GdConfig{2.5});
        const auto w = divergence_witness(*s.iteration);
        REQUIRE(w.has_value());
        CHECK(w->params.at(0) == 1.0);
        // |1 - 2.5| = 1.5 per step
        CHECK(w->distances.at(1) / w->distances.at(0) == doctest::Approx(1.5));
        CHECK(w->growth >= 1e3);
    }
    SUBCASE("a unit step does not") {
        const Scenario s = gd_scenario(GdConfig{1.0});
        CHECK_FALSE(divergence_witness(*s.iteration).has_value());
    }
    SUBCASE("primal-dual beyond the step frontier") {
        PdhgQebConfig cfg;
        cfg.gamma = 2.0;
        const Scenario s = pdhg_qeb_scenario(cfg);
        const auto w = divergence_witness(*s.iteration);
        REQUIRE(w.has_value());
        CHECK(w->growth >= 1e3);
    }
    SUBCASE("primal-dual inside the frontier") {
        PdhgQebConfig cfg;
        cfg.gamma = 0.5;
        const Scenario s = pdhg_qeb_scenario(cfg);
        CHECK_FALSE(divergence_witness(*s.iteration).has_value());
    }
}

TEST_CASE("verification never throws on malformed certificates") {
    const Solved s = solve_gd(1.0);
    Certificate c = s.certificate;
    c.Q = Matrix::Zero(1, 1);
    VerificationReport r;
    CHECK_NOTHROW(r = verify_certificate(s.problem, c));
    CHECK_FALSE(r.passed);
    c = s.certificate;
    c.systems.clear();
    CHECK_NOTHROW(r = verify_certificate(s.problem, c));
    CHECK_FALSE(r.passed);
}
