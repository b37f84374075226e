// SPDX-License-Identifier: Apache-2.0
//
// Ready-made models of the experiments: gradient descent on smooth convex
// functions, randomized coordinate descent, and PDHG under a quadratic
// error bound of the smoothed gap. Each scenario bundles the frozen model,
// its outcome set, the Lyapunov template and an explicit iteration used
// for sampling.

#ifndef LYACERT_SCENARIOS_HPP
#define LYACERT_SCENARIOS_HPP

#include <memory>
#include <string>
#include <vector>

#include "lyacert/certificate.hpp"
#include "lyacert/verification.hpp"

namespace lyacert {

struct Scenario {
    std::string name;
    PepModel model;
    OutcomeSet outcomes;
    LyapunovSpec spec;
    /// Labels of the entries of spec.nonneg.
    std::vector<std::string> nonneg_names;
    std::shared_ptr<const ExplicitScenario> iteration;
};

struct GdConfig {
    Scalar gamma = 1.0;
    Scalar L = 1.0;
    /// Strong convexity; 0 selects the smooth convex class.
    Scalar mu = 0.0;
    LyapunovMode mode = LyapunovMode::Descent;
    Scalar rho = 1.0;
    /// R = f(x0) - f* when set, R = 0 otherwise.
    bool with_decrease = true;
};

/// Leaves x0, g0 = grad f(x0), g1 = grad f(x1) with x1 = x0 - gamma g0 and
/// x* = 0. Q lives on {x0, g0}; N = {f(x0) - f*}.
Scenario gd_scenario(const GdConfig& cfg);

struct RcdConfig {
    std::size_t d = 2;
    /// Block constants; empty means all ones.
    std::vector<Scalar> L;
    /// Fix (q1, q2) = (d - 1, d / 2) instead of minimizing q1.
    bool check_conjecture = false;
    /// Coordinates per block in the sampled instances.
    std::size_t sample_block_size = 2;
};

/// d equiprobable outcomes x1(i) = x0 - grad_i f(x0) / L_i. Each block is its
/// own subspace. V = q1 (f(x0) - f*) + q2 ||x0 - x*||_L^2, R = f(x0) - f*.
Scenario rcd_scenario(const RcdConfig& cfg);

struct RcdResult {
    std::size_t d = 0;
    bool feasible = false;
    Scalar q1 = 0.0, q2 = 0.0;
    CertificateProblem problem;
    Certificate certificate;
};

/// Table row for one d. Without check_conjecture, q1 is minimized first and
/// q2 is then minimized with q1 held at q1* + q1_slack, which picks a single
/// point on the face of optimal q1 values.
RcdResult run_rcd(const RcdConfig& cfg, const conic::SolveOptions& options = {}, Scalar q1_slack = 1e-3);

struct PdhgQebConfig {
    Scalar gamma = 0.5;
    Scalar eta = 0.1;
    Scalar beta = 1.0;
    std::size_t sample_dim = 3;
};

/// PDHG with ||M|| = 1 and tau = sigma = sqrt(gamma), solution z* = 0. The
/// smoothed gap at zbar1 = (x1, ybar1), centered at zbar1 with parameter
/// beta, is required to dominate eta ||zbar1 - z*||^2. V lives on
/// {x0, s_f(x0), M^T y0, M^T ybar1} and {y0, s_g(y0), M x0, s_g(ybar1)}.
/// LinearRate template with R = ||z0 - z*||^2.
Scenario pdhg_qeb_scenario(const PdhgQebConfig& cfg);

}  // namespace lyacert

#endif  // LYACERT_SCENARIOS_HPP
