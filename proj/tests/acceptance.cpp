// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks, one line per criterion. Exit status is nonzero when a
// gating criterion fails. Criterion 5 is reported but does not gate.

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lyacert/algorithm_model.hpp"
#include "lyacert/problem_classes.hpp"
#include "lyacert/runners.hpp"
#include "random_programs.hpp"

using namespace lyacert;

namespace {

struct Line {
    int id;
    bool gating;
    bool pass;
    std::string detail;
};

std::string fmt(double v, const char* f = "%.4g") {
    char b[48];
    std::snprintf(b, sizeof b, f, v);
    return b;
}

/// Every emitted certificate lands here for criterion 8.
struct Soundness {
    int certificates = 0;
    std::vector<std::string> failures;

    void record(const std::string& what, const Certificate& cert, const std::optional<SampleReport>& sample) {
        if (!certified(cert)) return;
        ++certificates;
        if (!cert.verification.passed) failures.push_back(what + ": verification");
        if (!sample || sample->samples != 1000) failures.push_back(what + ": not sampled");
        else if (!sample->passed) failures.push_back(what + ": sample slack " + fmt(sample->worst));
    }
};

RunOptions options() {
    RunOptions o;
    o.samples = 1000;
    o.seed = 1;
    o.verify_tol = 1e-6;
    o.sample_tol = 1e-7;
    return o;
}

// 1 -------------------------------------------------------------------------
Line table_one(Soundness& snd) {
    const std::map<std::size_t, std::pair<double, double>> expected{
        {2, {1.000, 0.999}}, {3, {1.997, 1.499}}, {4, {3.000, 2.000}},
        {5, {3.999, 2.499}}, {8, {7.005, 4.002}}, {10, {8.997, 4.999}}};
    std::vector<RcdConfig> cfgs;
    for (const auto& [d, q] : expected) cfgs.push_back(RcdConfig{d});
    const auto rows = run_rcd_rows(cfgs, options());
    bool ok = true;
    std::ostringstream os;
    for (const auto& r : rows) {
        const auto [e1, e2] = expected.at(r.config.d);
        const bool row_ok = r.status == RunStatus::Feasible && std::abs(r.result.q1 - e1) <= 0.05 &&
                            std::abs(r.result.q2 - e2) <= 0.05;
        ok = ok && row_ok;
        os << " d=" << r.config.d << ":(" << fmt(r.result.q1, "%.3f") << "," << fmt(r.result.q2, "%.3f") << ")"
           << (row_ok ? "" : "!");
        snd.record("rcd d=" + std::to_string(r.config.d), r.result.certificate, r.sample);
    }
    return {1, true, ok, "coordinate descent rows within 0.05:" + os.str()};
}

// 2 -------------------------------------------------------------------------
Line conjecture(Soundness& snd) {
    std::vector<RcdConfig> cfgs;
    for (std::size_t d = 2; d <= 10; ++d) {
        RcdConfig c{d};
        c.check_conjecture = true;
        cfgs.push_back(c);
    }
    const auto rows = run_rcd_rows(cfgs, options());
    bool ok = true;
    double worst_res = 0.0, worst_slack = -1e300;
    std::string bad;
    for (const auto& r : rows) {
        const auto& v = r.result.certificate.verification;
        const double res = std::max({v.eig_max, v.lin_res, v.const_slack, v.sign_violation});
        worst_res = std::max(worst_res, res);
        if (r.sample) worst_slack = std::max(worst_slack, r.sample->worst);
        const bool row_ok = r.status == RunStatus::Feasible && res <= 1e-6 && r.sample && r.sample->worst <= 1e-7 &&
                            r.result.q1 == double(r.config.d - 1) && r.result.q2 == 0.5 * double(r.config.d);
        if (!row_ok) bad += " d=" + std::to_string(r.config.d);
        ok = ok && row_ok;
        snd.record("conjecture d=" + std::to_string(r.config.d), r.result.certificate, r.sample);
    }
    return {2, true, ok,
            "conjecture d=2..10 feasible, max residual " + fmt(worst_res) + ", max sample slack " + fmt(worst_slack) +
                (bad.empty() ? "" : ", failing" + bad)};
}

// 3 -------------------------------------------------------------------------
Line gradient_descent(Soundness& snd) {
    bool ok = true;
    std::ostringstream os;
    for (double g : {0.5, 1.0, 1.5}) {
        const GdRun r = run_gd(GdConfig{g}, false, options());
        ok = ok && r.status == RunStatus::Feasible;
        os << " gamma=" << g << ":" << to_string(r.status);
        snd.record("gd gamma=" + fmt(g), r.certificate, r.sample);
    }
    const GdRun r = run_gd(GdConfig{2.5}, false, options());
    const bool witness = r.witness && r.witness->distances.size() > 1 &&
                         std::abs(r.witness->distances[1] / r.witness->distances[0] - 1.5) <= 1e-12;
    ok = ok && r.status == RunStatus::Infeasible && witness;
    os << " gamma=2.5:" << to_string(r.status) << (witness ? " (witness |1-gamma L|=1.5)" : " (no witness)");
    return {3, true, ok, "gradient descent L=1:" + os.str()};
}

// 4 -------------------------------------------------------------------------
Line sigma_example() {
    const double gamma = 0.625;  // dyadic, so every product below is exact
    PepModel m;
    const PointExpr x = m.new_leaf();
    FunctionHandle f = declare_function(m, SmoothConvex{1.0});
    const Triple t0 = f.oracle(x);
    const Triple ts = f.register_stationary(PointExpr{});
    const PointExpr x1 = combine({x, t0.grad}, {1.0, -gamma});
    const Triple t1 = f.oracle(x1);
    m.freeze();
    IterationMap map;
    map.map_point(x, x1);
    map.map_point(t0.grad, t1.grad);
    map.map_value(t0.value, t1.value);
    map.map_value(ts.value, ts.value);
    const TransitionPair t = build_sigma(m, map);

    Matrix expected(3, 3);
    expected << 1, 0, 0, -gamma, 0, 0, 0, 1, 0;
    bool ok = t.sigma == expected;

    // Gram of integer vectors: all arithmetic stays exact
    Matrix V(3, 3);
    V << 1, -2, 3, 4, 0, -1, 2, 5, 1;
    const Matrix G = V.transpose() * V;
    const Matrix P = t.sigma.transpose() * G * t.sigma;
    const Vector xp = V.col(0) - gamma * V.col(1);
    Matrix displayed = Matrix::Zero(3, 3);
    displayed(0, 0) = xp.dot(xp);
    displayed(0, 1) = displayed(1, 0) = xp.dot(V.col(2));
    displayed(1, 1) = V.col(2).dot(V.col(2));
    ok = ok && P == displayed;
    return {4, true, ok, std::string("Sigma = [[1,0,0],[-g,0,0],[0,1,0]] exactly") +
                             (t.sigma == expected ? "" : " (mismatch)") +
                             (P == displayed ? ", post Gram pattern exact" : ", post Gram mismatch")};
}

// 5 -------------------------------------------------------------------------
Line pdhg(Soundness& snd) {
    PdhgGrid g;
    g.gamma_min = 0.05;
    g.gamma_max = 1.3;
    g.steps = 20;
    g.etas = {0.1};
    g.beta = 1.0;
    const auto pts = run_pdhg_grid(g, options());
    bool all_rate = true;
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        all_rate = all_rate && pts[i].status == RunStatus::Feasible && pts[i].search.rho < 1.0;
        if (pts[i].search.rho < pts[argmin].search.rho) argmin = i;
        if (pts[i].search.certificate)
            snd.record("pdhg gamma=" + fmt(pts[i].gamma), *pts[i].search.certificate, pts[i].sample);
    }
    const bool interior = argmin > 0 && argmin + 1 < pts.size();
    return {5, false, all_rate && interior,
            "PDHG eta=0.1 beta=1, 20 points: " + std::string(all_rate ? "all rho < 1" : "some rho = 1") +
                ", argmin gamma=" + fmt(pts[argmin].gamma) + " rho=" + fmt(pts[argmin].search.rho) +
                (interior ? " (interior)" : " (edge)")};
}

// 6 -------------------------------------------------------------------------
Line minmax(Soundness& snd) {
    bool ok = true;
    std::ostringstream os;
    double worst_feasible = -1e300;
    for (double g : {0.5, 1.0, 1.5, 1.9}) {
        const GdRun d = run_gd(GdConfig{g}, false, options());
        if (d.status != RunStatus::Feasible) continue;
        const GdRun m = run_gd(GdConfig{g}, true, options());
        ok = ok && certified(m.certificate) && m.certificate.objective <= 1e-6;
        worst_feasible = std::max(worst_feasible, m.certificate.objective);
        snd.record("gd minmax gamma=" + fmt(g), m.certificate, m.sample);
    }
    const GdRun bad = run_gd(GdConfig{2.5}, true, options());
    ok = ok && certified(bad.certificate) && bad.certificate.objective >= 0.1;
    snd.record("gd minmax gamma=2.5", bad.certificate, bad.sample);
    os << "min-max value <= " << fmt(worst_feasible) << " where descent holds, " << fmt(bad.certificate.objective)
       << " at gamma=2.5";
    return {6, true, ok, os.str()};
}

// 7 -------------------------------------------------------------------------
Line solver_battery() {
    testing::ProgramFactory factory(2024);
    int agree = 0;
    std::string first;
    for (int t = 0; t < 200; ++t) {
        const auto planted = factory.any();
        const auto rep = conic::solve(planted.program);
        const auto v = testing::oracle_check(planted, rep, 1e-5);
        if (v.agrees) ++agree;
        else if (first.empty()) first = " first disagreement #" + std::to_string(t) + ": " + v.detail;
    }
    return {7, true, agree == 200, "solver agrees with the dense oracle on " + std::to_string(agree) + "/200" + first};
}

}  // namespace

int main() {
    Soundness snd;
    std::vector<std::function<Line()>> checks{
        [&] { return table_one(snd); }, [&] { return conjecture(snd); }, [&] { return gradient_descent(snd); },
        [] { return sigma_example(); }, [&] { return pdhg(snd); },      [&] { return minmax(snd); },
        [] { return solver_battery(); }};
    bool gate = true;
    auto print = [&](const Line& l) {
        std::printf("%s criterion %d%s: %s\n", l.pass ? "PASS" : "FAIL", l.id, l.gating ? "" : " (non-gating)",
                    l.detail.c_str());
        std::fflush(stdout);
        if (l.gating && !l.pass) gate = false;
    };
    for (auto& c : checks) {
        try {
            print(c());
        } catch (const std::exception& e) {
            const int id = static_cast<int>(&c - checks.data()) + 1;
            print(Line{id, id != 5, false, std::string("exception: ") + e.what()});
        }
    }
    std::string detail = std::to_string(snd.certificates) + " certificates verified and sampled (1000, seed 1)";
    for (const auto& f : snd.failures) detail += "; " + f;
    print(Line{8, true, snd.failures.empty() && snd.certificates > 0, detail});
    return gate ? 0 : 1;
}
