// SPDX-License-Identifier: Apache-2.0

#include "lyacert/runners.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "lyacert/parallel.hpp"
#include "lyacert/svg.hpp"

namespace lyacert {

namespace {

std::string num(Scalar v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

io::Json sample_json(const std::optional<SampleReport>& s) {
    return s ? io::to_json(*s) : io::Json(nullptr);
}

/// A verified certificate whose samples fail is a soundness bug, never a
/// feasible answer.
RunStatus with_sample(RunStatus status, const std::optional<SampleReport>& sample) {
    if (status == RunStatus::Feasible && sample && !sample->passed) return RunStatus::Inaccurate;
    return status;
}

bool soundness_violation(RunStatus status, const Certificate& cert, const std::optional<SampleReport>& sample) {
    return status == RunStatus::Inaccurate && certified(cert) && sample && !sample->passed;
}

}  // namespace

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Feasible: return "feasible";
        case RunStatus::Infeasible: return "infeasible";
        case RunStatus::Inaccurate: return "inaccurate";
    }
    return "?";
}

int exit_code(RunStatus status) {
    switch (status) {
        case RunStatus::Feasible: return 0;
        case RunStatus::Infeasible: return 1;
        case RunStatus::Inaccurate: return 2;
    }
    return 2;
}

RunStatus classify(const Certificate& cert) {
    if (certified(cert)) return RunStatus::Feasible;
    if (cert.status == conic::Status::PrimalInfeasible) return RunStatus::Infeasible;
    return RunStatus::Inaccurate;
}

// ------------------------------------------------------------------- GD

GdRun run_gd(const GdConfig& cfg, bool minmax, const RunOptions& opt) {
    GdRun run;
    run.config = cfg;
    run.minmax = minmax;
    run.scenario = gd_scenario(cfg);
    const Scenario& s = run.scenario;
    run.problem = minmax ? assemble_minmax_value(s.model, s.outcomes, s.spec, MinMaxNormalization{})
                         : assemble(s.model, s.outcomes, s.spec);
    run.certificate = solve_certificate(run.problem, opt.solver, opt.verify_tol);
    run.status = classify(run.certificate);
    if (certified(run.certificate))
        run.sample = sample_check(*s.iteration, run.problem, run.certificate, opt.samples, opt.seed, opt.sample_tol);
    run.status = with_sample(run.status, run.sample);
    const bool no_certificate = minmax ? (certified(run.certificate) && run.certificate.objective > opt.verify_tol)
                                       : run.status == RunStatus::Infeasible;
    if (no_certificate) run.witness = divergence_witness(*s.iteration);
    return run;
}

io::Json to_json(const GdRun& run) {
    io::Json out;
    out["scenario"] = "gd";
    out["gamma"] = run.config.gamma;
    out["L"] = run.config.L;
    out["mu"] = run.config.mu;
    out["result"] = to_string(run.status);
    out["certificate"] = io::to_json(run.problem, run.certificate, run.scenario.nonneg_names);
    out["verification"] = out["certificate"]["verification"];
    out["verification"]["sample"] = sample_json(run.sample);
    if (soundness_violation(run.status, run.certificate, run.sample)) out["soundness_violation"] = true;
    if (run.witness) {
        out["divergence_witness"] = {{"params", run.witness->params},
                                     {"growth", run.witness->growth},
                                     {"steps", run.witness->distances.size() - 1}};
    }
    return out;
}

std::string to_csv(const GdRun& run) {
    std::ostringstream os;
    os << "gamma,L,mode,result,objective,eig_max,lin_res,const_slack,sample_worst,witness_growth\n";
    os << num(run.config.gamma) << ',' << num(run.config.L) << ',' << to_string(run.problem.spec.mode) << ','
       << to_string(run.status) << ',' << num(run.certificate.objective) << ','
       << num(run.certificate.verification.eig_max) << ',' << num(run.certificate.verification.lin_res) << ','
       << num(run.certificate.verification.const_slack) << ',' << (run.sample ? num(run.sample->worst) : "") << ','
       << (run.witness ? num(run.witness->growth) : "") << '\n';
    return os.str();
}

// ------------------------------------------------------------------ RCD

std::vector<RcdRun> run_rcd_rows(const std::vector<RcdConfig>& configs, const RunOptions& opt) {
    for (const auto& c : configs)
        if (c.d < 2) throw ParameterError("coordinate descent needs d >= 2");
    return parallel_map(configs.size(), [&](std::size_t i) {
        RcdRun run;
        run.config = configs[i];
        run.result = run_rcd(configs[i], opt.solver);
        run.status = classify(run.result.certificate);
        if (certified(run.result.certificate)) {
            const Scenario s = rcd_scenario(configs[i]);
            run.sample = sample_check(*s.iteration, run.result.problem, run.result.certificate, opt.samples, opt.seed,
                                      opt.sample_tol);
        }
        run.status = with_sample(run.status, run.sample);
        return run;
    });
}

io::Json to_json(const std::vector<RcdRun>& rows) {
    io::Json out;
    out["scenario"] = "rcd";
    io::Json jr = io::Json::array();
    for (const auto& r : rows) {
        io::Json row;
        row["d"] = r.config.d;
        row["check_conjecture"] = r.config.check_conjecture;
        row["result"] = to_string(r.status);
        row["q1"] = r.result.q1;
        row["q2"] = r.result.q2;
        row["certificate"] = io::to_json(r.result.problem, r.result.certificate, {"f(x0)-f*", "||x0-x*||_L^2"});
        row["verification"] = row["certificate"]["verification"];
        row["verification"]["sample"] = sample_json(r.sample);
        if (soundness_violation(r.status, r.result.certificate, r.sample)) row["soundness_violation"] = true;
        jr.push_back(std::move(row));
    }
    out["rows"] = std::move(jr);
    return out;
}

std::string to_csv(const std::vector<RcdRun>& rows) {
    std::ostringstream os;
    os << "d,mode,result,q1,q2,eig_max,sample_worst\n";
    for (const auto& r : rows) {
        os << r.config.d << ',' << (r.config.check_conjecture ? "conjecture" : "search") << ',' << to_string(r.status)
           << ',' << num(r.result.q1) << ',' << num(r.result.q2) << ','
           << num(r.result.certificate.verification.eig_max) << ',' << (r.sample ? num(r.sample->worst) : "") << '\n';
    }
    return os.str();
}

// ----------------------------------------------------------------- PDHG

std::vector<Scalar> PdhgGrid::gammas() const {
    std::vector<Scalar> out;
    if (steps == 1) return {gamma_min};
    for (std::size_t i = 0; i < steps; ++i)
        out.push_back(gamma_min + (gamma_max - gamma_min) * static_cast<Scalar>(i) / static_cast<Scalar>(steps - 1));
    return out;
}

void PdhgGrid::validate() const {
    if (steps == 0) throw ParameterError("grid needs at least one point");
    if (!(gamma_min > 0.0) || !(gamma_max >= gamma_min) || !(gamma_max < 4.0 / 3.0))
        throw ParameterError("step grid must satisfy 0 < gamma_min <= gamma_max < 4/3");
    if (etas.empty()) throw ParameterError("need at least one error bound constant");
    for (Scalar e : etas)
        if (!(e > 0.0)) throw ParameterError("error bound constant must be > 0");
    if (!(beta > 0.0)) throw ParameterError("beta must be > 0");
    if (!(rho_lo > 0.0 && rho_lo < 1.0) || !(rho_tol > 0.0)) throw ParameterError("bad rate bisection settings");
}

std::vector<PdhgPoint> run_pdhg_grid(const PdhgGrid& grid, const RunOptions& opt) {
    grid.validate();
    const std::vector<Scalar> gammas = grid.gammas();
    const std::size_t n = gammas.size() * grid.etas.size();
    return parallel_map(n, [&](std::size_t i) {
        PdhgPoint pt;
        pt.eta = grid.etas[i / gammas.size()];
        pt.gamma = gammas[i % gammas.size()];
        PdhgQebConfig cfg;
        cfg.gamma = pt.gamma;
        cfg.eta = pt.eta;
        cfg.beta = grid.beta;
        const Scenario s = pdhg_qeb_scenario(cfg);
        pt.search = bisect_rate(s.model, s.outcomes, s.spec, grid.rho_lo, 1.0, grid.rho_tol, opt.solver);
        if (pt.search.certificate) {
            LyapunovSpec spec = s.spec;
            spec.rho = pt.search.rho;
            const CertificateProblem problem = assemble(s.model, s.outcomes, spec);
            pt.sample = sample_check(*s.iteration, problem, *pt.search.certificate, opt.samples, opt.seed, opt.sample_tol);
            pt.status = with_sample(RunStatus::Feasible, pt.sample);
        } else {
            const bool infeasible = !pt.search.trace.empty() &&
                                    pt.search.trace.front().status == conic::Status::PrimalInfeasible;
            pt.status = infeasible ? RunStatus::Infeasible : RunStatus::Inaccurate;
        }
        return pt;
    });
}

io::Json to_json(const std::vector<PdhgPoint>& points) {
    io::Json out;
    out["scenario"] = "pdhg_qeb";
    io::Json jp = io::Json::array();
    for (const auto& p : points) {
        io::Json row;
        row["eta"] = p.eta;
        row["gamma"] = p.gamma;
        row["result"] = to_string(p.status);
        row["rho"] = p.search.certificate ? io::Json(p.search.rho) : io::Json(nullptr);
        row["monotone"] = p.search.monotone;
        io::Json probes = io::Json::array();
        for (const auto& pr : p.search.trace)
            probes.push_back({{"rho", pr.rho}, {"feasible", pr.feasible}, {"status", conic::to_string(pr.status)}});
        row["probes"] = std::move(probes);
        if (p.search.certificate) row["verification"] = io::to_json(p.search.certificate->verification);
        row["sample"] = sample_json(p.sample);
        jp.push_back(std::move(row));
    }
    out["points"] = std::move(jp);
    return out;
}

std::string to_csv(const std::vector<PdhgPoint>& points) {
    std::ostringstream os;
    os << "eta,gamma,result,rho,one_minus_rho,sample_worst\n";
    for (const auto& p : points) {
        os << num(p.eta) << ',' << num(p.gamma) << ',' << to_string(p.status) << ',';
        if (p.search.certificate) os << num(p.search.rho) << ',' << num(1.0 - p.search.rho);
        else os << ',';
        os << ',' << (p.sample ? num(p.sample->worst) : "") << '\n';
    }
    return os.str();
}

std::string pdhg_svg(const std::vector<PdhgPoint>& points) {
    std::vector<svg::Series> series;
    std::map<Scalar, std::size_t> index;
    for (const auto& p : points) {
        auto [it, inserted] = index.try_emplace(p.eta, series.size());
        if (inserted) series.push_back(svg::Series{"eta = " + num(p.eta), {}, {}});
        if (p.status != RunStatus::Feasible) continue;
        series[it->second].x.push_back(p.gamma);
        series[it->second].y.push_back(1.0 - p.search.rho);
    }
    svg::PlotOptions o;
    o.title = "PDHG rate under the smoothed-gap error bound";
    o.x_label = "gamma = sigma tau ||M||^2";
    o.y_label = "1 - rho";
    return svg::log_plot(series, o);
}

// -------------------------------------------------------------- generic

GenericRun run_generic(const io::Document& doc, const RunOptions& opt) {
    GenericRun run;
    if (const auto* prog = std::get_if<conic::ConicProgram>(&doc)) {
        const conic::SolveReport rep = conic::solve(*prog, opt.solver);
        run.status = rep.status == conic::Status::Optimal ? RunStatus::Feasible
                     : rep.status == conic::Status::PrimalInfeasible || rep.status == conic::Status::DualInfeasible
                         ? RunStatus::Infeasible
                         : RunStatus::Inaccurate;
        run.output = io::to_json(rep);
        run.output["result"] = to_string(run.status);
        run.csv = "status,primal_objective,dual_objective,primal_res,dual_res,gap\n" + conic::to_string(rep.status) +
                  ',' + num(rep.primal_objective) + ',' + num(rep.dual_objective) + ',' + num(rep.residuals.primal) +
                  ',' + num(rep.residuals.dual) + ',' + num(rep.residuals.gap) + '\n';
        return run;
    }
    const auto& d = std::get<io::LyapunovDocument>(doc);
    const CertificateProblem problem =
        d.spec.mode == LyapunovMode::MinMaxValue
            ? assemble_minmax_value(d.model, d.outcomes, d.spec,
                                    d.spec.normalization ? d.spec.normalization : MinMaxNormalization{})
            : assemble(d.model, d.outcomes, d.spec);
    const Certificate cert = solve_certificate(problem, opt.solver, opt.verify_tol);
    run.status = classify(cert);
    run.output["result"] = to_string(run.status);
    run.output["certificate"] = io::to_json(problem, cert, d.nonneg_names);
    std::ostringstream os;
    os << "result,mode,objective,eig_max,lin_res,const_slack";
    for (const auto& n : d.nonneg_names) os << ",q[" << n << ']';
    os << '\n'
       << to_string(run.status) << ',' << to_string(d.spec.mode) << ',' << num(cert.objective) << ','
       << num(cert.verification.eig_max) << ',' << num(cert.verification.lin_res) << ','
       << num(cert.verification.const_slack);
    for (Eigen::Index k = 0; k < cert.q.size(); ++k) os << ',' << num(cert.q(k));
    os << '\n';
    run.csv = os.str();
    return run;
}

}  // namespace lyacert
