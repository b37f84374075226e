// SPDX-License-Identifier: Apache-2.0
//
// End-to-end pipelines behind the command-line tool: build a scenario,
// assemble, solve, verify, sample, and format the result. Every function
// here is deterministic for fixed inputs and seed.

#ifndef LYACERT_RUNNERS_HPP
#define LYACERT_RUNNERS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lyacert/io_json.hpp"
#include "lyacert/scenarios.hpp"

namespace lyacert {

struct RunOptions {
    /// Tolerance of verify_certificate.
    Scalar verify_tol = 1e-6;
    /// Tolerance of the relative sample slack.
    Scalar sample_tol = 1e-7;
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
    conic::SolveOptions solver;
};

enum class RunStatus { Feasible, Infeasible, Inaccurate };

std::string to_string(RunStatus status);
/// 0 feasible, 1 infeasible, 2 inaccurate.
int exit_code(RunStatus status);

/// Feasible only for a verified certificate, Infeasible only on a solver
/// infeasibility certificate of the assembled program.
RunStatus classify(const Certificate& cert);

// ------------------------------------------------------------------- GD

struct GdRun {
    GdConfig config;
    bool minmax = false;
    RunStatus status = RunStatus::Inaccurate;
    Scenario scenario;
    CertificateProblem problem;
    Certificate certificate;
    std::optional<SampleReport> sample;
    /// Searched when no certificate exists.
    std::optional<DivergenceWitness> witness;
};

/// Descent or LinearRate per cfg.mode; MinMaxValue with the default
/// normalization when `minmax` is set.
GdRun run_gd(const GdConfig& cfg, bool minmax, const RunOptions& options);
io::Json to_json(const GdRun& run);
std::string to_csv(const GdRun& run);

// ------------------------------------------------------------------ RCD

struct RcdRun {
    RcdConfig config;
    RunStatus status = RunStatus::Inaccurate;
    RcdResult result;
    std::optional<SampleReport> sample;
};

/// One row per configuration, computed in parallel, returned in input order.
std::vector<RcdRun> run_rcd_rows(const std::vector<RcdConfig>& configs, const RunOptions& options);
io::Json to_json(const std::vector<RcdRun>& rows);
std::string to_csv(const std::vector<RcdRun>& rows);

// ----------------------------------------------------------------- PDHG

struct PdhgGrid {
    Scalar gamma_min = 0.05;
    Scalar gamma_max = 1.3;
    std::size_t steps = 20;
    std::vector<Scalar> etas{0.1};
    Scalar beta = 1.0;
    Scalar rho_lo = 1e-3;
    Scalar rho_tol = 1e-3;

    /// Evenly spaced, both ends included (a single point when steps == 1).
    std::vector<Scalar> gammas() const;
    /// Throws ParameterError.
    void validate() const;
};

struct PdhgPoint {
    Scalar gamma = 0.0;
    Scalar eta = 0.0;
    RunStatus status = RunStatus::Inaccurate;
    RateSearch search;
    std::optional<SampleReport> sample;
};

/// Grid points in eta-major order.
std::vector<PdhgPoint> run_pdhg_grid(const PdhgGrid& grid, const RunOptions& options);
io::Json to_json(const std::vector<PdhgPoint>& points);
std::string to_csv(const std::vector<PdhgPoint>& points);
/// 1 - rho against gamma, one curve per eta; infeasible points are skipped.
std::string pdhg_svg(const std::vector<PdhgPoint>& points);

// -------------------------------------------------------------- generic

struct GenericRun {
    RunStatus status = RunStatus::Inaccurate;
    io::Json output;
    /// One-line summary for the csv format.
    std::string csv;
};

/// Full pipeline on a parsed document. Conic programs are solved directly;
/// Lyapunov documents are assembled, solved and verified (no sampling: a
/// user model has no explicit iteration).
GenericRun run_generic(const io::Document& doc, const RunOptions& options);

}  // namespace lyacert

#endif  // LYACERT_RUNNERS_HPP
