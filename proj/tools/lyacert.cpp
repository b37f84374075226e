// SPDX-License-Identifier: Apache-2.0
//
// lyacert: Lyapunov certificates for first-order methods.
// Exit codes: 0 feasible, 1 infeasible, 2 inaccurate, 64 usage or schema.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "lyacert/runners.hpp"

namespace {

constexpr int kUsage = 64;

struct Common {
    double tol = 1e-6;
    std::uint64_t seed = 1;
    std::size_t samples = 1000;
    int max_iter = 100;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--tol", c.tol, "Verification tolerance on eigenvalues and residuals")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--seed", c.seed, "Seed of the sampled instances")->capture_default_str();
    app->add_option("--samples", c.samples, "Number of sampled instances")->capture_default_str();
    app->add_option("--max-iter", c.max_iter, "Interior-point iteration cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--out", c.out, "Write the result here instead of stdout");
    app->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

lyacert::RunOptions run_options(const Common& c) {
    lyacert::RunOptions o;
    o.verify_tol = c.tol;
    o.samples = c.samples;
    o.seed = c.seed;
    o.solver.max_iter = c.max_iter;
    return o;
}

void emit(const Common& c, const lyacert::io::Json& json, const std::string& csv) {
    const std::string text = c.format == "csv" ? csv : json.dump(2) + "\n";
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + c.out);
    f << text;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

int worst(int a, int b) { return std::max(a, b); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lyapunov certificates for first-order methods"};
    app.require_subcommand(1);

    // gd
    Common gd_c;
    double gamma = 1.0, L = 1.0, mu = 0.0;
    std::optional<double> rate;
    bool minmax = false, zero_decrease = false;
    std::string gd_export;
    auto* gd = app.add_subcommand("gd", "Gradient descent on smooth convex functions");
    gd->add_option("--gamma", gamma, "Step size")->check(CLI::PositiveNumber)->capture_default_str();
    gd->add_option("--L", L, "Smoothness constant")->check(CLI::PositiveNumber)->capture_default_str();
    gd->add_option("--mu", mu, "Strong convexity constant")->check(CLI::NonNegativeNumber)->capture_default_str();
    gd->add_option("--rate", rate, "Certify a linear rate rho in (0, 1]");
    gd->add_flag("--minmax", minmax, "Report the normalized min-max value instead");
    gd->add_flag("--no-decrease", zero_decrease, "Use R = 0 as the required decrease");
    gd->add_option("--export-model", gd_export, "Also write the assembled model as a solve document");
    add_common(gd, gd_c);

    // rcd
    Common rcd_c;
    std::vector<std::size_t> dims;
    std::vector<double> block_L;
    bool conjecture = false;
    std::string rcd_export;
    auto* rcd = app.add_subcommand("rcd", "Randomized block coordinate descent");
    rcd->add_option("--d", dims, "Number of blocks (repeatable)")->required()->check(CLI::Range(2, 1000));
    rcd->add_option("--L", block_L, "Block smoothness constants (default all 1)");
    rcd->add_flag("--check-conjecture", conjecture, "Fix the conjectured coefficients instead of searching");
    rcd->add_option("--export-model", rcd_export, "Also write the model of the first row as a solve document");
    add_common(rcd, rcd_c);

    // pdhg-qeb
    Common pd_c;
    lyacert::PdhgGrid grid;
    std::string plot;
    auto* pd = app.add_subcommand("pdhg-qeb", "PDHG under a quadratic error bound, rate against step size");
    pd->add_option("--gamma-min", grid.gamma_min, "Smallest gamma = sigma tau ||M||^2")->capture_default_str();
    pd->add_option("--gamma-max", grid.gamma_max, "Largest gamma, below 4/3")->capture_default_str();
    pd->add_option("--steps", grid.steps, "Grid points")->capture_default_str();
    pd->add_option("--eta", grid.etas, "Error bound constant (repeatable)")->capture_default_str();
    pd->add_option("--beta", grid.beta, "Smoothing parameter of the gap")->capture_default_str();
    pd->add_option("--rho-tol", grid.rho_tol, "Rate bisection resolution")->capture_default_str();
    pd->add_option("--plot", plot, "Write 1 - rho against gamma as SVG");
    add_common(pd, pd_c);

    // solve
    Common solve_c;
    std::string file;
    auto* solve = app.add_subcommand("solve", "Solve a conic program or a Lyapunov model from JSON");
    solve->add_option("FILE", file, "Input document")->required();
    add_common(solve, solve_c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        if (*gd) {
            lyacert::GdConfig cfg;
            cfg.gamma = gamma;
            cfg.L = L;
            cfg.mu = mu;
            cfg.with_decrease = !zero_decrease;
            if (rate) {
                if (!(*rate > 0.0 && *rate <= 1.0)) throw lyacert::ParameterError("--rate must lie in (0, 1]");
                cfg.mode = lyacert::LyapunovMode::LinearRate;
                cfg.rho = *rate;
            }
            const lyacert::GdRun run = lyacert::run_gd(cfg, minmax, run_options(gd_c));
            if (!gd_export.empty()) {
                const auto& s = run.scenario;
                lyacert::LyapunovSpec spec = s.spec;
                if (minmax) {
                    spec.mode = lyacert::LyapunovMode::MinMaxValue;
                    spec.normalization = run.problem.spec.normalization;
                }
                write_file(gd_export,
                           lyacert::io::lyapunov_document(s.model, s.outcomes, spec, s.nonneg_names).dump(2) + "\n");
            }
            emit(gd_c, lyacert::to_json(run), lyacert::to_csv(run));
            return lyacert::exit_code(run.status);
        }
        if (*rcd) {
            std::vector<lyacert::RcdConfig> configs;
            for (std::size_t d : dims) {
                lyacert::RcdConfig cfg;
                cfg.d = d;
                cfg.check_conjecture = conjecture;
                if (!block_L.empty()) {
                    if (block_L.size() != d) throw lyacert::ParameterError("--L needs one value per block");
                    cfg.L = block_L;
                }
                configs.push_back(cfg);
            }
            const auto rows = lyacert::run_rcd_rows(configs, run_options(rcd_c));
            if (!rcd_export.empty()) {
                const auto& p = rows.front().result.problem;
                write_file(rcd_export,
                           lyacert::io::lyapunov_document(p.model, p.outcomes, p.spec,
                                                          lyacert::rcd_scenario(configs.front()).nonneg_names)
                                   .dump(2) +
                               "\n");
            }
            emit(rcd_c, lyacert::to_json(rows), lyacert::to_csv(rows));
            int rc = 0;
            for (const auto& r : rows) rc = worst(rc, lyacert::exit_code(r.status));
            return rc;
        }
        if (*pd) {
            const auto points = lyacert::run_pdhg_grid(grid, run_options(pd_c));
            if (!plot.empty()) write_file(plot, lyacert::pdhg_svg(points));
            emit(pd_c, lyacert::to_json(points), lyacert::to_csv(points));
            // Infeasible grid points are data, not failures.
            int rc = 0;
            for (const auto& p : points)
                if (p.status == lyacert::RunStatus::Inaccurate) rc = 2;
            return rc;
        }
        const auto doc = lyacert::io::parse_document(read_file(file));
        const lyacert::GenericRun run = lyacert::run_generic(doc, run_options(solve_c));
        emit(solve_c, run.output, run.csv);
        return lyacert::exit_code(run.status);
    } catch (const lyacert::io::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kUsage;
    } catch (const lyacert::ParameterError& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return kUsage;
    } catch (const lyacert::ModelingError& e) {
        std::cerr << "invalid model: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
}
