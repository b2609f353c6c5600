// Command-line entry point. Every subcommand validates its parameters, runs
// one computation, and writes CSV/JSON outputs plus a manifest into the
// output directory. Exit codes: 0 success, 2 validation or runtime error
// (with a machine-readable error JSON on stderr).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mems/analyzer.hpp"
#include "mems/cylinder_solver.hpp"
#include "mems/io.hpp"
#include "mems/mode_dynamics.hpp"
#include "mems/phase_plane.hpp"
#include "mems/radial_solver.hpp"

using nlohmann::json;

namespace {

struct CommonOpts {
    std::string output_dir = ".";
    std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--output-dir,-o", opts.output_dir, "Directory for output files");
    cmd->add_option("--seed", opts.seed, "Seed for any sampled quantities (default 0)");
}

void ensure_dir(const std::string& dir) {
    std::filesystem::create_directories(dir);
}

std::vector<double> parse_csv_list(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        out.push_back(std::stod(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

// "lo:hi:n" log-spaced in (tau - 1).
std::vector<double> parse_tau_grid(const std::string& s) {
    const std::size_t c1 = s.find(':');
    const std::size_t c2 = s.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("tau grid must be lo:hi:n");
    const double lo = std::stod(s.substr(0, c1));
    const double hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
    const int n = std::stoi(s.substr(c2 + 1));
    if (!(lo > 1.0) || !(hi > lo) || n < 2)
        throw std::invalid_argument("tau grid needs 1 < lo < hi and n >= 2");
    std::vector<double> grid(n);
    const double a = std::log(lo - 1.0), b = std::log(hi - 1.0);
    for (int i = 0; i < n; ++i)
        grid[i] = 1.0 + std::exp(a + (b - a) * i / (n - 1));
    return grid;
}

mems::CylinderConfig cylinder_config_from_json(const json& j) {
    mems::CylinderConfig cfg;
    cfg.alpha = j.at("alpha").get<double>();
    cfg.lambda = j.at("lambda").get<double>();
    cfg.P = j.value("P", 0.0);
    cfg.t0 = j.value("t0", 0.0);
    cfg.T = j.value("T", 30.0);
    cfg.n_t = j.value("n_t", 256);
    cfg.K = j.value("K", 16);
    if (j.contains("boundary_t0"))
        cfg.boundary_t0 = j.at("boundary_t0").get<std::vector<double>>();
    else
        cfg.boundary_t0 = mems::constant_profile(cfg, cfg.m());
    if (j.contains("boundary_T"))
        cfg.boundary_T = j.at("boundary_T").get<std::vector<double>>();
    else
        cfg.boundary_T = mems::constant_profile(cfg, cfg.m());
    cfg.validate();
    return cfg;
}

json classification_to_json(const mems::Classification& c) {
    json out;
    out["alpha"] = c.alpha;
    out["P_positive"] = c.P_positive;
    out["A"] = c.A;
    out["regime"] = (c.regime == mems::Regime::IsotropicOnly) ? "IsotropicOnly" : "Anisotropic";
    out["N0"] = c.N0;
    out["modes"] = c.modes;
    out["endpoint_hit"] = c.endpoint_hit;
    return out;
}

void write_cylinder_outputs(const mems::CylinderField& field, const std::string& dir,
                            std::vector<std::string>& files) {
    {
        mems::CsvWriter csv(dir + "/field.csv", {"t", "k", "re_a_k", "im_a_k"});
        for (int i = 0; i < field.n_t(); ++i)
            for (int k = -field.config.K; k <= field.config.K; ++k) {
                const mems::cplx a = field.mode_coefficient(i, k);
                csv.raw_row({mems::fmt_double(field.t_grid[i]), std::to_string(k),
                             mems::fmt_double(a.real()), mems::fmt_double(a.imag())});
            }
        files.push_back("field.csv");
    }
    {
        const double eps = mems::lyapunov_epsilon(field);
        const double Kf = mems::calibrate_lyapunov_constant(field, eps);
        std::vector<std::string> header = {"t", "E", "H", "H_tilde"};
        const int k_max = std::min(6, field.config.K);
        for (int k = 0; k <= k_max; ++k) header.push_back("amp_k" + std::to_string(k));
        mems::CsvWriter csv(dir + "/diagnostics.csv", header);
        for (int i = 1; i + 1 < field.n_t(); ++i) {
            const mems::EnergyReport rep = mems::energy(field, i, eps, Kf);
            std::vector<double> row = {rep.t, rep.E, rep.H, rep.H_tilde};
            for (int k = 0; k <= k_max; ++k)
                row.push_back(std::abs(field.mode_coefficient(i, k)));
            csv.row(row);
        }
        files.push_back("diagnostics.csv");
    }
}

int fail_with(const std::string& subcommand, const std::exception& e) {
    json err;
    err["subcommand"] = subcommand;
    err["error"] = e.what();
    std::cerr << err.dump() << std::endl;
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MEMS membrane analysis: stationary profiles, pull-in thresholds, "
                 "and asymptotic decay of the touchdown singularity"};
    app.require_subcommand(1);

    // classify
    auto* classify = app.add_subcommand(
        "classify", "Singularity regime for given permittivity exponent alpha (> -2; "
                    "< 4 when pressure is positive)");
    double cl_alpha = 0.0;
    std::string cl_pressure = "zero";
    CommonOpts cl_opts;
    classify->add_option("--alpha", cl_alpha, "Permittivity exponent")->required();
    classify->add_option("--pressure", cl_pressure, "positive or zero")
        ->check(CLI::IsMember({"positive", "zero"}));
    add_common(classify, cl_opts);

    // period-curve
    auto* period = app.add_subcommand(
        "period-curve", "Half-period L(tau) on a log grid; strictly decreasing in tau");
    double pc_alpha = 0.0, pc_lambda = 1.0;
    std::string pc_grid = "1.01:100:64";
    CommonOpts pc_opts;
    period->add_option("--alpha", pc_alpha, "Permittivity exponent (> -2)")->required();
    period->add_option("--lambda", pc_lambda, "Voltage parameter (> 0)");
    period->add_option("--tau-grid", pc_grid, "lo:hi:n, 1 < lo < hi");
    add_common(period, pc_opts);

    // orbit
    auto* orbit_cmd = app.add_subcommand(
        "orbit", "Construct the 2*pi/j periodic stationary profile");
    double ob_alpha = 0.0, ob_lambda = 1.0;
    int ob_j = 1, ob_samples = 512;
    CommonOpts ob_opts;
    orbit_cmd->add_option("--alpha", ob_alpha, "Permittivity exponent (> -2)")->required();
    orbit_cmd->add_option("--lambda", ob_lambda, "Voltage parameter (> 0)");
    orbit_cmd->add_option("--j", ob_j, "Mode index, must satisfy sqrt(3)A < j < 2A")
        ->required();
    orbit_cmd->add_option("--samples", ob_samples, "Sample count, divisible by 2j");
    add_common(orbit_cmd, ob_opts);

    // radial-solve
    auto* radial = app.add_subcommand(
        "radial-solve", "Radially symmetric membrane profile on the unit N-ball "
                        "(alpha >= 0 here)");
    mems::ProblemSpec rs_spec;
    double rs_lambda = 0.5;
    CommonOpts rs_opts;
    radial->add_option("--alpha", rs_spec.alpha, "Permittivity exponent (>= 0)")->required();
    radial->add_option("--lambda", rs_lambda, "Voltage (>= 0)")->required();
    radial->add_option("--P", rs_spec.P, "External pressure (>= 0)");
    radial->add_option("--N", rs_spec.N, "Space dimension");
    radial->add_option("--grid", rs_spec.n_grid, "Grid intervals");
    add_common(radial, rs_opts);

    // pullin
    auto* pullin = app.add_subcommand(
        "pullin", "Bracket the pull-in threshold lambda* by continuation");
    mems::ProblemSpec pl_spec;
    CommonOpts pl_opts;
    pullin->add_option("--alpha", pl_spec.alpha, "Permittivity exponent (>= 0)")->required();
    pullin->add_option("--P", pl_spec.P, "External pressure (0 <= P < 2N)")->required();
    pullin->add_option("--N", pl_spec.N, "Space dimension");
    pullin->add_option("--grid", pl_spec.n_grid, "Grid intervals");
    add_common(pullin, pl_opts);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Pull-in threshold over a pressure grid");
    mems::ProblemSpec sw_spec;
    std::string sw_pgrid;
    CommonOpts sw_opts;
    sweep->add_option("--alpha", sw_spec.alpha, "Permittivity exponent (>= 0)")->required();
    sweep->add_option("--P-grid", sw_pgrid, "Comma-separated pressures")->required();
    sweep->add_option("--N", sw_spec.N, "Space dimension");
    sweep->add_option("--grid", sw_spec.n_grid, "Grid intervals");
    add_common(sweep, sw_opts);

    // cylinder
    auto* cylinder = app.add_subcommand(
        "cylinder", "Solve the transformed equation on a finite cylinder");
    std::string cy_config;
    CommonOpts cy_opts;
    cylinder->add_option("--config", cy_config, "JSON config file")->required();
    add_common(cylinder, cy_opts);

    // modes
    auto* modes = app.add_subcommand(
        "modes", "Bounded linear mode responses and the predicted decay rates");
    double md_alpha = 0.0, md_lambda = 1.0, md_P = 0.0, md_T = 30.0;
    int md_k = 0, md_nt = 256;
    CommonOpts md_opts;
    modes->add_option("--alpha", md_alpha, "Permittivity exponent (> -2, off resonance)")
        ->required();
    modes->add_option("--lambda", md_lambda, "Voltage parameter (> 0)");
    modes->add_option("--P", md_P, "External pressure (>= 0; < 4 exponent cap applies)");
    modes->add_option("--k", md_k, "Mode index for the sample trajectory");
    modes->add_option("--T", md_T, "Grid length in the cylinder variable");
    modes->add_option("--n-t", md_nt, "Grid points");
    add_common(modes, md_opts);

    // analyze
    auto* analyze = app.add_subcommand(
        "analyze", "Run a cylinder config and fit the decay of one mode");
    std::string an_config;
    int an_k = 2;
    CommonOpts an_opts;
    analyze->add_option("--config", an_config, "JSON cylinder config file")->required();
    analyze->add_option("--k", an_k, "Mode to fit");
    add_common(analyze, an_opts);

    // loj
    auto* loj = app.add_subcommand(
        "loj", "Empirical gradient-inequality exponent near the constant equilibrium");
    double lj_alpha = 0.0, lj_lambda = 1.0, lj_sigma = 0.01;
    int lj_samples = 500, lj_M = 65;
    CommonOpts lj_opts;
    loj->add_option("--alpha", lj_alpha, "Permittivity exponent (> -2)");
    loj->add_option("--lambda", lj_lambda, "Voltage parameter (> 0)");
    loj->add_option("--sigma", lj_sigma, "Perturbation norm (small, positive)");
    loj->add_option("--samples", lj_samples, "Sample count");
    loj->add_option("--grid", lj_M, "Collocation points (odd, >= 17)");
    add_common(loj, lj_opts);

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    mems::WallClock clock;

    try {
        if (sub == classify) {
            ensure_dir(cl_opts.output_dir);
            const mems::Classification c =
                mems::classify_alpha(cl_alpha, cl_pressure == "positive");
            const json doc = classification_to_json(c);
            mems::write_json(cl_opts.output_dir + "/classification.json", doc);
            std::cout << doc.dump() << std::endl;
            json inputs = {{"alpha", cl_alpha}, {"pressure", cl_pressure}};
            mems::write_manifest(cl_opts.output_dir, name, inputs, cl_opts.seed,
                                 clock.seconds(), {"classification.json"});
        } else if (sub == period) {
            ensure_dir(pc_opts.output_dir);
            mems::PhaseParams params((2.0 + pc_alpha) / 3.0, pc_lambda);
            const std::vector<double> taus = parse_tau_grid(pc_grid);
            mems::CsvWriter csv(pc_opts.output_dir + "/period_curve.csv", {"tau", "L"});
            for (double tau : taus) csv.row({tau, mems::half_period(params, tau)});
            json inputs = {{"alpha", pc_alpha}, {"lambda", pc_lambda}, {"tau_grid", pc_grid}};
            mems::write_manifest(pc_opts.output_dir, name, inputs, pc_opts.seed,
                                 clock.seconds(), {"period_curve.csv"});
        } else if (sub == orbit_cmd) {
            ensure_dir(ob_opts.output_dir);
            mems::PhaseParams params((2.0 + ob_alpha) / 3.0, ob_lambda);
            int samples = ob_samples;
            if (samples % (2 * ob_j) != 0)
                samples += 2 * ob_j - samples % (2 * ob_j);
            const mems::PeriodicOrbit orbit = mems::construct_orbit(params, ob_j, samples);
            mems::CsvWriter csv(ob_opts.output_dir + "/orbit.csv",
                                {"theta", "w", "wprime"});
            for (int i = 0; i < samples; ++i)
                csv.row({orbit.theta[i], orbit.w[i], orbit.wprime[i]});
            json inputs = {{"alpha", ob_alpha}, {"lambda", ob_lambda}, {"j", ob_j},
                           {"samples", samples}};
            mems::write_manifest(ob_opts.output_dir, name, inputs, ob_opts.seed,
                                 clock.seconds(), {"orbit.csv"});
        } else if (sub == radial) {
            ensure_dir(rs_opts.output_dir);
            rs_spec.lambda = rs_lambda;
            rs_spec.validate();
            const mems::RadialSolution sol = mems::solve_radial(rs_spec, rs_lambda);
            mems::CsvWriter csv(rs_opts.output_dir + "/radial.csv", {"r", "u"});
            for (std::size_t i = 0; i < sol.u.size(); ++i)
                csv.row({sol.r_grid[i], sol.u[i]});
            json summary = {{"converged", sol.converged},
                            {"admissible", sol.admissible},
                            {"newton_iters", sol.newton_iters},
                            {"residual_norm", sol.residual_norm}};
            mems::write_json(rs_opts.output_dir + "/radial_summary.json", summary);
            if (!sol.converged)
                throw mems::NoAdmissibleSolution(
                    "radial solve did not converge; lambda may exceed the pull-in "
                    "threshold");
            json inputs = {{"alpha", rs_spec.alpha}, {"lambda", rs_lambda},
                           {"P", rs_spec.P}, {"N", rs_spec.N}, {"grid", rs_spec.n_grid}};
            mems::write_manifest(rs_opts.output_dir, name, inputs, rs_opts.seed,
                                 clock.seconds(), {"radial.csv", "radial_summary.json"});
        } else if (sub == pullin) {
            ensure_dir(pl_opts.output_dir);
            pl_spec.validate();
            const mems::TheoremOneBounds bounds = mems::theorem1_bounds(pl_spec);
            const mems::ContinuationTrace trace = mems::continue_in_lambda(pl_spec);
            json doc;
            doc["lambda_star"] = trace.lambda_star_estimate;
            doc["lower"] = bounds.lower;
            doc["upper"] = bounds.upper;
            doc["steps"] = json::array();
            for (const auto& s : trace.steps)
                doc["steps"].push_back({{"lambda", s.lambda}, {"min_u", s.min_u},
                                        {"newton_iters", s.newton_iters},
                                        {"converged", s.converged}});
            mems::write_json(pl_opts.output_dir + "/pullin.json", doc);
            std::cout << json({{"lambda_star", trace.lambda_star_estimate},
                               {"lower", bounds.lower},
                               {"upper", bounds.upper}}).dump() << std::endl;
            json inputs = {{"alpha", pl_spec.alpha}, {"P", pl_spec.P},
                           {"N", pl_spec.N}, {"grid", pl_spec.n_grid}};
            mems::write_manifest(pl_opts.output_dir, name, inputs, pl_opts.seed,
                                 clock.seconds(), {"pullin.json"});
        } else if (sub == sweep) {
            ensure_dir(sw_opts.output_dir);
            const std::vector<double> P_grid = parse_csv_list(sw_pgrid);
            const std::vector<mems::PullinRow> rows = mems::pullin_sweep(sw_spec, P_grid);
            mems::CsvWriter csv(sw_opts.output_dir + "/sweep.csv",
                                {"P", "lambda_star", "lower", "upper"});
            for (const auto& r : rows) csv.row({r.P, r.lambda_star, r.lower, r.upper});
            json inputs = {{"alpha", sw_spec.alpha}, {"P_grid", sw_pgrid},
                           {"N", sw_spec.N}, {"grid", sw_spec.n_grid}};
            mems::write_manifest(sw_opts.output_dir, name, inputs, sw_opts.seed,
                                 clock.seconds(), {"sweep.csv"});
        } else if (sub == cylinder) {
            ensure_dir(cy_opts.output_dir);
            std::ifstream in(cy_config);
            if (!in) throw std::invalid_argument("cannot open config " + cy_config);
            json jcfg = json::parse(in);
            const mems::CylinderConfig cfg = cylinder_config_from_json(jcfg);
            const mems::CylinderField field = mems::solve_cylinder(cfg);
            if (!field.converged)
                throw std::runtime_error("cylinder solve did not converge, residual " +
                                         std::to_string(field.residual_norm));
            std::vector<std::string> files;
            write_cylinder_outputs(field, cy_opts.output_dir, files);
            mems::write_manifest(cy_opts.output_dir, name, jcfg, cy_opts.seed,
                                 clock.seconds(), files);
        } else if (sub == modes) {
            ensure_dir(md_opts.output_dir);
            mems::RefinedParams params(md_alpha, md_lambda, md_P);
            const mems::DecayPrediction pred = mems::predicted_decay(params);
            json doc;
            doc["alpha"] = pred.alpha;
            doc["P"] = pred.P;
            doc["case"] = pred.case_id;
            doc["k"] = pred.k;
            doc["t_exponent"] = pred.t_exponent;
            doc["r_exponent"] = pred.r_exponent;
            if (pred.limit_coefficient) doc["limit_coefficient"] = *pred.limit_coefficient;
            mems::write_json(md_opts.output_dir + "/prediction.json", doc);
            std::cout << doc.dump() << std::endl;
            std::vector<std::string> files = {"prediction.json"};
            if (md_P > 0.0 || md_k != 0) {
                const double mu = params.mu();
                std::vector<double> t_grid(md_nt);
                for (int i = 0; i < md_nt; ++i) t_grid[i] = md_T * i / (md_nt - 1);
                const double sigma = 2.0 - mu;
                mems::Forcing forcing{
                    [P = md_P, sigma](double t) {
                        return std::sqrt(2.0 * M_PI) * P * std::exp(-sigma * t);
                    },
                    sigma};
                const mems::ModeSolution sol =
                    mems::bounded_mode_solution(md_k, mu, forcing, t_grid);
                mems::CsvWriter csv(md_opts.output_dir + "/mode_k" +
                                        std::to_string(md_k) + ".csv",
                                    {"t", "a_k"});
                for (std::size_t i = 0; i < sol.t.size(); ++i)
                    csv.row({sol.t[i], sol.a[i]});
                files.push_back("mode_k" + std::to_string(md_k) + ".csv");
            }
            json inputs = {{"alpha", md_alpha}, {"lambda", md_lambda}, {"P", md_P},
                           {"k", md_k}, {"T", md_T}, {"n_t", md_nt}};
            mems::write_manifest(md_opts.output_dir, name, inputs, md_opts.seed,
                                 clock.seconds(), files);
        } else if (sub == analyze) {
            ensure_dir(an_opts.output_dir);
            std::ifstream in(an_config);
            if (!in) throw std::invalid_argument("cannot open config " + an_config);
            json jcfg = json::parse(in);
            const mems::CylinderConfig cfg = cylinder_config_from_json(jcfg);
            const mems::CylinderField field = mems::solve_cylinder(cfg);
            if (!field.converged)
                throw std::runtime_error("cylinder solve did not converge");
            const mems::DecayFit fit = mems::fit_mode_decay_auto(field, an_k);
            json doc;
            doc["k"] = fit.k;
            doc["window"] = {fit.t_lo, fit.t_hi};
            doc["fitted_exponent"] = fit.fitted_exponent;
            doc["r_squared"] = fit.r_squared;
            mems::write_json(an_opts.output_dir + "/decay_fit.json", doc);
            std::cout << doc.dump() << std::endl;
            mems::CsvWriter csv(an_opts.output_dir + "/log_amplitude.csv",
                                {"t", "log_amp"});
            for (int i = 0; i < field.n_t(); ++i) {
                const double amp = std::abs(field.mode_coefficient(i, an_k));
                if (amp > 0.0) csv.row({field.t_grid[i], std::log(amp)});
            }
            mems::write_manifest(an_opts.output_dir, name,
                                 {{"config", jcfg}, {"k", an_k}}, an_opts.seed,
                                 clock.seconds(), {"decay_fit.json", "log_amplitude.csv"});
        } else if (sub == loj) {
            ensure_dir(lj_opts.output_dir);
            mems::PhaseParams params((2.0 + lj_alpha) / 3.0, lj_lambda);
            const std::vector<double> w(lj_M, params.equilibrium());
            const mems::LojEstimate est =
                mems::loj_estimate(params, w, lj_sigma, lj_samples, lj_opts.seed);
            json doc;
            doc["sample_count"] = est.sample_count;
            doc["sigma"] = est.sigma;
            doc["theta_hat"] = est.theta_hat;
            doc["min_ratio"] = est.min_ratio;
            doc["seed"] = lj_opts.seed;
            mems::write_json(lj_opts.output_dir + "/loj.json", doc);
            std::cout << doc.dump() << std::endl;
            json inputs = {{"alpha", lj_alpha}, {"lambda", lj_lambda},
                           {"sigma", lj_sigma}, {"samples", lj_samples},
                           {"grid", lj_M}};
            mems::write_manifest(lj_opts.output_dir, name, inputs, lj_opts.seed,
                                 clock.seconds(), {"loj.json"});
        }
    } catch (const std::exception& e) {
        return fail_with(name, e);
    }
    return 0;
}
