#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dhym/config.hpp"
#include "dhym/errors.hpp"
#include "dhym/path.hpp"
#include "dhym/pointwise.hpp"
#include "dhym/psatz.hpp"
#include "dhym/symmetric.hpp"
#include "dhym/torus.hpp"

namespace {

using nlohmann::json;
using namespace dhym;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ArgumentError(what + ": '" + item + "' is not a number");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw ArgumentError(what + ": '" + item + "' is not a number");
        out.push_back(value);
    }
    if (out.empty()) throw ArgumentError(what + ": empty list");
    return out;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json region_json(const RegionResult& r) {
    return {{"member", r.member}, {"margin", r.margin}, {"infimum", r.infimum}, {"argmin_t", r.argmin_t}};
}

json certificate_json(const EllCertificate& c) {
    return {{"ell", c.ell}, {"gap", c.gap}, {"depth", c.depth}, {"margin", c.margin}, {"c0_at_zero", c.c0_at_zero}};
}

json constraints_json(const ConstraintReport& report) {
    json list = json::array();
    for (const auto& c : report.constraints) {
        list.push_back({{"name", c.name}, {"margin", c.margin}, {"strict", c.strict}, {"pass", c.pass}});
    }
    return {{"pass", report.pass}, {"c0_min", report.c0_min}, {"constraints", list}};
}

// Phase and level options shared by the pointwise subcommands.
struct LevelOptions {
    std::string config;
    int dimension = 0;
    double theta_hat = std::nan("");
    double h = std::nan("");
    double t = 1.0;
    double c2 = 1.0;
    double c1 = 1.0;
    double c0 = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "JSON configuration supplying dimension and theta_hat");
        cmd->add_option("--dimension", dimension, "Dimension (3 or 4)");
        cmd->add_option("--theta-hat", theta_hat, "Target phase in radians");
        cmd->add_option("--level", h, "Level h (defaults to the original level of the phase)");
        cmd->add_option("--t", t, "Path parameter recorded in the level");
        cmd->add_option("--c2", c2, "Coefficient of sigma_2 (dimension 4)");
        cmd->add_option("--c1", c1, "Coefficient of sigma_1");
        cmd->add_option("--c0", c0, "Constant coefficient");
    }

    PhaseParams phase() const {
        if (!config.empty()) {
            const RunConfig cfg = load_config(config);
            if (dimension != 0 && dimension != cfg.phase.n) throw ArgumentError("--dimension disagrees with the config");
            return std::isnan(theta_hat) ? cfg.phase : make_phase(cfg.phase.n, theta_hat);
        }
        if (dimension == 0 || std::isnan(theta_hat)) throw ArgumentError("give --config or both --dimension and --theta-hat");
        return make_phase(dimension, theta_hat);
    }

    LevelSpec level(const PhaseParams& p) const {
        LevelSpec spec;
        spec.h = std::isnan(h) ? p.default_level() : h;
        spec.t = t;
        spec.c2 = c2;
        spec.c1 = c1;
        spec.c0 = c0;
        return spec;
    }
};

EigenTuple tuple_from(const std::string& text, const std::string& what) {
    const auto values = parse_list(text, what);
    return EigenTuple(std::span<const double>(values));
}

PathSpec plan_from_config(const RunConfig& cfg, const IntersectionNumbers& omega, std::optional<double> ell) {
    if (cfg.phase.n == 3) return plan_path_3(omega, cfg.phase);
    const std::optional<double> chosen = ell ? ell : cfg.ell;
    if (chosen) return plan_path_4(omega, cfg.phase, *chosen);
    return plan_path_4_gap(omega, cfg.phase, ell_search(omega, cfg.phase).gap);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dhym: numerical tools for the deformed Hermitian-Yang-Mills equation"};
    app.require_subcommand(1);
    std::function<int()> action;

    // cone
    auto* cone = app.add_subcommand("cone", "Membership of an eigenvalue tuple in an Upsilon cone");
    std::string cone_lambda, cone_coeffs;
    int cone_arity = 0;
    double cone_eps = 0.0;
    cone->add_option("--lambda", cone_lambda, "Comma-separated eigenvalues")->required();
    cone->add_option("--coeffs", cone_coeffs, "Comma-separated coefficients, highest degree first")->required();
    cone->add_option("--arity", cone_arity, "Subset size")->required();
    cone->add_option("--epsilon", cone_eps, "Membership threshold");
    cone->callback([&] {
        action = [&] {
            const EigenTuple lambda = tuple_from(cone_lambda, "--lambda");
            const ConeSpec spec{cone_arity, parse_list(cone_coeffs, "--coeffs")};
            const ConeVerdict v = upsilon_membership(lambda, spec, cone_eps);
            print_json({{"member", v.member}, {"margin", v.margin}});
            return kExitOk;
        };
    });

    // psatz
    auto* psatz = app.add_subcommand("psatz", "Sharp cone containment bounds");
    psatz->require_subcommand(1);
    double ps_c = 1.0, ps_d = 0.0, ps_e = std::nan("");
    std::string ps_claim = "e";
    std::size_t ps_samples = 20000;
    std::uint64_t ps_seed = 7;
    int ps_dimension = 4;
    auto add_cd = [&](CLI::App* cmd) {
        cmd->add_option("--c", ps_c, "Parameter c > 0")->required();
        cmd->add_option("--d", ps_d, "Parameter d >= 0")->required();
    };
    auto* ps_bound = psatz->add_subcommand("bound", "Branch angle and sharp lower bound for e");
    add_cd(ps_bound);
    ps_bound->callback([&] {
        action = [&] {
            const PsatzParams p{ps_c, ps_d, std::nullopt};
            print_json({{"theta", theta_cd(p)}, {"e_bound", e_lower_bound(p)}, {"infimum", infimum_closed_form(p)}});
            return kExitOk;
        };
    });
    auto* ps_roots = psatz->add_subcommand("roots", "Trigonometric roots of the depressed cubic");
    add_cd(ps_roots);
    ps_roots->callback([&] {
        action = [&] {
            const PsatzParams p{ps_c, ps_d, std::nullopt};
            const auto roots = cubic_roots(p);
            json residuals = json::array();
            for (double b : roots) residuals.push_back(cubic_residual(p, b));
            print_json({{"roots", roots}, {"residuals", residuals}});
            return kExitOk;
        };
    });
    auto* ps_verify = psatz->add_subcommand("verify", "Sampling check of one containment claim");
    add_cd(ps_verify);
    ps_verify->add_option("--claim", ps_claim, "Claim a-f");
    ps_verify->add_option("--e", ps_e, "Parameter e");
    ps_verify->add_option("--samples", ps_samples, "Number of samples");
    ps_verify->add_option("--seed", ps_seed, "Random seed");
    ps_verify->add_option("--dimension", ps_dimension, "Dimension (3 or 4)");
    ps_verify->callback([&] {
        action = [&] {
            PsatzParams p{ps_c, ps_d, std::nullopt};
            if (!std::isnan(ps_e)) p.e = ps_e;
            ContainmentOptions options;
            options.dimension = ps_dimension;
            options.samples = ps_samples;
            options.seed = ps_seed;
            const Claim claim = parse_claim(ps_claim);
            const ContainmentVerdict v = containment_check(claim, p, options);
            json out{{"claim", claim_name(claim)},
                     {"pass", v.pass},
                     {"worst_margin", v.worst_margin},
                     {"worst_point", v.worst_point},
                     {"samples_checked", v.samples_checked}};
            out["witness"] = v.witness ? json(*v.witness) : json(nullptr);
            print_json(out);
            return v.pass ? kExitOk : kExitFailure;
        };
    });

    // pointwise
    auto* pointwise = app.add_subcommand("pointwise", "Level-set function, solves and convexity");
    pointwise->require_subcommand(1);
    LevelOptions level_opts;
    std::string pw_lambda, pw_rest;
    int pw_tangents = 64;
    std::uint64_t pw_seed = 11;
    auto* pw_eval = pointwise->add_subcommand("eval", "Value, gradient and Hessian of the level-set function");
    level_opts.attach(pw_eval);
    pw_eval->add_option("--lambda", pw_lambda, "Comma-separated eigenvalues")->required();
    pw_eval->callback([&] {
        action = [&] {
            const PhaseParams p = level_opts.phase();
            const LevelSpec spec = level_opts.level(p);
            const EigenTuple lambda = tuple_from(pw_lambda, "--lambda");
            const Eigen::VectorXd g = f_gradient(lambda, spec, p);
            print_json({{"f", f_eval(lambda, spec, p)},
                        {"h", spec.h},
                        {"gradient", std::vector<double>(g.data(), g.data() + g.size())},
                        {"hessian", matrix_json(f_hessian(lambda, spec, p))}});
            return kExitOk;
        };
    });
    auto* pw_solve = pointwise->add_subcommand("solve", "Solve the level set for the first eigenvalue");
    level_opts.attach(pw_solve);
    pw_solve->add_option("--rest", pw_rest, "Comma-separated remaining n - 1 eigenvalues")->required();
    pw_solve->callback([&] {
        action = [&] {
            const PhaseParams p = level_opts.phase();
            const LevelSpec spec = level_opts.level(p);
            const auto rest = parse_list(pw_rest, "--rest");
            const double lambda1 = solve_lambda1(rest, spec, p);
            std::vector<double> full{lambda1};
            full.insert(full.end(), rest.begin(), rest.end());
            const EigenTuple lambda(std::span<const double>(full.data(), full.size()));
            print_json({{"lambda1", lambda1}, {"lambda", full}, {"f", f_eval(lambda, spec, p)}});
            return kExitOk;
        };
    });
    auto* pw_convex = pointwise->add_subcommand("convexity", "Ellipticity and tangent convexity at a level-set point");
    level_opts.attach(pw_convex);
    auto* lambda_opt = pw_convex->add_option("--lambda", pw_lambda, "Comma-separated eigenvalues on the level set");
    auto* rest_opt = pw_convex->add_option("--rest", pw_rest, "Remaining eigenvalues; the first is solved");
    lambda_opt->excludes(rest_opt);
    pw_convex->add_option("--tangents", pw_tangents, "Number of random unit tangents");
    pw_convex->add_option("--seed", pw_seed, "Random seed");
    pw_convex->callback([&] {
        action = [&] {
            const PhaseParams p = level_opts.phase();
            const LevelSpec spec = level_opts.level(p);
            std::vector<double> values;
            if (!pw_lambda.empty()) {
                values = parse_list(pw_lambda, "--lambda");
            } else if (!pw_rest.empty()) {
                const auto rest = parse_list(pw_rest, "--rest");
                values.push_back(solve_lambda1(rest, spec, p));
                values.insert(values.end(), rest.begin(), rest.end());
            } else {
                throw ArgumentError("give --lambda or --rest");
            }
            const EigenTuple lambda(std::span<const double>(values.data(), values.size()));
            const EllipticityReport ell = ellipticity_check(lambda, spec, p);
            const ConvexityReport cvx = convexity_check(lambda, spec, p, pw_tangents, pw_seed);
            json pairs = json::array();
            for (const auto& d : cvx.pairs) {
                pairs.push_back({{"first", d.first},
                                 {"second", d.second},
                                 {"eliminated", d.eliminated},
                                 {"numeric", d.numeric},
                                 {"formula", d.formula},
                                 {"r1", d.r1},
                                 {"r2", d.r2}});
            }
            print_json({{"lambda", values},
                        {"elliptic", ell.elliptic},
                        {"min_neg_gradient", ell.min_neg_gradient},
                        {"min_sampled", cvx.min_sampled},
                        {"min_eigenvalue", cvx.min_eigenvalue},
                        {"quadratic_q", cvx.quadratic_q},
                        {"identity_residual", cvx.identity_residual},
                        {"consistent", cvx.consistent},
                        {"pairs", pairs}});
            const bool ok = ell.elliptic && cvx.consistent && cvx.min_eigenvalue >= -kLevelTolerance;
            return ok ? kExitOk : kExitFailure;
        };
    });

    // path
    auto* path_cmd = app.add_subcommand("path", "Continuity paths, region tests and the ell search");
    path_cmd->require_subcommand(1);
    std::string path_config, path_out;
    int path_samples = 0;
    double path_ell = std::nan("");
    auto add_path_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", path_config, "JSON configuration")->required();
        cmd->add_option("--ell", path_ell, "Path parameter for dimension 4 (overrides the config)");
    };
    auto ell_override = [&]() -> std::optional<double> {
        if (std::isnan(path_ell)) return std::nullopt;
        return path_ell;
    };
    auto* path_plan = path_cmd->add_subcommand("plan", "Sample the planned path as CSV");
    add_path_common(path_plan);
    path_plan->add_option("--samples", path_samples, "Number of t samples");
    path_plan->add_option("--out", path_out, "CSV output file (stdout if omitted)");
    path_plan->callback([&] {
        action = [&] {
            const RunConfig cfg = load_config(path_config);
            const IntersectionNumbers omega = config_omega(cfg);
            const PathSpec path = plan_from_config(cfg, omega, ell_override());
            const ConstraintReport report = check_constraints(path, path_samples > 0 ? path_samples : cfg.samples, true);
            if (path_out.empty()) {
                write_path_csv(std::cout, report.samples);
            } else {
                std::ofstream out(path_out);
                if (!out) throw ArgumentError("cannot write '" + path_out + "'");
                write_path_csv(out, report.samples);
                json summary = constraints_json(report);
                summary["ell"] = cfg.phase.n == 4 ? json(path.ell) : json(nullptr);
                summary["out"] = path_out;
                print_json(summary);
            }
            return kExitOk;
        };
    });
    auto* path_check = path_cmd->add_subcommand("check", "Evaluate the four constraints along the path");
    add_path_common(path_check);
    path_check->add_option("--samples", path_samples, "Number of t samples");
    path_check->callback([&] {
        action = [&] {
            const RunConfig cfg = load_config(path_config);
            const IntersectionNumbers omega = config_omega(cfg);
            const PathSpec path = plan_from_config(cfg, omega, ell_override());
            const ConstraintReport report = check_constraints(path, path_samples > 0 ? path_samples : cfg.samples);
            json out = constraints_json(report);
            out["ell"] = cfg.phase.n == 4 ? json(path.ell) : json(nullptr);
            print_json(out);
            return report.pass ? kExitOk : kExitFailure;
        };
    });
    auto* path_region = path_cmd->add_subcommand("region", "Solvability region test");
    add_path_common(path_region);
    path_region->callback([&] {
        action = [&] {
            const RunConfig cfg = load_config(path_config);
            const IntersectionNumbers omega = config_omega(cfg);
            RegionResult r;
            json out;
            if (cfg.phase.n == 3) {
                r = region_test_3(omega, cfg.phase);
            } else {
                const std::optional<double> chosen = ell_override() ? ell_override() : cfg.ell;
                double gap = 0.0;
                if (chosen) {
                    r = region_test_4(omega, cfg.phase, *chosen);
                    out["ell"] = *chosen;
                } else {
                    const EllCertificate cert = ell_search(omega, cfg.phase);
                    gap = cert.gap;
                    r = region_test_4_gap(omega, cfg.phase, gap);
                    out["ell"] = cert.ell;
                }
            }
            out.update(region_json(r));
            print_json(out);
            return r.member ? kExitOk : kExitFailure;
        };
    });
    auto* path_search = path_cmd->add_subcommand("ellsearch", "Search the path parameter for dimension 4");
    path_search->add_option("--config", path_config, "JSON configuration")->required();
    path_search->callback([&] {
        action = [&] {
            const RunConfig cfg = load_config(path_config);
            if (cfg.phase.n != 4) throw ArgumentError("ellsearch requires dimension 4");
            const IntersectionNumbers omega = config_omega(cfg);
            print_json(certificate_json(ell_search(omega, cfg.phase)));
            return kExitOk;
        };
    });
    auto* path_sweep = path_cmd->add_subcommand("csubsweep", "Region and constraint sweep over synthetic data");
    int sweep_dimension = 0, sweep_trials = 10000;
    std::uint64_t sweep_seed = 7;
    std::string sweep_phases;
    path_sweep->add_option("--dimension", sweep_dimension, "Dimension (3 or 4)")->required();
    path_sweep->add_option("--trials", sweep_trials, "Number of synthetic tuples");
    path_sweep->add_option("--seed", sweep_seed, "Random seed");
    path_sweep->add_option("--theta-hat", sweep_phases, "Comma-separated target phases (default set if omitted)");
    path_sweep->callback([&] {
        action = [&] {
            const std::vector<double> phases =
                sweep_phases.empty() ? std::vector<double>{} : parse_list(sweep_phases, "--theta-hat");
            const SweepReport r = csub_sweep(sweep_dimension, phases, sweep_trials, sweep_seed);
            json out{{"pass", r.pass},
                     {"trials", r.trials},
                     {"region_failures", r.region_failures},
                     {"constraint_failures", r.constraint_failures},
                     {"search_failures", r.search_failures},
                     {"min_region_margin", r.min_region_margin},
                     {"min_psatz_margin", r.min_psatz_margin},
                     {"failures", r.failures}};
            if (sweep_dimension == 4) {
                out["min_certificate_margin"] = r.min_certificate_margin;
                out["max_depth"] = r.max_depth;
            }
            print_json(out);
            return r.pass ? kExitOk : kExitFailure;
        };
    });

    // solve torus
    auto* solve = app.add_subcommand("solve", "End-to-end continuity solves");
    solve->require_subcommand(1);
    auto* torus = solve->add_subcommand("torus", "Continuity method on the flat torus model");
    std::string torus_config, torus_out;
    double torus_tmax = 1.0;
    torus->add_option("--config", torus_config, "JSON configuration with a torus block")->required();
    torus->add_option("--out-dir", torus_out, "Directory for diagnostics.csv and field.txt");
    torus->add_option("--t-max", torus_tmax, "Stop the march at this parameter value");
    torus->callback([&] {
        action = [&] {
            const RunConfig cfg = load_config(torus_config);
            if (!cfg.torus) throw ArgumentError("configuration has no 'torus' block");
            const TorusProblem& problem = *cfg.torus;
            validate_problem(problem);
            const IntersectionNumbers omega = compute_intersection_numbers(problem);
            const PathSpec path = plan_from_config(cfg, omega, std::nullopt);
            ContinuityOptions options;
            options.t_max = torus_tmax;
            const ContinuityReport report = continuity_solve(problem, path, options);
            json out{{"completed", report.completed},
                     {"reached_t", report.reached_t},
                     {"rejected_steps", report.rejected_steps},
                     {"accepted_steps", report.steps.size()},
                     {"intersection_numbers", report.omega.omega}};
            if (!report.steps.empty()) {
                out["final_residual"] = report.steps.back().final_residual;
                double margin = report.steps.front().min_cone_margin;
                for (const auto& s : report.steps) margin = std::min(margin, s.min_cone_margin);
                out["min_cone_margin"] = margin;
            }
            if (report.completed && report.reached_t == 1.0) {
                out["phase_error"] = verify_phase(report.u, problem, cfg.phase);
            } else {
                out["phase_error"] = nullptr;
            }
            if (cfg.phase.n == 4) out["ell"] = path.ell;
            if (!torus_out.empty()) {
                std::filesystem::create_directories(torus_out);
                std::ofstream diag(std::filesystem::path(torus_out) / "diagnostics.csv");
                std::ofstream field(std::filesystem::path(torus_out) / "field.txt");
                if (!diag || !field) throw ArgumentError("cannot write into '" + torus_out + "'");
                write_diagnostics_csv(diag, report.steps);
                write_field(field, report.u, problem);
            }
            print_json(out);
            return report.completed ? kExitOk : kExitFailure;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    try {
        return action ? action() : kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
