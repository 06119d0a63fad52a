#include "dhym/path.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>

#include "dhym/errors.hpp"
#include "dhym/parallel.hpp"
#include "dhym/pointwise.hpp"
#include "dhym/psatz.hpp"

namespace dhym {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;

// Golden-section minimization of fn on [a, b].
template <class Fn>
double golden_minimize(Fn&& fn, double a, double b, int iterations, double& best_x) {
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = fn(x1);
    double f2 = fn(x2);
    for (int it = 0; it < iterations; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = fn(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = fn(x2);
        }
    }
    if (f1 < f2) {
        best_x = x1;
        return f1;
    }
    best_x = x2;
    return f2;
}

// Minimizes fn over the grid i / samples, i = 0..samples-1, then refines between the neighbouring samples.
template <class Fn>
double grid_infimum(Fn&& fn, int samples, double& argmin) {
    if (samples < 2) throw ArgumentError("at least two samples are required");
    double best = kInf;
    int best_i = 0;
    for (int i = 0; i < samples; ++i) {
        const double v = fn(static_cast<double>(i) / samples);
        if (v < best) {
            best = v;
            best_i = i;
        }
    }
    argmin = static_cast<double>(best_i) / samples;
    const double lo = best_i == 0 ? 0.0 : static_cast<double>(best_i - 1) / samples;
    const double hi = static_cast<double>(best_i + 1) / samples;
    const double hi_open = std::min(hi, std::nextafter(1.0, 0.0));
    double x = argmin;
    const double refined = golden_minimize(fn, lo, hi_open, 80, x);
    if (refined < best) {
        best = refined;
        argmin = x;
    }
    return best;
}

double neg_sec(const PhaseParams& p) { return -1.0 / p.cos; }

// Normalized derivative m = -ell cos(theta_hat) = 1 - gap |cos(theta_hat)|, computed from the gap.
double path_slope(const PhaseParams& p, double gap) { return 1.0 - gap * std::abs(p.cos); }

// b(t) = c2(t)^{3/2} = t + (1 - t) gap |cos(theta_hat)|.
double path_base(const PhaseParams& p, double gap, double t) { return t + (1.0 - t) * gap * std::abs(p.cos); }

void require_n(const PhaseParams& p, int n) {
    if (p.n != n) throw ArgumentError("operation requires dimension " + std::to_string(n));
}

void require_gap(const PhaseParams& p, double gap) {
    const double upper = neg_sec(p) - 1.0;
    if (!std::isfinite(gap) || !(gap > 0.0) || gap > upper) {
        throw ArgumentError("path parameter ell must lie in [1, -sec(theta_hat))");
    }
}

}  // namespace

void validate_omega(const IntersectionNumbers& omega, const PhaseParams& p) {
    if (omega.n() != p.n) {
        throw ArgumentError("expected " + std::to_string(p.n + 1) + " intersection numbers, got " +
                            std::to_string(omega.omega.size()));
    }
    for (double v : omega.omega) {
        if (!std::isfinite(v)) throw ArgumentError("intersection numbers must be finite");
    }
    if (!(omega[p.n] > 0.0)) throw ArgumentError("the top intersection number (volume) must be positive");
}

PathSpec plan_path_3(const IntersectionNumbers& omega, const PhaseParams& p) {
    require_n(p, 3);
    validate_omega(omega, p);
    if (!(omega[2] > 0.0)) throw ArgumentError("Omega_2 must be positive");
    PathSpec path;
    path.phase = p;
    path.omega = omega;
    return path;
}

PathSpec plan_path_4(const IntersectionNumbers& omega, const PhaseParams& p, double ell) {
    require_n(p, 4);
    if (!std::isfinite(ell) || ell < 1.0 || !(ell < neg_sec(p))) {
        throw ArgumentError("path parameter ell must lie in [1, -sec(theta_hat))");
    }
    PathSpec path = plan_path_4_gap(omega, p, neg_sec(p) - ell);
    path.ell = ell;
    return path;
}

PathSpec plan_path_4_gap(const IntersectionNumbers& omega, const PhaseParams& p, double gap) {
    require_n(p, 4);
    validate_omega(omega, p);
    require_gap(p, gap);
    PathSpec path;
    path.phase = p;
    path.omega = omega;
    path.gap = gap;
    path.ell = neg_sec(p) - gap;
    return path;
}

double decreasing_quartic_fact(double t) {
    return 1.0 + 8.0 * t - 6.0 * std::cbrt(t * t) - 3.0 * std::cbrt(t * t * t * t);
}

double path_one_minus_c2(const PhaseParams& p, double gap, double t) {
    const double drop = (1.0 - t) * path_slope(p, gap);
    const double log_base = drop < 0.5 ? std::log1p(-drop) : std::log(path_base(p, gap, t));
    return -std::expm1(2.0 / 3.0 * log_base);
}

double path_theta(const PhaseParams& p, double gap, double t) {
    const double x = t * p.cos / path_base(p, gap, t);
    return arccos_branch(x) / 3.0 - 2.0 * kPi / 3.0;
}

double path_theta_derivative(const PhaseParams& p, double gap, double t) {
    const double b = path_base(p, gap, t);
    const double x = t * p.cos / b;
    return arccos_branch_derivative(x) * p.cos * gap * std::abs(p.cos) / (3.0 * b * b);
}

double path_unit_margin(const PhaseParams& p, double gap, double t) {
    const double c2 = std::cbrt(std::pow(path_base(p, gap, t), 2.0));
    const double theta = path_theta(p, gap, t);
    const double cs = std::cos(theta);
    return p.k4 + 24.0 * c2 * c2 * p.csc2 * cs * cs * std::cos(2.0 * theta);
}

double near_start_fact(const PhaseParams& p, double gap, double t) {
    return 2.0 + 4.0 * t - 6.0 * (1.0 - path_one_minus_c2(p, gap, t));
}

double near_start_coefficient(const PhaseParams& p, double gap, double t) {
    return path_unit_margin(p, gap, t) - 4.0 / 3.0 * (1.0 - t) * p.k4;
}

PathPoint path_point(const PathSpec& path, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw ArgumentError("path parameter t must lie in [0, 1]");
    const PhaseParams& p = path.phase;
    const IntersectionNumbers& om = path.omega;
    PathPoint pt;
    pt.t = t;
    if (p.n == 3) {
        const double top = p.cos * p.cos * om[0];
        pt.c2 = std::numeric_limits<double>::quiet_NaN();
        // c1 = (top - 2 t tan Omega_3) / (3 Omega_2), written as 1 plus terms vanishing at t = 1 so that the end
        // value is exactly 1; the rounding-level inconsistency of the data is carried with weight (1 - t).
        const double mismatch = top - 3.0 * om[2] - 2.0 * p.tan * om[3];
        pt.c1 = 1.0 + (1.0 - t) * (mismatch + 2.0 * p.tan * om[3]) / (3.0 * om[2]);
        pt.c0 = t;
        pt.dc1 = -(mismatch + 2.0 * p.tan * om[3]) / (3.0 * om[2]);
        pt.dc0 = 1.0;
        const double residual = top - 3.0 * pt.c1 * om[2] - 2.0 * pt.c0 * p.tan * om[3];
        pt.topological_residual = std::abs(residual) / std::max(std::abs(top), std::numeric_limits<double>::min());
        pt.psatz_margin = pt.c1 > 0.0 ? std::pow(pt.c1, 1.5) - pt.c0 * p.sin : pt.c1;
        pt.upsilon_margins = {pt.dc1};
        return pt;
    }
    const double b = path_base(p, path.gap, t);
    const double m = path_slope(p, path.gap);
    pt.one_minus_c2 = path_one_minus_c2(p, path.gap, t);
    pt.c2 = std::cbrt(b * b);
    pt.dc2 = 2.0 / 3.0 * m / std::cbrt(b);
    pt.c1 = t;
    pt.dc1 = 1.0;
    const double top = p.sin * p.sin * om[0];
    const double denom = p.k4 * om[4];
    // Same rearrangement as for n = 3: the end value c0(1) = 1 is exact.
    const double mismatch = top - 6.0 * om[2] + 8.0 * p.cot * om[3] - denom;
    pt.c0 = 1.0 + ((1.0 - t) * (mismatch - 8.0 * p.cot * om[3]) + 6.0 * pt.one_minus_c2 * om[2]) / denom;
    pt.dc0 = (-mismatch - 6.0 * pt.dc2 * om[2] + 8.0 * p.cot * om[3]) / denom;
    const double residual = top - 6.0 * pt.c2 * om[2] + 8.0 * pt.c1 * p.cot * om[3] - pt.c0 * denom;
    pt.topological_residual = std::abs(residual) / std::max(std::abs(top), std::numeric_limits<double>::min());
    pt.theta = path_theta(p, path.gap, t);
    const double cs = std::cos(pt.theta);
    pt.psatz_margin = p.k4 * pt.c0 + 24.0 * pt.c2 * pt.c2 * p.csc2 * cs * cs * std::cos(2.0 * pt.theta);
    // d(c2^{3/2})/dt = m must dominate -cos(theta_hat) c1' = |cos|; the margin (ell - 1)|cos| is computed from the gap.
    const double cone_slack = (neg_sec(p) - 1.0 - path.gap) * std::abs(p.cos);
    pt.upsilon_margins = {pt.dc2, pt.dc1, cone_slack};
    return pt;
}

LevelSpec path_level(const PathSpec& path, double t) {
    const PathPoint pt = path_point(path, t);
    LevelSpec spec;
    spec.h = path.phase.default_level();
    spec.t = t;
    spec.c2 = path.phase.n == 4 ? pt.c2 : 1.0;
    spec.c1 = pt.c1;
    spec.c0 = pt.c0;
    return spec;
}

ConstraintReport check_constraints(const PathSpec& path, int t_samples, bool keep_samples) {
    if (t_samples < 2) throw ArgumentError("t_samples must be at least 2");
    const PhaseParams& p = path.phase;
    validate_omega(path.omega, p);
    if (p.n == 4) require_gap(p, path.gap);

    double topo = 0.0;
    double psatz = kInf;
    double c0_min = kInf;
    std::vector<double> upsilon;
    ConstraintReport report;
    for (int i = 0; i < t_samples; ++i) {
        const double t = i == t_samples - 1 ? 1.0 : static_cast<double>(i) / (t_samples - 1);
        PathPoint pt = path_point(path, t);
        topo = std::max(topo, pt.topological_residual);
        psatz = std::min(psatz, pt.psatz_margin);
        c0_min = std::min(c0_min, pt.c0);
        if (upsilon.empty()) upsilon.assign(pt.upsilon_margins.size(), kInf);
        for (std::size_t k = 0; k < upsilon.size(); ++k) upsilon[k] = std::min(upsilon[k], pt.upsilon_margins[k]);
        if (keep_samples) report.samples.push_back(std::move(pt));
    }

    const PathPoint start = path_point(path, 0.0);
    const PathPoint end = path_point(path, 1.0);
    const IntersectionNumbers& om = path.omega;
    // Boundary errors of data-derived coefficients are measured against the size of the terms that produce them.
    double boundary_error = 0.0;
    double boundary_positive = kInf;
    if (p.n == 3) {
        const double scale = (std::abs(p.cos * p.cos * om[0]) + std::abs(2.0 * p.tan * om[3])) / (3.0 * om[2]);
        boundary_error = std::max({std::abs(end.c1 - 1.0) / std::max(scale, 1.0), std::abs(end.c0 - 1.0),
                                   std::abs(start.c0)});
        boundary_positive = start.c1;
    } else {
        const double scale = (std::abs(p.sin * p.sin * om[0]) + 6.0 * std::abs(om[2]) + 8.0 * std::abs(p.cot * om[3])) /
                             (p.k4 * om[4]);
        boundary_error = std::max({std::abs(end.c2 - 1.0), std::abs(end.c1 - 1.0),
                                   std::abs(end.c0 - 1.0) / std::max(scale, 1.0), std::abs(start.c1)});
        boundary_positive = start.c2;
    }

    report.constraints.push_back({"topological", kTopologicalTolerance - topo, true, false});
    report.constraints.push_back(
        {"boundary", std::min(kBoundaryTolerance - boundary_error, boundary_positive), true, false});
    report.constraints.push_back({"positivstellensatz", psatz, true, false});
    if (p.n == 3) {
        report.constraints.push_back({"upsilon_c1_increasing", upsilon[0], true, false});
    } else {
        report.constraints.push_back({"upsilon_c2_increasing", upsilon[0], true, false});
        report.constraints.push_back({"upsilon_c1_increasing", upsilon[1], true, false});
        report.constraints.push_back({"upsilon_c2_power_dominates_c1", upsilon[2], false, false});
    }
    report.pass = true;
    for (auto& c : report.constraints) {
        c.pass = c.strict ? c.margin > 0.0 : c.margin >= 0.0;
        report.pass = report.pass && c.pass;
    }
    report.c0_min = c0_min;
    return report;
}

double region3_infimum_factor(const PhaseParams& p, int samples, double* argmin) {
    require_n(p, 3);
    const double s23 = std::cbrt(p.sin * p.sin);
    auto bracket = [&](double t) { return -p.cot * 3.0 * (1.0 - std::cbrt(t * t) * s23) / (2.0 * (1.0 - t)); };
    double at = 0.0;
    const double inf = grid_infimum(bracket, samples, at);
    if (argmin) *argmin = at;
    return inf;
}

RegionResult region_test_3(const IntersectionNumbers& omega, const PhaseParams& p, int samples) {
    double at = 0.0;
    const double factor = region3_infimum_factor(p, samples, &at);
    return region_test_3(omega, p, factor, at);
}

RegionResult region_test_3(const IntersectionNumbers& omega, const PhaseParams& p, double factor, double argmin) {
    require_n(p, 3);
    validate_omega(omega, p);
    RegionResult r;
    r.infimum = factor * omega[2];
    r.argmin_t = argmin;
    r.margin = r.infimum - omega[3] - kRegionGuard;
    r.member = r.margin > 0.0;
    return r;
}

PathTable4 make_path_table_4(const PhaseParams& p, double gap, int samples) {
    require_n(p, 4);
    require_gap(p, gap);
    if (samples < 2) throw ArgumentError("at least two samples are required");
    PathTable4 table;
    table.gap = gap;
    table.t.resize(static_cast<std::size_t>(samples));
    table.one_minus_c2.resize(table.t.size());
    table.unit_margin.resize(table.t.size());
    for (int i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        const auto k = static_cast<std::size_t>(i);
        table.t[k] = t;
        table.one_minus_c2[k] = path_one_minus_c2(p, gap, t);
        table.unit_margin[k] = path_unit_margin(p, gap, t);
    }
    return table;
}

RegionResult region_test_4_table(const IntersectionNumbers& omega, const PhaseParams& p, const PathTable4& table) {
    require_n(p, 4);
    validate_omega(omega, p);
    auto bracket_from = [&](double t, double one_minus_c2, double unit) {
        return p.tan * (6.0 * one_minus_c2 * omega[2] + unit * omega[4]) / (8.0 * (1.0 - t));
    };
    double best = kInf;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < table.t.size(); ++i) {
        const double v = bracket_from(table.t[i], table.one_minus_c2[i], table.unit_margin[i]);
        if (v < best) {
            best = v;
            best_i = i;
        }
    }
    const double samples = static_cast<double>(table.t.size());
    const double lo = best_i == 0 ? 0.0 : (static_cast<double>(best_i) - 1.0) / samples;
    const double hi = std::min((static_cast<double>(best_i) + 1.0) / samples, std::nextafter(1.0, 0.0));
    double at = table.t[best_i];
    auto bracket = [&](double t) {
        return bracket_from(t, path_one_minus_c2(p, table.gap, t), path_unit_margin(p, table.gap, t));
    };
    double x = at;
    const double refined = golden_minimize(bracket, lo, hi, 80, x);
    if (refined < best) {
        best = refined;
        at = x;
    }
    RegionResult r;
    r.infimum = best;
    r.argmin_t = at;
    r.margin = best - omega[3] - kRegionGuard;
    r.member = r.margin > 0.0;
    return r;
}

RegionResult region_test_4_gap(const IntersectionNumbers& omega, const PhaseParams& p, double gap, int samples) {
    return region_test_4_table(omega, p, make_path_table_4(p, gap, samples));
}

RegionResult region_test_4(const IntersectionNumbers& omega, const PhaseParams& p, double ell, int samples) {
    require_n(p, 4);
    if (!std::isfinite(ell) || ell < 1.0 || !(ell < neg_sec(p))) {
        throw ArgumentError("path parameter ell must lie in [1, -sec(theta_hat))");
    }
    return region_test_4_gap(omega, p, neg_sec(p) - ell, samples);
}

double schedule_gap(const PhaseParams& p, int k) {
    require_n(p, 4);
    if (k < 1) throw ArgumentError("schedule depth starts at 1");
    return std::ldexp(neg_sec(p) - 1.0, -k);
}

EllSchedule make_ell_schedule(const PhaseParams& p, int depth, int samples) {
    require_n(p, 4);
    if (depth < 1) throw ArgumentError("schedule depth must be positive");
    EllSchedule schedule;
    schedule.phase = p;
    schedule.tables.reserve(static_cast<std::size_t>(depth));
    for (int k = 1; k <= depth; ++k) schedule.tables.push_back(make_path_table_4(p, schedule_gap(p, k), samples));
    return schedule;
}

std::vector<double> ell_preconditions(const IntersectionNumbers& omega, const PhaseParams& p) {
    require_n(p, 4);
    validate_omega(omega, p);
    return {omega[2] - p.csc2 * omega[4], 3.0 * omega[2] - 6.0 * p.cot * omega[3] + p.k4 * omega[4],
            p.sin * p.sin * omega[0] - omega[2]};
}

EllCertificate ell_search(const IntersectionNumbers& omega, const PhaseParams& p, int depth, int samples) {
    return ell_search(omega, make_ell_schedule(p, depth, samples));
}

EllCertificate ell_search(const IntersectionNumbers& omega, const EllSchedule& schedule) {
    const PhaseParams& p = schedule.phase;
    const auto pre = ell_preconditions(omega, p);
    for (double margin : pre) {
        if (!(margin > 0.0)) throw RefusalError("intersection numbers are not consistent with a C-subsolution");
    }
    const double top = p.sin * p.sin * omega[0];
    const double denom = p.k4 * omega[4];
    for (std::size_t k = 0; k < schedule.tables.size(); ++k) {
        const PathTable4& table = schedule.tables[k];
        const double c2_start = 1.0 - table.one_minus_c2[0];
        const double c0_start = (top - 6.0 * c2_start * omega[2]) / denom;
        if (!(c0_start >= 0.0)) continue;
        double worst = kInf;
        for (std::size_t i = 0; i < table.t.size(); ++i) {
            const double rest = 1.0 - table.t[i];
            const double q = 6.0 * table.one_minus_c2[i] * omega[2] + table.unit_margin[i] * omega[4] -
                             (4.0 * rest * omega[2] + 4.0 / 3.0 * rest * p.k4 * omega[4]);
            worst = std::min(worst, q);
            if (!(q > 0.0)) break;
        }
        if (worst > 0.0) {
            EllCertificate cert;
            cert.depth = static_cast<int>(k) + 1;
            cert.gap = table.gap;
            cert.ell = neg_sec(p) - table.gap;
            cert.margin = worst;
            cert.c0_at_zero = c0_start;
            return cert;
        }
    }
    throw RefusalError("no path parameter in the schedule satisfies the certificate");
}

IntersectionNumbers synthetic_csub_omega(const PhaseParams& p, std::mt19937_64& rng, int pieces) {
    if (pieces < 3) throw ArgumentError("at least three pieces are required");
    const int n = p.n;
    const LevelSpec level = original_level(p);
    const double scale = std::sqrt((n == 3 ? level.c1 : level.c2) / level.h);
    const auto coeffs = expand_dhym_coefficients(p);
    std::uniform_real_distribution<double> log_uniform(std::log(0.3), std::log(30.0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> spread(0.0, 0.5);

    std::vector<std::vector<double>> tuples;
    std::vector<double> values;
    for (int j = 0; j < pieces; ++j) {
        // side 0: on the level set, 1: beyond it (positive polynomial), 2: inside it (negative polynomial)
        const int side = j % 3;
        bool accepted = false;
        for (int attempt = 0; attempt < 100000 && !accepted; ++attempt) {
            std::vector<double> rest(static_cast<std::size_t>(n - 1));
            for (double& v : rest) v = scale * std::exp(log_uniform(rng));
            if (!rest_in_projected_cone(rest, level, p)) continue;
            double lambda1 = 0.0;
            try {
                lambda1 = solve_lambda1(rest, level, p);
            } catch (const std::runtime_error&) {
                continue;
            }
            if (side == 1) lambda1 *= std::exp(std::abs(spread(rng)));
            if (side == 2) lambda1 *= std::exp(-std::abs(spread(rng)));
            std::vector<double> tuple{lambda1};
            tuple.insert(tuple.end(), rest.begin(), rest.end());
            std::shuffle(tuple.begin(), tuple.end(), rng);
            const EigenTuple lambda{std::span<const double>(tuple)};
            if (!(csub_margin(lambda, level, p) > 0.0)) continue;
            const double value = evaluate_monomial_form(coeffs, tuple);
            if (side == 1 && !(value > 0.0)) continue;
            if (side == 2 && !(value < 0.0)) continue;
            tuples.push_back(std::move(tuple));
            values.push_back(value);
            accepted = true;
        }
        if (!accepted) throw RefusalError("could not generate a C-subsolution piece");
    }

    std::vector<double> weights(tuples.size());
    double positive = 0.0;
    double negative = 0.0;
    for (std::size_t j = 0; j < tuples.size(); ++j) {
        weights[j] = 0.1 + 0.9 * unit(rng);
        if (values[j] > 0.0) positive += weights[j] * values[j];
        if (values[j] < 0.0) negative -= weights[j] * values[j];
    }
    for (std::size_t j = 0; j < tuples.size(); ++j) {
        if (values[j] < 0.0) weights[j] *= positive / negative;
    }
    double total = 0.0;
    for (double w : weights) total += w;

    IntersectionNumbers omega;
    omega.omega.assign(static_cast<std::size_t>(n + 1), 0.0);
    for (std::size_t j = 0; j < tuples.size(); ++j) {
        const auto sig = sigma_all(tuples[j]);
        for (int k = 0; k <= n; ++k) {
            double binom = 1.0;
            for (int i = 1; i <= k; ++i) binom = binom * (n - k + i) / i;
            omega.omega[static_cast<std::size_t>(k)] += weights[j] / total * sig[static_cast<std::size_t>(n - k)] / binom;
        }
    }
    return omega;
}

std::vector<double> default_sweep_phases(int n) {
    if (n == 3) return {0.52 * kPi, 0.6 * kPi, 2.0 * kPi / 3.0, 0.8 * kPi};
    if (n == 4) return {1.02 * kPi, 1.1 * kPi, 7.0 * kPi / 6.0, 1.22 * kPi};
    throw ArgumentError("dimension must be 3 or 4");
}

SweepReport csub_sweep(int n, const std::vector<double>& phases_in, int trials, std::uint64_t seed,
                       int constraint_samples) {
    if (trials <= 0) throw ArgumentError("trials must be positive");
    const std::vector<double> phase_values = phases_in.empty() ? default_sweep_phases(n) : phases_in;
    std::vector<PhaseParams> phases;
    for (double th : phase_values) phases.push_back(make_phase(n, th));

    // Omega-independent data per phase, shared read-only by all workers.
    std::vector<double> factors(phases.size(), 0.0);
    std::vector<double> argmins(phases.size(), 0.0);
    std::vector<EllSchedule> schedules(phases.size());
    for (std::size_t i = 0; i < phases.size(); ++i) {
        if (n == 3) {
            factors[i] = region3_infimum_factor(phases[i], kRegionSamples, &argmins[i]);
        } else {
            schedules[i] = make_ell_schedule(phases[i]);
        }
    }

    constexpr int kChunk = 250;
    const auto chunks = static_cast<std::size_t>((trials + kChunk - 1) / kChunk);
    SweepReport report;
    report.trials = trials;
    report.min_region_margin = kInf;
    report.min_psatz_margin = kInf;
    report.min_certificate_margin = kInf;
    std::mutex merge_mutex;

    parallel_chunks(chunks, [&](std::size_t chunk) {
        std::mt19937_64 rng = chunk_rng(seed, chunk);
        SweepReport local;
        local.min_region_margin = kInf;
        local.min_psatz_margin = kInf;
        local.min_certificate_margin = kInf;
        const int begin = static_cast<int>(chunk) * kChunk;
        const int end = std::min(trials, begin + kChunk);
        for (int trial = begin; trial < end; ++trial) {
            const std::size_t which = static_cast<std::size_t>(trial) % phases.size();
            const PhaseParams& p = phases[which];
            const IntersectionNumbers omega = synthetic_csub_omega(p, rng);
            auto note = [&](const std::string& what) {
                if (local.failures.size() < 5) {
                    local.failures.push_back("trial " + std::to_string(trial) + " theta_hat " +
                                             std::to_string(p.theta_hat) + ": " + what);
                }
            };
            RegionResult region;
            PathSpec path;
            if (n == 3) {
                region = region_test_3(omega, p, factors[which], argmins[which]);
                path = plan_path_3(omega, p);
            } else {
                EllCertificate cert;
                try {
                    cert = ell_search(omega, schedules[which]);
                } catch (const RefusalError& e) {
                    ++local.search_failures;
                    note(e.what());
                    continue;
                }
                local.max_depth = std::max(local.max_depth, cert.depth);
                local.min_certificate_margin = std::min(local.min_certificate_margin, cert.margin);
                region = region_test_4_table(omega, p, schedules[which].tables[static_cast<std::size_t>(cert.depth - 1)]);
                path = plan_path_4_gap(omega, p, cert.gap);
            }
            local.min_region_margin = std::min(local.min_region_margin, region.margin);
            if (!region.member) {
                ++local.region_failures;
                note("region margin " + std::to_string(region.margin));
            }
            const ConstraintReport constraints = check_constraints(path, constraint_samples);
            for (const auto& c : constraints.constraints) {
                if (c.name == "positivstellensatz") local.min_psatz_margin = std::min(local.min_psatz_margin, c.margin);
                if (!c.pass) note("constraint " + c.name + " margin " + std::to_string(c.margin));
            }
            if (!constraints.pass) ++local.constraint_failures;
        }
        std::lock_guard<std::mutex> lock(merge_mutex);
        report.region_failures += local.region_failures;
        report.constraint_failures += local.constraint_failures;
        report.search_failures += local.search_failures;
        report.min_region_margin = std::min(report.min_region_margin, local.min_region_margin);
        report.min_psatz_margin = std::min(report.min_psatz_margin, local.min_psatz_margin);
        report.min_certificate_margin = std::min(report.min_certificate_margin, local.min_certificate_margin);
        report.max_depth = std::max(report.max_depth, local.max_depth);
        for (auto& f : local.failures) {
            if (report.failures.size() < 10) report.failures.push_back(std::move(f));
        }
    });
    report.pass = report.region_failures == 0 && report.constraint_failures == 0 && report.search_failures == 0;
    return report;
}

SweepReport csub_implies_region_3(const PhaseParams& p, int trials, std::uint64_t seed) {
    require_n(p, 3);
    return csub_sweep(3, {p.theta_hat}, trials, seed);
}

void write_path_csv(std::ostream& out, const std::vector<PathPoint>& points) {
    const auto old_precision = out.precision();
    out << std::setprecision(17);
    out << "t,c2,c1,c0,topological_residual,psatz_margin,upsilon_margins\n";
    for (const auto& pt : points) {
        out << pt.t << ',';
        if (std::isnan(pt.c2)) {
            out << "nan";
        } else {
            out << pt.c2;
        }
        out << ',' << pt.c1 << ',' << pt.c0 << ',' << pt.topological_residual << ',' << pt.psatz_margin << ',';
        for (std::size_t k = 0; k < pt.upsilon_margins.size(); ++k) {
            if (k) out << ';';
            out << pt.upsilon_margins[k];
        }
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace dhym
