#include "dhym/phase.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dhym/errors.hpp"
#include "dhym/psatz.hpp"

namespace dhym {

namespace {
constexpr double kPi = std::numbers::pi;
}

double phase_interval_lower(int n) { return (n - 2) * kPi / 2.0; }

double phase_interval_upper(int n) { return ((n - 2) + 2.0 / n) * kPi / 2.0; }

PhaseParams make_phase(int n, double theta_hat) {
    if (n != 3 && n != 4) throw ArgumentError("dimension must be 3 or 4, got " + std::to_string(n));
    if (!std::isfinite(theta_hat) || !(theta_hat > phase_interval_lower(n)) || !(theta_hat < phase_interval_upper(n))) {
        throw ArgumentError("theta_hat outside the admissible interval for dimension " + std::to_string(n));
    }
    PhaseParams p;
    p.n = n;
    p.theta_hat = theta_hat;
    p.sin = std::sin(theta_hat);
    p.cos = std::cos(theta_hat);
    p.tan = p.sin / p.cos;
    p.cot = p.cos / p.sin;
    p.sec2 = 1.0 / (p.cos * p.cos);
    p.csc2 = 1.0 / (p.sin * p.sin);
    p.k4 = 3.0 * p.csc2 - 4.0;
    return p;
}

double diagonal_eigenvalue(const PhaseParams& p) {
    const double mu = std::tan(p.theta_hat / p.n);
    return p.n == 3 ? mu - p.tan : mu + p.cot;
}

LevelSpec original_level(const PhaseParams& p) {
    LevelSpec spec;
    spec.h = p.default_level();
    spec.t = 1.0;
    spec.c2 = 1.0;
    spec.c1 = 1.0;
    spec.c0 = 1.0;
    return spec;
}

double level_upper_bound(const LevelSpec& spec, const PhaseParams& p) {
    if (p.n == 3) {
        if (spec.c0 == 0.0) return std::numeric_limits<double>::infinity();
        return spec.c1 * spec.c1 * spec.c1 * p.cot * p.cot / (spec.c0 * spec.c0);
    }
    if (spec.c1 == 0.0) return std::numeric_limits<double>::infinity();
    return spec.c2 * spec.c2 * spec.c2 * p.tan * p.tan / (spec.c1 * spec.c1);
}

double level_theta(const LevelSpec& spec, const PhaseParams& p) {
    const double x = -spec.c1 * p.cot * std::sqrt(spec.h) / std::pow(spec.c2, 1.5);
    return arccos_branch(x) / 3.0 - 2.0 * kPi / 3.0;
}

double level_constant_margin(const LevelSpec& spec, const PhaseParams& p) {
    const double theta = level_theta(spec, p);
    const double cs = std::cos(theta);
    return spec.c0 * p.k4 * spec.h + 24.0 * spec.c2 * spec.c2 * cs * cs * std::cos(2.0 * theta);
}

bool level_is_valid(const LevelSpec& spec, const PhaseParams& p) {
    if (!(spec.h > 0.0) || !std::isfinite(spec.h)) return false;
    if (p.n == 3) {
        if (!(spec.c1 > 0.0) || !(spec.c0 >= 0.0)) return false;
        return spec.h < level_upper_bound(spec, p);
    }
    if (!(spec.c2 > 0.0) || !(spec.c1 >= 0.0)) return false;
    if (!(spec.h < level_upper_bound(spec, p))) return false;
    return level_constant_margin(spec, p) > 0.0;
}

void require_valid_level(const LevelSpec& spec, const PhaseParams& p) {
    if (!level_is_valid(spec, p)) {
        throw ArgumentError("level h=" + std::to_string(spec.h) + " is not admissible for the given coefficients");
    }
}

std::vector<ConeSpec> csub_cones(const LevelSpec& spec, const PhaseParams& p) {
    const ConeSpec orthant{1, {1.0, 0.0}};
    if (p.n == 3) return {ConeSpec{2, {1.0, 0.0, -spec.c1 / spec.h}}, orthant};
    return {ConeSpec{3, {1.0, 0.0, -spec.c2 / spec.h, 2.0 * spec.c1 * p.cot / spec.h}},
            ConeSpec{2, {1.0, 0.0, -spec.c2 / spec.h}}, orthant};
}

std::vector<std::vector<ConeSpec>> chain_cones(const LevelSpec& spec, const PhaseParams& p) {
    const ConeSpec orthant{1, {1.0, 0.0}};
    if (p.n == 3) return {csub_cones(spec, p), {orthant}};
    return {csub_cones(spec, p), {ConeSpec{2, {1.0, 0.0, -spec.c2 / spec.h}}, orthant}, {orthant}};
}

ChainReport nested_cone_chain(const EigenTuple& lambda, const PhaseParams& p, const LevelSpec& spec) {
    if (lambda.size() != p.n) throw ArgumentError("eigenvalue tuple size does not match the dimension");
    require_valid_level(spec, p);
    ChainReport report;
    for (const auto& link : chain_cones(spec, p)) {
        const ConeVerdict v = intersection_membership(lambda, link);
        report.member.push_back(v.member);
        report.margin.push_back(v.margin);
    }
    for (std::size_t k = 0; k + 1 < report.member.size(); ++k) {
        if (report.member[k] && !report.member[k + 1]) report.monotone = false;
    }
    return report;
}

}  // namespace dhym
