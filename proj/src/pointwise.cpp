#include "dhym/pointwise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "dhym/errors.hpp"

namespace dhym {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void require_dimension(const EigenTuple& lambda, const PhaseParams& p) {
    if (lambda.size() != p.n) {
        throw ArgumentError("eigenvalue tuple has " + std::to_string(lambda.size()) + " entries, expected " +
                            std::to_string(p.n));
    }
}

void require_nonzero(const EigenTuple& lambda) {
    for (int i = 0; i < lambda.size(); ++i) {
        if (lambda[i] == 0.0) throw DomainError("level-set function undefined at a zero eigenvalue");
    }
}

double product(std::span<const double> values) {
    double r = 1.0;
    for (double v : values) r *= v;
    return r;
}

// Values of lambda with the listed indices removed.
std::vector<double> without(const EigenTuple& lambda, std::initializer_list<int> skip) {
    std::vector<double> out;
    for (int i = 0; i < lambda.size(); ++i) {
        if (std::find(skip.begin(), skip.end(), i) == skip.end()) out.push_back(lambda[i]);
    }
    return out;
}

double relative_gap(double a, double b, double scale) {
    const double s = std::max({std::abs(a), std::abs(b), scale, std::numeric_limits<double>::min()});
    return std::abs(a - b) / s;
}

// Closed-form dimension-4 factors for the pair (i, j) with eliminated index e and remaining index o.
void dimension4_factors(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p, int i, int j, int o,
                        int e, double& r1, double& r2) {
    const double l1 = lambda[i], l2 = lambda[j], l3 = lambda[o], l4 = lambda[e];
    const double c2 = spec.c2, c1 = spec.c1, c0 = spec.c0, cot = p.cot, k = p.k4;
    const std::array<double, 4> all{l1, l2, l3, l4};
    const double s1 = l1 + l2 + l3 + l4;
    const double s2 = sigma_k(all, 2);
    const std::array<double, 3> no3{l1, l2, l4};
    const double s2_no3 = sigma_k(no3, 2);
    r1 = c2 * c2 * (l3 * s2 + l1 * l2 * l4) - 2.0 * c1 * c2 * cot * (l3 * s1 + s2) + 4.0 * c1 * c1 * cot * cot * s1 +
         c0 * c2 * k * l3 - 2.0 * c0 * c1 * cot * k;
    const double ee = s2 - 3.0 * l4 * (l3 + l4);
    const double aa = s2_no3 - 3.0 * l4 * l4;
    const double bb = l1 + l2 - 2.0 * l4;
    r2 = c2 * c2 * (l3 * aa * s2 + l1 * l2 * l4 * ee) + 4.0 * c1 * c1 * cot * cot * s1 * ee + c0 * c0 * k * k * bb -
         2.0 * c1 * c2 * cot * (s2 * ee + s1 * l3 * aa + l1 * l2 * l4 * bb) + c0 * c2 * k * (s2 * bb + l3 * aa) -
         2.0 * c0 * c1 * cot * k * (s1 * bb + ee);
}

// Reduced quadratic form coefficients for the pair (i, j) after eliminating e through the tangent constraint.
struct ReducedPair {
    double a11, a22, b;
};

ReducedPair reduce_pair(const Eigen::VectorXd& g, const Eigen::MatrixXd& hs, int i, int j, int e) {
    const double fi = g(i), fj = g(j), fe = g(e);
    ReducedPair r{};
    r.a11 = hs(i, i) + hs(e, e) * fi * fi / (fe * fe) - 2.0 * hs(i, e) * fi / fe;
    r.a22 = hs(j, j) + hs(e, e) * fj * fj / (fe * fe) - 2.0 * hs(j, e) * fj / fe;
    r.b = hs(i, j) + hs(e, e) * fi * fj / (fe * fe) - hs(i, e) * fj / fe - hs(j, e) * fi / fe;
    return r;
}

}  // namespace

std::vector<double> expand_dhym_coefficients(const PhaseParams& p) {
    if (p.n == 3) return {p.cos * p.cos, 0.0, -3.0, -2.0 * p.tan};
    if (p.n == 4) return {p.sin * p.sin, 0.0, -6.0, 8.0 * p.cot, -p.k4};
    throw ArgumentError("dimension must be 3 or 4");
}

std::vector<double> expand_dhym_coefficients_symbolic(const PhaseParams& p) {
    if (p.n != 3 && p.n != 4) throw ArgumentError("dimension must be 3 or 4");
    const int n = p.n;
    const double shift = n == 3 ? std::tan(p.theta_hat) : -1.0 / std::tan(p.theta_hat);
    const std::complex<double> base(1.0, shift);
    const std::complex<double> unit(0.0, 1.0);
    const std::complex<double> rotate = std::polar(1.0, -p.theta_hat);
    // prod_j (base + i lambda_j) = sum_k i^k base^{n-k} sigma_k(lambda); the phase condition is the vanishing of
    // the imaginary part after rotating by -theta_hat.
    std::vector<double> coeffs(static_cast<std::size_t>(n + 1));
    for (int m = 0; m <= n; ++m) {
        const int k = n - m;
        const std::complex<double> term = rotate * std::pow(unit, k) * std::pow(base, n - k);
        coeffs[static_cast<std::size_t>(m)] = term.imag() * binomial(n, k);
    }
    const double scale = -binomial(n, 2) / coeffs[2];
    for (double& c : coeffs) c *= scale;
    return coeffs;
}

double evaluate_monomial_form(const std::vector<double>& coeffs, std::span<const double> lambda) {
    const int n = static_cast<int>(lambda.size());
    if (static_cast<int>(coeffs.size()) != n + 1) throw ArgumentError("coefficient vector length must be n + 1");
    const auto sig = sigma_all(lambda);
    double total = 0.0;
    for (int m = 0; m <= n; ++m) total += coeffs[static_cast<std::size_t>(m)] * sig[static_cast<std::size_t>(n - m)] / binomial(n, m);
    return total;
}

EigenTuple chi_to_x(const EigenTuple& mu, const PhaseParams& p) {
    require_dimension(mu, p);
    EigenTuple out = mu;
    const double shift = p.n == 3 ? -p.tan : p.cot;
    for (int i = 0; i < out.size(); ++i) out[i] += shift;
    return out;
}

EigenTuple x_to_chi(const EigenTuple& lambda, const PhaseParams& p) {
    require_dimension(lambda, p);
    EigenTuple out = lambda;
    const double shift = p.n == 3 ? p.tan : -p.cot;
    for (int i = 0; i < out.size(); ++i) out[i] += shift;
    return out;
}

double level_numerator(std::span<const double> values, const LevelSpec& spec, const PhaseParams& p) {
    const double s1 = sigma_k(values, 1);
    if (p.n == 3) return spec.c1 * s1 + 2.0 * spec.c0 * p.tan;
    const double s2 = values.size() >= 2 ? sigma_k(values, 2) : 0.0;
    return spec.c2 * s2 - 2.0 * spec.c1 * p.cot * s1 + spec.c0 * p.k4;
}

double f_eval(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p) {
    require_dimension(lambda, p);
    require_nonzero(lambda);
    return level_numerator(lambda.values(), spec, p) / product(lambda.values());
}

Eigen::VectorXd f_gradient(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p) {
    require_dimension(lambda, p);
    require_nonzero(lambda);
    const double prod = product(lambda.values());
    Eigen::VectorXd g(p.n);
    for (int i = 0; i < p.n; ++i) g(i) = -level_numerator(without(lambda, {i}), spec, p) / (prod * lambda[i]);
    return g;
}

Eigen::MatrixXd f_hessian(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p) {
    require_dimension(lambda, p);
    require_nonzero(lambda);
    const double prod = product(lambda.values());
    Eigen::MatrixXd hs(p.n, p.n);
    for (int i = 0; i < p.n; ++i) {
        hs(i, i) = 2.0 * level_numerator(without(lambda, {i}), spec, p) / (prod * lambda[i] * lambda[i]);
        for (int j = i + 1; j < p.n; ++j) {
            const double v = level_numerator(without(lambda, {i, j}), spec, p) / (prod * lambda[i] * lambda[j]);
            hs(i, j) = v;
            hs(j, i) = v;
        }
    }
    return hs;
}

double lambda1_denominator(std::span<const double> rest, const LevelSpec& spec, const PhaseParams& p) {
    if (static_cast<int>(rest.size()) != p.n - 1) throw ArgumentError("rest must hold n - 1 eigenvalues");
    if (p.n == 3) return spec.h * rest[0] * rest[1] - spec.c1;
    return spec.h * rest[0] * rest[1] * rest[2] - spec.c2 * sigma_k(rest, 1) + 2.0 * spec.c1 * p.cot;
}

bool rest_in_projected_cone(std::span<const double> rest, const LevelSpec& spec, const PhaseParams& p) {
    if (static_cast<int>(rest.size()) != p.n - 1) throw ArgumentError("rest must hold n - 1 eigenvalues");
    for (double v : rest) {
        if (!(v > 0.0)) return false;
    }
    if (!(lambda1_denominator(rest, spec, p) > 0.0)) return false;
    if (p.n == 4) {
        for (std::size_t i = 0; i < rest.size(); ++i) {
            for (std::size_t j = i + 1; j < rest.size(); ++j) {
                if (!(spec.h * rest[i] * rest[j] > spec.c2)) return false;
            }
        }
    }
    return true;
}

double solve_lambda1(std::span<const double> rest, const LevelSpec& spec, const PhaseParams& p) {
    const double den = lambda1_denominator(rest, spec, p);
    double num = 0.0;
    double scale = 0.0;
    if (p.n == 3) {
        num = spec.c1 * (rest[0] + rest[1]) + 2.0 * spec.c0 * p.tan;
        scale = std::abs(spec.h * rest[0] * rest[1]) + std::abs(spec.c1);
    } else {
        num = spec.c2 * sigma_k(rest, 2) - 2.0 * spec.c1 * p.cot * sigma_k(rest, 1) + spec.c0 * p.k4;
        scale = std::abs(spec.h * rest[0] * rest[1] * rest[2]) + std::abs(spec.c2 * sigma_k(rest, 1)) +
                std::abs(2.0 * spec.c1 * p.cot);
    }
    if (std::abs(den) <= 1e-14 * scale) throw SingularError("rest tuple lies on the asymptote of the level set");
    if (!rest_in_projected_cone(rest, spec, p)) {
        throw NoSolutionError("rest tuple lies outside the component containing large diagonal tuples");
    }
    const double lambda1 = num / den;
    if (!(lambda1 > 0.0)) throw NoSolutionError("level-set root is not positive");
    return lambda1;
}

EllipticityReport ellipticity_check(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p,
                                    double tolerance) {
    require_valid_level(spec, p);
    const double f = f_eval(lambda, spec, p);
    if (!(std::abs(f - spec.h) < tolerance)) {
        throw ArgumentError("point is not on the level set: |f - h| = " + std::to_string(std::abs(f - spec.h)));
    }
    const Eigen::VectorXd g = f_gradient(lambda, spec, p);
    EllipticityReport r;
    r.min_neg_gradient = (-g).minCoeff();
    r.elliptic = r.min_neg_gradient > 0.0;
    return r;
}

ConvexityReport convexity_check(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p,
                                int n_tangents, std::uint64_t seed, double tolerance) {
    require_valid_level(spec, p);
    if (n_tangents < 0) throw ArgumentError("n_tangents must be nonnegative");
    const double f = f_eval(lambda, spec, p);
    if (!(std::abs(f - spec.h) < tolerance)) {
        throw ArgumentError("point is not on the level set: |f - h| = " + std::to_string(std::abs(f - spec.h)));
    }
    const int n = p.n;
    const Eigen::VectorXd g = f_gradient(lambda, spec, p);
    const Eigen::MatrixXd hs = f_hessian(lambda, spec, p);

    // Orthonormal basis of the tangent hyperplane: trailing columns of the Householder Q of the gradient.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd basis = q.rightCols(n - 1);
    const Eigen::MatrixXd reduced = basis.transpose() * hs * basis;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced, Eigen::EigenvaluesOnly);

    ConvexityReport report;
    report.min_eigenvalue = eig.eigenvalues().minCoeff();
    report.min_sampled = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n - 1; ++k) report.min_sampled = std::min(report.min_sampled, reduced(k, k));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 0; s < n_tangents; ++s) {
        Eigen::VectorXd w(n - 1);
        for (int k = 0; k < n - 1; ++k) w(k) = normal(rng);
        const double norm = w.norm();
        if (norm == 0.0) continue;
        w /= norm;
        report.min_sampled = std::min(report.min_sampled, w.dot(reduced * w));
    }

    // Eliminate the smallest eigenvalue's coordinate.
    int e = 0;
    for (int i = 1; i < n; ++i) {
        if (lambda[i] < lambda[e]) e = i;
    }
    std::vector<int> keep;
    for (int i = 0; i < n; ++i) {
        if (i != e) keep.push_back(i);
    }
    const double full_num = level_numerator(lambda.values(), spec, p);
    bool signs_agree = true;
    if (n == 3) {
        const int i = keep[0], j = keep[1];
        const double l1 = lambda[i], l2 = lambda[j], l3 = lambda[e];
        const double s1 = l1 + l2 + l3;
        const double s2 = l1 * l2 + l1 * l3 + l2 * l3;
        report.quadratic_q = spec.c1 * spec.c1 * s2 + 2.0 * spec.c0 * spec.c1 * p.tan * s1 +
                             3.0 * spec.c0 * spec.c0 * p.tan * p.tan;
        const ReducedPair rp = reduce_pair(g, hs, i, j, e);
        PairDiscriminant d;
        d.first = i;
        d.second = j;
        d.eliminated = e;
        d.numeric = rp.b * rp.b - rp.a11 * rp.a22;
        const double ratio = full_num / level_numerator(without(lambda, {e}), spec, p);
        d.formula = -4.0 * report.quadratic_q / (std::pow(l1, 4) * std::pow(l2, 4) * l3 * l3) * ratio * ratio;
        report.identity_residual =
            relative_gap(d.numeric, d.formula, std::max(rp.b * rp.b, std::abs(rp.a11 * rp.a22)));
        const bool predicted_psd = report.quadratic_q >= 0.0;
        signs_agree = predicted_psd == (report.min_eigenvalue >= -tolerance);
        report.pairs.push_back(d);
    } else {
        for (std::size_t a = 0; a < keep.size(); ++a) {
            for (std::size_t b = a + 1; b < keep.size(); ++b) {
                const int i = keep[a], j = keep[b];
                const int o = keep[3 - a - b];
                const ReducedPair rp = reduce_pair(g, hs, i, j, e);
                PairDiscriminant d;
                d.first = i;
                d.second = j;
                d.eliminated = e;
                const double cross = 2.0 * rp.b;
                d.numeric = cross * cross - rp.a11 * rp.a22;
                dimension4_factors(lambda, spec, p, i, j, o, e, d.r1, d.r2);
                const double scale = std::pow(lambda[i], 6) * std::pow(lambda[j], 6) * std::pow(lambda[o], 4) *
                                     std::pow(lambda[e], 6) * g(e) * g(e);
                d.formula = -4.0 * d.r1 * d.r2 / scale;
                report.identity_residual =
                    std::max(report.identity_residual,
                             relative_gap(d.numeric, d.formula, std::max(cross * cross, std::abs(rp.a11 * rp.a22))));
                report.pairs.push_back(d);
            }
        }
    }
    report.consistent = report.identity_residual < 1e-6 && signs_agree;
    return report;
}

double csub_margin(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p) {
    require_dimension(lambda, p);
    return intersection_membership(lambda, csub_cones(spec, p)).margin;
}

bool csub_check(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p) {
    require_valid_level(spec, p);
    return csub_margin(lambda, spec, p) > 0.0;
}

double substitution_residual(const EigenTuple& mu, const PhaseParams& p) {
    const EigenTuple lambda = chi_to_x(mu, p);
    const auto coeffs = expand_dhym_coefficients(p);
    const auto sig = sigma_all(lambda.values());
    double total = 0.0;
    double scale = 0.0;
    for (int m = 0; m <= p.n; ++m) {
        const double term = coeffs[static_cast<std::size_t>(m)] * sig[static_cast<std::size_t>(p.n - m)] / binomial(p.n, m);
        total += term;
        scale += std::abs(term);
    }
    return scale > 0.0 ? std::abs(total) / scale : std::abs(total);
}

double complete_phase_tuple(std::span<const double> first, double theta_hat) {
    double remaining = theta_hat;
    for (double v : first) remaining -= std::atan(v);
    if (!(std::abs(remaining) < kHalfPi)) throw NoSolutionError("remaining phase is outside (-pi/2, pi/2)");
    return std::tan(remaining);
}

SubstitutionReport verify_substitution_identity(const PhaseParams& p, int trials, std::uint64_t seed,
                                                double tolerance) {
    if (trials <= 0) throw ArgumentError("trials must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-kHalfPi + 0.05, kHalfPi - 0.05);
    SubstitutionReport report;
    while (report.trials < trials) {
        std::vector<double> mu(static_cast<std::size_t>(p.n));
        double remaining = p.theta_hat;
        for (int i = 0; i + 1 < p.n; ++i) {
            const double a = angle(rng);
            mu[static_cast<std::size_t>(i)] = std::tan(a);
            remaining -= a;
        }
        if (!(std::abs(remaining) < kHalfPi - 0.05)) continue;
        mu.back() = std::tan(remaining);
        const double r = substitution_residual(EigenTuple(std::span<const double>(mu)), p);
        report.max_residual = std::max(report.max_residual, r);
        ++report.trials;
    }
    report.pass = report.max_residual < tolerance;
    return report;
}

}  // namespace dhym
