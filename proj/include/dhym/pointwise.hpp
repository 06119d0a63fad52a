#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "dhym/phase.hpp"
#include "dhym/symmetric.hpp"

namespace dhym {

/// Coefficients of the polynomial form of the phase equation in the substituted variable, listed for the
/// monomials X^n, X^{n-1} w, ..., w^n. Evaluated on eigenvalues, the monomial X^{n-k} w^k becomes
/// sigma_{n-k} / binom(n, k). Closed form.
std::vector<double> expand_dhym_coefficients(const PhaseParams& p);

/// Same coefficients obtained by expanding prod_j (1 + i mu_j) with complex polynomial arithmetic,
/// taking the component orthogonal to exp(i theta_hat) and rescaling so the X^{n-2} w^2 entry is -binom(n,2).
std::vector<double> expand_dhym_coefficients_symbolic(const PhaseParams& p);

/// Evaluates sum_k coeffs[k] sigma_{n-k}(lambda) / binom(n, k) for a coefficient vector in monomial order.
double evaluate_monomial_form(const std::vector<double>& coeffs, std::span<const double> lambda);

/// Shift between phase eigenvalues and substituted eigenvalues: lambda = mu - tan (n = 3), mu + cot (n = 4).
EigenTuple chi_to_x(const EigenTuple& mu, const PhaseParams& p);
EigenTuple x_to_chi(const EigenTuple& lambda, const PhaseParams& p);

/// Numerator of the level-set function: c1 sigma_1 + 2 c0 tan (n = 3) or
/// c2 sigma_2 - 2 c1 cot sigma_1 + c0 (3csc^2 - 4) (n = 4), evaluated on any number of values.
double level_numerator(std::span<const double> values, const LevelSpec& spec, const PhaseParams& p);

/// Level-set function: numerator divided by the product of the eigenvalues.
double f_eval(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p);

/// Closed-form first derivatives f_i = -N(lambda without i) / (P lambda_i).
Eigen::VectorXd f_gradient(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p);

/// Closed-form second derivatives: f_ii = 2 N(lambda without i) / (P lambda_i^2),
/// f_ij = N(lambda without i, j) / (P lambda_i lambda_j).
Eigen::MatrixXd f_hessian(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p);

/// Solves f((lambda_1, rest)) = h for lambda_1 in the component containing large diagonal tuples.
/// Throws SingularError on a vanishing denominator and NoSolutionError when the root leaves the component.
double solve_lambda1(std::span<const double> rest, const LevelSpec& spec, const PhaseParams& p);

/// Denominator of the lambda_1 solve: h l2 l3 - c1 (n = 3) or h l2 l3 l4 - c2 sigma_1(rest) + 2 c1 cot (n = 4).
double lambda1_denominator(std::span<const double> rest, const LevelSpec& spec, const PhaseParams& p);

/// True iff rest lies in the cone obtained from the C-subsolution cones as lambda_1 grows without bound.
bool rest_in_projected_cone(std::span<const double> rest, const LevelSpec& spec, const PhaseParams& p);

/// Absolute tolerance in f for the on-level-set precondition.
inline constexpr double kLevelTolerance = 1e-8;

/// Result of the ellipticity check.
struct EllipticityReport {
    bool elliptic = false;
    double min_neg_gradient = 0.0;   ///< min_i (-f_i)
};

/// Requires an admissible level and |f - h| < tolerance; reports whether every -f_i is positive.
EllipticityReport ellipticity_check(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p,
                                    double tolerance = kLevelTolerance);

/// Discriminant data for one pair of tangent coordinates after eliminating one index.
struct PairDiscriminant {
    int first = 0;
    int second = 0;
    int eliminated = 0;
    double numeric = 0.0;   ///< b^2 - a11 a22 from the Hessian entries
    double formula = 0.0;   ///< closed-form value of the same quantity
    double r1 = 0.0;        ///< dimension 4 only: first factor of the closed form
    double r2 = 0.0;        ///< dimension 4 only: second factor of the closed form
};

/// Result of the convexity check.
struct ConvexityReport {
    double min_sampled = 0.0;        ///< smallest quadratic form value over sampled unit tangents
    double min_eigenvalue = 0.0;     ///< exact smallest value over unit tangents
    double quadratic_q = 0.0;        ///< dimension 3 only: c1^2 s2 + 2 c0 c1 tan s1 + 3 c0^2 tan^2
    std::vector<PairDiscriminant> pairs;
    double identity_residual = 0.0;  ///< largest relative gap between numeric and closed-form discriminants
    bool consistent = false;         ///< identities hold and the discriminant signs agree with the eigenvalue
};

/// Samples unit tangent vectors of the level set (orthonormal basis plus random combinations) and evaluates the
/// Hessian quadratic form on them, together with the closed-form discriminants.
ConvexityReport convexity_check(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p,
                                int n_tangents = 64, std::uint64_t seed = 11, double tolerance = kLevelTolerance);

/// Smallest margin of the C-subsolution cones at eigenvalues of the substituted variable.
double csub_margin(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p);

/// C-subsolution membership of eigenvalues of the substituted variable; requires an admissible level.
bool csub_check(const EigenTuple& lambda, const LevelSpec& spec, const PhaseParams& p);

/// Relative residual of the expanded polynomial at chi_to_x(mu).
double substitution_residual(const EigenTuple& mu, const PhaseParams& p);

/// Result of the substitution identity sweep.
struct SubstitutionReport {
    bool pass = false;
    double max_residual = 0.0;
    int trials = 0;
};

/// For random mu whose last coordinate makes sum arctan mu_i = theta_hat, checks the polynomial vanishes.
SubstitutionReport verify_substitution_identity(const PhaseParams& p, int trials, std::uint64_t seed,
                                                double tolerance = 1e-9);

/// Solves the last phase eigenvalue so that the total phase equals theta_hat; throws NoSolutionError if the
/// required arctangent leaves (-pi/2, pi/2).
double complete_phase_tuple(std::span<const double> first, double theta_hat);

}  // namespace dhym
