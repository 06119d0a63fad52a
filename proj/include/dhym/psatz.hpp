#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dhym {

/// Parameters (c, d, e) of the sharp containment bounds. c > 0 and d >= 0 always.
struct PsatzParams {
    double c = 1.0;
    double d = 0.0;
    std::optional<double> e;
};

/// Inverse cosine on the branch (pi, 3pi/2] for inputs in [-1, 0].
/// Inputs within 1e-12 outside the interval are clamped; anything further is rejected.
double arccos_branch(double x);

/// Derivative of arccos_branch with respect to its argument (positive inside the interval).
double arccos_branch_derivative(double x);

/// Branch angle arccos_branch(-d / (2 c^{3/2})) / 3 - 2 pi / 3, in [-pi/3, -pi/6].
double theta_cd(const PsatzParams& p);

/// The three real roots B_k = 4 sqrt(c) cos(arccos_branch(-d/(2c^{3/2}))/3 - 2 pi k/3), k = 0, 1, 2,
/// of B^3 - 12 c B + 8 d = 0.
std::array<double, 3> cubic_roots(const PsatzParams& p);

/// Residual B^3 - 12 c B + 8 d of the depressed cubic.
double cubic_residual(const PsatzParams& p, double b);

/// Sharp threshold -24 c^2 cos^2(theta) cos(2 theta): the triple cone containment holds for e above it.
double e_lower_bound(const PsatzParams& p);

/// Closed-form minimum of g(A, B) = c^2 A - c d B + c^3 B^2 / A over the admissible region.
double infimum_closed_form(const PsatzParams& p);

/// Resolution of the numerical minimization in infimum_oracle.
struct OracleResolution {
    int grid_points = 4000;
    double log_span = 8.0;       ///< A is scanned over c * [10^-log_span, 10^log_span]
    int refine_iterations = 200;
};

/// Brute-force minimum of g(A, B) over {A > 0, B >= 2 sqrt(A + c) - d/c}: log-grid scan in A with the
/// exact minimization of the convex quadratic in B, followed by golden-section refinement.
double infimum_oracle(const PsatzParams& p, const OracleResolution& resolution = {});

/// Cone containment claims checked by sampling.
enum class Claim { A, B, C, D, E, F };

Claim parse_claim(const std::string& name);
std::string claim_name(Claim claim);

/// Result of a sampling check of one claim.
struct ContainmentVerdict {
    bool pass = false;
    double worst_margin = 0.0;            ///< smallest conclusion margin seen
    std::vector<double> worst_point;      ///< sample attaining worst_margin
    std::optional<std::vector<double>> witness;  ///< a violating sample, if any
    std::size_t samples_checked = 0;
};

/// Options of containment_check.
struct ContainmentOptions {
    int dimension = 4;
    std::size_t samples = 20000;
    std::uint64_t seed = 7;
    int local_search_starts = 8;
};

/// Monte-Carlo plus boundary-biased sampling of the hypothesis set of one claim. Claims (a), (b), (c),
/// (f) also get coordinate-wise segment tests; claims (b) and (f) get wall-exclusion tests.
ContainmentVerdict containment_check(Claim claim, const PsatzParams& p, const ContainmentOptions& options = {});

}  // namespace dhym
