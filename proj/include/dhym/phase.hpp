#pragma once

#include <vector>

#include "dhym/symmetric.hpp"

namespace dhym {

/// Dimension, target phase and the trigonometric constants derived from it.
/// n = 3 requires theta_hat in (pi/2, 5pi/6); n = 4 requires theta_hat in (pi, 5pi/4).
struct PhaseParams {
    int n = 4;
    double theta_hat = 0.0;
    double sin = 0.0;
    double cos = 0.0;
    double tan = 0.0;
    double cot = 0.0;
    double sec2 = 0.0;
    double csc2 = 0.0;
    double k4 = 0.0;   ///< 3 csc^2 - 4, the constant term weight in dimension 4

    /// Level of the original equation: cos^2 (n = 3) or sin^2 (n = 4).
    double default_level() const { return n == 3 ? cos * cos : sin * sin; }
};

/// Lower and upper end of the admissible open interval for theta_hat.
double phase_interval_lower(int n);
double phase_interval_upper(int n);

/// Validates n and theta_hat and fills the derived constants.
PhaseParams make_phase(int n, double theta_hat);

/// The phase of the constant diagonal solution, shifted to the substituted variable:
/// tan(theta_hat / n) - tan(theta_hat) for n = 3, tan(theta_hat / n) + cot(theta_hat) for n = 4.
double diagonal_eigenvalue(const PhaseParams& p);

/// Level h and path coefficients at one parameter value. For n = 3 only c1 and c0 are used.
struct LevelSpec {
    double h = 0.0;
    double t = 1.0;
    double c2 = 1.0;
    double c1 = 1.0;
    double c0 = 1.0;
};

/// Level spec of the original equation at t = 1.
LevelSpec original_level(const PhaseParams& p);

/// Largest admissible level: c1^3 cot^2 / c0^2 (n = 3) or c2^3 tan^2 / c1^2 (n = 4); infinity if undefined.
double level_upper_bound(const LevelSpec& spec, const PhaseParams& p);

/// Branch angle attached to a level spec in dimension 4:
/// arccos_branch(-c1 cot sqrt(h) / c2^{3/2}) / 3 - 2pi/3.
double level_theta(const LevelSpec& spec, const PhaseParams& p);

/// Margin of the dimension-4 constant-term condition c0 (3csc^2 - 4) h + 24 c2^2 cos^2(theta) cos(2 theta).
double level_constant_margin(const LevelSpec& spec, const PhaseParams& p);

/// True iff the level spec satisfies the admissibility conditions for its dimension.
bool level_is_valid(const LevelSpec& spec, const PhaseParams& p);

/// Throws ArgumentError when the level spec is not admissible.
void require_valid_level(const LevelSpec& spec, const PhaseParams& p);

/// Cones of the C-subsolution set at the given level (the innermost cone of the nested chain).
std::vector<ConeSpec> csub_cones(const LevelSpec& spec, const PhaseParams& p);

/// Cones of each link of the nested chain, innermost first (two links for n = 3, three for n = 4).
std::vector<std::vector<ConeSpec>> chain_cones(const LevelSpec& spec, const PhaseParams& p);

/// Verdicts for each link of the nested chain.
struct ChainReport {
    std::vector<bool> member;
    std::vector<double> margin;
    bool monotone = true;   ///< no link contains the point while a larger link does not
};

/// Evaluates membership in every link of the nested cone chain; requires an admissible level.
ChainReport nested_cone_chain(const EigenTuple& lambda, const PhaseParams& p, const LevelSpec& spec);

}  // namespace dhym
