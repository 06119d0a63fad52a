#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "dhym/phase.hpp"

namespace dhym {

/// Intersection numbers Omega_0..Omega_n of a background class against the Kaehler class.
/// Omega_k is the integral of w^k X^{n-k}; on eigenvalues it is the volume times the mean of sigma_{n-k}/binom(n,k).
struct IntersectionNumbers {
    std::vector<double> omega;

    int n() const { return static_cast<int>(omega.size()) - 1; }
    double operator[](int k) const { return omega[static_cast<std::size_t>(k)]; }
};

/// Throws ArgumentError unless omega has n + 1 finite entries with Omega_n > 0.
void validate_omega(const IntersectionNumbers& omega, const PhaseParams& p);

/// A planned continuity path. For n = 4 the path family is parametrized by ell in [1, -sec(theta_hat));
/// gap = -sec(theta_hat) - ell is stored separately so that ell close to the upper end stays accurate.
struct PathSpec {
    PhaseParams phase;
    IntersectionNumbers omega;
    double ell = 1.0;
    double gap = 0.0;
};

/// Coefficients and derived quantities at one parameter value.
struct PathPoint {
    double t = 0.0;
    double c2 = 1.0;            ///< unused (NaN) for n = 3
    double c1 = 1.0;
    double c0 = 1.0;
    double dc2 = 0.0;
    double dc1 = 0.0;
    double dc0 = 0.0;
    double one_minus_c2 = 0.0;  ///< 1 - c2 evaluated without cancellation
    double theta = 0.0;         ///< branch angle attached to (c1, c2) for n = 4
    double topological_residual = 0.0;  ///< relative to the Omega_0 term
    double psatz_margin = 0.0;
    std::vector<double> upsilon_margins;
};

/// Path for n = 3: c1(t) solved from the topological identity, c0(t) = t. Throws ArgumentError if Omega_2 <= 0.
PathSpec plan_path_3(const IntersectionNumbers& omega, const PhaseParams& p);

/// Path for n = 4 with parameter ell in [1, -sec(theta_hat)).
PathSpec plan_path_4(const IntersectionNumbers& omega, const PhaseParams& p, double ell);

/// Path for n = 4 given gap = -sec(theta_hat) - ell in (0, -sec(theta_hat) - 1].
PathSpec plan_path_4_gap(const IntersectionNumbers& omega, const PhaseParams& p, double gap);

/// Evaluates coefficients, derivatives and margins at t in [0, 1].
PathPoint path_point(const PathSpec& path, double t);

/// Level spec of the path at t (level h is the original level of the phase).
LevelSpec path_level(const PathSpec& path, double t);

/// One constraint of the report. Strict constraints pass iff margin > 0, non-strict ones iff margin >= 0.
struct ConstraintResult {
    std::string name;
    double margin = 0.0;
    bool strict = true;
    bool pass = false;
};

/// Minimum margins over the sampled t-grid for the topological, boundary, Positivstellensatz and Upsilon-cone
/// constraints.
struct ConstraintReport {
    std::vector<ConstraintResult> constraints;
    bool pass = false;
    double c0_min = 0.0;
    std::vector<PathPoint> samples;   ///< filled when requested
};

/// Tolerance for the topological residual (relative) and the boundary values.
inline constexpr double kTopologicalTolerance = 1e-10;
inline constexpr double kBoundaryTolerance = 1e-10;

/// Samples t uniformly on [0, 1] (both ends included) and evaluates every constraint.
ConstraintReport check_constraints(const PathSpec& path, int t_samples = 1000, bool keep_samples = false);

/// Result of a region test. margin = infimum - Omega_3 - guard, member iff margin > 0.
struct RegionResult {
    bool member = false;
    double margin = 0.0;
    double infimum = 0.0;
    double argmin_t = 0.0;
};

/// Absolute guard subtracted from region margins.
inline constexpr double kRegionGuard = 1e-9;

/// Default number of uniform samples on [0, 1) for region infima.
inline constexpr int kRegionSamples = 10000;

/// Infimum over t in [0, 1) of -3 cot(theta_hat) (1 - t^{2/3} sin^{2/3}(theta_hat)) / (2 (1 - t)) for n = 3.
/// Dense sampling followed by golden-section refinement around the best sample.
double region3_infimum_factor(const PhaseParams& p, int samples = kRegionSamples, double* argmin = nullptr);

/// Region test for n = 3: Omega_3 < factor * Omega_2.
RegionResult region_test_3(const IntersectionNumbers& omega, const PhaseParams& p, int samples = kRegionSamples);
RegionResult region_test_3(const IntersectionNumbers& omega, const PhaseParams& p, double factor, double argmin);

/// Omega-independent quantities of the n = 4 path on the grid t_i = i / samples, i = 0..samples-1.
struct PathTable4 {
    double gap = 0.0;
    std::vector<double> t;
    std::vector<double> one_minus_c2;
    std::vector<double> unit_margin;   ///< Positivstellensatz margin with unit constant coefficient
};

PathTable4 make_path_table_4(const PhaseParams& p, double gap, int samples = kRegionSamples);

/// Region test for n = 4: Omega_3 below the infimum over t in [0, 1) of
/// tan(theta_hat) (6 (1 - c2) Omega_2 + unit_margin Omega_4) / (8 (1 - t)).
RegionResult region_test_4(const IntersectionNumbers& omega, const PhaseParams& p, double ell,
                           int samples = kRegionSamples);
RegionResult region_test_4_gap(const IntersectionNumbers& omega, const PhaseParams& p, double gap,
                               int samples = kRegionSamples);
RegionResult region_test_4_table(const IntersectionNumbers& omega, const PhaseParams& p, const PathTable4& table);

/// Geometric schedule of path parameters: gap_k = (-sec(theta_hat) - 1) / 2^k, k = 1..depth.
double schedule_gap(const PhaseParams& p, int k);

/// Precomputed tables for every depth of the schedule.
struct EllSchedule {
    PhaseParams phase;
    std::vector<PathTable4> tables;   ///< tables[k - 1] belongs to depth k
};

inline constexpr int kScheduleDepth = 40;

EllSchedule make_ell_schedule(const PhaseParams& p, int depth = kScheduleDepth, int samples = kRegionSamples);

/// Certificate returned by ell_search.
struct EllCertificate {
    int depth = 0;
    double ell = 0.0;
    double gap = 0.0;
    double margin = 0.0;       ///< minimum over the grid of the certificate function
    double c0_at_zero = 0.0;
};

/// Margins of the three consequences of a C-subsolution that ell_search relies on:
/// Omega_2 - csc^2 Omega_4, 3 Omega_2 - 6 cot Omega_3 + (3csc^2 - 4) Omega_4, sin^2 Omega_0 - Omega_2.
std::vector<double> ell_preconditions(const IntersectionNumbers& omega, const PhaseParams& p);

/// Walks the schedule and returns the first depth at which
/// 6 (1 - c2) Omega_2 + unit_margin Omega_4 - (4 (1 - t) Omega_2 + (4/3) (1 - t) (3csc^2 - 4) Omega_4) > 0 on
/// the grid and c0(0) >= 0. Throws RefusalError if the preconditions fail or no depth passes.
EllCertificate ell_search(const IntersectionNumbers& omega, const PhaseParams& p, int depth = kScheduleDepth,
                          int samples = kRegionSamples);
EllCertificate ell_search(const IntersectionNumbers& omega, const EllSchedule& schedule);

/// Scalar facts used by the path analysis.
double decreasing_quartic_fact(double t);                                    ///< 1 + 8t - 6t^{2/3} - 3t^{4/3}
double path_theta(const PhaseParams& p, double gap, double t);              ///< branch angle along the n = 4 path
double path_theta_derivative(const PhaseParams& p, double gap, double t);
double path_unit_margin(const PhaseParams& p, double gap, double t);        ///< 3csc^2 - 4 + 24 c2^2 csc^2 cos^2 cos 2
double path_one_minus_c2(const PhaseParams& p, double gap, double t);
double near_start_fact(const PhaseParams& p, double gap, double t);         ///< 2 + 4t - 6 c2(t)
double near_start_coefficient(const PhaseParams& p, double gap, double t);  ///< unit_margin - (4/3)(1 - t)(3csc^2 - 4)

/// Random intersection numbers realized by a piecewise-constant diagonal C-subsolution field whose pieces
/// average to a class satisfying the topological identity at t = 1. Volume is 1.
IntersectionNumbers synthetic_csub_omega(const PhaseParams& p, std::mt19937_64& rng, int pieces = 12);

/// Outcome of a sweep over synthetic intersection numbers.
struct SweepReport {
    int trials = 0;
    int region_failures = 0;
    int constraint_failures = 0;
    int search_failures = 0;
    double min_region_margin = 0.0;
    double min_psatz_margin = 0.0;         ///< smallest Positivstellensatz margin over all sampled paths
    double min_certificate_margin = 0.0;   ///< n = 4 only
    int max_depth = 0;                     ///< n = 4 only
    std::vector<std::string> failures;     ///< descriptions of the first few failures
    bool pass = false;
};

/// Default target phases used by sweeps when none are given.
std::vector<double> default_sweep_phases(int n);

/// For each trial: generate intersection numbers, run the region test, plan the path (n = 4: through ell_search)
/// and check all constraints. Trials cycle through the given phases.
SweepReport csub_sweep(int n, const std::vector<double>& phases, int trials, std::uint64_t seed,
                       int constraint_samples = 1000);

/// The n = 3 sweep restricted to one phase.
SweepReport csub_implies_region_3(const PhaseParams& p, int trials, std::uint64_t seed);

/// Writes sampled path points as CSV: t, c2, c1, c0, topological_residual, psatz_margin, upsilon_margins.
void write_path_csv(std::ostream& out, const std::vector<PathPoint>& points);

}  // namespace dhym
