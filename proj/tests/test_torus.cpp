#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "dhym/errors.hpp"
#include "dhym/path.hpp"
#include "dhym/phase.hpp"
#include "dhym/pointwise.hpp"
#include "dhym/symmetric.hpp"
#include "dhym/torus.hpp"

using namespace dhym;

namespace {

constexpr double kPi = std::numbers::pi;

PhaseParams phase3() { return make_phase(3, 2.0 * kPi / 3.0); }
PhaseParams phase4() { return make_phase(4, 7.0 * kPi / 6.0); }

std::vector<PotentialMode> small_potential() {
    return {PotentialMode{0.05, {1, 0, 0, 0}, 0.0}, PotentialMode{0.05, {0, 0, 1, 0}, 0.0}};
}

// Evaluates a function of the four grid coordinates on the grid.
template <class Fn>
std::vector<double> sample(int grid, Fn fn) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(grid) * grid * grid * grid);
    for (int a = 0; a < grid; ++a) {
        for (int b = 0; b < grid; ++b) {
            for (int c = 0; c < grid; ++c) {
                for (int d = 0; d < grid; ++d) {
                    out.push_back(fn(grid_coordinate(grid, a), grid_coordinate(grid, b), grid_coordinate(grid, c),
                                     grid_coordinate(grid, d)));
                }
            }
        }
    }
    return out;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

PathSpec diagonal_path(const TorusProblem& problem) {
    const IntersectionNumbers omega = compute_intersection_numbers(problem);
    const PhaseParams& p = problem.phase;
    if (p.n == 3) return plan_path_3(omega, p);
    return plan_path_4_gap(omega, p, ell_search(omega, p).gap);
}

}  // namespace

TEST(Grid, FieldBasics) {
    GridField f = GridField::zeros(4);
    EXPECT_EQ(f.values.size(), 256u);
    f.values[3] = 2.0;
    f.values[7] = -1.0;
    EXPECT_NEAR(f.mean(), 1.0 / 256.0, 1e-15);
    EXPECT_EQ(f.max_abs(), 2.0);
    EXPECT_EQ(f.oscillation(), 3.0);
    EXPECT_NEAR(grid_coordinate(8, 2), kPi / 2.0, 1e-15);
}

TEST(Grid, PotentialSampling) {
    const GridField rho = sample_potential({PotentialMode{0.3, {1, 0, 2, 0}, 0.4}}, 8);
    const auto expected = sample(8, [](double x1, double, double x3, double) { return 0.3 * std::cos(x1 + 2 * x3 + 0.4); });
    EXPECT_LT(max_diff(rho.values, expected), 1e-15);
    EXPECT_NEAR(rho.mean(), 0.0, 1e-15);
}

TEST(Spectral, HessianOfTrigonometricFields) {
    const int n = 8;
    SpectralOps ops(n);
    {
        const auto u = sample(n, [](double x1, double, double, double) { return std::cos(x1); });
        const HermitianField h = ops.complex_hessian(u);
        const auto expected = sample(n, [](double x1, double, double, double) { return -std::cos(x1) / 4.0; });
        EXPECT_LT(max_diff(h.h11, expected), 1e-14);
        EXPECT_LT(max_diff(h.h22, std::vector<double>(u.size(), 0.0)), 1e-14);
        EXPECT_LT(max_diff(h.re, std::vector<double>(u.size(), 0.0)), 1e-14);
    }
    {
        const auto u = sample(n, [](double x1, double, double x3, double) { return std::cos(x1 + x3); });
        const HermitianField h = ops.complex_hessian(u);
        const auto expected = sample(n, [](double x1, double, double x3, double) { return -std::cos(x1 + x3) / 4.0; });
        EXPECT_LT(max_diff(h.h11, expected), 1e-14);
        EXPECT_LT(max_diff(h.h22, expected), 1e-14);
        EXPECT_LT(max_diff(h.re, expected), 1e-14);
        EXPECT_LT(max_diff(h.im, std::vector<double>(u.size(), 0.0)), 1e-14);
    }
    {
        // h12 = (1/4)(d1 - i d2)(d3 + i d4) u, so Im h12 = (d1 d4 - d2 d3) u / 4.
        const auto u = sample(n, [](double x1, double, double, double x4) { return std::sin(x1 + x4); });
        const HermitianField h = ops.complex_hessian(u);
        const auto expected = sample(n, [](double x1, double, double, double x4) { return -std::sin(x1 + x4) / 4.0; });
        EXPECT_LT(max_diff(h.im, expected), 1e-14);
        EXPECT_LT(max_diff(h.re, std::vector<double>(u.size(), 0.0)), 1e-14);
    }
}

TEST(Spectral, ConstantSolveInvertsConstantOperator) {
    const int n = 8;
    SpectralOps ops(n);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gauss;
    std::vector<PotentialMode> modes;
    for (int k = 0; k < 6; ++k) {
        std::uniform_int_distribution<int> wave(-3, 3);
        modes.push_back(PotentialMode{gauss(rng), {wave(rng), wave(rng), wave(rng), wave(rng)}, gauss(rng)});
    }
    GridField u = sample_potential(modes, n);
    const double mean = u.mean();
    for (auto& x : u.values) x -= mean;
    const double w11 = 2.0;
    const double w22 = 3.0;
    const double wr = 0.4;
    const double wi = -0.3;
    HermitianField weights;
    weights.h11.assign(u.values.size(), w11);
    weights.h22.assign(u.values.size(), w22);
    weights.re.assign(u.values.size(), wr);
    weights.im.assign(u.values.size(), wi);
    std::vector<double> lu;
    ops.apply_weighted(u.values, weights, lu);
    std::vector<double> back;
    ops.solve_constant(lu, w11, w22, wr, wi, back);
    EXPECT_LT(max_diff(back, u.values), 1e-12);
}

TEST(Reduced, IdentityOnRandomBlocks) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n : {3, 4}) {
        const PhaseParams p = n == 3 ? phase3() : phase4();
        for (int trial = 0; trial < 500; ++trial) {
            TorusProblem problem = diagonal_model(p, 4);
            for (auto& a : problem.frozen) a = 0.5 + 4.0 * unit(rng);
            LevelSpec spec = original_level(p);
            spec.c2 = 0.5 + unit(rng);
            spec.c1 = 0.3 + unit(rng);
            spec.c0 = unit(rng);
            spec.h *= 0.3 + 0.7 * unit(rng);
            if (!level_is_valid(spec, p)) continue;
            const ReducedEquation eq = reduce_equation(problem, spec);
            const double h11 = 0.5 + 4.0 * unit(rng);
            const double h22 = 0.5 + 4.0 * unit(rng);
            const std::complex<double> h12(unit(rng) - 0.5, unit(rng) - 0.5);
            const double det = h11 * h22 - std::norm(h12);
            const double tr = h11 + h22;
            const double disc = std::sqrt(0.25 * (h11 - h22) * (h11 - h22) + std::norm(h12));
            std::vector<double> lambda{0.5 * tr + disc, 0.5 * tr - disc};
            lambda.insert(lambda.end(), problem.frozen.begin(), problem.frozen.end());
            const EigenTuple t(std::span<const double>(lambda.data(), lambda.size()));
            double prod = 1.0;
            for (double x : lambda) prod *= x;
            const double lhs = eq.det * det + eq.tr * tr + eq.constant;
            const double rhs = (f_eval(t, spec, p) - spec.h) * prod;
            EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(spec.h * prod)));
        }
    }
}

TEST(Reduced, DegenerateDeterminantCoefficient) {
    const PhaseParams p = phase4();
    TorusProblem problem = diagonal_model(p, 4);
    LevelSpec spec = original_level(p);
    problem.frozen = {2.0, 2.0};
    spec.c2 = spec.h * 4.0;
    if (level_is_valid(spec, p)) {
        const ReducedEquation eq = reduce_equation(problem, spec);
        EXPECT_TRUE(eq.degenerate);
        EXPECT_EQ(eq.det, 0.0);
    } else {
        GTEST_SKIP() << "degenerate level not admissible at this phase";
    }
}

TEST(Reduced, ConstantBackgroundOnLevelSetHasZeroResidual) {
    for (int n : {3, 4}) {
        const PhaseParams p = n == 3 ? phase3() : phase4();
        const TorusProblem problem = diagonal_model(p, 4);
        const ReducedEquation eq = reduce_equation(problem, original_level(p));
        const double a = diagonal_eigenvalue(p);
        const double residual = eq.det * a * a + eq.tr * 2.0 * a + eq.constant;
        EXPECT_NEAR(residual, 0.0, 1e-12 * std::pow(a, n));
    }
}

TEST(IntersectionNumbers, ConstantDiagonalModel) {
    for (int n : {3, 4}) {
        const PhaseParams p = n == 3 ? phase3() : phase4();
        TorusProblem problem = diagonal_model(p, 8);
        problem.volume = 2.5;
        const IntersectionNumbers omega = compute_intersection_numbers(problem);
        const double a = diagonal_eigenvalue(p);
        ASSERT_EQ(omega.n(), n);
        for (int k = 0; k <= n; ++k) EXPECT_NEAR(omega[k], std::pow(a, n - k) * 2.5, 1e-12 * std::pow(a, n - k));
        EXPECT_EQ(omega[n], problem.volume);
    }
}

TEST(IntersectionNumbers, InvariantUnderPotentials) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> wave(-2, 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n : {3, 4}) {
        const PhaseParams p = n == 3 ? phase3() : phase4();
        const TorusProblem flat = diagonal_model(p, 16);
        const IntersectionNumbers base = compute_intersection_numbers(flat);
        for (int trial = 0; trial < 3; ++trial) {
            std::vector<PotentialMode> modes = small_potential();
            for (int k = 0; k < 3; ++k) {
                modes.push_back(PotentialMode{0.02 * unit(rng), {wave(rng), wave(rng), wave(rng), wave(rng)}, unit(rng)});
            }
            const IntersectionNumbers moved = compute_intersection_numbers(diagonal_model(p, 16, modes));
            for (int k = 0; k <= n; ++k) EXPECT_LT(std::abs(moved[k] - base[k]) / std::abs(base[k]), 1e-9);
        }
    }
}

TEST(Validation, RejectsMalformedProblems) {
    const PhaseParams p = phase4();
    TorusProblem odd = diagonal_model(p, 4);
    odd.grid = 5;
    EXPECT_THROW(validate_problem(odd), ArgumentError);
    TorusProblem frozen = diagonal_model(p, 4);
    frozen.frozen = {1.0};
    EXPECT_THROW(validate_problem(frozen), ArgumentError);
}

TEST(Validation, RefusesBackgroundOutsideCones) {
    const PhaseParams p = phase4();
    EXPECT_THROW(validate_problem(diagonal_model(p, 8, {PotentialMode{40.0, {1, 0, 0, 0}, 0.0}})), RefusalError);
    TorusProblem bad = diagonal_model(p, 8);
    bad.frozen = {0.05, 0.05};
    EXPECT_THROW(validate_problem(bad), RefusalError);
    EXPECT_NO_THROW(validate_problem(diagonal_model(p, 8, small_potential())));
}

TEST(Newton, FlatBackgroundNeedsNoCorrection) {
    for (int n : {3, 4}) {
        const PhaseParams p = n == 3 ? phase3() : phase4();
        const TorusProblem problem = diagonal_model(p, 8);
        GridField u = GridField::zeros(8);
        const NewtonReport r = newton_solve(problem, original_level(p), u);
        EXPECT_TRUE(r.converged);
        EXPECT_LE(r.iterations, 1);
        EXPECT_LT(u.max_abs(), 1e-12);
        EXPECT_LT(r.final_residual, problem.tolerance);
    }
}

TEST(Newton, SmallPotentialConverges) {
    for (int n : {3, 4}) {
        const PhaseParams p = n == 3 ? phase3() : phase4();
        const TorusProblem problem = diagonal_model(p, 16, small_potential());
        GridField u = GridField::zeros(16);
        const NewtonReport r = newton_solve(problem, original_level(p), u);
        EXPECT_TRUE(r.converged);
        EXPECT_LE(r.iterations, 10);
        EXPECT_LT(r.final_residual, 1e-9);
        EXPECT_GT(r.min_cone_margin, 0.0);
        EXPECT_NEAR(u.mean(), 0.0, 1e-14);
        for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
            EXPECT_LT(r.residual_history[i], r.residual_history[i - 1]);
        }
        // The block equation depends only on the Hessian of rho + u, and rho + u = 0 solves it exactly.
        const GridField rho = sample_potential(problem.potential, 16);
        double worst = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) worst = std::max(worst, std::abs(u.values[i] + rho.values[i]));
        EXPECT_LT(worst, 1e-8);
    }
}

TEST(Newton, RefusesInitialIterateOutsideCones) {
    const PhaseParams p = phase4();
    const TorusProblem problem = diagonal_model(p, 8);
    GridField u = sample_potential({PotentialMode{40.0, {1, 0, 0, 0}, 0.0}}, 8);
    EXPECT_THROW(newton_solve(problem, original_level(p), u), RefusalError);
}

TEST(Continuity, ReachesEndForBothDimensions) {
    for (int n : {3, 4}) {
        const PhaseParams p = n == 3 ? phase3() : phase4();
        const TorusProblem problem = diagonal_model(p, 16, small_potential());
        const ContinuityReport r = continuity_solve(problem, diagonal_path(problem));
        ASSERT_TRUE(r.completed);
        EXPECT_EQ(r.reached_t, 1.0);
        ASSERT_FALSE(r.steps.empty());
        EXPECT_EQ(r.steps.front().t, 0.0);
        for (const auto& s : r.steps) {
            EXPECT_GT(s.min_cone_margin, 0.0);
            EXPECT_GT(s.background_margin, 0.0);
            EXPECT_LT(s.final_residual, 1e-9);
        }
        EXPECT_LT(verify_phase(r.u, problem, p), 1e-6);
    }
}

TEST(Continuity, EndpointOnlyRun) {
    const PhaseParams p = phase4();
    const TorusProblem problem = diagonal_model(p, 8, small_potential());
    ContinuityOptions options;
    options.t_max = 0.0;
    const ContinuityReport r = continuity_solve(problem, diagonal_path(problem), options);
    EXPECT_TRUE(r.completed);
    ASSERT_EQ(r.steps.size(), 1u);
    EXPECT_EQ(r.steps.front().t, 0.0);
}

TEST(Continuity, ValidBackgroundsLieInRegion) {
    const PhaseParams p = phase4();
    for (double x : {3.0, 5.0, 20.0, 100.0, 300.0}) {
        TorusProblem problem = diagonal_model(p, 4);
        problem.frozen[1] = x;
        ASSERT_NO_THROW(validate_problem(problem));
        const IntersectionNumbers omega = compute_intersection_numbers(problem);
        for (int k : {1, 10, 30}) {
            const RegionResult r = region_test_4_gap(omega, p, schedule_gap(p, k));
            EXPECT_TRUE(r.member) << "frozen " << x << " depth " << k;
        }
    }
}

TEST(Continuity, ReportsIntersectionNumbersOfProblem) {
    const PhaseParams p = phase3();
    const TorusProblem problem = diagonal_model(p, 4, small_potential());
    const ContinuityReport r = continuity_solve(problem, diagonal_path(problem));
    const IntersectionNumbers omega = compute_intersection_numbers(problem);
    for (int k = 0; k <= 3; ++k) EXPECT_EQ(r.omega[k], omega[k]);
}

TEST(Continuity, RefusesConeViolatingFrozenValues) {
    const PhaseParams p = phase4();
    TorusProblem problem = diagonal_model(p, 8);
    const PathSpec path = diagonal_path(problem);
    problem.frozen = {0.05, 0.05};
    EXPECT_THROW(continuity_solve(problem, path), RefusalError);
}

TEST(Phase, DiagonalAndShiftedTargets) {
    const PhaseParams p = phase4();
    const TorusProblem problem = diagonal_model(p, 8);
    const GridField u = GridField::zeros(8);
    EXPECT_LT(verify_phase(u, problem, p), 1e-12);
    const PhaseParams other = make_phase(4, p.theta_hat + 0.01);
    EXPECT_NEAR(verify_phase(u, problem, other), 0.01, 1e-12);
}

TEST(Output, DiagnosticsAndFieldFormats) {
    const PhaseParams p = phase3();
    const TorusProblem problem = diagonal_model(p, 4, small_potential());
    const ContinuityReport r = continuity_solve(problem, diagonal_path(problem));
    std::ostringstream diag;
    write_diagnostics_csv(diag, r.steps);
    std::istringstream lines(diag.str());
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header, "t,newton_iters,final_residual,min_cone_margin,max_eigenvalue,osc_u");
    std::size_t rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    EXPECT_EQ(rows, r.steps.size());

    std::ostringstream field;
    write_field(field, r.u, problem);
    std::istringstream in(field.str());
    int grid = 0;
    int n = 0;
    double theta = 0.0;
    in >> grid >> n >> theta;
    EXPECT_EQ(grid, 4);
    EXPECT_EQ(n, 3);
    EXPECT_EQ(theta, p.theta_hat);
    std::vector<double> values;
    for (double x; in >> x;) values.push_back(x);
    ASSERT_EQ(values.size(), r.u.values.size());
    for (std::size_t i = 0; i < values.size(); ++i) EXPECT_EQ(values[i], r.u.values[i]);
}
