#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include "dhym/path.hpp"
#include "dhym/phase.hpp"

namespace dhym {

/// One Fourier mode of the background potential: amplitude * cos(wave . x + phase).
struct PotentialMode {
    double amplitude = 0.0;
    std::array<int, 4> wave{};
    double phase = 0.0;
};

/// Reduced model on the flat torus [0, 2 pi)^4 with complex coordinates z1 = x1 + i x2, z2 = x3 + i x4.
/// The varying 2x2 Hermitian block is base + complex Hessian of the potential; the remaining n - 2
/// eigenvalues are frozen positive constants.
struct TorusProblem {
    PhaseParams phase;
    int grid = 16;                                  ///< points per real direction, even
    double base11 = 1.0;
    double base22 = 1.0;
    std::complex<double> base12{0.0, 0.0};
    std::vector<double> frozen;                     ///< length n - 2
    std::vector<PotentialMode> potential;
    double volume = 1.0;
    double tolerance = 1e-9;                        ///< target max |residual|
    int max_newton_iterations = 40;
    double linear_tolerance = 1e-8;                 ///< relative tolerance of each linear solve
    int max_linear_iterations = 400;
};

/// Diagonal model: base = lambda* I and frozen = (lambda*, ...), lambda* the shifted diagonal eigenvalue.
TorusProblem diagonal_model(const PhaseParams& p, int grid = 16, std::vector<PotentialMode> potential = {});

/// Real field on the periodic grid, index ((i1 N + i2) N + i3) N + i4.
struct GridField {
    int n = 0;   ///< points per direction
    std::vector<double> values;

    static GridField zeros(int grid);
    double mean() const;
    double max_abs() const;
    double oscillation() const;
};

/// Point coordinate x_d of grid index i along one direction.
double grid_coordinate(int grid, int i);

/// Samples the potential on the grid.
GridField sample_potential(const std::vector<PotentialMode>& modes, int grid);

/// Entries of the complex Hessian of a field: h11, h22 real, h12 = re + i im.
struct HermitianField {
    std::vector<double> h11;
    std::vector<double> h22;
    std::vector<double> re;
    std::vector<double> im;
};

/// Spectral differentiation on the periodic grid. One instance per solve; not safe for concurrent use.
class SpectralOps {
public:
    explicit SpectralOps(int grid);
    ~SpectralOps();
    SpectralOps(const SpectralOps&) = delete;
    SpectralOps& operator=(const SpectralOps&) = delete;

    int grid() const;
    std::size_t size() const;

    /// Complex Hessian d^2 u / dz_a dz_b-bar of a real field.
    HermitianField complex_hessian(const std::vector<double>& u);

    /// Applies sum of weight_k(x) * D_k u for the four Hessian entry operators.
    void apply_weighted(const std::vector<double>& u, const HermitianField& weights, std::vector<double>& out);

    /// Inverts the constant-coefficient operator with the given weights on nonzero modes; the zero mode maps to 0.
    void solve_constant(const std::vector<double>& rhs, double w11, double w22, double wr, double wi,
                        std::vector<double>& out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Coefficients of the reduced equation alpha_det det H + alpha_tr tr H + alpha_const = (f - h) prod(lambda).
struct ReducedEquation {
    double det = 0.0;
    double tr = 0.0;
    double constant = 0.0;
    bool degenerate = false;   ///< alpha_det = 0: the equation is linear in the Hessian
};

ReducedEquation reduce_equation(const TorusProblem& problem, const LevelSpec& spec);

/// Throws ArgumentError on malformed problems and RefusalError when the background leaves the
/// C-subsolution cones at t = 1 at some grid point.
void validate_problem(const TorusProblem& problem);

/// Background block: base + complex Hessian of the potential.
HermitianField background_block(const TorusProblem& problem, SpectralOps& ops);

/// Intersection numbers Omega_k = volume * mean of sigma_{n-k}(eigs H ++ frozen) / binom(n, k).
IntersectionNumbers compute_intersection_numbers(const TorusProblem& problem);
IntersectionNumbers intersection_numbers_of(const TorusProblem& problem, const HermitianField& block);

/// Smallest C-subsolution cone margin over the grid of the tuples (eigs block, frozen).
double min_cone_margin(const TorusProblem& problem, const HermitianField& block, const LevelSpec& spec);

/// Diagnostics of one Newton solve.
struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    int linear_iterations = 0;
    double final_residual = 0.0;
    double min_cone_margin = 0.0;
    double max_eigenvalue = 0.0;
    double osc_u = 0.0;
    std::vector<double> residual_history;
};

/// Damped Newton solve of the reduced equation at one level spec. u is updated in place; it must start inside the
/// cones (RefusalError otherwise). Throws NonConvergenceError when the damping underflows or iterations run out.
NewtonReport newton_solve(const TorusProblem& problem, const LevelSpec& spec, GridField& u);
NewtonReport newton_solve(const TorusProblem& problem, const LevelSpec& spec, GridField& u, SpectralOps& ops,
                          const HermitianField& background);

/// Per accepted parameter value of the continuity march.
struct StepDiagnostics {
    double t = 0.0;
    int newton_iterations = 0;
    double final_residual = 0.0;
    double min_cone_margin = 0.0;
    double max_eigenvalue = 0.0;
    double osc_u = 0.0;
    double background_margin = 0.0;
};

/// Result of the continuity march.
struct ContinuityReport {
    bool completed = false;     ///< reached t_max
    double reached_t = 0.0;
    GridField u;
    std::vector<StepDiagnostics> steps;
    IntersectionNumbers omega;
    int rejected_steps = 0;
};

struct ContinuityOptions {
    double t_max = 1.0;
    double initial_step = 0.25;
    double max_step = 0.5;
    double min_step = 1e-6;
};

/// Marches t from 0 to t_max along the path. Refuses (RefusalError) if the intersection numbers fail the region
/// test or the background leaves the cones; returns a partial report when the step underflows.
ContinuityReport continuity_solve(const TorusProblem& problem, const PathSpec& path,
                                  const ContinuityOptions& options = {});

/// Maximum over the grid of |sum arctan(mu_i) - theta_hat| where mu is the shift back (with the problem's phase)
/// of the eigenvalues of background + Hessian(u) together with the frozen ones.
double verify_phase(const GridField& u, const TorusProblem& problem, const PhaseParams& p);

/// Writes diagnostics as CSV: t, newton_iters, final_residual, min_cone_margin, max_eigenvalue, osc_u.
void write_diagnostics_csv(std::ostream& out, const std::vector<StepDiagnostics>& steps);

/// Writes a field as text: a header line "N n theta_hat" followed by N^3 rows of N values.
void write_field(std::ostream& out, const GridField& u, const TorusProblem& problem);

}  // namespace dhym
