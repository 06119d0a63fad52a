#include "dhym/torus.hpp"

#include <fftw3.h>

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
#include "dhym/symmetric.hpp"

namespace dhym {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The FFTW planner is not thread safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

struct BlockEigen {
    double low;
    double high;
};

BlockEigen block_eigenvalues(double h11, double h22, double re, double im) {
    const double mid = 0.5 * (h11 + h22);
    const double half = 0.5 * (h11 - h22);
    const double rad = std::sqrt(half * half + re * re + im * im);
    return {mid - rad, mid + rad};
}

EigenTuple assemble_tuple(const BlockEigen& e, const std::vector<double>& frozen) {
    std::array<double, kMaxDim> v{};
    v[0] = e.low;
    v[1] = e.high;
    for (std::size_t k = 0; k < frozen.size(); ++k) v[k + 2] = frozen[k];
    return EigenTuple(std::span<const double>(v.data(), frozen.size() + 2));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double mean_of(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v;
    return s / static_cast<double>(a.size());
}

void remove_mean(std::vector<double>& a) {
    const double m = mean_of(a);
    for (double& v : a) v -= m;
}

}  // namespace

struct SpectralOps::Impl {
    int n = 0;
    std::size_t real_size = 0;
    std::size_t complex_size = 0;
    double* real_buf = nullptr;
    double* real_out = nullptr;
    fftw_complex* spec = nullptr;
    fftw_complex* work = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    std::vector<double> s11, s22, sre, sim;

    explicit Impl(int grid) : n(grid) {
        const std::size_t g = static_cast<std::size_t>(grid);
        const std::size_t half = g / 2 + 1;
        real_size = g * g * g * g;
        complex_size = g * g * g * half;
        real_buf = fftw_alloc_real(real_size);
        real_out = fftw_alloc_real(real_size);
        spec = fftw_alloc_complex(complex_size);
        work = fftw_alloc_complex(complex_size);
        if (!real_buf || !real_out || !spec || !work) throw std::bad_alloc();
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            const int dims[4] = {grid, grid, grid, grid};
            forward = fftw_plan_dft_r2c(4, dims, real_buf, spec, FFTW_ESTIMATE);
            backward = fftw_plan_dft_c2r(4, dims, work, real_out, FFTW_ESTIMATE);
        }
        if (!forward || !backward) throw std::runtime_error("FFT planning failed");
        s11.resize(complex_size);
        s22.resize(complex_size);
        sre.resize(complex_size);
        sim.resize(complex_size);
        const int nyquist = grid / 2;
        auto wave = [&](int j) { return j <= nyquist ? j : j - grid; };
        std::size_t idx = 0;
        for (int a = 0; a < grid; ++a) {
            for (int b = 0; b < grid; ++b) {
                for (int c = 0; c < grid; ++c) {
                    for (int d = 0; d < static_cast<int>(half); ++d, ++idx) {
                        const std::array<int, 4> raw{wave(a), wave(b), wave(c), d};
                        std::array<double, 4> pure{};
                        std::array<double, 4> mixed{};
                        for (int k = 0; k < 4; ++k) {
                            const bool nyq = std::abs(raw[static_cast<std::size_t>(k)]) == nyquist;
                            pure[static_cast<std::size_t>(k)] = raw[static_cast<std::size_t>(k)];
                            mixed[static_cast<std::size_t>(k)] = nyq ? 0.0 : raw[static_cast<std::size_t>(k)];
                        }
                        s11[idx] = -(pure[0] * pure[0] + pure[1] * pure[1]) / 4.0;
                        s22[idx] = -(pure[2] * pure[2] + pure[3] * pure[3]) / 4.0;
                        sre[idx] = -(mixed[0] * mixed[2] + mixed[1] * mixed[3]) / 4.0;
                        sim[idx] = -(mixed[0] * mixed[3] - mixed[1] * mixed[2]) / 4.0;
                    }
                }
            }
        }
    }

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        fftw_free(real_buf);
        fftw_free(real_out);
        fftw_free(spec);
        fftw_free(work);
    }

    void transform(const std::vector<double>& u) {
        std::copy(u.begin(), u.end(), real_buf);
        fftw_execute(forward);
    }

    // out = inverse transform of symbol * spec, normalized.
    void inverse_with(const std::vector<double>& symbol, std::vector<double>& out) {
        for (std::size_t i = 0; i < complex_size; ++i) {
            work[i][0] = spec[i][0] * symbol[i];
            work[i][1] = spec[i][1] * symbol[i];
        }
        fftw_execute(backward);
        const double scale = 1.0 / static_cast<double>(real_size);
        out.resize(real_size);
        for (std::size_t i = 0; i < real_size; ++i) out[i] = real_out[i] * scale;
    }
};

SpectralOps::SpectralOps(int grid) {
    if (grid < 4 || grid % 2 != 0) throw ArgumentError("grid size must be even and at least 4");
    impl_ = std::make_unique<Impl>(grid);
}

SpectralOps::~SpectralOps() = default;

int SpectralOps::grid() const { return impl_->n; }

std::size_t SpectralOps::size() const { return impl_->real_size; }

HermitianField SpectralOps::complex_hessian(const std::vector<double>& u) {
    if (u.size() != impl_->real_size) throw ArgumentError("field size does not match the grid");
    impl_->transform(u);
    HermitianField h;
    impl_->inverse_with(impl_->s11, h.h11);
    impl_->inverse_with(impl_->s22, h.h22);
    impl_->inverse_with(impl_->sre, h.re);
    impl_->inverse_with(impl_->sim, h.im);
    return h;
}

void SpectralOps::apply_weighted(const std::vector<double>& u, const HermitianField& weights,
                                 std::vector<double>& out) {
    const HermitianField d = complex_hessian(u);
    out.resize(impl_->real_size);
    for (std::size_t i = 0; i < impl_->real_size; ++i) {
        out[i] = weights.h11[i] * d.h11[i] + weights.h22[i] * d.h22[i] + weights.re[i] * d.re[i] +
                 weights.im[i] * d.im[i];
    }
}

void SpectralOps::solve_constant(const std::vector<double>& rhs, double w11, double w22, double wr, double wi,
                                 std::vector<double>& out) {
    if (rhs.size() != impl_->real_size) throw ArgumentError("field size does not match the grid");
    impl_->transform(rhs);
    double largest = 0.0;
    std::vector<double> inverse(impl_->complex_size);
    for (std::size_t i = 0; i < impl_->complex_size; ++i) {
        inverse[i] = w11 * impl_->s11[i] + w22 * impl_->s22[i] + wr * impl_->sre[i] + wi * impl_->sim[i];
        largest = std::max(largest, std::abs(inverse[i]));
    }
    for (double& v : inverse) v = std::abs(v) > 1e-14 * largest ? 1.0 / v : 0.0;
    inverse[0] = 0.0;
    impl_->inverse_with(inverse, out);
}

double grid_coordinate(int grid, int i) { return 2.0 * std::numbers::pi * i / grid; }

GridField GridField::zeros(int grid) {
    GridField f;
    f.n = grid;
    const auto g = static_cast<std::size_t>(grid);
    f.values.assign(g * g * g * g, 0.0);
    return f;
}

double GridField::mean() const { return values.empty() ? 0.0 : mean_of(values); }

double GridField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double GridField::oscillation() const {
    if (values.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo;
}

GridField sample_potential(const std::vector<PotentialMode>& modes, int grid) {
    GridField f = GridField::zeros(grid);
    std::size_t idx = 0;
    for (int a = 0; a < grid; ++a) {
        for (int b = 0; b < grid; ++b) {
            for (int c = 0; c < grid; ++c) {
                for (int d = 0; d < grid; ++d, ++idx) {
                    const std::array<double, 4> x{grid_coordinate(grid, a), grid_coordinate(grid, b),
                                                  grid_coordinate(grid, c), grid_coordinate(grid, d)};
                    double v = 0.0;
                    for (const auto& m : modes) {
                        double arg = m.phase;
                        for (int k = 0; k < 4; ++k) arg += m.wave[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
                        v += m.amplitude * std::cos(arg);
                    }
                    f.values[idx] = v;
                }
            }
        }
    }
    return f;
}

TorusProblem diagonal_model(const PhaseParams& p, int grid, std::vector<PotentialMode> potential) {
    TorusProblem problem;
    problem.phase = p;
    problem.grid = grid;
    const double star = diagonal_eigenvalue(p);
    problem.base11 = star;
    problem.base22 = star;
    problem.base12 = {0.0, 0.0};
    problem.frozen.assign(static_cast<std::size_t>(p.n - 2), star);
    problem.potential = std::move(potential);
    return problem;
}

ReducedEquation reduce_equation(const TorusProblem& problem, const LevelSpec& spec) {
    const PhaseParams& p = problem.phase;
    require_valid_level(spec, p);
    if (static_cast<int>(problem.frozen.size()) != p.n - 2) throw ArgumentError("frozen eigenvalue count must be n - 2");
    ReducedEquation eq;
    if (p.n == 3) {
        const double a3 = problem.frozen[0];
        eq.det = -spec.h * a3;
        eq.tr = spec.c1;
        eq.constant = spec.c1 * a3 + 2.0 * spec.c0 * p.tan;
    } else {
        const double a3 = problem.frozen[0];
        const double a4 = problem.frozen[1];
        eq.det = spec.c2 - spec.h * a3 * a4;
        eq.tr = spec.c2 * (a3 + a4) - 2.0 * spec.c1 * p.cot;
        eq.constant = spec.c2 * a3 * a4 - 2.0 * spec.c1 * p.cot * (a3 + a4) + spec.c0 * p.k4;
    }
    eq.degenerate = eq.det == 0.0;
    return eq;
}

HermitianField background_block(const TorusProblem& problem, SpectralOps& ops) {
    const GridField rho = sample_potential(problem.potential, problem.grid);
    HermitianField h = ops.complex_hessian(rho.values);
    for (std::size_t i = 0; i < h.h11.size(); ++i) {
        h.h11[i] += problem.base11;
        h.h22[i] += problem.base22;
        h.re[i] += problem.base12.real();
        h.im[i] += problem.base12.imag();
    }
    return h;
}

double min_cone_margin(const TorusProblem& problem, const HermitianField& block, const LevelSpec& spec) {
    const std::vector<ConeSpec> cones = csub_cones(spec, problem.phase);
    const std::size_t total = block.h11.size();
    const std::size_t chunks = std::min<std::size_t>(16, total);
    std::vector<double> partial(chunks, kInf);
    parallel_chunks(chunks, [&](std::size_t c) {
        const std::size_t begin = total * c / chunks;
        const std::size_t end = total * (c + 1) / chunks;
        double worst = kInf;
        for (std::size_t i = begin; i < end; ++i) {
            const BlockEigen e = block_eigenvalues(block.h11[i], block.h22[i], block.re[i], block.im[i]);
            const EigenTuple tuple = assemble_tuple(e, problem.frozen);
            worst = std::min(worst, intersection_membership(tuple, cones).margin);
        }
        partial[c] = worst;
    });
    return *std::min_element(partial.begin(), partial.end());
}

void validate_problem(const TorusProblem& problem) {
    const PhaseParams& p = problem.phase;
    if (p.n != 3 && p.n != 4) throw ArgumentError("dimension must be 3 or 4");
    if (problem.grid < 4 || problem.grid % 2 != 0) throw ArgumentError("grid size must be even and at least 4");
    if (static_cast<int>(problem.frozen.size()) != p.n - 2) throw ArgumentError("frozen eigenvalue count must be n - 2");
    for (double a : problem.frozen) {
        if (!std::isfinite(a) || !(a > 0.0)) throw ArgumentError("frozen eigenvalues must be positive");
    }
    if (!std::isfinite(problem.base11) || !std::isfinite(problem.base22) || !std::isfinite(problem.base12.real()) ||
        !std::isfinite(problem.base12.imag())) {
        throw ArgumentError("base block must be finite");
    }
    if (!(problem.volume > 0.0) || !std::isfinite(problem.volume)) throw ArgumentError("volume must be positive");
    if (!(problem.tolerance > 0.0)) throw ArgumentError("tolerance must be positive");
    for (const auto& m : problem.potential) {
        if (!std::isfinite(m.amplitude) || !std::isfinite(m.phase)) throw ArgumentError("potential must be finite");
        bool nonzero = false;
        for (int w : m.wave) {
            if (std::abs(w) >= problem.grid / 2) throw ArgumentError("potential wave number not resolved by the grid");
            nonzero = nonzero || w != 0;
        }
        if (!nonzero) throw ArgumentError("potential modes must have a nonzero wave vector (zero mean)");
    }
    SpectralOps ops(problem.grid);
    const HermitianField block = background_block(problem, ops);
    const double margin = min_cone_margin(problem, block, original_level(p));
    if (!(margin > 0.0)) {
        throw RefusalError("background leaves the C-subsolution cones (margin " + std::to_string(margin) + ")");
    }
}

IntersectionNumbers intersection_numbers_of(const TorusProblem& problem, const HermitianField& block) {
    const int n = problem.phase.n;
    std::vector<double> sums(static_cast<std::size_t>(n + 1), 0.0);
    const std::size_t total = block.h11.size();
    for (std::size_t i = 0; i < total; ++i) {
        // Generating polynomial prod (1 + x lambda) = (1 + x tr + x^2 det) prod (1 + x a).
        std::array<double, kMaxDim + 1> e{};
        e[0] = 1.0;
        e[1] = block.h11[i] + block.h22[i];
        e[2] = block.h11[i] * block.h22[i] - block.re[i] * block.re[i] - block.im[i] * block.im[i];
        int degree = 2;
        for (double a : problem.frozen) {
            for (int k = degree + 1; k >= 1; --k) e[static_cast<std::size_t>(k)] += a * e[static_cast<std::size_t>(k - 1)];
            ++degree;
        }
        for (int k = 0; k <= n; ++k) sums[static_cast<std::size_t>(k)] += e[static_cast<std::size_t>(n - k)];
    }
    IntersectionNumbers omega;
    omega.omega.resize(sums.size());
    for (int k = 0; k <= n; ++k) {
        omega.omega[static_cast<std::size_t>(k)] =
            problem.volume * sums[static_cast<std::size_t>(k)] / static_cast<double>(total) / binomial(n, k);
    }
    return omega;
}

IntersectionNumbers compute_intersection_numbers(const TorusProblem& problem) {
    SpectralOps ops(problem.grid);
    return intersection_numbers_of(problem, background_block(problem, ops));
}

namespace {

// State of one Newton iterate: Hessian block, residual and pointwise diagnostics.
struct Evaluation {
    HermitianField block;
    std::vector<double> residual;
    double max_residual = 0.0;
    double cone_margin = 0.0;
    double max_eigenvalue = 0.0;
};

Evaluation evaluate(const TorusProblem& problem, const ReducedEquation& eq, const std::vector<ConeSpec>& cones,
                    const std::vector<double>& u, SpectralOps& ops, const HermitianField& background) {
    Evaluation ev;
    ev.block = ops.complex_hessian(u);
    const std::size_t total = u.size();
    ev.residual.resize(total);
    ev.cone_margin = kInf;
    ev.max_eigenvalue = -kInf;
    for (std::size_t i = 0; i < total; ++i) {
        const double h11 = background.h11[i] + ev.block.h11[i];
        const double h22 = background.h22[i] + ev.block.h22[i];
        const double re = background.re[i] + ev.block.re[i];
        const double im = background.im[i] + ev.block.im[i];
        ev.block.h11[i] = h11;
        ev.block.h22[i] = h22;
        ev.block.re[i] = re;
        ev.block.im[i] = im;
        const double det = h11 * h22 - re * re - im * im;
        const double r = eq.det * det + eq.tr * (h11 + h22) + eq.constant;
        ev.residual[i] = r;
        ev.max_residual = std::max(ev.max_residual, std::abs(r));
        const BlockEigen e = block_eigenvalues(h11, h22, re, im);
        ev.max_eigenvalue = std::max(ev.max_eigenvalue, e.high);
        const EigenTuple tuple = assemble_tuple(e, problem.frozen);
        ev.cone_margin = std::min(ev.cone_margin, intersection_membership(tuple, cones).margin);
    }
    for (double a : problem.frozen) ev.max_eigenvalue = std::max(ev.max_eigenvalue, a);
    return ev;
}

// Right-preconditioned BiCGSTAB on zero-mean fields. Returns the iteration count.
int bicgstab(SpectralOps& ops, const HermitianField& weights, const std::array<double, 4>& mean_weights,
             const std::vector<double>& rhs, std::vector<double>& x, double tolerance, int max_iterations) {
    const std::size_t size = rhs.size();
    auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        ops.apply_weighted(v, weights, out);
        remove_mean(out);
    };
    auto precondition = [&](const std::vector<double>& v, std::vector<double>& out) {
        ops.solve_constant(v, mean_weights[0], mean_weights[1], mean_weights[2], mean_weights[3], out);
    };
    x.assign(size, 0.0);
    std::vector<double> r = rhs;
    remove_mean(r);
    const double norm_b = std::sqrt(dot(r, r));
    if (norm_b == 0.0) return 0;
    const std::vector<double> r_hat = r;
    std::vector<double> p(size, 0.0), v(size, 0.0), p_hat, s(size), s_hat, t;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    for (int it = 1; it <= max_iterations; ++it) {
        const double rho_new = dot(r_hat, r);
        if (rho_new == 0.0) return it;
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < size; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        precondition(p, p_hat);
        apply(p_hat, v);
        const double denom = dot(r_hat, v);
        if (denom == 0.0) return it;
        alpha = rho / denom;
        for (std::size_t i = 0; i < size; ++i) s[i] = r[i] - alpha * v[i];
        if (std::sqrt(dot(s, s)) <= tolerance * norm_b) {
            for (std::size_t i = 0; i < size; ++i) x[i] += alpha * p_hat[i];
            return it;
        }
        precondition(s, s_hat);
        apply(s_hat, t);
        const double tt = dot(t, t);
        omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        if (std::sqrt(dot(r, r)) <= tolerance * norm_b || omega == 0.0) return it;
    }
    return max_iterations;
}

}  // namespace

NewtonReport newton_solve(const TorusProblem& problem, const LevelSpec& spec, GridField& u) {
    validate_problem(problem);
    SpectralOps ops(problem.grid);
    const HermitianField background = background_block(problem, ops);
    return newton_solve(problem, spec, u, ops, background);
}

NewtonReport newton_solve(const TorusProblem& problem, const LevelSpec& spec, GridField& u, SpectralOps& ops,
                          const HermitianField& background) {
    if (u.n != problem.grid || u.values.size() != ops.size()) throw ArgumentError("field does not match the grid");
    const ReducedEquation eq = reduce_equation(problem, spec);
    const std::vector<ConeSpec> cones = csub_cones(spec, problem.phase);
    remove_mean(u.values);
    Evaluation current = evaluate(problem, eq, cones, u.values, ops, background);
    if (!(current.cone_margin > 0.0)) {
        throw RefusalError("initial iterate leaves the cones (margin " + std::to_string(current.cone_margin) + ")");
    }
    NewtonReport report;
    const std::size_t size = u.values.size();
    for (int it = 0;; ++it) {
        report.residual_history.push_back(current.max_residual);
        if (current.max_residual < problem.tolerance) break;
        if (it >= problem.max_newton_iterations) {
            throw NonConvergenceError("Newton iteration limit reached with residual " +
                                      std::to_string(current.max_residual));
        }
        // Linearization: cofactor-weighted second-order operator.
        HermitianField weights;
        weights.h11.resize(size);
        weights.h22.resize(size);
        weights.re.resize(size);
        weights.im.resize(size);
        std::array<double, 4> mean_weights{};
        for (std::size_t i = 0; i < size; ++i) {
            weights.h11[i] = eq.det * current.block.h22[i] + eq.tr;
            weights.h22[i] = eq.det * current.block.h11[i] + eq.tr;
            weights.re[i] = -2.0 * eq.det * current.block.re[i];
            weights.im[i] = -2.0 * eq.det * current.block.im[i];
            mean_weights[0] += weights.h11[i];
            mean_weights[1] += weights.h22[i];
            mean_weights[2] += weights.re[i];
            mean_weights[3] += weights.im[i];
        }
        for (double& w : mean_weights) w /= static_cast<double>(size);
        std::vector<double> rhs(size);
        for (std::size_t i = 0; i < size; ++i) rhs[i] = -current.residual[i];
        std::vector<double> step;
        report.linear_iterations += bicgstab(ops, weights, mean_weights, rhs, step, problem.linear_tolerance,
                                             problem.max_linear_iterations);
        remove_mean(step);

        double damping = 1.0;
        bool accepted = false;
        while (!accepted) {
            if (damping < 1e-6) {
                throw NonConvergenceError("Newton damping underflow at residual " +
                                          std::to_string(current.max_residual));
            }
            std::vector<double> trial(size);
            for (std::size_t i = 0; i < size; ++i) trial[i] = u.values[i] + damping * step[i];
            remove_mean(trial);
            Evaluation next = evaluate(problem, eq, cones, trial, ops, background);
            if (next.cone_margin > 0.0 && next.max_residual < current.max_residual) {
                u.values = std::move(trial);
                current = std::move(next);
                accepted = true;
            } else {
                damping *= 0.5;
            }
        }
        ++report.iterations;
    }
    report.converged = true;
    report.final_residual = current.max_residual;
    report.min_cone_margin = current.cone_margin;
    report.max_eigenvalue = current.max_eigenvalue;
    report.osc_u = u.oscillation();
    return report;
}

ContinuityReport continuity_solve(const TorusProblem& problem, const PathSpec& path, const ContinuityOptions& options) {
    validate_problem(problem);
    const PhaseParams& p = problem.phase;
    if (path.phase.n != p.n || path.phase.theta_hat != p.theta_hat) {
        throw ArgumentError("path and problem use different phases");
    }
    if (!(options.t_max >= 0.0 && options.t_max <= 1.0)) throw ArgumentError("t_max must lie in [0, 1]");
    if (!(options.initial_step > 0.0) || !(options.min_step > 0.0)) throw ArgumentError("steps must be positive");

    SpectralOps ops(problem.grid);
    const HermitianField background = background_block(problem, ops);
    ContinuityReport report;
    report.omega = intersection_numbers_of(problem, background);
    const RegionResult region =
        p.n == 3 ? region_test_3(report.omega, p) : region_test_4_gap(report.omega, p, path.gap);
    if (!region.member) {
        throw RefusalError("intersection numbers fail the region test (margin " + std::to_string(region.margin) + ")");
    }

    report.u = GridField::zeros(problem.grid);
    // The background must stay a C-subsolution at every level; this is a refusal, not a step failure.
    auto background_check = [&](double t) {
        const double margin = min_cone_margin(problem, background, path_level(path, t));
        if (!(margin > 0.0)) throw RefusalError("background is not a C-subsolution at t = " + std::to_string(t));
        return margin;
    };
    auto attempt = [&](double t, double background_margin, GridField& u) {
        const NewtonReport nr = newton_solve(problem, path_level(path, t), u, ops, background);
        StepDiagnostics d;
        d.t = t;
        d.newton_iterations = nr.iterations;
        d.final_residual = nr.final_residual;
        d.min_cone_margin = nr.min_cone_margin;
        d.max_eigenvalue = nr.max_eigenvalue;
        d.osc_u = nr.osc_u;
        d.background_margin = background_margin;
        return d;
    };

    try {
        report.steps.push_back(attempt(0.0, background_check(0.0), report.u));
    } catch (const NonConvergenceError&) {
        report.completed = false;
        report.reached_t = 0.0;
        return report;
    }
    double t = 0.0;
    double dt = options.initial_step;
    while (t < options.t_max) {
        const double next_t = std::min(options.t_max, t + dt);
        const double background_margin = background_check(next_t);
        GridField trial = report.u;
        try {
            StepDiagnostics d = attempt(next_t, background_margin, trial);
            report.u = std::move(trial);
            t = next_t;
            if (d.newton_iterations <= 2) dt = std::min(options.max_step, 2.0 * dt);
            report.steps.push_back(d);
        } catch (const NonConvergenceError&) {
            ++report.rejected_steps;
            dt *= 0.5;
        } catch (const RefusalError&) {
            // the warm start left the cones of the next level
            ++report.rejected_steps;
            dt *= 0.5;
        }
        if (dt < options.min_step) break;
    }
    report.reached_t = t;
    report.completed = t >= options.t_max;
    return report;
}

double verify_phase(const GridField& u, const TorusProblem& problem, const PhaseParams& p) {
    SpectralOps ops(problem.grid);
    if (u.values.size() != ops.size()) throw ArgumentError("field does not match the grid");
    const HermitianField background = background_block(problem, ops);
    const HermitianField hess = ops.complex_hessian(u.values);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const BlockEigen e = block_eigenvalues(background.h11[i] + hess.h11[i], background.h22[i] + hess.h22[i],
                                               background.re[i] + hess.re[i], background.im[i] + hess.im[i]);
        const EigenTuple mu = x_to_chi(assemble_tuple(e, problem.frozen), problem.phase);
        worst = std::max(worst, std::abs(lagrangian_phase(mu) - p.theta_hat));
    }
    return worst;
}

void write_diagnostics_csv(std::ostream& out, const std::vector<StepDiagnostics>& steps) {
    const auto old_precision = out.precision();
    out << std::setprecision(17);
    out << "t,newton_iters,final_residual,min_cone_margin,max_eigenvalue,osc_u\n";
    for (const auto& s : steps) {
        out << s.t << ',' << s.newton_iterations << ',' << s.final_residual << ',' << s.min_cone_margin << ','
            << s.max_eigenvalue << ',' << s.osc_u << '\n';
    }
    out.precision(old_precision);
}

void write_field(std::ostream& out, const GridField& u, const TorusProblem& problem) {
    const auto old_precision = out.precision();
    out << std::setprecision(17);
    out << u.n << ' ' << problem.phase.n << ' ' << problem.phase.theta_hat << '\n';
    const auto row = static_cast<std::size_t>(u.n);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        out << u.values[i];
        out << ((i + 1) % row == 0 ? '\n' : ' ');
    }
    out.precision(old_precision);
}

}  // namespace dhym
