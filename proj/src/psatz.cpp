#include "dhym/psatz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dhym/errors.hpp"
#include "dhym/parallel.hpp"
#include "dhym/symmetric.hpp"

namespace dhym {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClampTolerance = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_cd(const PsatzParams& p) {
    if (!(p.c > 0.0) || !std::isfinite(p.c)) throw ArgumentError("psatz: c must be positive and finite");
    if (!(p.d >= 0.0) || !std::isfinite(p.d)) throw ArgumentError("psatz: d must be non-negative and finite");
}

void require_strict_cubic_regime(const PsatzParams& p) {
    require_cd(p);
    if (!(p.d < 2.0 * std::pow(p.c, 1.5))) throw ArgumentError("psatz: requires d < 2 c^{3/2}");
}

}  // namespace

double arccos_branch(double x) {
    if (std::isnan(x) || x > kClampTolerance || x < -1.0 - kClampTolerance) {
        throw ArgumentError("arccos_branch: argument outside [-1, 0]");
    }
    x = std::clamp(x, -1.0, 0.0);
    return 2.0 * kPi - std::acos(x);
}

double arccos_branch_derivative(double x) {
    if (std::isnan(x) || x > kClampTolerance || x < -1.0 - kClampTolerance) {
        throw ArgumentError("arccos_branch_derivative: argument outside [-1, 0]");
    }
    x = std::clamp(x, -1.0, 0.0);
    return 1.0 / std::sqrt(1.0 - x * x);
}

double theta_cd(const PsatzParams& p) {
    require_cd(p);
    const double x = -p.d / (2.0 * std::pow(p.c, 1.5));
    if (x < -1.0 - kClampTolerance) throw ArgumentError("theta_cd: requires d <= 2 c^{3/2}");
    return arccos_branch(x) / 3.0 - 2.0 * kPi / 3.0;
}

std::array<double, 3> cubic_roots(const PsatzParams& p) {
    require_strict_cubic_regime(p);
    const double base = arccos_branch(-p.d / (2.0 * std::pow(p.c, 1.5))) / 3.0;
    const double scale = 4.0 * std::sqrt(p.c);
    std::array<double, 3> roots{};
    for (int k = 0; k < 3; ++k) roots[static_cast<std::size_t>(k)] = scale * std::cos(base - 2.0 * kPi * k / 3.0);
    return roots;
}

double cubic_residual(const PsatzParams& p, double b) { return b * b * b - 12.0 * p.c * b + 8.0 * p.d; }

double e_lower_bound(const PsatzParams& p) {
    require_strict_cubic_regime(p);
    const double theta = theta_cd(p);
    const double cs = std::cos(theta);
    return -24.0 * p.c * p.c * cs * cs * std::cos(2.0 * theta);
}

double infimum_closed_form(const PsatzParams& p) {
    require_strict_cubic_regime(p);
    const double c = p.c;
    const double d = p.d;
    const double cs = std::cos(theta_cd(p));
    const double c3 = c * c * c;
    return 5.0 * c3 + d * d + (-18.0 * std::pow(c, 1.5) * d * cs + 3.0 * (2.0 * c3 + d * d)) / (4.0 * cs * cs - 1.0);
}

double infimum_oracle(const PsatzParams& p, const OracleResolution& resolution) {
    require_strict_cubic_regime(p);
    const double c = p.c;
    const double d = p.d;
    // For fixed A the objective is a convex quadratic in B, so the inner minimum is exact.
    auto reduced = [&](double a) {
        const double b_min = 2.0 * std::sqrt(a + c) - d / c;
        const double b_free = d * a / (2.0 * c * c);
        const double b = std::max(b_min, b_free);
        return c * c * a - c * d * b + c * c * c * b * b / a;
    };
    const int m = std::max(resolution.grid_points, 16);
    const double lo = std::log(c) - resolution.log_span * std::log(10.0);
    const double hi = std::log(c) + resolution.log_span * std::log(10.0);
    const double step = (hi - lo) / (m - 1);
    int best = 0;
    double best_value = kInf;
    for (int i = 0; i < m; ++i) {
        const double value = reduced(std::exp(lo + step * i));
        if (value < best_value) {
            best_value = value;
            best = i;
        }
    }
    double left = lo + step * std::max(best - 1, 0);
    double right = lo + step * std::min(best + 1, m - 1);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = right - ratio * (right - left);
    double x2 = left + ratio * (right - left);
    double f1 = reduced(std::exp(x1));
    double f2 = reduced(std::exp(x2));
    for (int it = 0; it < resolution.refine_iterations && right - left > 1e-15; ++it) {
        if (f1 < f2) {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - ratio * (right - left);
            f1 = reduced(std::exp(x1));
        } else {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + ratio * (right - left);
            f2 = reduced(std::exp(x2));
        }
    }
    return std::min({best_value, f1, f2});
}

Claim parse_claim(const std::string& name) {
    if (name == "a") return Claim::A;
    if (name == "b") return Claim::B;
    if (name == "c") return Claim::C;
    if (name == "d") return Claim::D;
    if (name == "e") return Claim::E;
    if (name == "f") return Claim::F;
    throw ArgumentError("unknown claim '" + name + "' (expected one of a-f)");
}

std::string claim_name(Claim claim) {
    static const char* names[] = {"a", "b", "c", "d", "e", "f"};
    return names[static_cast<int>(claim)];
}

namespace {

ConeSpec cone(int arity, std::vector<double> coeffs) { return ConeSpec{arity, std::move(coeffs)}; }

/// Sets and tests attached to one claim.
struct ClaimSetup {
    std::vector<ConeSpec> hypothesis;   ///< sampled set
    std::vector<ConeSpec> conclusion;   ///< must hold on every hypothesis sample
    bool triple_wall_samples = false;   ///< boundary-biased samples on the triple cone wall
    bool pair_wall_samples = false;     ///< boundary-biased samples on the pair cone wall
    bool coordinate_segments = false;   ///< coordinate-wise segment tests inside the hypothesis set
    bool general_segments = false;      ///< segments between independent samples (convexity)
    bool zero_wall = false;             ///< points with a zero entry lie outside the pair cone
    bool pair_wall = false;             ///< points on the pair wall lie outside the triple cone
    bool triple_wall = false;           ///< points on the triple wall lie outside the quadruple cone
    bool local_search = false;          ///< minimize the conclusion along the triple wall
};

ClaimSetup make_setup(Claim claim, const PsatzParams& p) {
    const double c = p.c;
    const double d = p.d;
    const ConeSpec orthant = cone(1, {1.0, 0.0});
    const ConeSpec pairs = cone(2, {1.0, 0.0, -c});
    const ConeSpec triples = cone(3, {1.0, 0.0, -c, d});
    ClaimSetup s;
    switch (claim) {
        case Claim::A:
            s.hypothesis = {pairs, orthant};
            s.pair_wall_samples = true;
            s.general_segments = true;
            s.coordinate_segments = true;
            s.zero_wall = true;
            break;
        case Claim::B:
            s.hypothesis = {triples, pairs, orthant};
            s.triple_wall_samples = true;
            s.coordinate_segments = true;
            s.pair_wall = true;
            break;
        case Claim::C:
            s.hypothesis = {cone(3, {0.0, c, -d, *p.e}), pairs, orthant};
            s.coordinate_segments = true;
            break;
        case Claim::D:
            s.hypothesis = {pairs, orthant};
            s.conclusion = {cone(2, {0.0, c, -d})};
            s.pair_wall_samples = true;
            break;
        case Claim::E:
            s.hypothesis = {triples, pairs, orthant};
            s.conclusion = {cone(3, {0.0, c, -d, *p.e})};
            s.triple_wall_samples = true;
            s.local_search = true;
            break;
        case Claim::F:
            s.hypothesis = {cone(4, {1.0, 0.0, -c, d, -*p.e}), triples, pairs, orthant};
            s.triple_wall_samples = true;
            s.coordinate_segments = true;
            s.triple_wall = true;
            break;
    }
    return s;
}

void check_hypothesis(Claim claim, const PsatzParams& p, int n) {
    require_cd(p);
    if (n != 3 && n != 4) throw ArgumentError("containment_check: dimension must be 3 or 4");
    const bool needs_regime = claim != Claim::A && claim != Claim::C;
    if (needs_regime && !(p.d < 2.0 * std::pow(p.c, 1.5))) {
        throw ArgumentError("claim (" + claim_name(claim) + ") requires d < 2 c^{3/2}");
    }
    if ((claim == Claim::C || claim == Claim::E || claim == Claim::F) && !p.e) {
        throw ArgumentError("claim (" + claim_name(claim) + ") requires a value of e");
    }
    if (claim == Claim::F) {
        if (n != 4) throw ArgumentError("claim (f) requires dimension 4");
        if (!(*p.e > e_lower_bound(p))) throw ArgumentError("claim (f) requires e above the sharp lower bound");
    }
}

/// Running minimum of a margin with the point that attains it.
struct Tracker {
    double worst = kInf;
    std::vector<double> point;
    std::optional<std::vector<double>> witness;
    double wall_best = kInf;              ///< best conclusion value on the triple wall (local search seeds)
    std::vector<double> wall_seed;        ///< (u, v) parameters of that wall sample
    std::size_t count = 0;

    void record(double margin, const EigenTuple& x) {
        ++count;
        if (margin < worst) {
            worst = margin;
            point = x.to_vector();
        }
        if (!(margin > 0.0) && !witness) witness = x.to_vector();
    }
};

class Sampler {
public:
    Sampler(const PsatzParams& p, int n, std::mt19937_64& rng) : p_(p), n_(n), rng_(rng) {
        range_ = 20.0 * std::max({1.0, std::sqrt(p.c), p.d / p.c});
    }

    double range() const { return range_; }

    double coordinate() {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        if (unit(rng_) < 0.5) return range_ * unit(rng_);
        return std::exp(std::log(range_ * 1e-4) + unit(rng_) * std::log(1e4));
    }

    double near_scale(double scale) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        return scale * std::exp((unit(rng_) * 2.0 - 1.0) * std::log(20.0));
    }

    EigenTuple box() {
        std::array<double, kMaxDim> v{};
        for (int i = 0; i < n_; ++i) v[static_cast<std::size_t>(i)] = coordinate();
        return EigenTuple(std::span<const double>(v.data(), static_cast<std::size_t>(n_)));
    }

    std::array<int, kMaxDim> permutation() {
        std::array<int, kMaxDim> idx{0, 1, 2, 3};
        std::shuffle(idx.begin(), idx.begin() + n_, rng_);
        return idx;
    }

    /// Point with lambda_a * lambda_b = c * (1 + inward), other entries from the box.
    EigenTuple pair_wall(double inward) {
        EigenTuple x = box();
        const auto idx = permutation();
        const double a = near_scale(std::sqrt(p_.c));
        x[idx[0]] = a;
        x[idx[1]] = p_.c * (1.0 + inward) / a;
        return x;
    }

    /// Wall parameters u, v with the solved third entry; returns false if the third entry is not positive.
    bool triple_wall_entry(double u, double v, double& w) const {
        const double denom = u * v - p_.c;
        if (!(denom > 0.0)) return false;
        w = (p_.c * (u + v) - p_.d) / denom;
        return w > 0.0 && std::isfinite(w);
    }

    /// Point whose entries 0..2 (after permutation) lie on the triple wall, nudged inward.
    bool triple_wall(double inward, EigenTuple& out, double& u, double& v) {
        EigenTuple x = box();
        const auto idx = permutation();
        u = near_scale(std::sqrt(3.0 * p_.c));
        v = near_scale(std::sqrt(3.0 * p_.c));
        double w = 0.0;
        if (!triple_wall_entry(u, v, w)) return false;
        x[idx[0]] = w * (1.0 + inward);
        x[idx[1]] = u;
        x[idx[2]] = v;
        out = x;
        return true;
    }

private:
    PsatzParams p_;
    int n_;
    std::mt19937_64& rng_;
    double range_ = 1.0;
};

EigenTuple lerp(const EigenTuple& a, const EigenTuple& b, double s) {
    EigenTuple out = a;
    for (int i = 0; i < a.size(); ++i) out[i] = (1.0 - s) * a[i] + s * b[i];
    return out;
}

double triple_conclusion(const PsatzParams& p, double w, double u, double v) {
    const double s1 = w + u + v;
    const double s2 = w * u + w * v + u * v;
    return p.c * s2 - p.d * s1 + *p.e;
}

constexpr double kInward = 1e-7;
constexpr std::size_t kChunk = 1000;

}  // namespace

ContainmentVerdict containment_check(Claim claim, const PsatzParams& p, const ContainmentOptions& options) {
    const int n = options.dimension;
    check_hypothesis(claim, p, n);
    const ClaimSetup setup = make_setup(claim, p);
    const std::size_t chunks = std::max<std::size_t>(1, (options.samples + kChunk - 1) / kChunk);
    std::vector<Tracker> trackers(chunks);

    parallel_chunks(chunks, [&](std::size_t chunk) {
        auto rng = chunk_rng(options.seed, chunk);
        Sampler sampler(p, n, rng);
        Tracker& tr = trackers[chunk];
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const std::size_t begin = chunk * kChunk;
        const std::size_t end = std::min(options.samples, begin + kChunk);
        const std::size_t max_attempts = 200;

        auto draw_member = [&](EigenTuple& x, double* wall_u, double* wall_v) -> bool {
            for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
                const double r = unit(rng);
                double u = 0.0;
                double v = 0.0;
                bool on_wall = false;
                if (setup.triple_wall_samples && r < 0.5) {
                    if (!sampler.triple_wall(kInward, x, u, v)) continue;
                    on_wall = true;
                } else if (setup.pair_wall_samples && r < 0.5) {
                    x = sampler.pair_wall(kInward);
                } else {
                    x = sampler.box();
                }
                if (intersection_membership(x, setup.hypothesis).member) {
                    if (wall_u) *wall_u = on_wall ? u : std::numeric_limits<double>::quiet_NaN();
                    if (wall_v) *wall_v = v;
                    return true;
                }
            }
            return false;
        };

        for (std::size_t s = begin; s < end; ++s) {
            EigenTuple x;
            double u = 0.0;
            double v = 0.0;
            if (!draw_member(x, &u, &v)) continue;

            if (!setup.conclusion.empty()) {
                const double margin = intersection_membership(x, setup.conclusion).margin;
                tr.record(margin, x);
                if (setup.local_search && !std::isnan(u) && margin < tr.wall_best) {
                    tr.wall_best = margin;
                    tr.wall_seed = {u, v};
                }
            }

            if (setup.coordinate_segments) {
                const int i = static_cast<int>(unit(rng) * n) % n;
                for (int attempt = 0; attempt < 20; ++attempt) {
                    EigenTuple y = x;
                    y[i] = sampler.coordinate();
                    if (!intersection_membership(y, setup.hypothesis).member) continue;
                    for (int k = 1; k <= 5; ++k) {
                        const EigenTuple z = lerp(x, y, k / 6.0);
                        tr.record(intersection_membership(z, setup.hypothesis).margin, z);
                    }
                    break;
                }
            }

            if (setup.general_segments) {
                EigenTuple y;
                if (draw_member(y, nullptr, nullptr)) {
                    for (int k = 1; k <= 5; ++k) {
                        const EigenTuple z = lerp(x, y, k / 6.0);
                        tr.record(intersection_membership(z, setup.hypothesis).margin, z);
                    }
                }
            }

            if (setup.zero_wall) {
                EigenTuple z = sampler.box();
                z[static_cast<int>(unit(rng) * n) % n] = 0.0;
                tr.record(-upsilon_membership(z, setup.hypothesis[0]).margin, z);
            }

            if (setup.pair_wall) {
                const EigenTuple z = sampler.pair_wall(0.0);
                tr.record(-upsilon_membership(z, setup.hypothesis[0]).margin, z);
            }

            if (setup.triple_wall) {
                EigenTuple z;
                double wu = 0.0;
                double wv = 0.0;
                if (sampler.triple_wall(0.0, z, wu, wv) &&
                    intersection_membership(z, {setup.hypothesis[2], setup.hypothesis[3]}).member) {
                    tr.record(-upsilon_membership(z, setup.hypothesis[0]).margin, z);
                }
            }
        }
    });

    Tracker total;
    std::vector<std::pair<double, std::vector<double>>> seeds;
    for (auto& tr : trackers) {
        total.count += tr.count;
        if (tr.worst < total.worst) {
            total.worst = tr.worst;
            total.point = tr.point;
        }
        if (!total.witness && tr.witness) total.witness = tr.witness;
        if (!tr.wall_seed.empty()) seeds.emplace_back(tr.wall_best, tr.wall_seed);
    }

    if (setup.local_search && !seeds.empty()) {
        std::sort(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        const std::size_t starts = std::min<std::size_t>(seeds.size(), static_cast<std::size_t>(options.local_search_starts));
        std::mt19937_64 helper_rng(options.seed);
        Sampler helper(p, n, helper_rng);
        auto objective = [&](double lu, double lv) {
            double w = 0.0;
            const double u = std::exp(lu);
            const double v = std::exp(lv);
            if (!helper.triple_wall_entry(u, v, w)) return kInf;
            if (!(w * u > p.c && w * v > p.c)) return kInf;
            return triple_conclusion(p, w, u, v);
        };
        for (std::size_t s = 0; s < starts; ++s) {
            double lu = std::log(seeds[s].second[0]);
            double lv = std::log(seeds[s].second[1]);
            double best = objective(lu, lv);
            for (double step = 0.5; step > 1e-12; step *= 0.5) {
                bool improved = true;
                while (improved) {
                    improved = false;
                    const double moves[8][2] = {{step, 0}, {-step, 0}, {0, step}, {0, -step},
                                                {step, step}, {-step, -step}, {step, -step}, {-step, step}};
                    for (const auto& m : moves) {
                        const double value = objective(lu + m[0], lv + m[1]);
                        if (value < best) {
                            best = value;
                            lu += m[0];
                            lv += m[1];
                            improved = true;
                        }
                    }
                }
            }
            const double u = std::exp(lu);
            const double v = std::exp(lv);
            double w = 0.0;
            if (!helper.triple_wall_entry(u, v, w)) continue;
            for (double inward : {kInward, 1e-6, 1e-5}) {
                std::array<double, kMaxDim> vals{w * (1.0 + inward), u, v, helper.range()};
                EigenTuple x(std::span<const double>(vals.data(), static_cast<std::size_t>(n)));
                if (!intersection_membership(x, setup.hypothesis).member) continue;
                const double margin = intersection_membership(x, setup.conclusion).margin;
                ++total.count;
                if (margin < total.worst) {
                    total.worst = margin;
                    total.point = x.to_vector();
                }
                if (!(margin > 0.0) && !total.witness) total.witness = x.to_vector();
                break;
            }
        }
    }

    ContainmentVerdict verdict;
    verdict.samples_checked = total.count;
    verdict.worst_margin = total.worst;
    verdict.worst_point = total.point;
    verdict.witness = total.witness;
    verdict.pass = total.count > 0 && total.worst > 0.0 && !total.witness;
    return verdict;
}

}  // namespace dhym
