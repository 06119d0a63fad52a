#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dhym/errors.hpp"
#include "dhym/psatz.hpp"

using namespace dhym;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent oracle for the sharp bound: minimize c sigma_2 - d sigma_1 over positive triples on the wall
// sigma_3 - c sigma_1 + d = 0 whose pairwise products exceed c. The wall is parametrized by two entries (u, v) and
// the third solved from the wall equation; a coarse log grid is followed by coordinate pattern search.
double wall_minimum(double c, double d) {
    auto objective = [&](double lu, double lv) {
        const double u = std::exp(lu);
        const double v = std::exp(lv);
        const double denom = u * v - c;
        if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
        const double w = (c * (u + v) - d) / denom;
        if (!(w > 0.0) || !(u * w > c) || !(v * w > c)) return std::numeric_limits<double>::infinity();
        return c * (u * v + u * w + v * w) - d * (u + v + w);
    };
    const double center = 0.5 * std::log(c);
    double best = INFINITY;
    double bu = center;
    double bv = center;
    for (int i = 0; i <= 400; ++i) {
        for (int j = 0; j <= 400; ++j) {
            const double lu = center - 3.0 + 6.0 * i / 400.0;
            const double lv = center - 3.0 + 6.0 * j / 400.0;
            const double value = objective(lu, lv);
            if (value < best) {
                best = value;
                bu = lu;
                bv = lv;
            }
        }
    }
    for (double step = 0.02; step > 1e-12; step *= 0.5) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (const auto& [du, dv] : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0},
                                         {1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}}) {
                const double value = objective(bu + step * du, bv + step * dv);
                if (value < best) {
                    best = value;
                    bu += step * du;
                    bv += step * dv;
                    improved = true;
                }
            }
        }
    }
    return best;
}

PsatzParams random_cd(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double c = std::exp(std::log(0.1) + unit(rng) * std::log(100.0));
    const double d = 2.0 * std::pow(c, 1.5) * unit(rng) * 0.999;
    return PsatzParams{c, d, std::nullopt};
}

}  // namespace

TEST(ArccosBranch, Examples) {
    EXPECT_NEAR(arccos_branch(0.0), 1.5 * kPi, 1e-15);
    EXPECT_NEAR(arccos_branch(-1.0), kPi, 1e-15);
    EXPECT_NEAR(arccos_branch(-0.5), 4.0 * kPi / 3.0, 1e-15);
}

TEST(ArccosBranch, ClampsNearEndpointsAndRejectsBeyond) {
    EXPECT_NEAR(arccos_branch(5e-13), 1.5 * kPi, 1e-12);
    EXPECT_NEAR(arccos_branch(-1.0 - 5e-13), kPi, 1e-6);
    EXPECT_THROW(arccos_branch(1e-9), ArgumentError);
    EXPECT_THROW(arccos_branch(-1.1), ArgumentError);
    EXPECT_THROW(arccos_branch(std::nan("")), ArgumentError);
}

TEST(ArccosBranch, InvertsCosineAndIncreases) {
    double previous = -INFINITY;
    for (int i = 0; i <= 1000; ++i) {
        const double x = -1.0 + i / 1000.0;
        const double a = arccos_branch(x);
        EXPECT_NEAR(std::cos(a), x, 1e-12);
        EXPECT_GE(a, kPi);
        EXPECT_LE(a, 1.5 * kPi);
        EXPECT_GT(a, previous);
        previous = a;
        if (x > -1.0 + 1e-3) {
            const double h = 1e-6;
            const double fd = (arccos_branch(std::min(x + h, 0.0)) - arccos_branch(x - h)) / (std::min(x + h, 0.0) - (x - h));
            EXPECT_GT(arccos_branch_derivative(x), 0.0);
            EXPECT_NEAR(arccos_branch_derivative(x), fd, 1e-5 * std::max(1.0, fd));
        }
    }
}

TEST(ThetaCd, Examples) {
    EXPECT_NEAR(theta_cd({1.0, 0.0, std::nullopt}), -kPi / 6.0, 1e-15);
    EXPECT_NEAR(theta_cd({1.0, 2.0, std::nullopt}), -kPi / 3.0, 1e-7);
    EXPECT_NEAR(theta_cd({4.0, 0.0, std::nullopt}), -kPi / 6.0, 1e-15);
    EXPECT_THROW(theta_cd({1.0, 2.1, std::nullopt}), ArgumentError);
    EXPECT_THROW(theta_cd({0.0, 0.0, std::nullopt}), ArgumentError);
    EXPECT_THROW(theta_cd({1.0, -0.1, std::nullopt}), ArgumentError);
}

TEST(ThetaCd, StaysInBranchInterval) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double theta = theta_cd(random_cd(rng));
        EXPECT_GE(theta, -kPi / 3.0 - 1e-15);
        EXPECT_LE(theta, -kPi / 6.0 + 1e-15);
    }
}

TEST(CubicRoots, Examples) {
    const auto r = cubic_roots({1.0, 0.0, std::nullopt});
    EXPECT_NEAR(r[0], 0.0, 1e-14);
    EXPECT_NEAR(r[1], 2.0 * std::sqrt(3.0), 1e-14);
    EXPECT_NEAR(r[2], -2.0 * std::sqrt(3.0), 1e-14);
    const PsatzParams one_one{1.0, 1.0, std::nullopt};
    const auto s = cubic_roots(one_one);
    EXPECT_NEAR(s[1], 4.0 * std::cos(-2.0 * kPi / 9.0), 1e-12);
    EXPECT_NEAR(s[1], 3.0642, 1e-4);
    for (double b : s) EXPECT_LT(std::abs(cubic_residual(one_one, b)), 1e-10);
    const auto big = cubic_roots({9.0, 0.0, std::nullopt});
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(big[static_cast<std::size_t>(k)], 3.0 * r[static_cast<std::size_t>(k)], 1e-12);
    EXPECT_THROW(cubic_roots({1.0, 2.0, std::nullopt}), ArgumentError);
}

TEST(CubicRoots, ResidualsAndOrderingChain) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 1000; ++i) {
        const PsatzParams p = random_cd(rng);
        const auto r = cubic_roots(p);
        const double sc = std::sqrt(p.c);
        for (double b : r) EXPECT_LT(std::abs(cubic_residual(p, b)), 1e-9 * std::max(1.0, 8.0 * p.d));
        const double slack = 1e-12 * sc;
        EXPECT_GE(2.0 * std::sqrt(3.0) * sc + slack, r[1]);
        EXPECT_GT(r[1], 2.0 * sc);
        EXPECT_GT(2.0 * sc, r[0]);
        EXPECT_GE(r[0], -slack);
        EXPECT_GT(0.0, -2.0 * std::sqrt(3.0) * sc);
        EXPECT_GE(-2.0 * std::sqrt(3.0) * sc + slack, r[2]);
        EXPECT_GT(r[2], -4.0 * sc);
    }
}

TEST(EBound, Examples) {
    EXPECT_NEAR(e_lower_bound({1.0, 0.0, std::nullopt}), -9.0, 1e-12);
    EXPECT_NEAR(e_lower_bound({2.5, 0.0, std::nullopt}), -9.0 * 6.25, 1e-10);
    EXPECT_NEAR(e_lower_bound({1.0, 2.0 - 1e-12, std::nullopt}), 3.0, 1e-5);
}

TEST(EBound, Homogeneity) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const PsatzParams p = random_cd(rng);
        const double base = e_lower_bound(p);
        for (double s : {0.5, 2.0, 3.0}) {
            const double scaled = e_lower_bound({s * s * p.c, s * s * s * p.d, std::nullopt});
            EXPECT_NEAR(scaled, std::pow(s, 4) * base, 1e-10 * std::abs(std::pow(s, 4) * base) + 1e-12);
        }
    }
}

TEST(EBound, MatchesWallMinimumOracle) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 12; ++i) {
        const PsatzParams p = i == 0 ? PsatzParams{1.0, 0.0, std::nullopt} : random_cd(rng);
        const double bound = e_lower_bound(p);
        const double oracle = -wall_minimum(p.c, p.d);
        EXPECT_NEAR(bound, oracle, 1e-6 * std::max(1.0, std::abs(bound))) << "c=" << p.c << " d=" << p.d;
    }
}

TEST(Infimum, ClosedFormAndOracleAtUnitParameters) {
    const PsatzParams p{1.0, 0.0, std::nullopt};
    EXPECT_NEAR(infimum_closed_form(p), 8.0, 1e-12);
    EXPECT_NEAR(infimum_oracle(p), 8.0, 1e-8);
    // Degree-six homogeneity of the objective in (A, B) = (s^2 A, s B) with c -> s^2 c.
    EXPECT_NEAR(infimum_oracle({4.0, 0.0, std::nullopt}), 64.0 * infimum_oracle(p), 1e-6);
}

TEST(Infimum, OracleMatchesClosedForm) {
    std::mt19937_64 rng(5);
    const double one_one = infimum_closed_form({1.0, 1.0, std::nullopt});
    EXPECT_NEAR(infimum_oracle({1.0, 1.0, std::nullopt}), one_one, 1e-6 * std::abs(one_one));
    for (int i = 0; i < 100; ++i) {
        const PsatzParams p = random_cd(rng);
        const double closed = infimum_closed_form(p);
        EXPECT_NEAR(infimum_oracle(p), closed, 1e-6 * std::abs(closed)) << "c=" << p.c << " d=" << p.d;
    }
}

TEST(Infimum, EqualsConstantTermAtSharpBound) {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 200; ++i) {
        const PsatzParams p = random_cd(rng);
        const double e = e_lower_bound(p);
        const double constant = -p.c * p.c * p.c - p.c * e + p.d * p.d;
        const double oracle = infimum_oracle(p);
        EXPECT_NEAR(constant, oracle, 1e-5 * std::abs(oracle));
    }
}

TEST(Containment, ClaimsPassUnderHypotheses) {
    ContainmentOptions options;
    options.samples = 20000;
    for (char claim : {'a', 'b', 'd'}) {
        const ContainmentVerdict v = containment_check(parse_claim(std::string(1, claim)), {1.0, 1.0, std::nullopt}, options);
        EXPECT_TRUE(v.pass) << "claim " << claim << " worst " << v.worst_margin;
        EXPECT_FALSE(v.witness.has_value());
        EXPECT_GT(v.samples_checked, 0u);
    }
    PsatzParams with_e{1.0, 0.5, std::nullopt};
    with_e.e = e_lower_bound(with_e) + 0.5;
    for (char claim : {'c', 'e', 'f'}) {
        const ContainmentVerdict v = containment_check(parse_claim(std::string(1, claim)), with_e, options);
        EXPECT_TRUE(v.pass) << "claim " << claim << " worst " << v.worst_margin;
    }
}

TEST(Containment, PairSumClaimWithManySamples) {
    ContainmentOptions options;
    options.samples = 100000;
    EXPECT_TRUE(containment_check(Claim::D, {1.0, 1.0, std::nullopt}, options).pass);
}

TEST(Containment, SharpnessOfTripleClaim) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 10; ++i) {
        PsatzParams p = i == 0 ? PsatzParams{1.0, 0.0, std::nullopt} : random_cd(rng);
        const double bound = e_lower_bound(p);
        ContainmentOptions options;
        options.samples = 5000;
        options.seed = 100 + static_cast<std::uint64_t>(i);
        p.e = bound + 1e-3 * p.c * p.c;
        EXPECT_TRUE(containment_check(Claim::E, p, options).pass) << "c=" << p.c << " d=" << p.d;
        p.e = bound - 1e-3 * p.c * p.c;
        const ContainmentVerdict fail = containment_check(Claim::E, p, options);
        EXPECT_FALSE(fail.pass) << "c=" << p.c << " d=" << p.d;
        EXPECT_TRUE(fail.witness.has_value());
    }
}

TEST(Containment, WitnessNearSymmetricMinimizer) {
    ContainmentOptions options;
    options.samples = 20000;
    const ContainmentVerdict v = containment_check(Claim::E, {1.0, 0.0, -9.01}, options);
    ASSERT_FALSE(v.pass);
    ASSERT_EQ(v.worst_point.size(), 4u);
    int near = 0;
    for (double x : v.worst_point) near += std::abs(x - std::sqrt(3.0)) < 0.05;
    EXPECT_GE(near, 3);
}

TEST(Containment, IsDeterministicForAFixedSeed) {
    ContainmentOptions options;
    options.samples = 3000;
    options.seed = 42;
    const auto a = containment_check(Claim::E, {1.0, 0.3, -8.0}, options);
    const auto b = containment_check(Claim::E, {1.0, 0.3, -8.0}, options);
    EXPECT_EQ(a.worst_margin, b.worst_margin);
    EXPECT_EQ(a.worst_point, b.worst_point);
    EXPECT_EQ(a.samples_checked, b.samples_checked);
}

TEST(Containment, RejectsViolatedHypotheses) {
    EXPECT_THROW(containment_check(Claim::E, {1.0, 0.0, std::nullopt}), ArgumentError);
    EXPECT_THROW(containment_check(Claim::B, {1.0, 3.0, std::nullopt}), ArgumentError);
    EXPECT_THROW(containment_check(Claim::F, {1.0, 0.0, -10.0}), ArgumentError);
    ContainmentOptions three;
    three.dimension = 3;
    EXPECT_THROW(containment_check(Claim::F, {1.0, 0.0, -8.0}, three), ArgumentError);
    EXPECT_THROW(parse_claim("g"), ArgumentError);
}
