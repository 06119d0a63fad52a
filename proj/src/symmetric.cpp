#include "dhym/symmetric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "dhym/errors.hpp"

namespace dhym {

namespace {

void check_values(std::span<const double> values) {
    if (values.size() != 3 && values.size() != 4) {
        throw ArgumentError("eigenvalue tuple must have 3 or 4 entries, got " + std::to_string(values.size()));
    }
    for (double x : values) {
        if (!std::isfinite(x)) throw ArgumentError("eigenvalue tuple contains a non-finite entry");
    }
}

}  // namespace

EigenTuple::EigenTuple(std::initializer_list<double> values)
    : EigenTuple(std::span<const double>(values.begin(), values.size())) {}

EigenTuple::EigenTuple(std::span<const double> values) {
    check_values(values);
    n_ = static_cast<int>(values.size());
    std::copy(values.begin(), values.end(), v_.begin());
}

double sigma_k(std::span<const double> values, int k) {
    const int m = static_cast<int>(values.size());
    if (k < 0 || k > m) {
        throw ArgumentError("sigma_k: k=" + std::to_string(k) + " outside [0, " + std::to_string(m) + "]");
    }
    if (m > kMaxDim) throw ArgumentError("sigma_k: at most 4 values supported");
    return sigma_all(values)[static_cast<std::size_t>(k)];
}

std::array<double, kMaxDim + 1> sigma_all(std::span<const double> values) {
    std::array<double, kMaxDim + 1> e{};
    e[0] = 1.0;
    int m = 0;
    for (double x : values) {
        ++m;
        for (int j = m; j >= 1; --j) e[static_cast<std::size_t>(j)] += x * e[static_cast<std::size_t>(j - 1)];
    }
    return e;
}

double cone_polynomial(std::span<const double> subset, const ConeSpec& cone) {
    const auto e = sigma_all(subset);
    double value = 0.0;
    for (int k = 0; k <= cone.arity; ++k) {
        value += cone.coeffs[static_cast<std::size_t>(cone.arity - k)] * e[static_cast<std::size_t>(k)];
    }
    return value;
}

int popcount(unsigned mask) { return std::popcount(mask); }

std::vector<int> mask_indices(unsigned mask, int n) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
        if (mask & (1u << i)) idx.push_back(i);
    }
    return idx;
}

int gather_subset(const EigenTuple& lambda, unsigned mask, std::array<double, kMaxDim>& out) {
    int m = 0;
    for (int i = 0; i < lambda.size(); ++i) {
        if (mask & (1u << i)) out[static_cast<std::size_t>(m++)] = lambda[i];
    }
    return m;
}

ConeVerdict upsilon_membership(const EigenTuple& lambda, const ConeSpec& cone, double epsilon) {
    const int n = lambda.size();
    if (cone.arity < 1 || cone.arity > n) {
        throw ArgumentError("cone arity " + std::to_string(cone.arity) + " outside [1, " + std::to_string(n) + "]");
    }
    if (static_cast<int>(cone.coeffs.size()) != cone.arity + 1) {
        throw ArgumentError("cone of arity " + std::to_string(cone.arity) + " needs " +
                            std::to_string(cone.arity + 1) + " coefficients");
    }
    double margin = std::numeric_limits<double>::infinity();
    std::array<double, kMaxDim> buf{};
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        if (popcount(mask) != cone.arity) continue;
        const int m = gather_subset(lambda, mask, buf);
        margin = std::min(margin, cone_polynomial(std::span<const double>(buf.data(), static_cast<std::size_t>(m)), cone));
    }
    return {margin > epsilon, margin};
}

ConeVerdict intersection_membership(const EigenTuple& lambda, const std::vector<ConeSpec>& cones, double epsilon) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& cone : cones) margin = std::min(margin, upsilon_membership(lambda, cone).margin);
    return {margin > epsilon, margin};
}

bool gamma_k_membership(const EigenTuple& lambda, int k) {
    if (k < 1 || k > lambda.size()) throw ArgumentError("gamma_k: k outside [1, n]");
    const auto e = sigma_all(lambda.values());
    for (int j = 1; j <= k; ++j) {
        if (!(e[static_cast<std::size_t>(j)] > 0.0)) return false;
    }
    return true;
}

double lagrangian_phase(const EigenTuple& lambda) {
    double phase = 0.0;
    for (double x : lambda.values()) phase += std::atan(x);
    return phase;
}

}  // namespace dhym
