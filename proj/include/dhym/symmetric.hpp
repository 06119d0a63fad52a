#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace dhym {

/// Largest dimension handled by the library.
inline constexpr int kMaxDim = 4;

/// Eigenvalues of a Hermitian endomorphism at a point. Order carries no meaning.
class EigenTuple {
public:
    EigenTuple() = default;
    EigenTuple(std::initializer_list<double> values);
    explicit EigenTuple(std::span<const double> values);

    /// Dimension n (3 or 4).
    int size() const { return n_; }
    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
    std::span<const double> values() const { return {v_.data(), static_cast<std::size_t>(n_)}; }
    std::vector<double> to_vector() const { return {v_.begin(), v_.begin() + n_}; }

private:
    std::array<double, kMaxDim> v_{};
    int n_ = 0;
};

/// Cone defined by positivity of sum_k coeffs[arity-k] * sigma_k over every arity-subset.
/// Coefficients are listed from the highest degree down to the constant term.
struct ConeSpec {
    int arity = 1;
    std::vector<double> coeffs;
};

/// Membership verdict: margin is the smallest subset value, member iff margin > epsilon.
struct ConeVerdict {
    bool member = false;
    double margin = 0.0;
};

/// k-th elementary symmetric polynomial of the given values; sigma_0 = 1.
double sigma_k(std::span<const double> values, int k);

/// All elementary symmetric polynomials sigma_0..sigma_m of m values.
std::array<double, kMaxDim + 1> sigma_all(std::span<const double> values);

/// Evaluates the cone polynomial on one subset of the given values.
double cone_polynomial(std::span<const double> subset, const ConeSpec& cone);

/// Tests membership in the cone, enumerating every subset of the cone's arity.
ConeVerdict upsilon_membership(const EigenTuple& lambda, const ConeSpec& cone, double epsilon = 0.0);

/// Smallest margin over several cones (the intersection's margin).
ConeVerdict intersection_membership(const EigenTuple& lambda, const std::vector<ConeSpec>& cones,
                                    double epsilon = 0.0);

/// True iff sigma_1 > 0, ..., sigma_k > 0.
bool gamma_k_membership(const EigenTuple& lambda, int k);

/// Sum of arctangents, each on the principal branch.
double lagrangian_phase(const EigenTuple& lambda);

/// Indices of the subset encoded by a bit mask.
std::vector<int> mask_indices(unsigned mask, int n);

/// Values of lambda restricted to the subset encoded by a bit mask.
int gather_subset(const EigenTuple& lambda, unsigned mask, std::array<double, kMaxDim>& out);

/// Number of set bits in a mask.
int popcount(unsigned mask);

}  // namespace dhym
