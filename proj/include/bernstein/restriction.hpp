#pragma once

// Polynomials on ℂ^{1+m} restricted to the graph of f: ℂ → ℂ^m, the
// truncated-Taylor restriction matrix and kernel polynomials with prescribed
// vanishing order at the origin.

#include "bernstein/functions.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <vector>

namespace bernstein {

using MultiIndex = std::vector<int>;

/// binomial(N + k, N): the dimension of polynomials of degree ≤ k in N variables.
std::int64_t dim_pk(int N, int k);
/// ⌊k^{1+1/n} / (n+2)^{1/n}⌋.
std::int64_t sk_formula(int n, int k);
/// Multi-indices γ ∈ ℤ₊^N with |γ| ≤ k: graded by degree, lexicographically
/// descending within a degree. For N = 2, k = 1 this is (1, z, w).
std::vector<MultiIndex> monomial_basis(int N, int k);

/// Σ_{|γ|≤k} c_γ z^{γ₁} w₁^{γ₂}···w_m^{γ_{m+1}}, coefficients dense in basis order.
struct GraphPolynomial {
    int k = 0;
    int m = 1;
    std::vector<Complex> coeffs;

    const std::vector<MultiIndex>& basis() const;
    Real norm() const;  // Euclidean norm of the coefficient vector
    bool is_zero() const;
    Complex coefficient(const MultiIndex& gamma) const;
    void set(const MultiIndex& gamma, const Complex& c);

    static GraphPolynomial zero(int k, int m, int bits = mp::working_bits());
    nlohmann::json to_json() const;
    static GraphPolynomial from_json(const nlohmann::json& j);

private:
    mutable std::vector<MultiIndex> basis_cache_;
};

struct RestrictionMatrix {
    int k = 0;
    int s = 0;
    std::vector<MultiIndex> basis_order;
    std::vector<std::vector<Complex>> entries;  // (s+1) rows × d_{k,m+1} columns
    int precision_bits = mp::kDefaultBits;

    std::size_t rows() const { return entries.size(); }
    std::size_t cols() const { return basis_order.size(); }
};

/// Taylor series of the graph monomials z^{γ₁} f₁^{γ₂}···, memoized per curve.
class MonomialSeries {
public:
    MonomialSeries(const CurveSpec& curve, int J, int precision_bits);

    int J() const { return J_; }
    int bits() const { return bits_; }
    int m() const { return static_cast<int>(curve_.m()); }
    /// Coefficients 0..J of the monomial γ. References stay valid until extend().
    const std::vector<Complex>& monomial(const MultiIndex& gamma);
    /// Raises J, reusing every coefficient already computed.
    void extend(int J);

private:
    void fill_power(const MultiIndex& exps, std::vector<Complex>& out, std::size_t from);
    const std::vector<Complex>& power_part(const MultiIndex& exps);
    CurveSpec curve_;
    int J_;
    int bits_;
    std::vector<std::vector<Complex>> coords_;
    std::map<MultiIndex, std::vector<Complex>> powers_;
    std::map<MultiIndex, std::vector<Complex>> monomials_;
};

TaylorSeries restrict_to_graph(const GraphPolynomial& p, const CurveSpec& curve, int J,
                               int precision_bits = mp::kDefaultBits);
RestrictionMatrix restriction_matrix(int k, const CurveSpec& curve, int s, int precision_bits = mp::kDefaultBits);
RestrictionMatrix restriction_matrix(int k, MonomialSeries& monomials, int s);

/// A unit-norm p of degree ≤ k whose restriction vanishes to order at least
/// target_order at 0, verified by re-restriction through target_order + k + 16.
GraphPolynomial kernel_vanishing_poly(int k, const CurveSpec& curve, int target_order,
                                      int precision_bits = mp::kDefaultBits);

/// Precision used for degree-k quotient experiments: max(512, 64k + 256), capped.
int precision_for_degree(int k);

}  // namespace bernstein
