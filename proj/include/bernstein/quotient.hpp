#pragma once

// Bernstein quotients of polynomials restricted to a graph: circle sup-norms,
// the Bernstein index of one series, and the degree-k extremal quotient as a
// generalized Hermitian eigenvalue problem on L² Gram matrices.

#include "bernstein/restriction.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bernstein {

enum class QuotientMethod { GramL2, KernelWitness, RandomSearch };

std::string_view method_name(QuotientMethod m);
QuotientMethod method_from_name(std::string_view name);

struct QuotientEstimate {
    int k = 0;
    double r = 1.0;
    double log_quotient = 0.0;
    QuotientMethod method = QuotientMethod::GramL2;
    int precision_bits = mp::kDefaultBits;
    int samples = 0;  // quadrature nodes for gram_l2, circle samples otherwise
    std::string curve_label;
    /// Additive bound on the gap between the L² and sup-norm quotients (gram_l2 only).
    double l2_sup_gap = 0.0;
    int deflated = 0;  // inner-Gram directions removed as relations on the curve

    static std::string csv_header();
    std::string csv_row() const;
    nlohmann::json to_json() const;
};

struct GramPair {
    int k = 0;
    double r = 1.0;
    std::vector<std::vector<Complex>> inner_gram;  // on |z| = r
    std::vector<std::vector<Complex>> outer_gram;  // on |z| = e·r
    int quad_points = 0;
    int precision_bits = mp::kDefaultBits;

    std::size_t size() const { return inner_gram.size(); }
};

/// ln max |s| over equispaced samples on |z| = r. The sample count is rounded
/// up to a power of two so that larger requests always refine smaller ones.
Real sup_norm_on_circle(const TaylorSeries& s, const Real& r, std::size_t samples);

/// max over s_i = (r/e)·e^{-3i/(grid-1)} of ln M(e·s_i) − ln M(s_i).
double bernstein_index(const TaylorSeries& s, double r, int grid, std::size_t samples = 1024);

GramPair gram_matrices(int k, const CurveSpec& curve, double r, int precision_bits = mp::kDefaultBits, int jobs = 1);

struct ExtremalResult {
    QuotientEstimate estimate;
    GraphPolynomial maximizer;  // unit-norm coefficient vector of the top eigenvector
};

ExtremalResult extremal_quotient_with_vector(int k, const CurveSpec& curve, double r,
                                             int precision_bits = mp::kDefaultBits, int jobs = 1);
QuotientEstimate extremal_quotient(int k, const CurveSpec& curve, double r, int precision_bits = mp::kDefaultBits,
                                   int jobs = 1);

/// Same Gram pencil, solved from precomputed matrices.
ExtremalResult extremal_from_grams(const GramPair& g, int m);

/// Taylor series of p restricted to the graph, long enough to pass the tail
/// test on |z| = radius.
TaylorSeries restricted_series_for_radius(const GraphPolynomial& p, const CurveSpec& curve, double radius,
                                          int precision_bits);

double quotient_of_polynomial(const GraphPolynomial& p, const CurveSpec& curve, double r,
                              int precision_bits = mp::kDefaultBits, std::size_t samples = 1024);

/// The kernel polynomial of vanishing order target_order and its quotient.
QuotientEstimate kernel_witness_quotient(int k, const CurveSpec& curve, double r, int target_order,
                                         int precision_bits, std::size_t samples = 1024);

/// Best quotient among `trials` random unit polynomials drawn from `seed`.
QuotientEstimate random_search_quotient(int k, const CurveSpec& curve, double r, int trials, std::uint64_t seed,
                                        int precision_bits = mp::kDefaultBits, std::size_t samples = 1024);

struct ExpPolyBoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

ExpPolyBoundCheck verify_exp_poly_bound(const EntireFunctionSpec& g, double r, std::size_t samples = 4096);

}  // namespace bernstein
