#pragma once

// Zero counts of restricted polynomials by the argument principle, the
// Jensen-type upper bound, and the kernel-witness lower-bound experiments.

#include "bernstein/quotient.hpp"

#include <json.hpp>

#include <string>

namespace bernstein {

struct ZeroCountResult {
    double r = 1.0;  // radius actually integrated over (after any nudges)
    int count = 0;
    int contour_segments = 0;
    double residual = 0.0;  // distance of the raw winding integral from the nearest integer
    double jensen_bound = 0.0;
    bool winding_ok = false;
    int nudges = 0;

    nlohmann::json to_json() const;
};

/// ln((1 + e²)/(2e)) ≈ 0.433780.
double jensen_constant(int precision_bits = mp::kDefaultBits);

/// Zeros of s in |z| < r, counted with multiplicity. The Jensen bound is filled
/// in when the series also converges on |z| = e·r, otherwise it is +∞.
ZeroCountResult count_zeros_argument(const TaylorSeries& s, double r);

double jensen_upper_bound(const TaylorSeries& s, double r, std::size_t samples = 1024);

/// Index of the first coefficient above `threshold` in modulus (size() when none).
int vanishing_order_of(const TaylorSeries& s, const Real& threshold);

enum class LowerBoundMode { Thm1c, Thm14 };

std::string_view mode_name(LowerBoundMode m);
LowerBoundMode mode_from_name(std::string_view name);

struct LowerBoundRecord {
    int k = 0;
    LowerBoundMode mode = LowerBoundMode::Thm14;
    int target_order = 0;
    int vanishing_order = 0;  // measured on the re-restricted series
    int count = 0;            // zeros in |z| < r
    double jensen_bound = 0.0;
    double log_quotient = 0.0;  // quotient_of_polynomial of the witness at r
    bool chain_holds = false;   // vanishing_order ≤ count ≤ jensen_bound + 0.5
    double r = 1.0;
    int precision_bits = mp::kDefaultBits;

    static std::string csv_header();
    std::string csv_row() const;
    nlohmann::json to_json() const;
};

/// Target order s_k + 1 (thm1c, n = 1) or d_{k,m+1} − 1 (thm14).
int lower_bound_target(int k, const CurveSpec& curve, LowerBoundMode mode);

LowerBoundRecord lower_bound_experiment(int k, const CurveSpec& curve, LowerBoundMode mode, double r = 1.0,
                                        int precision_bits = 0);

}  // namespace bernstein
