#pragma once

// Power-law fits of measured quotients in k and the exponents predicted for
// each curve class.

#include "bernstein/quotient.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace bernstein {

struct ExponentFit {
    int k_min = 0;
    int k_max = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    int points_used = 0;
    std::string method = "ols_loglog";
    std::string curve_label;
    double r = 1.0;

    nlohmann::json to_json() const;
};

/// OLS of ln(log_quotient) on ln k over estimates with k ≥ k_floor.
ExponentFit fit_exponent(const std::vector<QuotientEstimate>& estimates, int k_floor = 2);

enum class CurveClass { Algebraic, ExpCurve, ClassCFiniteOrder, Chain, LowerBound, Product };
enum class ExponentRole { Optimal, Upper, Lower };

struct TheoreticalExponent {
    CurveClass curve_class = CurveClass::Algebraic;
    int parameter = 0;  // m for exp_curve and chain, n for lower_bound
    double exponent = 1.0;
    bool is_optimal = true;
    ExponentRole role = ExponentRole::Optimal;
    std::string source;

    std::string class_label() const;
    nlohmann::json to_json() const;
};

TheoreticalExponent theoretical_exponent(CurveClass c, int parameter = 1);
TheoreticalExponent theoretical_product(const std::vector<TheoreticalExponent>& members);
TheoreticalExponent theoretical_product(const std::vector<double>& exponents);

enum class FitVerdict { Consistent, BelowLowerBound, AboveUpper };
std::string_view fit_verdict_name(FitVerdict v);

struct FitComparison {
    FitVerdict verdict = FitVerdict::Consistent;
    double fit_slope = 0.0;
    double theory_exponent = 0.0;
    double band = 0.0;
};

FitComparison compare_fit(const ExponentFit& fit, const TheoreticalExponent& theory, double band);

/// {curve, r, k_range, slope, stderr, theory, verdict}
nlohmann::json fit_report(const ExponentFit& fit, const TheoreticalExponent& theory, const FitComparison& cmp);

}  // namespace bernstein
