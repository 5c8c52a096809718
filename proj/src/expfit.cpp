#include "bernstein/expfit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bernstein {

nlohmann::json ExponentFit::to_json() const {
    return {{"k_range", {k_min, k_max}}, {"slope", slope},         {"intercept", intercept},
            {"stderr", stderr_slope},    {"points_used", points_used}, {"method", method},
            {"curve", curve_label},      {"r", r}};
}

ExponentFit fit_exponent(const std::vector<QuotientEstimate>& estimates, int k_floor) {
    std::vector<const QuotientEstimate*> used;
    std::set<int> seen;
    for (const auto& e : estimates) {
        if (e.k < std::max(k_floor, 1)) continue;
        if (!used.empty() && (e.curve_label != used.front()->curve_label || e.r != used.front()->r))
            fail(ErrorCode::InvalidArgument, "fit_exponent needs estimates for one curve and one radius");
        if (!seen.insert(e.k).second)
            fail(ErrorCode::InvalidArgument, "fit_exponent: duplicate k = " + std::to_string(e.k));
        if (!(e.log_quotient > 0.0) || !std::isfinite(e.log_quotient))
            fail(ErrorCode::NonpositiveQuotient,
                 "fit_exponent: log quotient at k = " + std::to_string(e.k) + " is not positive");
        used.push_back(&e);
    }
    if (used.size() < 4)
        fail(ErrorCode::InsufficientPoints,
             "fit_exponent needs at least 4 points with k >= " + std::to_string(k_floor) + ", got " +
                 std::to_string(used.size()));

    // centred sums keep the normal equations well conditioned
    const double n = static_cast<double>(used.size());
    double mx = 0.0, my = 0.0;
    for (const auto* e : used) {
        mx += std::log(static_cast<double>(e->k));
        my += std::log(e->log_quotient);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto* e : used) {
        const double dx = std::log(static_cast<double>(e->k)) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(e->log_quotient) - my);
    }
    ExponentFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (const auto* e : used) {
        const double res = std::log(e->log_quotient) - fit.intercept - fit.slope * std::log(static_cast<double>(e->k));
        sse += res * res;
    }
    fit.stderr_slope = std::sqrt(sse / (n - 2.0) / sxx);
    fit.points_used = static_cast<int>(used.size());
    fit.k_min = (*std::min_element(used.begin(), used.end(), [](auto a, auto b) { return a->k < b->k; }))->k;
    fit.k_max = (*std::max_element(used.begin(), used.end(), [](auto a, auto b) { return a->k < b->k; }))->k;
    fit.curve_label = used.front()->curve_label;
    fit.r = used.front()->r;
    return fit;
}

std::string TheoreticalExponent::class_label() const {
    switch (curve_class) {
        case CurveClass::Algebraic: return "algebraic";
        case CurveClass::ExpCurve: return "exp_curve(" + std::to_string(parameter) + ")";
        case CurveClass::ClassCFiniteOrder: return "classC_finite_order";
        case CurveClass::Chain: return "chain(" + std::to_string(parameter) + ")";
        case CurveClass::LowerBound: return "lower_bound(" + std::to_string(parameter) + ")";
        case CurveClass::Product: return "product";
    }
    return "unknown";
}

namespace {

std::string_view role_name(ExponentRole r) {
    switch (r) {
        case ExponentRole::Optimal: return "optimal";
        case ExponentRole::Upper: return "upper";
        case ExponentRole::Lower: return "lower";
    }
    return "optimal";
}

}  // namespace

nlohmann::json TheoreticalExponent::to_json() const {
    return {{"class", class_label()},
            {"exponent", exponent},
            {"is_optimal", is_optimal},
            {"role", role_name(role)},
            {"source", source}};
}

TheoreticalExponent theoretical_exponent(CurveClass c, int parameter) {
    TheoreticalExponent t;
    t.curve_class = c;
    t.parameter = parameter;
    switch (c) {
        case CurveClass::Algebraic:
            t.exponent = 1.0;
            t.source = "classical Bernstein inequality for algebraic curves";
            break;
        case CurveClass::ExpCurve:
            require(parameter >= 1, "exp_curve needs m >= 1");
            t.exponent = parameter + 1.0;
            t.source = "optimal exponent k^(m+1) for graphs of m exponential polynomials";
            break;
        case CurveClass::ClassCFiniteOrder:
            t.exponent = 2.0;
            t.source = "optimal exponent k^2 for one class C function of finite order";
            break;
        case CurveClass::Chain:
            require(parameter >= 1, "chain needs m >= 1");
            t.exponent = std::ldexp(1.0, parameter);
            t.is_optimal = false;
            t.role = ExponentRole::Upper;
            t.source = "upper exponent k^(2^m + eps(k)) for chains of class C functions";
            break;
        case CurveClass::LowerBound:
            require(parameter >= 1, "lower_bound needs n >= 1");
            t.exponent = 1.0 + 1.0 / parameter;
            t.is_optimal = false;
            t.role = ExponentRole::Lower;
            t.source = "lower bound liminf mu(k)/k^(1+1/n) > 0 for transcendental curves in C^n";
            break;
        case CurveClass::Product:
            fail(ErrorCode::InvalidArgument, "product exponents are built with theoretical_product");
    }
    return t;
}

TheoreticalExponent theoretical_product(const std::vector<double>& exponents) {
    require(!exponents.empty(), "product needs at least one member");
    TheoreticalExponent t;
    t.curve_class = CurveClass::Product;
    t.exponent = *std::max_element(exponents.begin(), exponents.end());
    require(t.exponent >= 1.0, "product member exponents must be >= 1");
    t.source = "product of curves: the larger of two optimal exponents is optimal";
    return t;
}

TheoreticalExponent theoretical_product(const std::vector<TheoreticalExponent>& members) {
    std::vector<double> ex;
    bool optimal = true;
    for (const auto& m : members) {
        ex.push_back(m.exponent);
        optimal = optimal && m.is_optimal;
    }
    auto t = theoretical_product(ex);
    t.is_optimal = optimal;
    t.role = optimal ? ExponentRole::Optimal : ExponentRole::Upper;
    return t;
}

std::string_view fit_verdict_name(FitVerdict v) {
    switch (v) {
        case FitVerdict::Consistent: return "consistent";
        case FitVerdict::BelowLowerBound: return "below_lower_bound";
        case FitVerdict::AboveUpper: return "above_upper";
    }
    return "consistent";
}

FitComparison compare_fit(const ExponentFit& fit, const TheoreticalExponent& theory, double band) {
    require(band > 0.0, "compare_fit needs a positive band");
    FitComparison c;
    c.fit_slope = fit.slope;
    c.theory_exponent = theory.exponent;
    c.band = band;
    // an optimal exponent bounds the measurement from both sides
    const bool bounds_below = theory.role != ExponentRole::Upper;
    const bool bounds_above = theory.role != ExponentRole::Lower;
    if (bounds_below && fit.slope + band < theory.exponent) c.verdict = FitVerdict::BelowLowerBound;
    else if (bounds_above && fit.slope - band > theory.exponent) c.verdict = FitVerdict::AboveUpper;
    return c;
}

nlohmann::json fit_report(const ExponentFit& fit, const TheoreticalExponent& theory, const FitComparison& cmp) {
    return {{"curve", fit.curve_label},
            {"r", fit.r},
            {"k_range", {fit.k_min, fit.k_max}},
            {"slope", fit.slope},
            {"stderr", fit.stderr_slope},
            {"points_used", fit.points_used},
            {"theory", theory.to_json()},
            {"band", cmp.band},
            {"verdict", fit_verdict_name(cmp.verdict)}};
}

}  // namespace bernstein
