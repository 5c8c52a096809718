#include <doctest.h>

#include "bernstein/expfit.hpp"

#include <cmath>
#include <random>

using namespace bernstein;

namespace {

std::vector<QuotientEstimate> power_law(double c, double mu, int k0, int k1, const std::string& label = "synthetic") {
    std::vector<QuotientEstimate> out;
    for (int k = k0; k <= k1; ++k) {
        QuotientEstimate e;
        e.k = k;
        e.r = 1.0;
        e.curve_label = label;
        e.log_quotient = c * std::pow(static_cast<double>(k), mu);
        out.push_back(e);
    }
    return out;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::CacheCorrupt;
}

ExponentFit with_slope(double s) {
    ExponentFit f;
    f.slope = s;
    return f;
}

}  // namespace

TEST_CASE("exact power laws") {
    auto f = fit_exponent(power_law(3.0, 2.0, 2, 10));
    CHECK(std::abs(f.slope - 2.0) < 1e-9);
    CHECK(std::abs(f.intercept - std::log(3.0)) < 1e-9);
    CHECK(f.stderr_slope < 1e-9);
    CHECK(f.points_used == 9);
    CHECK(f.k_min == 2);
    CHECK(f.k_max == 10);
    CHECK(f.method == "ols_loglog");
    CHECK(std::abs(fit_exponent(power_law(1.0, 1.0, 1, 12)).slope - 1.0) < 1e-9);
}

TEST_CASE("power-law properties") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mu(1.0, 4.5), c(0.01, 50.0);
    for (int t = 0; t < 200; ++t) {
        const double m = mu(rng), scale = c(rng);
        const auto base = power_law(1.0, m, 2, 14);
        const auto scaled = power_law(scale, m, 2, 14);
        const auto dropped = power_law(1.0, m, 3, 14);
        const auto fb = fit_exponent(base);
        CHECK(std::abs(fb.slope - m) < 1e-9);
        CHECK(std::abs(fit_exponent(scaled).slope - fb.slope) < 1e-9);
        CHECK(std::abs(fit_exponent(scaled).intercept - fb.intercept - std::log(scale)) < 1e-9);
        CHECK(std::abs(fit_exponent(dropped).slope - fb.slope) < 1e-9);
    }
}

TEST_CASE("noisy fit matches an independent OLS") {
    // values from statsmodels OLS on ln(3k² e^{0.01 sin k}) against ln k, k = 2..10
    auto pts = power_law(3.0, 2.0, 2, 10);
    for (auto& p : pts) p.log_quotient *= std::exp(0.01 * std::sin(p.k));
    auto f = fit_exponent(pts);
    CHECK(f.slope == doctest::Approx(1.9988033877086167).epsilon(1e-12));
    CHECK(f.stderr_slope == doctest::Approx(0.005121218191290525).epsilon(1e-9));
}

TEST_CASE("the k floor drops small degrees") {
    auto pts = power_law(2.0, 1.5, 1, 8);
    pts[0].log_quotient = 100.0;  // contaminated k = 1 point
    auto f = fit_exponent(pts);
    CHECK(f.k_min == 2);
    CHECK(f.points_used == 7);
    CHECK(std::abs(f.slope - 1.5) < 1e-9);
    CHECK(std::abs(fit_exponent(pts, 1).slope - 1.5) > 0.1);
    CHECK(fit_exponent(pts, 4).points_used == 5);
}

TEST_CASE("fit preconditions") {
    CHECK(code_of([] { fit_exponent(power_law(1.0, 2.0, 2, 4)); }) == ErrorCode::InsufficientPoints);
    CHECK(code_of([] { fit_exponent(power_law(1.0, 2.0, 1, 4)); }) == ErrorCode::InsufficientPoints);
    auto neg = power_law(1.0, 2.0, 2, 8);
    neg[3].log_quotient = 0.0;
    CHECK(code_of([&] { fit_exponent(neg); }) == ErrorCode::NonpositiveQuotient);
    auto mixed = power_law(1.0, 2.0, 2, 8);
    mixed[2].curve_label = "other";
    CHECK(code_of([&] { fit_exponent(mixed); }) == ErrorCode::InvalidArgument);
    auto dup = power_law(1.0, 2.0, 2, 8);
    dup[2].k = 3;
    CHECK(code_of([&] { fit_exponent(dup); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("theoretical exponents") {
    auto a = theoretical_exponent(CurveClass::Algebraic);
    CHECK(a.exponent == 1.0);
    CHECK(a.is_optimal);
    auto e3 = theoretical_exponent(CurveClass::ExpCurve, 3);
    CHECK(e3.exponent == 4.0);
    CHECK(e3.is_optimal);
    CHECK(e3.class_label() == "exp_curve(3)");
    CHECK(theoretical_exponent(CurveClass::ClassCFiniteOrder).exponent == 2.0);
    auto c2 = theoretical_exponent(CurveClass::Chain, 2);
    CHECK(c2.exponent == 4.0);
    CHECK_FALSE(c2.is_optimal);
    CHECK(c2.role == ExponentRole::Upper);
    auto lb = theoretical_exponent(CurveClass::LowerBound, 1);
    CHECK(lb.exponent == 2.0);
    CHECK(lb.role == ExponentRole::Lower);
    CHECK(theoretical_exponent(CurveClass::LowerBound, 4).exponent == 1.25);
    CHECK(theoretical_product(std::vector<double>{2.0, 4.0}).exponent == 4.0);
    CHECK(theoretical_product({a, e3}).is_optimal);
    CHECK_FALSE(theoretical_product({a, c2}).is_optimal);
    for (int m = 1; m <= 6; ++m) {
        CHECK(theoretical_exponent(CurveClass::ExpCurve, m).exponent >= 1.0);
        CHECK(theoretical_exponent(CurveClass::Chain, m).exponent >= 1.0);
        CHECK(theoretical_exponent(CurveClass::LowerBound, m).exponent >= 1.0);
    }
    CHECK(code_of([] { theoretical_exponent(CurveClass::Chain, 0); }) == ErrorCode::InvalidArgument);
    for (auto t : {a, e3, c2, lb}) CHECK_FALSE(t.source.empty());
}

TEST_CASE("fit comparisons") {
    CHECK(compare_fit(with_slope(1.95), theoretical_exponent(CurveClass::ExpCurve, 1), 0.4).verdict ==
          FitVerdict::Consistent);
    CHECK(compare_fit(with_slope(0.7), theoretical_exponent(CurveClass::LowerBound, 1), 0.4).verdict ==
          FitVerdict::BelowLowerBound);
    CHECK(compare_fit(with_slope(1.02), theoretical_exponent(CurveClass::Algebraic), 0.1).verdict ==
          FitVerdict::Consistent);
    CHECK(compare_fit(with_slope(5.0), theoretical_exponent(CurveClass::Chain, 2), 0.4).verdict ==
          FitVerdict::AboveUpper);
    CHECK(compare_fit(with_slope(1.0), theoretical_exponent(CurveClass::Chain, 2), 0.4).verdict ==
          FitVerdict::Consistent);
    CHECK(compare_fit(with_slope(9.0), theoretical_exponent(CurveClass::LowerBound, 1), 0.4).verdict ==
          FitVerdict::Consistent);
    auto cmp = compare_fit(with_slope(1.95), theoretical_exponent(CurveClass::ExpCurve, 1), 0.4);
    CHECK(cmp.fit_slope == 1.95);
    CHECK(cmp.theory_exponent == 2.0);
    CHECK(code_of([] { compare_fit(with_slope(1.0), theoretical_exponent(CurveClass::Algebraic), 0.0); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("fit report json") {
    auto f = fit_exponent(power_law(3.0, 2.0, 2, 10, "exp"));
    auto t = theoretical_exponent(CurveClass::ExpCurve, 1);
    auto j = fit_report(f, t, compare_fit(f, t, 0.4));
    for (const char* key : {"curve", "r", "k_range", "slope", "stderr", "theory", "verdict"}) CHECK(j.contains(key));
    CHECK(j["curve"] == "exp");
    CHECK(j["verdict"] == "consistent");
    CHECK(j["k_range"][1] == 10);
}

TEST_CASE("measured quotients on e^z, k = 2..8") {
    CurveSpec c;
    c.coords = {EntireFunctionSpec::exp_linear(1.0)};
    std::vector<QuotientEstimate> est;
    for (int k = 2; k <= 8; ++k) {
        auto e = extremal_quotient(k, c, 1.0, precision_for_degree(k));
        e.curve_label = "exp";
        est.push_back(e);
    }
    // statsmodels OLS on the same seven values (computed offline from the quotient pipeline)
    auto f = fit_exponent(est);
    CHECK(f.slope == doctest::Approx(1.5168030158385812).epsilon(1e-9));
    CHECK(f.stderr_slope == doctest::Approx(0.017605816587894445).epsilon(1e-6));
    CHECK(est[2].log_quotient == doctest::Approx(16.553712892151335).epsilon(1e-12));
}
