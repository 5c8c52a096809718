#include <doctest.h>

#include "bernstein/restriction.hpp"

#include <cmath>

using namespace bernstein;

namespace {

CurveSpec curve_of(std::vector<EntireFunctionSpec> coords) {
    CurveSpec c;
    c.coords = std::move(coords);
    return c;
}

CurveSpec exp_curve() { return curve_of({EntireFunctionSpec::exp_linear(1.0)}); }

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

double re(const Complex& c) { return c.re.to_double(); }
double im(const Complex& c) { return c.im.to_double(); }

// |p(z, e^z)| evaluated directly in MPFR, independent of the Taylor machinery.
double direct_abs_on_exp_graph(const GraphPolynomial& p, double z) {
    mp::BitsScope scope(1024);
    const Real zr(z);
    const Real w = mp::exp(zr);
    Complex acc(0.0);
    const auto& b = p.basis();
    for (std::size_t i = 0; i < b.size(); ++i) {
        Real mono = mp::pow(zr, static_cast<double>(b[i][0])) * mp::pow(w, static_cast<double>(b[i][1]));
        acc += p.coeffs[i] * mono;
    }
    return mp::abs(acc).to_double();
}

}  // namespace

TEST_CASE("dimension counts") {
    CHECK(dim_pk(2, 2) == 6);
    CHECK(dim_pk(2, 1) == 3);
    CHECK(dim_pk(3, 4) == 35);
    CHECK(dim_pk(2, 0) == 1);
    for (int k = 0; k <= 40; ++k) CHECK(dim_pk(2, k) == (k + 1) * (k + 2) / 2);
    CHECK(dim_pk(5, 10) == 3003);
}

TEST_CASE("s_k formula") {
    CHECK(sk_formula(1, 5) == 8);
    CHECK(sk_formula(1, 3) == 3);
    CHECK(sk_formula(2, 4) == 4);
    for (int k = 1; k <= 60; ++k) CHECK(sk_formula(1, k) == (k * k) / 3);
}

TEST_CASE("s_k + 1 stays below the planar dimension") {
    for (int k = 2; k <= 64; ++k) CHECK(sk_formula(1, k) + 1 < dim_pk(2, k));
}

TEST_CASE("monomial basis order") {
    auto b = monomial_basis(2, 2);
    std::vector<MultiIndex> expect = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    CHECK(b == expect);
    auto b3 = monomial_basis(3, 4);
    CHECK(b3.size() == 35);
    int prev = 0;
    for (const auto& g : b3) {
        int deg = g[0] + g[1] + g[2];
        CHECK(deg >= prev);
        prev = deg;
    }
}

TEST_CASE("restriction of w^2 to the graph of e^z") {
    auto p = GraphPolynomial::zero(2, 1);
    p.set({0, 2}, Complex(1.0));
    auto s = restrict_to_graph(p, exp_curve(), 20).to_complex();
    double expect = 1.0;
    for (int j = 0; j <= 20; ++j) {
        if (j > 0) expect *= 2.0 / j;
        CHECK(re(s[j]) == doctest::Approx(expect).epsilon(1e-14));
        CHECK(im(s[j]) == 0.0);
    }
}

TEST_CASE("restriction of w - 1 and 1 + z - w") {
    auto p = GraphPolynomial::zero(1, 1);
    p.set({0, 1}, Complex(1.0));
    p.set({0, 0}, Complex(-1.0));
    auto s = restrict_to_graph(p, exp_curve(), 6).to_complex();
    CHECK(s[0].is_zero());
    CHECK(re(s[1]) == doctest::Approx(1.0));

    auto q = GraphPolynomial::zero(1, 1);
    q.set({0, 0}, Complex(1.0));
    q.set({1, 0}, Complex(1.0));
    q.set({0, 1}, Complex(-1.0));
    auto t = restrict_to_graph(q, exp_curve(), 8).to_complex();
    CHECK(t[0].is_zero());
    CHECK(t[1].is_zero());
    double fact = 1.0;
    for (int j = 2; j <= 8; ++j) {
        fact *= j;
        CHECK(re(t[j]) == doctest::Approx(-1.0 / fact).epsilon(1e-14));
    }
}

TEST_CASE("restriction is linear") {
    auto curve = curve_of({EntireFunctionSpec::exp_polynomial({{{cdouble(1.0), cdouble(0.0, 1.0)}, cdouble(2.0)}})});
    auto p = GraphPolynomial::zero(2, 1);
    auto q = GraphPolynomial::zero(2, 1);
    const auto& b = p.basis();
    for (std::size_t i = 0; i < b.size(); ++i) {
        p.coeffs[i] = Complex(0.3 * i - 1.0, 0.1 * i);
        q.coeffs[i] = Complex(std::sin(1.0 + i), -0.5);
    }
    const Complex a(1.5, -0.25), c(-0.75, 2.0);
    auto lin = GraphPolynomial::zero(2, 1);
    for (std::size_t i = 0; i < b.size(); ++i) lin.coeffs[i] = a * p.coeffs[i] + c * q.coeffs[i];
    auto sp = restrict_to_graph(p, curve, 30).to_complex();
    auto sq = restrict_to_graph(q, curve, 30).to_complex();
    auto sl = restrict_to_graph(lin, curve, 30).to_complex();
    for (int j = 0; j <= 30; ++j) {
        Complex expect = a * sp[j] + c * sq[j];
        const double scale = std::max(1e-300, mp::abs(expect).to_double());
        CHECK(mp::abs(sl[j] - expect).to_double() / scale < 1e-100);
    }
}

TEST_CASE("restriction matrix examples") {
    auto M0 = restriction_matrix(1, exp_curve(), 0);
    REQUIRE(M0.rows() == 1);
    REQUIRE(M0.cols() == 3);
    CHECK(re(M0.entries[0][0]) == 1.0);
    CHECK(M0.entries[0][1].is_zero());
    CHECK(re(M0.entries[0][2]) == 1.0);

    auto M1 = restriction_matrix(1, exp_curve(), 1);
    REQUIRE(M1.rows() == 2);
    const double expect[2][3] = {{1, 0, 1}, {0, 1, 1}};
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 3; ++c) CHECK(re(M1.entries[r][c]) == doctest::Approx(expect[r][c]));
    }

    auto Mk0 = restriction_matrix(0, exp_curve(), 2);
    REQUIRE(Mk0.cols() == 1);
    CHECK(re(Mk0.entries[0][0]) == 1.0);
    CHECK(Mk0.entries[1][0].is_zero());
    CHECK(Mk0.entries[2][0].is_zero());
}

TEST_CASE("restriction matrix rows are prefix consistent") {
    auto curve = curve_of({EntireFunctionSpec::theorem_1_11(HSpec::power(1.5))});
    auto small = restriction_matrix(4, curve, 6);
    auto big = restriction_matrix(4, curve, 14);
    REQUIRE(small.cols() == big.cols());
    for (std::size_t r = 0; r < small.rows(); ++r) {
        for (std::size_t c = 0; c < small.cols(); ++c) {
            CHECK(mp::abs(small.entries[r][c] - big.entries[r][c]).to_double() == 0.0);
        }
    }
}

TEST_CASE("kernel for k = 1 at target 2 is 1 + z - w") {
    auto p = kernel_vanishing_poly(1, exp_curve(), 2);
    REQUIRE(p.coeffs.size() == 3);
    const double s = 1.0 / std::sqrt(3.0);
    CHECK(re(p.coeffs[0]) == doctest::Approx(s).epsilon(1e-14));
    CHECK(re(p.coeffs[1]) == doctest::Approx(s).epsilon(1e-14));
    CHECK(re(p.coeffs[2]) == doctest::Approx(-s).epsilon(1e-14));
    for (const auto& c : p.coeffs) CHECK(im(c) == doctest::Approx(0.0));
    CHECK(p.norm().to_double() == doctest::Approx(1.0));
}

TEST_CASE("kernel for k = 1 at target 1 has a + c = 0") {
    auto p = kernel_vanishing_poly(1, exp_curve(), 1);
    CHECK(mp::abs(p.coeffs[0] + p.coeffs[2]).to_double() < 1e-100);
    CHECK_FALSE(p.is_zero());
}

TEST_CASE("kernel on the diagonal curve restricts to zero") {
    auto diag = curve_of({EntireFunctionSpec::polynomial({0.0, 1.0})});
    CHECK(code_of([&] { kernel_vanishing_poly(1, diag, 2); }) == ErrorCode::RestrictedIdenticallyZero);
}

TEST_CASE("kernel beyond the dimension has no null vector") {
    CHECK(code_of([&] { kernel_vanishing_poly(1, exp_curve(), 3); }) == ErrorCode::NullspaceEmpty);
}

TEST_CASE("kernel vanishing order is verified for k up to 8 on e^z") {
    for (int k = 1; k <= 8; ++k) {
        const int bits = precision_for_degree(k);
        for (int target : {static_cast<int>(sk_formula(1, k)) + 1, static_cast<int>(dim_pk(2, k)) - 1}) {
            CAPTURE(k);
            CAPTURE(target);
            auto p = kernel_vanishing_poly(k, exp_curve(), target, bits);
            CHECK(p.norm().to_double() == doctest::Approx(1.0));
            auto s = restrict_to_graph(p, exp_curve(), target + 4, bits).to_complex();
            for (int j = 0; j < target; ++j) CHECK(mp::abs(s[j]).to_double() < 1e-40);
            // Direct evaluation near 0: p(z, e^z) = O(z^target).
            const double z1 = 1e-2, z2 = 5e-3;
            const double v1 = direct_abs_on_exp_graph(p, z1), v2 = direct_abs_on_exp_graph(p, z2);
            REQUIRE(v1 > 0.0);
            REQUIRE(v2 > 0.0);
            const double slope = std::log(v1 / v2) / std::log(z1 / z2);
            CHECK(slope > target - 0.5);
        }
    }
}

TEST_CASE("kernel for a two-coordinate curve") {
    auto curve = curve_of({EntireFunctionSpec::exp_linear(1.0), EntireFunctionSpec::exp_polynomial(
                                                                     {{{cdouble(1.0)}, cdouble(0.0, 1.0)}})});
    auto p = kernel_vanishing_poly(2, curve, static_cast<int>(dim_pk(3, 2)) - 1);
    auto s = restrict_to_graph(p, curve, 20).to_complex();
    for (int j = 0; j < 9; ++j) CHECK(mp::abs(s[j]).to_double() < 1e-60);
}

TEST_CASE("graph polynomial json round trip") {
    auto p = kernel_vanishing_poly(3, exp_curve(), 7);
    auto j = p.to_json();
    CHECK(j.at("k") == 3);
    CHECK(j.at("m") == 1);
    auto q = GraphPolynomial::from_json(j);
    REQUIRE(q.coeffs.size() == p.coeffs.size());
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
        CHECK(mp::abs(q.coeffs[i] - p.coeffs[i]).to_double() < 1e-14);
    }
}
