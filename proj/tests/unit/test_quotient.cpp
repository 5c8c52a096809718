#include <doctest.h>

#include "bernstein/quotient.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace bernstein;

namespace {

const double kE = std::exp(1.0);

CurveSpec curve_of(std::vector<EntireFunctionSpec> coords, std::string label = "c") {
    CurveSpec c;
    c.coords = std::move(coords);
    c.label = std::move(label);
    return c;
}

CurveSpec exp_curve() { return curve_of({EntireFunctionSpec::exp_linear(1.0)}, "exp"); }
CurveSpec id_curve() { return curve_of({EntireFunctionSpec::polynomial({0.0, 1.0})}, "id"); }

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

GraphPolynomial poly1(double c1, double cz, double cw) {
    auto p = GraphPolynomial::zero(1, 1);
    p.set({0, 0}, Complex(c1));
    p.set({1, 0}, Complex(cz));
    p.set({0, 1}, Complex(cw));
    return p;
}

}  // namespace

TEST_CASE("sup norm on circles") {
    mp::BitsScope scope(256);
    auto z3 = monomial_series(3, 256);
    CHECK(sup_norm_on_circle(z3, Real(2.0), 64).to_double() == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-15));

    auto ez = coefficients_of(EntireFunctionSpec::exp_linear(1.0), 160, 256);
    ez.coeffs[0] = LogComplex::zero(256);
    // max of |e^z − 1| on |z| = 7 is attained at z = 7
    CHECK(sup_norm_on_circle(ez, Real(7.0), 256).to_double() == doctest::Approx(std::log(std::exp(7.0) - 1.0)).epsilon(1e-12));

    auto one = polynomial_series(std::vector<Complex>{Complex(1.0)}, 256);
    CHECK(sup_norm_on_circle(one, Real(3.0), 64).to_double() == 0.0);
    CHECK(code_of([&] { sup_norm_on_circle(one, Real(3.0), 32); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sup norm refines monotonically with samples") {
    mp::BitsScope scope(256);
    auto s = coefficients_of(EntireFunctionSpec::exp_polynomial({{{cdouble(1.0), cdouble(1.0)}, cdouble(2.0)},
                                                                  {{cdouble(0.0), cdouble(0.0), cdouble(1.0)}, cdouble(-1.0)}}),
                             200, 256);
    double prev = -INFINITY;
    for (std::size_t n : {64, 100, 128, 300, 512, 1024, 4096}) {
        const double v = sup_norm_on_circle(s, Real(2.5), n).to_double();
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("bernstein index") {
    mp::BitsScope scope(256);
    for (int k : {1, 3, 7}) CHECK(bernstein_index(monomial_series(k, 256), 5.0, 8) == doctest::Approx(k).epsilon(1e-12));
    auto one = polynomial_series(std::vector<Complex>{Complex(2.0)}, 256);
    CHECK(bernstein_index(one, 5.0, 16) == doctest::Approx(0.0));
    auto ez = coefficients_of(EntireFunctionSpec::exp_linear(1.0), 160, 256);
    CHECK(bernstein_index(ez, kE * kE, 12) == doctest::Approx(kE * kE - kE).epsilon(1e-10));
}

TEST_CASE("gram matrices on the diagonal curve") {
    auto g = gram_matrices(1, id_curve(), 1.0);
    REQUIRE(g.size() == 3);
    const double expect[3][3] = {{1, 0, 0}, {0, 1, 1}, {0, 1, 1}};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            CHECK(g.inner_gram[a][b].re.to_double() == doctest::Approx(expect[a][b]));
            CHECK(g.inner_gram[a][b].im.to_double() == 0.0);
            CHECK(g.outer_gram[a][b].re.to_double() == doctest::Approx(expect[a][b] * (a == 0 ? 1.0 : kE * kE)));
        }
    }
    auto g0 = gram_matrices(0, exp_curve(), 0.7);
    REQUIRE(g0.size() == 1);
    CHECK(g0.inner_gram[0][0].re.to_double() == 1.0);
    CHECK(g0.outer_gram[0][0].re.to_double() == 1.0);
}

TEST_CASE("gram matrices for e^z match direct trapezoid quadrature") {
    const double r = 0.3;
    auto g = gram_matrices(2, exp_curve(), r);
    const auto basis = monomial_basis(2, 2);
    REQUIRE(g.size() == basis.size());
    using cld = std::complex<long double>;
    const int N = 128;
    for (double rho : {r, kE * r}) {
        const auto& G = rho == r ? g.inner_gram : g.outer_gram;
        for (std::size_t a = 0; a < basis.size(); ++a) {
            for (std::size_t b = 0; b < basis.size(); ++b) {
                cld acc = 0;
                for (int n = 0; n < N; ++n) {
                    const cld z = std::polar<long double>(rho, 2.0L * M_PIl * n / N);
                    auto mono = [&](const MultiIndex& gm) {
                        return std::pow(z, gm[0]) * std::exp(static_cast<long double>(gm[1]) * z);
                    };
                    acc += std::conj(mono(basis[a])) * mono(basis[b]);
                }
                acc /= static_cast<long double>(N);
                CHECK(G[a][b].re.to_double() == doctest::Approx(static_cast<double>(acc.real())).epsilon(1e-14));
                CHECK(G[a][b].im.to_double() == doctest::Approx(static_cast<double>(acc.imag())).epsilon(1e-14));
                // exact Hermitian symmetry
                CHECK(mp::abs(G[a][b] - mp::conj(G[b][a])).to_double() == 0.0);
            }
            CHECK(G[a][a].re > 0.0);
        }
    }
}

TEST_CASE("extremal quotient calibrates to k on the diagonal curve") {
    for (double r : {0.5, 1.0, 2.0}) {
        for (int k = 0; k <= 12; ++k) {
            CAPTURE(k);
            CAPTURE(r);
            auto q = extremal_quotient(k, id_curve(), r, precision_for_degree(k));
            CHECK(std::abs(q.log_quotient - k) < 1e-6);
            CHECK(q.method == QuotientMethod::GramL2);
            CHECK(q.deflated == static_cast<int>(dim_pk(2, k)) - (k + 1));
        }
    }
}

TEST_CASE("extremal quotient for constants is zero") {
    CHECK(extremal_quotient(0, exp_curve(), 1.0).log_quotient == 0.0);
    CHECK(extremal_quotient(0, id_curve(), 3.0).log_quotient == 0.0);
}

TEST_CASE("extremal quotient dominates the kernel witness for k = 1") {
    auto q = extremal_quotient(1, exp_curve(), 1.0);
    auto g = gram_matrices(1, exp_curve(), 1.0);
    // L² ratio of 1 + z − w from the same Gram pair
    const double c[3] = {1.0, 1.0, -1.0};
    double num = 0.0, den = 0.0;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            num += c[a] * c[b] * g.outer_gram[a][b].re.to_double();
            den += c[a] * c[b] * g.inner_gram[a][b].re.to_double();
        }
    }
    CHECK(q.log_quotient >= 0.5 * std::log(num / den) - 1e-12);
    // the sup-norm quotient of the same polynomial exceeds the L² value but stays within the slack
    const double w = quotient_of_polynomial(poly1(1, 1, -1), exp_curve(), 1.0);
    CHECK(w <= q.log_quotient + std::log(3.0) + 1.0);
    CHECK(q.log_quotient == doctest::Approx(2.3689669544234695).epsilon(1e-12));
}

TEST_CASE("extremal quotient is nondecreasing in k on e^z") {
    double prev = -1.0;
    for (int k = 0; k <= 10; ++k) {
        CAPTURE(k);
        auto q = extremal_quotient(k, exp_curve(), 1.0, precision_for_degree(k), 4);
        CHECK(q.log_quotient >= prev - 1e-9);
        CHECK(q.log_quotient >= 0.0);
        CHECK(q.deflated == 0);
        // reference values from an independent 1500-bit mpmath eigen-solve
        if (k == 4) CHECK(q.log_quotient == doctest::Approx(16.553712892151335).epsilon(1e-12));
        if (k == 8) CHECK(q.log_quotient == doctest::Approx(49.58166949969372).epsilon(1e-12));
        prev = q.log_quotient;
    }
}

TEST_CASE("top eigenvector reproduces the extremal L2 ratio") {
    auto res = extremal_quotient_with_vector(3, exp_curve(), 1.0, precision_for_degree(3));
    auto g = gram_matrices(3, exp_curve(), 1.0, precision_for_degree(3));
    mp::BitsScope scope(precision_for_degree(3));
    const auto& c = res.maximizer.coeffs;
    Real num = Real(0.0), den = Real(0.0);
    for (std::size_t a = 0; a < c.size(); ++a) {
        for (std::size_t b = 0; b < c.size(); ++b) {
            num += (mp::conj(c[a]) * g.outer_gram[a][b] * c[b]).re;
            den += (mp::conj(c[a]) * g.inner_gram[a][b] * c[b]).re;
        }
    }
    CHECK((mp::log(num / den) / 2.0).to_double() == doctest::Approx(res.estimate.log_quotient).epsilon(1e-12));
}

TEST_CASE("algebraic relations beyond the deflation are reported") {
    // (e^z, e^{2z}) satisfies w₂ = w₁²; after deflation the pencil is still solvable.
    auto curve = curve_of({EntireFunctionSpec::exp_linear(1.0), EntireFunctionSpec::exp_linear(2.0)});
    auto q = extremal_quotient(2, curve, 1.0, 768);
    CHECK(q.deflated >= 1);
    CHECK(q.log_quotient > 0.0);
}

TEST_CASE("quotient of single polynomials") {
    auto z = poly1(0, 1, 0);
    CHECK(quotient_of_polynomial(z, exp_curve(), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(quotient_of_polynomial(z, id_curve(), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    auto w = poly1(0, 0, 1);
    CHECK(quotient_of_polynomial(w, exp_curve(), 1.0) == doctest::Approx(kE - 1.0).epsilon(1e-12));
    auto one = poly1(1, 0, 0);
    CHECK(quotient_of_polynomial(one, exp_curve(), 1.0) == doctest::Approx(0.0));
    CHECK(code_of([&] { quotient_of_polynomial(poly1(0, 1, -1), id_curve(), 1.0); }) ==
          ErrorCode::RestrictedIdenticallyZero);
}

TEST_CASE("quotients are nonnegative and bounded by the L2 estimate plus slack") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    for (int k : {1, 2, 3}) {
        for (double r : {0.5, 1.0}) {
            const int bits = precision_for_degree(k);
            auto q = extremal_quotient(k, exp_curve(), r, bits);
            const double slack = std::log(static_cast<double>(dim_pk(2, k))) + 1.0;
            for (int t = 0; t < 50; ++t) {
                auto p = GraphPolynomial::zero(k, 1, bits);
                for (auto& c : p.coeffs) c = Complex(gauss(rng), gauss(rng));
                const double v = quotient_of_polynomial(p, exp_curve(), r, bits);
                CHECK(v >= -1e-12);
                CHECK(v <= q.log_quotient + slack);
            }
        }
    }
}

TEST_CASE("kernel witness and random search are lower bounds") {
    const int bits = precision_for_degree(3);
    auto q = extremal_quotient(3, exp_curve(), 1.0, bits);
    auto kw = kernel_witness_quotient(3, exp_curve(), 1.0, 9, bits);
    auto rs = random_search_quotient(3, exp_curve(), 1.0, 20, 11, bits);
    CHECK(kw.method == QuotientMethod::KernelWitness);
    CHECK(rs.method == QuotientMethod::RandomSearch);
    const double slack = std::log(static_cast<double>(dim_pk(2, 3))) + 1.0;
    CHECK(kw.log_quotient <= q.log_quotient + slack);
    CHECK(rs.log_quotient <= q.log_quotient + slack);
    // vanishing to order 9 at the origin forces a quotient of at least 9
    CHECK(kw.log_quotient >= 9.0);
    auto rs2 = random_search_quotient(3, exp_curve(), 1.0, 20, 11, bits);
    CHECK(rs2.log_quotient == rs.log_quotient);
}

TEST_CASE("exponential polynomial bound examples") {
    auto a = verify_exp_poly_bound(EntireFunctionSpec::exp_linear(1.0), 1.0);
    CHECK(a.lhs == doctest::Approx(kE - 1.0).epsilon(1e-9));
    CHECK(a.rhs == doctest::Approx(1.0 + 2.0 * kE));
    CHECK(a.holds);
    auto b = verify_exp_poly_bound(EntireFunctionSpec::polynomial({1.0}), 1.0);
    CHECK(b.lhs == doctest::Approx(0.0));
    CHECK(b.rhs == 1.0);
    CHECK(b.holds);
    auto g = EntireFunctionSpec::exp_polynomial({{{cdouble(1.0), cdouble(1.0)}, cdouble(2.0)},
                                                 {{cdouble(0.0), cdouble(0.0), cdouble(1.0)}, cdouble(-1.0)}});
    auto c = verify_exp_poly_bound(g, 0.5);
    CHECK(c.rhs == doctest::Approx(5.0 + 2.0 * kE * 0.5 * 2.0));
    CHECK(c.holds);
}

TEST_CASE("exponential polynomial bound holds on random instances") {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> nterms(1, 4), degree(0, 6);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int violations = 0;
    for (int i = 0; i < 100; ++i) {
        std::vector<ExpTerm> terms;
        const int n = nterms(rng);
        while (static_cast<int>(terms.size()) < n) {
            cdouble q(3.0 * unit(rng), 3.0 * unit(rng));
            if (std::abs(q) > 3.0) continue;
            std::vector<cdouble> p(static_cast<std::size_t>(degree(rng)) + 1);
            for (auto& c : p) c = cdouble(unit(rng), unit(rng));
            terms.push_back({p, q});
        }
        const auto g = EntireFunctionSpec::exp_polynomial(terms);
        for (double r : {0.5, 1.0, 2.0}) {
            auto res = verify_exp_poly_bound(g, r, 1024);
            if (!res.holds) ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("estimate csv row") {
    QuotientEstimate e;
    e.curve_label = "exp";
    e.k = 3;
    e.r = 1.0;
    e.log_quotient = 0.5;
    e.precision_bits = 512;
    e.samples = 64;
    CHECK(QuotientEstimate::csv_header() == "curve_label,k,r,log_quotient,method,precision_bits,samples");
    CHECK(e.csv_row() == "exp,3,1,0.5,gram_l2,512,64");
    CHECK(method_from_name("kernel_witness") == QuotientMethod::KernelWitness);
    CHECK(code_of([] { method_from_name("nope"); }) == ErrorCode::ConfigInvalid);
}
