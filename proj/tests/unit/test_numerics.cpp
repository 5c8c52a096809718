#include <doctest.h>

#include "bernstein/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace bernstein;
using mp::BitsScope;

namespace {

TaylorSeries exp_series(int J, int bits = 512) {
    BitsScope scope(bits);
    std::vector<Complex> c;
    Real f(1.0);
    for (int j = 0; j <= J; ++j) {
        if (j > 0) f /= static_cast<double>(j);
        c.emplace_back(f, Real::with_bits(bits));
    }
    return TaylorSeries::from_complex(c, bits, false);
}

TaylorSeries real_poly(std::vector<double> v, int bits = 512) {
    BitsScope scope(bits);
    std::vector<Complex> c;
    for (double x : v) c.emplace_back(x, 0.0);
    return polynomial_series(c, bits);
}

double rel(const Real& a, const Real& b) {
    Real d = mp::abs(a - b);
    Real m = mp::max(mp::abs(a), mp::abs(b));
    if (m.is_zero()) return 0.0;
    return (d / m).to_double();
}

}  // namespace

TEST_CASE("log_sum_exp cancels to the zero sentinel") {
    BitsScope scope(512);
    std::vector<LogComplex> t{LogComplex(Real(0.0), Real(0.0)), LogComplex(Real(0.0), mp::pi())};
    auto s = log_sum_exp_complex(t);
    CHECK(s.is_zero());
    CHECK(s.phase().is_zero());
}

TEST_CASE("log_sum_exp of two ones is ln 2") {
    BitsScope scope(512);
    std::vector<LogComplex> t{LogComplex::one(512), LogComplex::one(512)};
    auto s = log_sum_exp_complex(t);
    CHECK(rel(s.log_mag(), mp::log(Real(2.0))) < 1e-140);
    CHECK(s.phase().is_zero());
}

TEST_CASE("log_sum_exp with a tiny addend matches a 256-bit reference") {
    BitsScope scope(512);
    std::vector<LogComplex> t{LogComplex(Real(-100.0), Real(0.0)), LogComplex::one(512)};
    auto s = log_sum_exp_complex(t);
    Real ref;
    {
        BitsScope ref_scope(256);
        ref = mp::log1p(mp::exp(Real(-100.0)));
    }
    CHECK(std::abs(s.log_mag().to_double() - std::exp(-100.0)) < 1e-50);
    CHECK(rel(s.log_mag(), ref) < 1e-70);
}

TEST_CASE("log_sum_exp is permutation invariant") {
    BitsScope scope(512);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mag(-50.0, 50.0), ph(-3.0, 3.0);
    std::vector<LogComplex> t;
    for (int i = 0; i < 40; ++i) t.emplace_back(Real(mag(rng)), Real(ph(rng)));
    auto a = log_sum_exp_complex(t);
    std::shuffle(t.begin(), t.end(), rng);
    auto b = log_sum_exp_complex(t);
    CHECK(rel(a.log_mag(), b.log_mag()) < std::ldexp(1.0, -504));
}

TEST_CASE("phase normalization and zero canonical form") {
    BitsScope scope(128);
    LogComplex z(Real(1.0), Real(7.0));
    CHECK(z.phase().to_double() == doctest::Approx(7.0 - 2 * std::numbers::pi));
    LogComplex w(Real::neg_inf(128), Real(2.0));
    CHECK(w.phase().is_zero());
    LogComplex p(Real(0.0), -mp::pi(128));
    CHECK(p.phase() > 0.0);
}

TEST_CASE("series_eval of the exponential series") {
    BitsScope scope(512);
    auto s = exp_series(200);
    auto v = series_eval(s, LogComplex::one(512));
    CHECK(rel(v.log_mag(), Real(1.0)) < 1e-60);

    auto i5 = series_eval(s, LogComplex(mp::log(Real(5.0)), mp::pi() / 2.0));
    CHECK(std::abs(i5.log_mag().to_double()) < 1e-60);
    CHECK(i5.phase().to_double() == doctest::Approx(5.0 - 2 * std::numbers::pi).epsilon(1e-14));
    CHECK(i5.phase().to_double() == doctest::Approx(-1.283185307179586));
}

TEST_CASE("series_eval of a constant and at the origin") {
    BitsScope scope(512);
    auto c = real_poly({1.0});
    auto v = series_eval(c, LogComplex(Real(3.0), Real(1.0)));
    CHECK(v.log_mag().is_zero());
    CHECK(v.phase().is_zero());

    auto s = exp_series(60);
    auto zero = series_eval(s, LogComplex::zero(512));
    CHECK(zero.log_mag() == s.coeffs[0].log_mag());
    CHECK(zero.phase() == s.coeffs[0].phase());
}

TEST_CASE("series_eval rejects a truncated tail") {
    BitsScope scope(512);
    auto s = exp_series(20);
    CHECK_THROWS_AS(series_eval(s, LogComplex(mp::log(Real(30.0)), Real(0.0))), Error);
    try {
        series_eval(s, LogComplex(mp::log(Real(30.0)), Real(0.0)));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TailNotConverged);
    }
    CHECK_THROWS_AS(series_eval(s, LogComplex::one(512), 16), Error);
}

TEST_CASE("derivative examples") {
    BitsScope scope(512);
    auto s = exp_series(80);
    auto d = series_derivative(s);
    REQUIRE(d.size() == 80);
    for (std::size_t j = 0; j < d.size(); ++j) CHECK(rel(d.coeffs[j].log_mag(), s.coeffs[j].log_mag()) < 1e-140);

    auto p = series_derivative(real_poly({1, 1, 1}));
    REQUIRE(p.size() == 2);
    CHECK(p.coeffs[0].log_mag().to_double() == doctest::Approx(0.0));
    CHECK(p.coeffs[1].log_mag().to_double() == doctest::Approx(std::log(2.0)));

    TaylorSeries g;
    g.precision_bits = 512;
    for (int j = 0; j < 10; ++j) g.coeffs.emplace_back(Real(-double(j * j)), Real(0.0));
    auto dg = series_derivative(g);
    CHECK(dg.coeffs[3].log_mag().to_double() == doctest::Approx(std::log(4.0) - 16.0).epsilon(1e-15));
}

TEST_CASE("derivative round trip on the exponential series") {
    BitsScope scope(512);
    auto s = exp_series(240);
    auto d = series_derivative(s);
    for (double x : {0.5, 1.7, 3.0}) {
        for (double ang : {0.0, 1.0, 2.5}) {
            LogComplex z(mp::log(Real(x)), Real(ang));
            auto a = series_eval(s, z);
            auto b = series_eval(d, z);
            CHECK(std::abs((a.log_mag() - b.log_mag()).to_double()) < std::ldexp(1.0, -60));
            CHECK(std::abs((a.phase() - b.phase()).to_double()) < std::ldexp(1.0, -60));
        }
    }
}

TEST_CASE("multiply examples") {
    BitsScope scope(512);
    auto p = series_multiply(real_poly({1, 1}), real_poly({1, -1}), 2);
    REQUIRE(p.size() == 3);
    CHECK(p.exact);
    CHECK(p.coeffs[0].log_mag().to_double() == doctest::Approx(0.0));
    CHECK(p.coeffs[1].is_zero());
    CHECK(p.coeffs[2].log_mag().to_double() == doctest::Approx(0.0));
    CHECK(std::abs(p.coeffs[2].phase().to_double()) == doctest::Approx(std::numbers::pi));

    auto e = exp_series(30);
    auto e2 = series_multiply(e, e, 10);
    for (int j = 0; j <= 10; ++j) {
        Real expect = Real(double(j)) * mp::log(Real(2.0)) - mp::lgamma(Real(double(j + 1)));
        CHECK(std::abs((e2.coeffs[j].log_mag() - expect).to_double()) < 1e-100);
    }

    auto id = series_multiply(e, real_poly({1}), 12);
    REQUIRE(id.size() == 13);
    for (int j = 0; j <= 12; ++j) CHECK(rel(id.coeffs[j].log_mag(), e.coeffs[j].log_mag()) < 1e-140);
}

TEST_CASE("multiply is commutative and associative") {
    BitsScope scope(512);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    auto rnd = [&](int n) {
        std::vector<Complex> c;
        for (int i = 0; i < n; ++i) c.emplace_back(nd(rng), nd(rng));
        return polynomial_series(c, 512);
    };
    auto a = rnd(9), b = rnd(7), c = rnd(5);
    auto ab = series_multiply(a, b, 20), ba = series_multiply(b, a, 20);
    auto abc = series_multiply(ab, c, 20), bca = series_multiply(a, series_multiply(b, c, 20), 20);
    for (std::size_t j = 0; j < ab.size(); ++j) {
        CHECK(ab.coeffs[j].is_zero() == ba.coeffs[j].is_zero());
        if (!ab.coeffs[j].is_zero()) CHECK(rel(ab.coeffs[j].log_mag(), ba.coeffs[j].log_mag()) < 1e-140);
    }
    for (std::size_t j = 0; j < abc.size(); ++j) {
        if (abc.coeffs[j].is_zero()) continue;
        CHECK(std::abs((abc.coeffs[j].log_mag() - bca.coeffs[j].log_mag()).to_double()) < std::ldexp(1.0, -480));
    }
}

TEST_CASE("series_exp examples") {
    BitsScope scope(512);
    auto e = series_exp(real_poly({0, 1}), 5);
    for (int j = 0; j <= 5; ++j)
        CHECK(e.coeffs[j].log_mag().to_double() == doctest::Approx(-std::lgamma(j + 1.0)).epsilon(1e-14));

    auto one = series_exp(real_poly({0}), 0);
    REQUIRE(one.size() == 1);
    CHECK(one.coeffs[0].log_mag().is_zero());
    CHECK(one.exact);

    auto g = series_exp(real_poly({0, 0, 1}), 6);
    const double expect[] = {1, 0, 1, 0, 0.5, 0, 1.0 / 6.0};
    for (int j = 0; j <= 6; ++j) {
        if (expect[j] == 0) {
            CHECK(g.coeffs[j].is_zero());
        } else {
            CHECK(g.coeffs[j].log_mag().to_double() == doctest::Approx(std::log(expect[j])));
        }
    }
}

TEST_CASE("dft matches direct sums for both code paths") {
    BitsScope scope(256);
    for (std::size_t n : {8u, 12u}) {
        std::vector<Complex> x;
        for (std::size_t b = 0; b < n; ++b) x.emplace_back(std::sin(b + 1.0), std::cos(3.0 * b));
        auto y = dft(x, 256);
        for (std::size_t k = 0; k < n; ++k) {
            Complex ref(Real::with_bits(256), Real::with_bits(256));
            for (std::size_t b = 0; b < n; ++b)
                ref += x[b] * mp::unit(mp::pi(256) * 2.0 * double(b * k) / double(n));
            CHECK(mp::abs(ref - y[k]).to_double() < 1e-70);
        }
    }
}

TEST_CASE("circle evaluator agrees with series_eval and handles offsets") {
    BitsScope scope(512);
    auto s = exp_series(200);
    const Real r(2.5);
    CircleEvaluator ev(s, r);
    auto vals = ev.values_on_grid(16, 0.25);
    for (std::size_t n = 0; n < 16; ++n) {
        const Real theta = mp::pi() * 2.0 * ((double(n) + 0.25) / 16.0);
        auto ref = series_eval(s, LogComplex(mp::log(r), theta)).to_complex();
        CHECK(mp::abs(ref - vals[n]).to_double() < 1e-100);
        auto direct = ev.scaled_at(theta) * mp::exp(ev.log_scale());
        CHECK(mp::abs(ref - direct).to_double() < 1e-100);
    }
    CHECK(max_log_abs_on_circle(s, r, 64).to_double() == doctest::Approx(2.5).epsilon(1e-14));
}
