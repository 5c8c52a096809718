#pragma once

// Thin RAII layer over MPFR. Precision is carried per value in bits; binary
// operations produce a result at the larger of the operand precisions, and
// values built from doubles take the calling thread's working precision.

#include <mpfr.h>

#include <compare>
#include <string>
#include <utility>

namespace bernstein::mp {

constexpr int kDefaultBits = 512;
constexpr int kMaxBits = 8192;

int working_bits();

/// Sets the calling thread's working precision (and widest MPFR exponent
/// range) for the lifetime of the scope.
class BitsScope {
public:
    explicit BitsScope(int bits);
    ~BitsScope();
    BitsScope(const BitsScope&) = delete;
    BitsScope& operator=(const BitsScope&) = delete;

private:
    int saved_;
};

class Real {
public:
    Real() : Real(0.0) {}
    Real(double v);  // NOLINT(google-explicit-constructor): numeric literal convenience
    Real(double v, int bits);
    static Real from_string(const std::string& s, int bits = working_bits());
    static Real with_bits(int bits);  // zero at the given precision

    Real(const Real& o);
    Real(Real&& o) noexcept;
    Real& operator=(const Real& o);
    Real& operator=(Real&& o) noexcept;
    ~Real();

    int bits() const { return static_cast<int>(mpfr_get_prec(v_)); }
    void set_bits(int bits);  // rounds the value in place

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    long double to_long_double() const { return mpfr_get_ld(v_, MPFR_RNDN); }
    std::string to_string(int digits = 20) const;

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    bool is_inf() const { return mpfr_inf_p(v_) != 0; }
    bool is_nan() const { return mpfr_nan_p(v_) != 0; }
    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    bool is_neg_inf() const { return is_inf() && mpfr_sgn(v_) < 0; }
    int sign() const { return mpfr_sgn(v_); }

    static Real neg_inf(int bits = working_bits());
    static Real pos_inf(int bits = working_bits());

    Real& operator+=(const Real& o);
    Real& operator-=(const Real& o);
    Real& operator*=(const Real& o);
    Real& operator/=(const Real& o);
    Real& operator+=(double o);
    Real& operator-=(double o);
    Real& operator*=(double o);
    Real& operator/=(double o);

    Real operator-() const;

    friend Real operator+(const Real& a, const Real& b);
    friend Real operator-(const Real& a, const Real& b);
    friend Real operator*(const Real& a, const Real& b);
    friend Real operator/(const Real& a, const Real& b);
    friend Real operator+(const Real& a, double b);
    friend Real operator-(const Real& a, double b);
    friend Real operator*(const Real& a, double b);
    friend Real operator/(const Real& a, double b);
    friend Real operator+(double a, const Real& b) { return b + a; }
    friend Real operator-(double a, const Real& b);
    friend Real operator*(double a, const Real& b) { return b * a; }
    friend Real operator/(double a, const Real& b);

    friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend std::partial_ordering operator<=>(const Real& a, const Real& b);
    friend bool operator==(const Real& a, double b) { return mpfr_cmp_d(a.v_, b) == 0 && !a.is_nan(); }
    friend std::partial_ordering operator<=>(const Real& a, double b);

private:
    explicit Real(int bits, std::nullptr_t);
    mpfr_t v_;
};

Real pi(int bits = working_bits());
Real exp(const Real& x);
Real expm1(const Real& x);
Real log(const Real& x);
Real log1p(const Real& x);
Real sqrt(const Real& x);
Real sin(const Real& x);
Real cos(const Real& x);
void sin_cos(const Real& x, Real& s, Real& c);
Real atan2(const Real& y, const Real& x);
Real abs(const Real& x);
Real pow(const Real& x, const Real& y);
Real pow(const Real& x, double y);
Real hypot(const Real& x, const Real& y);
Real lgamma(const Real& x);
Real floor(const Real& x);
Real max(const Real& a, const Real& b);
Real min(const Real& a, const Real& b);
/// Remainder of x modulo 2π, in (−π, π].
Real reduce_angle(const Real& x);

struct Complex {
    Real re;
    Real im;

    Complex() = default;
    Complex(Real r) : re(std::move(r)), im(Real::with_bits(re.bits())) {}  // NOLINT
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
    Complex(double r, double i = 0.0) : re(r), im(i) {}  // NOLINT

    int bits() const { return re.bits() > im.bits() ? re.bits() : im.bits(); }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }

    Complex& operator+=(const Complex& o);
    Complex& operator-=(const Complex& o);
    Complex& operator*=(const Complex& o);
    Complex& operator*=(const Real& o);
    Complex operator-() const { return {-re, -im}; }

    friend Complex operator+(Complex a, const Complex& b) { return a += b; }
    friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
    friend Complex operator*(const Complex& a, const Complex& b);
    friend Complex operator*(Complex a, const Real& b) { return a *= b; }
    friend Complex operator*(const Real& b, Complex a) { return a *= b; }
    friend Complex operator/(const Complex& a, const Complex& b);
};

Complex conj(const Complex& z);
Real norm(const Complex& z);  // |z|²
Real abs(const Complex& z);
Real arg(const Complex& z);
Complex exp(const Complex& z);
Complex polar(const Real& r, const Real& theta);
Complex unit(const Real& theta);  // e^{iθ}

/// acc += conj(a)·b using caller-owned scratch; the Gram inner loop.
void add_conj_product(Complex& acc, const Complex& a, const Complex& b, Real& t1, Real& t2);
/// acc += a·b using caller-owned scratch.
void add_product(Complex& acc, const Complex& a, const Complex& b, Real& t1, Real& t2);

}  // namespace bernstein::mp
