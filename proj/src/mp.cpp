#include "bernstein/mp.hpp"

#include <algorithm>
#include <cstdlib>
#include <memory>

namespace bernstein::mp {

namespace {

thread_local int tl_bits = kDefaultBits;

void widen_exponent_range() {
    mpfr_set_emax(mpfr_get_emax_max());
    mpfr_set_emin(mpfr_get_emin_min());
}

struct ExponentRangeInit {
    ExponentRangeInit() { widen_exponent_range(); }
};
const ExponentRangeInit exponent_range_init;

int wider(const Real& a, const Real& b) { return std::max(a.bits(), b.bits()); }

}  // namespace

int working_bits() { return tl_bits; }

BitsScope::BitsScope(int bits) : saved_(tl_bits) {
    tl_bits = std::clamp(bits, 2, kMaxBits * 2);
    widen_exponent_range();
}

BitsScope::~BitsScope() { tl_bits = saved_; }

Real::Real(int bits, std::nullptr_t) { mpfr_init2(v_, bits); }

Real::Real(double v) : Real(tl_bits, nullptr) { mpfr_set_d(v_, v, MPFR_RNDN); }

Real::Real(double v, int bits) : Real(bits, nullptr) { mpfr_set_d(v_, v, MPFR_RNDN); }

Real Real::from_string(const std::string& s, int bits) {
    Real r(bits, nullptr);
    mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN);
    return r;
}

Real Real::with_bits(int bits) {
    Real r(bits, nullptr);
    mpfr_set_zero(r.v_, 1);
    return r;
}

Real Real::neg_inf(int bits) {
    Real r(bits, nullptr);
    mpfr_set_inf(r.v_, -1);
    return r;
}

Real Real::pos_inf(int bits) {
    Real r(bits, nullptr);
    mpfr_set_inf(r.v_, 1);
    return r;
}

Real::Real(const Real& o) : Real(o.bits(), nullptr) { mpfr_set(v_, o.v_, MPFR_RNDN); }

// A moved-from value keeps a null limb pointer; only destruction and
// assignment are valid on it afterwards.
Real::Real(Real&& o) noexcept {
    *v_ = *o.v_;
    o.v_->_mpfr_d = nullptr;
}

Real& Real::operator=(const Real& o) {
    if (this == &o) return *this;
    if (v_->_mpfr_d == nullptr) {
        mpfr_init2(v_, o.bits());
    } else if (bits() != o.bits()) {
        mpfr_set_prec(v_, o.bits());
    }
    mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
}

Real& Real::operator=(Real&& o) noexcept {
    if (this == &o) return *this;
    if (v_->_mpfr_d != nullptr) mpfr_clear(v_);
    *v_ = *o.v_;
    o.v_->_mpfr_d = nullptr;
    return *this;
}

Real::~Real() {
    if (v_->_mpfr_d != nullptr) mpfr_clear(v_);
}

void Real::set_bits(int b) { mpfr_prec_round(v_, b, MPFR_RNDN); }

std::string Real::to_string(int digits) const {
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Rg", digits, v_);
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
}

#define BERNSTEIN_COMPOUND(op, fn)                          \
    Real& Real::operator op(const Real& o) {                \
        if (o.bits() > bits()) mpfr_prec_round(v_, o.bits(), MPFR_RNDN); \
        fn(v_, v_, o.v_, MPFR_RNDN);                        \
        return *this;                                       \
    }
BERNSTEIN_COMPOUND(+=, mpfr_add)
BERNSTEIN_COMPOUND(-=, mpfr_sub)
BERNSTEIN_COMPOUND(*=, mpfr_mul)
BERNSTEIN_COMPOUND(/=, mpfr_div)
#undef BERNSTEIN_COMPOUND

Real& Real::operator+=(double o) { mpfr_add_d(v_, v_, o, MPFR_RNDN); return *this; }
Real& Real::operator-=(double o) { mpfr_sub_d(v_, v_, o, MPFR_RNDN); return *this; }
Real& Real::operator*=(double o) { mpfr_mul_d(v_, v_, o, MPFR_RNDN); return *this; }
Real& Real::operator/=(double o) { mpfr_div_d(v_, v_, o, MPFR_RNDN); return *this; }

Real Real::operator-() const {
    Real r(bits(), nullptr);
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
}

#define BERNSTEIN_BINARY(op, fn)                            \
    Real operator op(const Real& a, const Real& b) {        \
        Real r(wider(a, b), nullptr);                       \
        fn(r.v_, a.v_, b.v_, MPFR_RNDN);                    \
        return r;                                           \
    }                                                       \
    Real operator op(const Real& a, double b) {             \
        Real r(a.bits(), nullptr);                          \
        fn##_d(r.v_, a.v_, b, MPFR_RNDN);                   \
        return r;                                           \
    }
BERNSTEIN_BINARY(+, mpfr_add)
BERNSTEIN_BINARY(-, mpfr_sub)
BERNSTEIN_BINARY(*, mpfr_mul)
BERNSTEIN_BINARY(/, mpfr_div)
#undef BERNSTEIN_BINARY

Real operator-(double a, const Real& b) {
    Real r(b.bits(), nullptr);
    mpfr_d_sub(r.v_, a, b.v_, MPFR_RNDN);
    return r;
}

Real operator/(double a, const Real& b) {
    Real r(b.bits(), nullptr);
    mpfr_d_div(r.v_, a, b.v_, MPFR_RNDN);
    return r;
}

std::partial_ordering operator<=>(const Real& a, const Real& b) {
    if (a.is_nan() || b.is_nan()) return std::partial_ordering::unordered;
    const int c = mpfr_cmp(a.v_, b.v_);
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
}

std::partial_ordering operator<=>(const Real& a, double b) {
    if (a.is_nan() || b != b) return std::partial_ordering::unordered;
    const int c = mpfr_cmp_d(a.v_, b);
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
}

Real pi(int bits) {
    Real r = Real::with_bits(bits);
    mpfr_const_pi(r.get(), MPFR_RNDN);
    return r;
}

#define BERNSTEIN_UNARY(name, fn)               \
    Real name(const Real& x) {                  \
        Real r = Real::with_bits(x.bits());     \
        fn(r.get(), x.get(), MPFR_RNDN);        \
        return r;                               \
    }
BERNSTEIN_UNARY(exp, mpfr_exp)
BERNSTEIN_UNARY(expm1, mpfr_expm1)
BERNSTEIN_UNARY(log, mpfr_log)
BERNSTEIN_UNARY(log1p, mpfr_log1p)
BERNSTEIN_UNARY(sqrt, mpfr_sqrt)
BERNSTEIN_UNARY(sin, mpfr_sin)
BERNSTEIN_UNARY(cos, mpfr_cos)
BERNSTEIN_UNARY(abs, mpfr_abs)
#undef BERNSTEIN_UNARY

Real floor(const Real& x) {
    Real r = Real::with_bits(x.bits());
    mpfr_floor(r.get(), x.get());
    return r;
}

Real lgamma(const Real& x) {
    Real r = Real::with_bits(x.bits());
    int sign = 0;
    mpfr_lgamma(r.get(), &sign, x.get(), MPFR_RNDN);
    return r;
}

void sin_cos(const Real& x, Real& s, Real& c) {
    if (s.bits() != x.bits()) s = Real::with_bits(x.bits());
    if (c.bits() != x.bits()) c = Real::with_bits(x.bits());
    mpfr_sin_cos(s.get(), c.get(), x.get(), MPFR_RNDN);
}

Real atan2(const Real& y, const Real& x) {
    Real r = Real::with_bits(wider(y, x));
    mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
    return r;
}

Real pow(const Real& x, const Real& y) {
    Real r = Real::with_bits(wider(x, y));
    mpfr_pow(r.get(), x.get(), y.get(), MPFR_RNDN);
    return r;
}

Real pow(const Real& x, double y) { return pow(x, Real(y, x.bits())); }

Real hypot(const Real& x, const Real& y) {
    Real r = Real::with_bits(wider(x, y));
    mpfr_hypot(r.get(), x.get(), y.get(), MPFR_RNDN);
    return r;
}

Real max(const Real& a, const Real& b) { return a < b ? b : a; }
Real min(const Real& a, const Real& b) { return b < a ? b : a; }

Real reduce_angle(const Real& x) {
    const int b = x.bits() + 16;
    Real two_pi = pi(b) * 2.0;
    Real r = Real::with_bits(b);
    mpfr_remainder(r.get(), x.get(), two_pi.get(), MPFR_RNDN);  // in [−π, π]
    if (r <= -pi(b)) r += two_pi;
    r.set_bits(x.bits());
    const Real top = pi(x.bits());
    if (r <= -top) r = top;
    if (r > top) r = top;
    return r;
}

Complex& Complex::operator+=(const Complex& o) {
    re += o.re;
    im += o.im;
    return *this;
}

Complex& Complex::operator-=(const Complex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
}

Complex& Complex::operator*=(const Complex& o) {
    *this = *this * o;
    return *this;
}

Complex& Complex::operator*=(const Real& o) {
    re *= o;
    im *= o;
    return *this;
}

Complex operator*(const Complex& a, const Complex& b) {
    Real re = a.re * b.re;
    Real t = a.im * b.im;
    re -= t;
    Real im = a.re * b.im;
    t = a.im * b.re;
    im += t;
    return {std::move(re), std::move(im)};
}

Complex operator/(const Complex& a, const Complex& b) {
    Real d = norm(b);
    Complex q = a * conj(b);
    q.re /= d;
    q.im /= d;
    return q;
}

Complex conj(const Complex& z) { return {z.re, -z.im}; }
Real norm(const Complex& z) { return z.re * z.re + z.im * z.im; }
Real abs(const Complex& z) { return hypot(z.re, z.im); }
Real arg(const Complex& z) { return atan2(z.im, z.re); }

Complex exp(const Complex& z) { return polar(exp(z.re), z.im); }

Complex polar(const Real& r, const Real& theta) {
    Real s = Real::with_bits(theta.bits());
    Real c = Real::with_bits(theta.bits());
    sin_cos(theta, s, c);
    return {r * c, r * s};
}

Complex unit(const Real& theta) {
    Real s = Real::with_bits(theta.bits());
    Real c = Real::with_bits(theta.bits());
    sin_cos(theta, s, c);
    return {std::move(c), std::move(s)};
}

void add_conj_product(Complex& acc, const Complex& a, const Complex& b, Real& t1, Real& t2) {
    // re += a.re b.re + a.im b.im ; im += a.re b.im − a.im b.re
    const bool ar = a.im.is_zero(), br = b.im.is_zero();
    if (ar || br) {
        mpfr_fma(acc.re.get(), a.re.get(), b.re.get(), acc.re.get(), MPFR_RNDN);
        if (!br) mpfr_fma(acc.im.get(), a.re.get(), b.im.get(), acc.im.get(), MPFR_RNDN);
        if (!ar) {
            mpfr_mul(t1.get(), a.im.get(), b.re.get(), MPFR_RNDN);
            mpfr_sub(acc.im.get(), acc.im.get(), t1.get(), MPFR_RNDN);
        }
        return;
    }
    mpfr_mul(t1.get(), a.re.get(), b.re.get(), MPFR_RNDN);
    mpfr_fma(t2.get(), a.im.get(), b.im.get(), t1.get(), MPFR_RNDN);
    mpfr_add(acc.re.get(), acc.re.get(), t2.get(), MPFR_RNDN);
    mpfr_mul(t1.get(), a.im.get(), b.re.get(), MPFR_RNDN);
    mpfr_fms(t2.get(), a.re.get(), b.im.get(), t1.get(), MPFR_RNDN);
    mpfr_add(acc.im.get(), acc.im.get(), t2.get(), MPFR_RNDN);
}

void add_product(Complex& acc, const Complex& a, const Complex& b, Real& t1, Real& t2) {
    // re += a.re b.re − a.im b.im ; im += a.re b.im + a.im b.re
    const bool ar = a.im.is_zero(), br = b.im.is_zero();
    if (ar || br) {
        mpfr_fma(acc.re.get(), a.re.get(), b.re.get(), acc.re.get(), MPFR_RNDN);
        if (!br) mpfr_fma(acc.im.get(), a.re.get(), b.im.get(), acc.im.get(), MPFR_RNDN);
        if (!ar) mpfr_fma(acc.im.get(), a.im.get(), b.re.get(), acc.im.get(), MPFR_RNDN);
        return;
    }
    mpfr_mul(t1.get(), a.im.get(), b.im.get(), MPFR_RNDN);
    mpfr_fms(t2.get(), a.re.get(), b.re.get(), t1.get(), MPFR_RNDN);
    mpfr_add(acc.re.get(), acc.re.get(), t2.get(), MPFR_RNDN);
    mpfr_mul(t1.get(), a.im.get(), b.re.get(), MPFR_RNDN);
    mpfr_fma(t2.get(), a.re.get(), b.im.get(), t1.get(), MPFR_RNDN);
    mpfr_add(acc.im.get(), acc.im.get(), t2.get(), MPFR_RNDN);
}

}  // namespace bernstein::mp
