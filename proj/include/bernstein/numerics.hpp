#pragma once

// Log-space complex values and truncated power series.
//
// Every complex coefficient is stored as (ln|c|, arg c) so that magnitudes
// such as e^{-j^α} or e^{m_f(er)} with m_f ~ 10^6 stay representable and
// exact. Heavy arithmetic (products, compositions, circle sampling) converts
// to MPFR mantissa/exponent complex values, whose exponent range is 2^62 bits.

#include "bernstein/errors.hpp"
#include "bernstein/mp.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bernstein {

using mp::Complex;
using mp::Real;

/// A complex number as (natural log of modulus, phase in (−π, π]).
/// Zero is log_mag = −∞ with phase 0.
class LogComplex {
public:
    LogComplex();  // zero
    LogComplex(Real log_mag, Real phase);

    static LogComplex zero(int bits = mp::working_bits());
    static LogComplex one(int bits = mp::working_bits());
    static LogComplex from_complex(const Complex& z);
    static LogComplex from_real(double v, int bits = mp::working_bits());
    static LogComplex from_parts(double re, double im, int bits = mp::working_bits());

    const Real& log_mag() const { return log_mag_; }
    const Real& phase() const { return phase_; }
    bool is_zero() const { return log_mag_.is_neg_inf(); }
    int bits() const { return log_mag_.bits(); }

    Complex to_complex() const;
    /// e^{log_mag − shift}·e^{i phase}, the value scaled down by e^{shift}.
    Complex to_complex_scaled(const Real& shift) const;

    LogComplex operator*(const LogComplex& o) const;
    LogComplex pow(long n) const;

private:
    void normalize();
    Real log_mag_;
    Real phase_;
};

/// Sum of the represented complex numbers, computed by factoring out the
/// largest modulus. Sums that cancel below the working precision are
/// returned as canonical zero.
LogComplex log_sum_exp_complex(std::span<const LogComplex> terms);

/// Truncated power series at the origin: Σ_{j≤J} c_j z^j.
struct TaylorSeries {
    std::vector<LogComplex> coeffs;
    int precision_bits = mp::kDefaultBits;
    /// True when the stored coefficients are the whole function (a
    /// polynomial); such a series has no truncation tail.
    bool exact = false;

    std::size_t size() const { return coeffs.size(); }
    int degree_bound() const { return static_cast<int>(coeffs.size()) - 1; }
    bool is_identically_zero() const;

    static TaylorSeries from_complex(std::span<const Complex> c, int bits, bool exact);
    std::vector<Complex> to_complex() const;
};

TaylorSeries polynomial_series(std::span<const Complex> coeffs, int bits);
TaylorSeries monomial_series(int power, int bits);

/// Checks the geometric-decay tail criterion at radius e^{log_radius}: the
/// final ten nonzero terms must decay by at least 1/2 per index, and the
/// last term must be below 2^{-guard_bits} of the largest term.
void require_tail_converged(const TaylorSeries& s, const Real& log_radius, int guard_bits);

LogComplex series_eval(const TaylorSeries& s, const LogComplex& z, int guard_bits = 64);
TaylorSeries series_derivative(const TaylorSeries& s);
TaylorSeries series_multiply(const TaylorSeries& a, const TaylorSeries& b, int J);
TaylorSeries series_exp(const TaylorSeries& a, int J);
TaylorSeries series_scale(const TaylorSeries& a, const Complex& c);
TaylorSeries series_add(const TaylorSeries& a, const TaylorSeries& b);
TaylorSeries series_truncate(const TaylorSeries& a, int J);

/// Evaluates one series repeatedly on the circle |z| = r.
///
/// Coefficients are rescaled once to a_j = c_j r^j e^{-M} with M the
/// largest ln|c_j r^j|; terms below the working precision relative to that
/// maximum are dropped. Values are returned as (M, Σ a_j w^j), w = e^{iθ}.
class CircleEvaluator {
public:
    CircleEvaluator(const TaylorSeries& s, const Real& radius, int guard_bits = 64);

    const Real& log_scale() const { return scale_; }
    int bits() const { return bits_; }
    bool identically_zero() const { return terms_.empty(); }

    /// Scaled value Σ a_j w^j at w = e^{iθ}.
    Complex scaled_at(const Real& theta) const;
    /// Scaled values at the N equispaced points θ_n = 2πn/N + offset·2π/N.
    std::vector<Complex> scaled_on_grid(std::size_t n, double offset = 0.0) const;
    /// ln|s| at the N equispaced points (−∞ where the value vanishes).
    std::vector<Real> log_abs_on_grid(std::size_t n) const;
    /// Unscaled values e^{M}·Σ a_j w^j at the grid points.
    std::vector<Complex> values_on_grid(std::size_t n, double offset = 0.0) const;

private:
    int bits_;
    Real scale_;
    std::vector<std::size_t> index_;
    std::vector<Complex> terms_;
};

/// Discrete Fourier sums y_k = Σ_b x_b ω^{bk}, ω = e^{2πi/N}; radix-2 when N
/// is a power of two.
std::vector<Complex> dft(std::vector<Complex> x, int bits);

/// max_n ln|s(r e^{2πin/N})| over N equispaced samples.
Real max_log_abs_on_circle(const TaylorSeries& s, const Real& radius, std::size_t samples);

}  // namespace bernstein
