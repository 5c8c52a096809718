#include "bernstein/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bernstein {

using mp::BitsScope;

LogComplex::LogComplex() : log_mag_(Real::neg_inf()), phase_(0.0) {}

LogComplex::LogComplex(Real log_mag, Real phase) : log_mag_(std::move(log_mag)), phase_(std::move(phase)) {
    normalize();
}

void LogComplex::normalize() {
    if (phase_.bits() != log_mag_.bits()) phase_.set_bits(log_mag_.bits());
    if (log_mag_.is_neg_inf()) {
        phase_ = Real::with_bits(log_mag_.bits());
        return;
    }
    if (phase_ > mp::pi(phase_.bits()) || phase_ <= -mp::pi(phase_.bits())) phase_ = mp::reduce_angle(phase_);
}

LogComplex LogComplex::zero(int bits) { return {Real::neg_inf(bits), Real::with_bits(bits)}; }

LogComplex LogComplex::one(int bits) { return {Real::with_bits(bits), Real::with_bits(bits)}; }

LogComplex LogComplex::from_complex(const Complex& z) {
    const int b = z.bits();
    if (z.is_zero()) return zero(b);
    return {mp::log(mp::abs(z)), mp::arg(z)};
}

LogComplex LogComplex::from_real(double v, int bits) { return from_parts(v, 0.0, bits); }

LogComplex LogComplex::from_parts(double re, double im, int bits) {
    return from_complex(Complex(Real(re, bits), Real(im, bits)));
}

namespace {

// Real phases (0 and π) map back to exactly real values so that real series
// cancel exactly under Complex arithmetic.
Complex polar_snapped(const Real& mag, const Real& phase) {
    if (phase.is_zero()) return {mag, Real::with_bits(mag.bits())};
    if (phase == mp::pi(phase.bits())) return {-mag, Real::with_bits(mag.bits())};
    return mp::polar(mag, phase);
}

}  // namespace

Complex LogComplex::to_complex() const {
    if (is_zero()) return {Real::with_bits(bits()), Real::with_bits(bits())};
    return polar_snapped(mp::exp(log_mag_), phase_);
}

Complex LogComplex::to_complex_scaled(const Real& shift) const {
    if (is_zero()) return {Real::with_bits(bits()), Real::with_bits(bits())};
    return polar_snapped(mp::exp(log_mag_ - shift), phase_);
}

LogComplex LogComplex::operator*(const LogComplex& o) const {
    const int b = std::max(bits(), o.bits());
    if (is_zero() || o.is_zero()) return zero(b);
    return {log_mag_ + o.log_mag_, phase_ + o.phase_};
}

LogComplex LogComplex::pow(long n) const {
    if (n == 0) return one(bits());
    if (is_zero()) return zero(bits());
    return {log_mag_ * static_cast<double>(n), phase_ * static_cast<double>(n)};
}

LogComplex log_sum_exp_complex(std::span<const LogComplex> terms) {
    require(!terms.empty(), "log_sum_exp_complex needs at least one term");
    int bits = 0;
    for (const auto& t : terms) bits = std::max(bits, t.bits());
    BitsScope scope(bits);

    const LogComplex* top = &terms.front();
    for (const auto& t : terms)
        if (t.log_mag() > top->log_mag()) top = &t;
    if (top->is_zero()) return LogComplex::zero(bits);

    const Real shift = top->log_mag();
    Complex sum(Real::with_bits(bits), Real::with_bits(bits));
    Real magnitude_sum = Real::with_bits(bits);
    for (const auto& t : terms) {
        if (t.is_zero()) continue;
        Real m = mp::exp(t.log_mag() - shift);
        sum += polar_snapped(m, t.phase());
        magnitude_sum += m;
    }
    const Real modulus = mp::abs(sum);
    // Cancellation down to rounding noise is an exact zero.
    Real noise = magnitude_sum;
    mpfr_mul_2si(noise.get(), noise.get(), -(bits - 8), MPFR_RNDN);
    if (modulus <= noise) return LogComplex::zero(bits);
    return {shift + mp::log(modulus), mp::arg(sum)};
}

bool TaylorSeries::is_identically_zero() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](const LogComplex& c) { return c.is_zero(); });
}

TaylorSeries TaylorSeries::from_complex(std::span<const Complex> c, int bits, bool exact) {
    BitsScope scope(bits);
    TaylorSeries s;
    s.precision_bits = bits;
    s.exact = exact;
    s.coeffs.reserve(c.size());
    for (const auto& z : c) s.coeffs.push_back(LogComplex::from_complex(z));
    if (s.coeffs.empty()) s.coeffs.push_back(LogComplex::zero(bits));
    return s;
}

std::vector<Complex> TaylorSeries::to_complex() const {
    BitsScope scope(precision_bits);
    std::vector<Complex> out;
    out.reserve(coeffs.size());
    for (const auto& c : coeffs) out.push_back(c.to_complex());
    return out;
}

TaylorSeries polynomial_series(std::span<const Complex> coeffs, int bits) {
    return TaylorSeries::from_complex(coeffs, bits, true);
}

TaylorSeries monomial_series(int power, int bits) {
    BitsScope scope(bits);
    TaylorSeries s;
    s.precision_bits = bits;
    s.exact = true;
    s.coeffs.assign(static_cast<std::size_t>(power) + 1, LogComplex::zero(bits));
    s.coeffs.back() = LogComplex::one(bits);
    return s;
}

namespace {

constexpr double kLn2 = std::numbers::ln2;

// ln|c_j r^j| in double; adequate for ordering and cutoff decisions.
std::vector<double> term_logs(const TaylorSeries& s, double log_r) {
    std::vector<double> out(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        const auto& c = s.coeffs[j];
        out[j] = c.is_zero() ? -INFINITY : c.log_mag().to_double() + static_cast<double>(j) * log_r;
    }
    return out;
}

}  // namespace

void require_tail_converged(const TaylorSeries& s, const Real& log_radius, int guard_bits) {
    if (s.exact || log_radius.is_neg_inf()) return;
    const auto logs = term_logs(s, log_radius.to_double());
    std::vector<std::size_t> nonzero;
    for (std::size_t j = 0; j < logs.size(); ++j)
        if (std::isfinite(logs[j])) nonzero.push_back(j);
    if (nonzero.empty()) return;
    if (nonzero.size() < 11)
        fail(ErrorCode::TailNotConverged, "fewer than 11 nonzero coefficients stored for an infinite series");

    const double top = *std::max_element(logs.begin(), logs.end());
    const std::size_t first = nonzero.size() - 11;
    for (std::size_t i = first; i + 1 < nonzero.size(); ++i) {
        const std::size_t a = nonzero[i];
        const std::size_t b = nonzero[i + 1];
        const double allowed = -static_cast<double>(b - a) * kLn2;
        if (logs[b] - logs[a] > allowed + 1e-12)
            fail(ErrorCode::TailNotConverged,
                 "terms " + std::to_string(a) + ".." + std::to_string(b) + " do not decay geometrically");
    }
    if (logs[nonzero.back()] > top - guard_bits * kLn2)
        fail(ErrorCode::TailNotConverged, "truncation tail exceeds the guard threshold");
}

LogComplex series_eval(const TaylorSeries& s, const LogComplex& z, int guard_bits) {
    require(guard_bits >= 32, "series_eval needs guard_bits >= 32");
    BitsScope scope(s.precision_bits);
    if (z.is_zero()) return s.coeffs.front();
    require_tail_converged(s, z.log_mag(), guard_bits);

    const auto logs = term_logs(s, z.log_mag().to_double());
    const double top = *std::max_element(logs.begin(), logs.end());
    const double cutoff = top - (s.precision_bits + 32) * kLn2;
    std::vector<LogComplex> terms;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (!(logs[j] >= cutoff)) continue;
        terms.push_back(s.coeffs[j] * z.pow(static_cast<long>(j)));
    }
    if (terms.empty()) return LogComplex::zero(s.precision_bits);
    return log_sum_exp_complex(terms);
}

TaylorSeries series_derivative(const TaylorSeries& s) {
    BitsScope scope(s.precision_bits);
    TaylorSeries d;
    d.precision_bits = s.precision_bits;
    d.exact = s.exact;
    for (std::size_t j = 1; j < s.size(); ++j) {
        const auto& c = s.coeffs[j];
        if (c.is_zero()) {
            d.coeffs.push_back(LogComplex::zero(s.precision_bits));
        } else {
            d.coeffs.emplace_back(c.log_mag() + mp::log(Real(static_cast<double>(j))), c.phase());
        }
    }
    if (d.coeffs.empty()) d.coeffs.push_back(LogComplex::zero(s.precision_bits));
    return d;
}

TaylorSeries series_multiply(const TaylorSeries& a, const TaylorSeries& b, int J) {
    require(J >= 0, "series_multiply needs J >= 0");
    const int bits = std::max(a.precision_bits, b.precision_bits);
    BitsScope scope(bits);
    const auto ca = a.to_complex();
    const auto cb = b.to_complex();
    std::vector<Complex> out(static_cast<std::size_t>(J) + 1, Complex(Real::with_bits(bits), Real::with_bits(bits)));
    Real t1 = Real::with_bits(bits), t2 = Real::with_bits(bits);
    std::vector<bool> za(ca.size()), zb(cb.size());
    for (std::size_t i = 0; i < ca.size(); ++i) za[i] = ca[i].is_zero();
    for (std::size_t i = 0; i < cb.size(); ++i) zb[i] = cb[i].is_zero();
    for (std::size_t i = 0; i < ca.size() && i <= static_cast<std::size_t>(J); ++i) {
        if (za[i]) continue;
        const std::size_t lim = std::min(cb.size(), static_cast<std::size_t>(J) - i + 1);
        for (std::size_t k = 0; k < lim; ++k) {
            if (zb[k]) continue;
            mp::add_product(out[i + k], ca[i], cb[k], t1, t2);
        }
    }
    const bool exact = a.exact && b.exact &&
                       static_cast<std::size_t>(J) + 2 >= a.size() + b.size();
    return TaylorSeries::from_complex(out, bits, exact);
}

TaylorSeries series_exp(const TaylorSeries& a, int J) {
    require(J >= 0, "series_exp needs J >= 0");
    const int bits = a.precision_bits;
    BitsScope scope(bits);
    const auto ca = a.to_complex();
    const std::size_t n_max = static_cast<std::size_t>(J);
    std::vector<Complex> g(n_max + 1, Complex(Real::with_bits(bits), Real::with_bits(bits)));
    g[0] = mp::exp(ca[0]);
    // k·a_k, the coefficients of z·a'(z)
    std::vector<Complex> ka(ca.size());
    std::vector<bool> zero(ca.size());
    for (std::size_t k = 0; k < ca.size(); ++k) {
        ka[k] = ca[k] * Real(static_cast<double>(k));
        zero[k] = ca[k].is_zero() || k == 0;
    }
    Real t1 = Real::with_bits(bits), t2 = Real::with_bits(bits);
    for (std::size_t n = 1; n <= n_max; ++n) {
        Complex acc(Real::with_bits(bits), Real::with_bits(bits));
        const std::size_t lim = std::min(n, ca.size() - 1);
        for (std::size_t k = 1; k <= lim; ++k) {
            if (zero[k]) continue;
            mp::add_product(acc, ka[k], g[n - k], t1, t2);
        }
        acc.re /= static_cast<double>(n);
        acc.im /= static_cast<double>(n);
        g[n] = std::move(acc);
    }
    bool constant = a.exact;
    for (std::size_t k = 1; k < ca.size() && constant; ++k) constant = ca[k].is_zero();
    return TaylorSeries::from_complex(g, bits, constant);
}

TaylorSeries series_scale(const TaylorSeries& a, const Complex& c) {
    BitsScope scope(a.precision_bits);
    const LogComplex lc = LogComplex::from_complex(c);
    TaylorSeries out;
    out.precision_bits = a.precision_bits;
    out.exact = a.exact;
    out.coeffs.reserve(a.size());
    for (const auto& x : a.coeffs) out.coeffs.push_back(x * lc);
    return out;
}

TaylorSeries series_add(const TaylorSeries& a, const TaylorSeries& b) {
    const int bits = std::max(a.precision_bits, b.precision_bits);
    BitsScope scope(bits);
    const std::size_t n = std::max(a.size(), b.size());
    std::vector<Complex> out(n, Complex(Real::with_bits(bits), Real::with_bits(bits)));
    for (std::size_t j = 0; j < a.size(); ++j) out[j] += a.coeffs[j].to_complex();
    for (std::size_t j = 0; j < b.size(); ++j) out[j] += b.coeffs[j].to_complex();
    return TaylorSeries::from_complex(out, bits, a.exact && b.exact);
}

TaylorSeries series_truncate(const TaylorSeries& a, int J) {
    TaylorSeries out = a;
    const std::size_t n = static_cast<std::size_t>(J) + 1;
    if (out.coeffs.size() > n) {
        bool dropped_nonzero = false;
        for (std::size_t j = n; j < out.coeffs.size(); ++j) dropped_nonzero |= !out.coeffs[j].is_zero();
        out.coeffs.resize(n);
        if (dropped_nonzero) out.exact = false;
    }
    return out;
}

std::vector<Complex> dft(std::vector<Complex> x, int bits) {
    BitsScope scope(bits);
    const std::size_t n = x.size();
    if (n <= 1) return x;
    const Real two_pi = mp::pi(bits) * 2.0;
    const bool pow2 = (n & (n - 1)) == 0;
    if (!pow2) {
        std::vector<Complex> tw(n);
        for (std::size_t m = 0; m < n; ++m) tw[m] = mp::unit(two_pi * static_cast<double>(m) / static_cast<double>(n));
        std::vector<Complex> y(n, Complex(Real::with_bits(bits), Real::with_bits(bits)));
        Real t1 = Real::with_bits(bits), t2 = Real::with_bits(bits);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t b = 0; b < n; ++b) mp::add_product(y[k], x[b], tw[(b * k) % n], t1, t2);
        return y;
    }
    // Bit-reversal permutation, then iterative butterflies with ω = e^{+2πi/N}.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    std::vector<Complex> tw(n / 2);
    for (std::size_t m = 0; m < n / 2; ++m) tw[m] = mp::unit(two_pi * static_cast<double>(m) / static_cast<double>(n));
    Complex t;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                t = x[i + k + len / 2] * tw[k * stride];
                x[i + k + len / 2] = x[i + k] - t;
                x[i + k] += t;
            }
        }
    }
    return x;
}

CircleEvaluator::CircleEvaluator(const TaylorSeries& s, const Real& radius, int guard_bits)
    : bits_(s.precision_bits), scale_(Real::neg_inf(s.precision_bits)) {
    BitsScope scope(bits_);
    require(radius > 0.0, "circle radius must be positive");
    const Real log_r = mp::log(radius);
    require_tail_converged(s, log_r, guard_bits);
    const auto logs = term_logs(s, log_r.to_double());
    const double top = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(top)) return;
    const double cutoff = top - (bits_ + 32) * kLn2;

    std::size_t arg_top = 0;
    for (std::size_t j = 0; j < logs.size(); ++j)
        if (logs[j] == top) { arg_top = j; break; }
    scale_ = s.coeffs[arg_top].log_mag() + log_r * static_cast<double>(arg_top);
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (!(logs[j] >= cutoff)) continue;
        const auto& c = s.coeffs[j];
        Real lm = c.log_mag() + log_r * static_cast<double>(j) - scale_;
        terms_.push_back(polar_snapped(mp::exp(lm), c.phase()));
        index_.push_back(j);
    }
}

Complex CircleEvaluator::scaled_at(const Real& theta) const {
    BitsScope scope(bits_);
    Complex acc(Real::with_bits(bits_), Real::with_bits(bits_));
    if (terms_.empty()) return acc;
    const Complex w = mp::unit(theta);
    // Sparse Horner from the top index down.
    acc = terms_.back();
    for (std::size_t i = terms_.size() - 1; i-- > 0;) {
        for (std::size_t g = index_[i + 1] - index_[i]; g > 0; --g) acc *= w;
        acc += terms_[i];
    }
    for (std::size_t g = index_.front(); g > 0; --g) acc *= w;
    return acc;
}

std::vector<Complex> CircleEvaluator::scaled_on_grid(std::size_t n, double offset) const {
    BitsScope scope(bits_);
    std::vector<Complex> bins(n, Complex(Real::with_bits(bits_), Real::with_bits(bits_)));
    if (terms_.empty()) return bins;
    const Real two_pi = mp::pi(bits_) * 2.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const std::size_t j = index_[i];
        if (offset == 0.0) {
            bins[j % n] += terms_[i];
        } else {
            const Real phase = two_pi * static_cast<double>(j) * (offset / static_cast<double>(n));
            bins[j % n] += terms_[i] * mp::unit(phase);
        }
    }
    return dft(std::move(bins), bits_);
}

std::vector<Real> CircleEvaluator::log_abs_on_grid(std::size_t n) const {
    BitsScope scope(bits_);
    std::vector<Real> out;
    out.reserve(n);
    for (const auto& v : scaled_on_grid(n)) {
        if (v.is_zero()) {
            out.push_back(Real::neg_inf(bits_));
        } else {
            out.push_back(scale_ + mp::log(mp::abs(v)));
        }
    }
    return out;
}

std::vector<Complex> CircleEvaluator::values_on_grid(std::size_t n, double offset) const {
    BitsScope scope(bits_);
    auto v = scaled_on_grid(n, offset);
    if (terms_.empty()) return v;
    const Real s = mp::exp(scale_);
    for (auto& z : v) z *= s;
    return v;
}

Real max_log_abs_on_circle(const TaylorSeries& s, const Real& radius, std::size_t samples) {
    CircleEvaluator ev(s, radius);
    if (ev.identically_zero()) return Real::neg_inf(s.precision_bits);
    Real best = Real::neg_inf(s.precision_bits);
    for (auto& v : ev.log_abs_on_grid(samples))
        if (v > best) best = std::move(v);
    return best;
}

}  // namespace bernstein
