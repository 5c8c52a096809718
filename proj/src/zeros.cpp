#include "bernstein/zeros.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>

namespace bernstein {

namespace {

constexpr int kGaussPoints = 16;
constexpr int kInitialPanels = 16;
constexpr int kMaxRefinements = 9;
constexpr int kMaxNudges = 3;
constexpr int kEvalBits = 256;
constexpr double kLn2 = std::numbers::ln2;

struct NearContour {};

// Copy of s rounded to `bits`; circle sums at this precision are ample for a
// winding number and keep Horner cheap for long high-precision series.
TaylorSeries rounded(const TaylorSeries& s, int bits) {
    if (s.precision_bits <= bits) return s;
    TaylorSeries out;
    out.precision_bits = bits;
    out.exact = s.exact;
    out.coeffs.reserve(s.size());
    for (const auto& c : s.coeffs) {
        if (c.is_zero()) {
            out.coeffs.push_back(LogComplex::zero(bits));
            continue;
        }
        Real lm = c.log_mag(), ph = c.phase();
        lm.set_bits(bits);
        ph.set_bits(bits);
        out.coeffs.emplace_back(std::move(lm), std::move(ph));
    }
    return out;
}

// Nodes and weights of the composite rule on [0, 2π] with `panels` panels.
void panel_rule(int panels, std::vector<double>& theta, std::vector<double>& weight, std::vector<double>& ends) {
    using GL = boost::math::quadrature::gauss<double, kGaussPoints>;
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    theta.clear();
    weight.clear();
    ends.clear();
    const double h = 2.0 * std::numbers::pi / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h, half = 0.5 * h;
        ends.push_back(p * h);
        for (std::size_t i = 0; i < x.size(); ++i) {
            // Boost stores the nonnegative half of a symmetric rule
            theta.push_back(mid + half * x[i]);
            weight.push_back(half * w[i]);
            if (x[i] != 0.0) {
                theta.push_back(mid - half * x[i]);
                weight.push_back(half * w[i]);
            }
        }
    }
}

struct Winding {
    double value;
    int panels;
};

Winding wind(const TaylorSeries& s, const TaylorSeries& ds, double radius) {
    const int bits = s.precision_bits;
    mp::BitsScope scope(bits);
    const Real R(radius);
    CircleEvaluator ev(s, R), evd(ds, R);
    if (ev.identically_zero()) throw NearContour{};
    if (evd.identically_zero()) return {0.0, kInitialPanels};
    const double shift = (evd.log_scale() - ev.log_scale()).to_double();
    const double near = -(bits * kLn2) / 4.0;

    std::vector<double> theta, weight, ends;
    double prev = NAN;
    for (int level = 0, panels = kInitialPanels; level <= kMaxRefinements; ++level, panels *= 2) {
        panel_rule(panels, theta, weight, ends);
        // zero-on-contour guard at the panel endpoints
        double top = -INFINITY;
        std::vector<double> end_logs;
        for (double t : ends) {
            const Complex v = ev.scaled_at(Real(t));
            const double l = v.is_zero() ? -INFINITY : mp::log(mp::abs(v)).to_double();
            end_logs.push_back(l);
            top = std::max(top, l);
        }
        for (double l : end_logs)
            if (!(l > top + near)) throw NearContour{};

        double acc = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const Real th(theta[i]);
            const Complex v = ev.scaled_at(th);
            if (v.is_zero()) throw NearContour{};
            const Complex ratio = evd.scaled_at(th) / v * mp::unit(th);
            // Re(z s'/s)/2π with z = R e^{iθ}
            acc += weight[i] * ratio.re.to_double();
        }
        const double value = acc * radius * std::exp(shift) / (2.0 * std::numbers::pi);
        if (!std::isfinite(value)) throw NearContour{};
        const double resid = std::abs(value - std::round(value));
        if (level > 0 && resid < 0.1 && std::abs(value - prev) < 0.1 && std::round(value) == std::round(prev))
            return {value, panels};
        prev = value;
    }
    throw NearContour{};
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

nlohmann::json ZeroCountResult::to_json() const {
    nlohmann::json j = {{"r", r},
                        {"count", count},
                        {"contour_segments", contour_segments},
                        {"residual", residual},
                        {"winding_ok", winding_ok},
                        {"nudges", nudges}};
    if (std::isfinite(jensen_bound)) j["jensen_bound"] = jensen_bound;
    else j["jensen_bound"] = "inf";
    return j;
}

double jensen_constant(int precision_bits) {
    mp::BitsScope scope(precision_bits);
    const Real e = mp::exp(Real(1.0));
    return mp::log((1.0 + e * e) / (2.0 * e)).to_double();
}

double jensen_upper_bound(const TaylorSeries& s, double r, std::size_t samples) {
    require(r > 0.0, "jensen_upper_bound needs a positive radius");
    if (s.is_identically_zero()) fail(ErrorCode::RestrictedIdenticallyZero, "jensen_upper_bound: zero series");
    mp::BitsScope scope(s.precision_bits);
    const Real outer = sup_norm_on_circle(s, Real(std::exp(1.0) * r), samples);
    const Real inner = sup_norm_on_circle(s, Real(r), samples);
    return (outer - inner).to_double() / jensen_constant(s.precision_bits);
}

ZeroCountResult count_zeros_argument(const TaylorSeries& s, double r) {
    require(r > 0.0 && std::isfinite(r), "count_zeros_argument needs a positive radius");
    if (s.is_identically_zero()) fail(ErrorCode::RestrictedIdenticallyZero, "count_zeros_argument: zero series");
    const auto low = rounded(s, kEvalBits);
    const auto dlow = series_derivative(low);
    ZeroCountResult out;
    for (int nudge = 0; nudge <= kMaxNudges; ++nudge) {
        const double radius = r + nudge * 1e-3 * r;
        // validates the truncation on this circle before any integration
        require_tail_converged(s, mp::log(Real(radius, s.precision_bits)), 64);
        try {
            const auto w = wind(low, dlow, radius);
            out.r = radius;
            out.count = static_cast<int>(std::lround(w.value));
            out.residual = std::abs(w.value - std::round(w.value));
            out.contour_segments = w.panels;
            out.winding_ok = out.residual < 0.1;
            out.nudges = nudge;
            try {
                out.jensen_bound = jensen_upper_bound(s, radius);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::TailNotConverged) throw;
                out.jensen_bound = INFINITY;
            }
            return out;
        } catch (const NearContour&) {
        }
    }
    fail(ErrorCode::ContourNearZero,
         "count_zeros_argument: a zero stays within reach of |z| = " + fmt17(r) + " after " +
             std::to_string(kMaxNudges) + " nudges");
}

int vanishing_order_of(const TaylorSeries& s, const Real& threshold) {
    const Real lt = mp::log(threshold);
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (!s.coeffs[j].is_zero() && s.coeffs[j].log_mag() > lt) return static_cast<int>(j);
    }
    return static_cast<int>(s.size());
}

std::string_view mode_name(LowerBoundMode m) { return m == LowerBoundMode::Thm1c ? "thm1c" : "thm14"; }

LowerBoundMode mode_from_name(std::string_view name) {
    if (name == "thm1c") return LowerBoundMode::Thm1c;
    if (name == "thm14") return LowerBoundMode::Thm14;
    fail(ErrorCode::ConfigInvalid, "unknown lower-bound mode '" + std::string(name) + "'");
}

std::string LowerBoundRecord::csv_header() { return "k,mode,vanishing_order,count,jensen_bound,chain_holds"; }

std::string LowerBoundRecord::csv_row() const {
    return std::to_string(k) + "," + std::string(mode_name(mode)) + "," + std::to_string(vanishing_order) + "," +
           std::to_string(count) + "," + fmt17(jensen_bound) + "," + (chain_holds ? "true" : "false");
}

nlohmann::json LowerBoundRecord::to_json() const {
    return {{"k", k},
            {"mode", mode_name(mode)},
            {"target_order", target_order},
            {"vanishing_order", vanishing_order},
            {"count", count},
            {"jensen_bound", jensen_bound},
            {"log_quotient", log_quotient},
            {"chain_holds", chain_holds},
            {"r", r},
            {"precision_bits", precision_bits}};
}

int lower_bound_target(int k, const CurveSpec& curve, LowerBoundMode mode) {
    require(k >= 1, "lower-bound experiments need k >= 1");
    if (mode == LowerBoundMode::Thm1c) return static_cast<int>(sk_formula(1, k)) + 1;
    return static_cast<int>(dim_pk(static_cast<int>(curve.m()) + 1, k)) - 1;
}

LowerBoundRecord lower_bound_experiment(int k, const CurveSpec& curve, LowerBoundMode mode, double r,
                                        int precision_bits) {
    const int bits = precision_bits > 0 ? precision_bits : precision_for_degree(k);
    mp::BitsScope scope(bits);
    LowerBoundRecord rec;
    rec.k = k;
    rec.mode = mode;
    rec.r = r;
    rec.precision_bits = bits;
    rec.target_order = lower_bound_target(k, curve, mode);

    const auto p = kernel_vanishing_poly(k, curve, rec.target_order, bits);
    const auto s = restricted_series_for_radius(p, curve, std::exp(1.0) * r, bits);
    Real thr(1.0, bits);
    mpfr_mul_2si(thr.get(), thr.get(), -bits / 4, MPFR_RNDN);
    rec.vanishing_order = vanishing_order_of(s, thr * p.norm());

    const auto zc = count_zeros_argument(s, r);
    rec.count = zc.count;
    rec.jensen_bound = jensen_upper_bound(s, r);
    rec.log_quotient = quotient_of_polynomial(p, curve, r, bits);
    rec.chain_holds = zc.winding_ok && rec.vanishing_order <= rec.count &&
                      static_cast<double>(rec.count) <= rec.jensen_bound + 0.5;
    return rec;
}

}  // namespace bernstein
