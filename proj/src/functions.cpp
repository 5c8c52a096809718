#include "bernstein/functions.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace bernstein {

using mp::BitsScope;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxSeriesTerms = 1 << 21;
constexpr int kFirstSeriesTerms = 64;

json complex_to_json(cdouble z) {
    if (z.imag() == 0.0) return z.real();
    return json::array({z.real(), z.imag()});
}

cdouble complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    fail(ErrorCode::ConfigInvalid, "complex value must be a number or [re, im]: " + j.dump());
}

json complex_list_to_json(const std::vector<cdouble>& v) {
    json a = json::array();
    for (auto z : v) a.push_back(complex_to_json(z));
    return a;
}

std::vector<cdouble> complex_list_from_json(const json& j) {
    if (!j.is_array()) fail(ErrorCode::ConfigInvalid, "expected a coefficient list");
    std::vector<cdouble> out;
    for (const auto& x : j) out.push_back(complex_from_json(x));
    return out;
}

const json& param(const json& params, const char* key) {
    if (!params.is_object() || !params.contains(key))
        fail(ErrorCode::ConfigInvalid, std::string("missing parameter '") + key + "'");
    return params.at(key);
}

double number_param(const json& params, const char* key) {
    const json& v = param(params, key);
    if (!v.is_number()) fail(ErrorCode::ConfigInvalid, std::string("parameter '") + key + "' must be a number");
    return v.get<double>();
}

double number_param_or(const json& params, const char* key, double fallback) {
    if (!params.is_object() || !params.contains(key)) return fallback;
    return number_param(params, key);
}

Complex to_mp(cdouble z) { return {Real(z.real()), Real(z.imag())}; }

// Adaptive Simpson on [a, b]; f is evaluated at the caller's working precision.
Real simpson_step(const std::function<Real(const Real&)>& f, const Real& a, const Real& b, const Real& fa,
                  const Real& fm, const Real& fb, const Real& whole, const Real& tol, int depth) {
    const Real m = (a + b) / 2.0;
    const Real lm = (a + m) / 2.0, rm = (m + b) / 2.0;
    const Real flm = f(lm), frm = f(rm);
    const Real left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Real right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const Real delta = left + right - whole;
    if (depth <= 0 || mp::abs(delta) <= tol * 15.0) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

Real adaptive_simpson(const std::function<Real(const Real&)>& f, const Real& a, const Real& b, const Real& tol) {
    if (a == b) return Real::with_bits(mp::working_bits());
    const Real fa = f(a), fb = f(b), fm = f((a + b) / 2.0);
    const Real whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Linear interpolation through (xs, ys), extending the end segments.
Real interp(const std::vector<std::pair<double, double>>& tab, const Real& x, bool inverse) {
    auto key = [&](std::size_t i) { return inverse ? tab[i].second : tab[i].first; };
    auto val = [&](std::size_t i) { return inverse ? tab[i].first : tab[i].second; };
    std::size_t i = 0;
    while (i + 2 < tab.size() && x > key(i + 1)) ++i;
    const Real x0(key(i)), x1(key(i + 1)), y0(val(i)), y1(val(i + 1));
    return y0 + (y1 - y0) * ((x - x0) / (x1 - x0));
}

}  // namespace

// ---------------------------------------------------------------- HSpec

HSpec HSpec::power(double alpha) {
    require(alpha > 1.0 && alpha < 2.0, "power h needs alpha in (1, 2)");
    HSpec h;
    h.kind_ = Kind::Power;
    h.alpha_ = alpha;
    return h;
}

HSpec HSpec::exponential(double alpha) {
    require(alpha > 0.0, "exponential h needs alpha > 0");
    HSpec h;
    h.kind_ = Kind::Exponential;
    h.alpha_ = alpha;
    return h;
}

HSpec HSpec::shifted(const HSpec& base, double c) {
    require(std::isfinite(c), "shift must be finite");
    HSpec h;
    h.kind_ = Kind::Shifted;
    h.shift_ = c;
    h.base_ = std::make_shared<const HSpec>(base);
    return h;
}

HSpec HSpec::tabulated(std::vector<std::pair<double, double>> table) {
    require(table.size() >= 2, "tabulated h needs at least two samples");
    for (std::size_t i = 1; i < table.size(); ++i)
        require(table[i].first > table[i - 1].first && table[i].second > table[i - 1].second,
                "tabulated h must be strictly increasing in t and h");
    HSpec h;
    h.kind_ = Kind::Tabulated;
    h.table_ = std::move(table);
    return h;
}

Real HSpec::h(const Real& t) const {
    switch (kind_) {
        case Kind::Power: {
            if (t <= 0.0) return Real::with_bits(t.bits());
            return mp::pow(t / alpha_, 1.0 / (alpha_ - 1.0));
        }
        case Kind::Exponential: return mp::exp(t * alpha_ - 1.0) - 1.0;
        case Kind::Shifted: return base_->h(t) - shift_;
        case Kind::Tabulated: return interp(table_, t, false);
    }
    return Real();
}

Real HSpec::h_inv(const Real& s) const {
    switch (kind_) {
        case Kind::Power: {
            if (s <= 0.0) return Real::with_bits(s.bits());
            return mp::pow(s, alpha_ - 1.0) * alpha_;
        }
        case Kind::Exponential: {
            if (s <= -1.0) fail(ErrorCode::InverseNotBracketed, "exponential h never reaches " + s.to_string(8));
            return (mp::log1p(s) + 1.0) / alpha_;
        }
        case Kind::Shifted: return base_->h_inv(s + shift_);
        case Kind::Tabulated: {
            if (s > table_.back().second)
                fail(ErrorCode::InverseNotBracketed,
                     "tabulated h ends at " + std::to_string(table_.back().second) + ", below " + s.to_string(8));
            return interp(table_, s, true);
        }
    }
    return Real();
}

double HSpec::h(double t) const {
    BitsScope scope(128);
    return h(Real(t)).to_double();
}

double HSpec::h_inv(double s) const {
    BitsScope scope(128);
    return h_inv(Real(s)).to_double();
}

Real HSpec::integral_h_inv(const Real& upper) const {
    switch (kind_) {
        case Kind::Power:
            if (upper <= 0.0) return Real::with_bits(upper.bits());
            return mp::pow(upper, alpha_);
        case Kind::Exponential: {
            const Real u = upper + 1.0;
            return u * mp::log(u) / alpha_;
        }
        case Kind::Shifted:
            return base_->integral_h_inv(upper + shift_) - base_->integral_h_inv(Real(shift_, upper.bits()));
        case Kind::Tabulated: {
            const int bits = std::max(upper.bits(), mp::working_bits());
            BitsScope scope(2 * bits);
            const Real up(upper);
            Real total = Real::with_bits(2 * bits);
            Real lo = Real::with_bits(2 * bits);
            const Real tol = mp::pow(Real(2.0), -static_cast<double>(bits));
            auto f = [this](const Real& s) { return h_inv(s); };
            // Integrate piece by piece between the tabulated h-values.
            for (const auto& [t, hv] : table_) {
                if (hv <= lo.to_double()) continue;
                const Real hi = mp::min(Real(hv), up);
                if (hi > lo) total += adaptive_simpson(f, lo, hi, tol);
                lo = hi;
                if (lo >= up) break;
            }
            if (lo < up) total += adaptive_simpson(f, lo, up, tol);
            total.set_bits(bits);
            return total;
        }
    }
    return Real();
}

double HSpec::integral_h(double a, double b) const {
    switch (kind_) {
        case Kind::Power: {
            const double beta = 1.0 / (alpha_ - 1.0);
            auto prim = [&](double s) { return s <= 0 ? 0.0 : alpha_ / (beta + 1.0) * std::pow(s / alpha_, beta + 1.0); };
            return prim(b) - prim(a);
        }
        case Kind::Exponential: {
            auto prim = [&](double s) { return std::exp(alpha_ * s - 1.0) / alpha_ - s; };
            return prim(b) - prim(a);
        }
        case Kind::Shifted: return base_->integral_h(a, b) - shift_ * (b - a);
        case Kind::Tabulated: {
            BitsScope scope(128);
            auto f = [this](const Real& t) { return h(t); };
            return adaptive_simpson(f, Real(a), Real(b), Real(1e-14)).to_double();
        }
    }
    return 0.0;
}

bool HSpec::zero_extrapolated() const {
    switch (kind_) {
        case Kind::Shifted: return base_->kind_ == Kind::Tabulated && shift_ < base_->table_.front().second;
        case Kind::Tabulated: return table_.front().second > 0.0;
        default: return false;
    }
}

std::optional<double> HSpec::known_order() const {
    switch (kind_) {
        case Kind::Power: return 0.0;
        case Kind::Exponential: return alpha_;
        case Kind::Shifted: return base_->known_order();
        case Kind::Tabulated: return std::nullopt;
    }
    return std::nullopt;
}

json HSpec::to_json() const {
    switch (kind_) {
        case Kind::Power: return {{"kind", "power"}, {"params", {{"alpha", alpha_}}}};
        case Kind::Exponential: return {{"kind", "exponential"}, {"params", {{"alpha", alpha_}}}};
        case Kind::Shifted: return {{"kind", "shifted"}, {"params", {{"base", base_->to_json()}, {"c", shift_}}}};
        case Kind::Tabulated: {
            json t = json::array(), hv = json::array();
            for (const auto& [a, b] : table_) {
                t.push_back(a);
                hv.push_back(b);
            }
            return {{"kind", "tabulated"}, {"params", {{"t", t}, {"h", hv}}}};
        }
    }
    return {};
}

HSpec HSpec::from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) fail(ErrorCode::ConfigInvalid, "h spec needs a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    const json params = j.value("params", json::object());
    try {
        if (kind == "power") return power(number_param(params, "alpha"));
        if (kind == "exponential") return exponential(number_param(params, "alpha"));
        if (kind == "shifted") return shifted(from_json(param(params, "base")), number_param(params, "c"));
        if (kind == "tabulated") {
            const json& t = param(params, "t");
            const json& hv = param(params, "h");
            if (!t.is_array() || !hv.is_array() || t.size() != hv.size())
                fail(ErrorCode::ConfigInvalid, "tabulated h needs equal-length 't' and 'h' arrays");
            std::vector<std::pair<double, double>> tab;
            for (std::size_t i = 0; i < t.size(); ++i) tab.emplace_back(t[i].get<double>(), hv[i].get<double>());
            return tabulated(std::move(tab));
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidArgument) fail(ErrorCode::ConfigInvalid, e.what());
        throw;
    }
    fail(ErrorCode::ConfigInvalid, "unknown h kind '" + kind + "'");
}

// ---------------------------------------------------- EntireFunctionSpec

EntireFunctionSpec EntireFunctionSpec::polynomial(std::vector<cdouble> coeffs) {
    require(!coeffs.empty(), "polynomial needs at least one coefficient");
    EntireFunctionSpec s;
    s.kind = FunctionKind::Polynomial;
    s.poly = std::move(coeffs);
    return s;
}

EntireFunctionSpec EntireFunctionSpec::exp_polynomial(std::vector<ExpTerm> terms) {
    require(!terms.empty(), "exponential polynomial needs at least one term");
    EntireFunctionSpec s;
    s.kind = FunctionKind::ExpPolynomial;
    s.terms = std::move(terms);
    return s;
}

EntireFunctionSpec EntireFunctionSpec::exp_linear(cdouble q) { return exp_polynomial({ExpTerm{{1.0}, q}}); }

EntireFunctionSpec EntireFunctionSpec::taylor(TaylorRule rule, double param, PhaseRule phase, double phase_param) {
    if (rule == TaylorRule::NegPower) require(param > 1.0, "neg_power rule needs alpha > 1");
    if (rule == TaylorRule::InvGamma) require(param > 0.0, "inv_gamma rule needs rho > 0");
    EntireFunctionSpec s;
    s.kind = FunctionKind::TaylorRule;
    s.rule = rule;
    s.rule_param = rule == TaylorRule::InvFactorial ? 1.0 : param;
    s.phase_rule = phase;
    s.phase_param = phase_param;
    return s;
}

EntireFunctionSpec EntireFunctionSpec::theorem_1_11(const HSpec& h) {
    EntireFunctionSpec s;
    s.kind = FunctionKind::Theorem111;
    s.h = h;
    return s;
}

EntireFunctionSpec EntireFunctionSpec::iterated_exp(int depth, double scale) {
    require(depth >= 1, "iterated exponential depth must be at least 1");
    require(scale > 0.0, "iterated exponential scale must be positive");
    EntireFunctionSpec s;
    s.kind = FunctionKind::IteratedExp;
    s.depth = depth;
    s.scale = scale;
    return s;
}

EntireFunctionSpec EntireFunctionSpec::exp_of(const EntireFunctionSpec& inner) {
    EntireFunctionSpec s;
    s.kind = FunctionKind::ExpOf;
    s.inner = std::make_shared<const EntireFunctionSpec>(inner);
    return s;
}

namespace {

const char* rule_name(TaylorRule r) {
    switch (r) {
        case TaylorRule::InvFactorial: return "inv_factorial";
        case TaylorRule::NegPower: return "neg_power";
        case TaylorRule::InvGamma: return "inv_gamma";
    }
    return "";
}

const char* phase_name(PhaseRule p) {
    switch (p) {
        case PhaseRule::Zero: return "zero";
        case PhaseRule::Alternating: return "alternating";
        case PhaseRule::Linear: return "linear";
    }
    return "";
}

PhaseRule phase_from(const json& params) {
    const std::string p = params.value("phase", std::string("zero"));
    if (p == "zero") return PhaseRule::Zero;
    if (p == "alternating") return PhaseRule::Alternating;
    if (p == "linear") return PhaseRule::Linear;
    fail(ErrorCode::ConfigInvalid, "unknown phase rule '" + p + "'");
}

void add_phase(json& params, PhaseRule rule, double theta) {
    if (rule == PhaseRule::Zero) return;
    params["phase"] = phase_name(rule);
    if (rule == PhaseRule::Linear) params["theta"] = theta;
}

}  // namespace

json EntireFunctionSpec::to_json() const {
    json params = json::object();
    std::string name;
    switch (kind) {
        case FunctionKind::Polynomial:
            name = "polynomial";
            params["coeffs"] = complex_list_to_json(poly);
            break;
        case FunctionKind::ExpPolynomial: {
            name = "exp_polynomial";
            json t = json::array();
            for (const auto& term : terms) t.push_back({{"poly", complex_list_to_json(term.poly)}, {"freq", complex_to_json(term.freq)}});
            params["terms"] = t;
            break;
        }
        case FunctionKind::TaylorRule:
            name = "taylor_rule";
            params["rule"] = rule_name(rule);
            if (rule != TaylorRule::InvFactorial) params["param"] = rule_param;
            add_phase(params, phase_rule, phase_param);
            break;
        case FunctionKind::Theorem111:
            name = "theorem_1_11";
            params["h"] = h->to_json();
            add_phase(params, phase_rule, phase_param);
            break;
        case FunctionKind::IteratedExp:
            name = "iterated_exp";
            params["depth"] = depth;
            params["scale"] = scale;
            break;
        case FunctionKind::ExpOf:
            name = "exp_of";
            params["inner"] = inner->to_json();
            break;
    }
    return {{"kind", name}, {"params", params}};
}

EntireFunctionSpec EntireFunctionSpec::from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        fail(ErrorCode::ConfigInvalid, "function spec needs a string 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    const json params = j.value("params", json::object());
    try {
        if (kind == "polynomial") return polynomial(complex_list_from_json(param(params, "coeffs")));
        if (kind == "exp_polynomial") {
            const json& t = param(params, "terms");
            if (!t.is_array()) fail(ErrorCode::ConfigInvalid, "'terms' must be an array");
            std::vector<ExpTerm> terms;
            for (const auto& term : t)
                terms.push_back({complex_list_from_json(param(term, "poly")), complex_from_json(param(term, "freq"))});
            return exp_polynomial(std::move(terms));
        }
        if (kind == "taylor_rule") {
            const std::string r = param(params, "rule").get<std::string>();
            TaylorRule rule;
            if (r == "inv_factorial") rule = TaylorRule::InvFactorial;
            else if (r == "neg_power") rule = TaylorRule::NegPower;
            else if (r == "inv_gamma") rule = TaylorRule::InvGamma;
            else fail(ErrorCode::ConfigInvalid, "unknown taylor rule '" + r + "'");
            const double p = rule == TaylorRule::InvFactorial ? 1.0 : number_param(params, "param");
            return taylor(rule, p, phase_from(params), number_param_or(params, "theta", 0.0));
        }
        if (kind == "theorem_1_11") {
            auto s = theorem_1_11(HSpec::from_json(param(params, "h")));
            s.phase_rule = phase_from(params);
            s.phase_param = number_param_or(params, "theta", 0.0);
            return s;
        }
        if (kind == "iterated_exp") {
            const json& d = param(params, "depth");
            if (!d.is_number_integer()) fail(ErrorCode::ConfigInvalid, "'depth' must be an integer");
            return iterated_exp(d.get<int>(), number_param_or(params, "scale", 1.0));
        }
        if (kind == "exp_of") return exp_of(from_json(param(params, "inner")));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidArgument) fail(ErrorCode::ConfigInvalid, e.what());
        throw;
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigInvalid, e.what());
    }
    fail(ErrorCode::ConfigInvalid, "unknown function kind '" + kind + "'");
}

std::string EntireFunctionSpec::digest() const { return sha256_hex(to_json().dump()); }

json CurveSpec::to_json() const {
    json c = json::array();
    for (const auto& f : coords) c.push_back(f.to_json());
    return {{"label", label}, {"coords", c}};
}

CurveSpec CurveSpec::from_json(const json& j) {
    if (!j.is_object() || !j.contains("coords") || !j.at("coords").is_array() || j.at("coords").empty())
        fail(ErrorCode::ConfigInvalid, "curve needs a non-empty 'coords' array");
    CurveSpec c;
    c.label = j.value("label", std::string());
    for (const auto& f : j.at("coords")) c.coords.push_back(EntireFunctionSpec::from_json(f));
    return c;
}

std::string CurveSpec::digest() const { return sha256_hex(to_json().dump()); }

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

// ------------------------------------------------------------ coefficients

namespace {

Real phase_of(PhaseRule rule, double theta, std::size_t j) {
    switch (rule) {
        case PhaseRule::Zero: return Real::with_bits(mp::working_bits());
        case PhaseRule::Alternating: return (j % 2 == 1) ? mp::pi() : Real::with_bits(mp::working_bits());
        case PhaseRule::Linear: return Real(theta) * static_cast<double>(j);
    }
    return Real();
}

void check_distinct_frequencies(const std::vector<ExpTerm>& terms) {
    for (std::size_t a = 0; a < terms.size(); ++a)
        for (std::size_t b = a + 1; b < terms.size(); ++b)
            if (terms[a].freq == terms[b].freq) fail(ErrorCode::DuplicateFrequency, "frequencies must be pairwise distinct");
}

TaylorSeries exp_polynomial_coefficients(const std::vector<ExpTerm>& terms, int J, int bits) {
    check_distinct_frequencies(terms);
    const std::size_t n = static_cast<std::size_t>(J) + 1;
    std::vector<Complex> c(n, Complex(Real::with_bits(bits), Real::with_bits(bits)));
    bool all_polynomial = true;
    std::size_t poly_len = 0;
    Real t1 = Real::with_bits(bits), t2 = Real::with_bits(bits);
    for (const auto& term : terms) {
        const Complex q = to_mp(term.freq);
        all_polynomial &= q.is_zero();
        poly_len = std::max(poly_len, term.poly.size());
        // e_m = q^m / m!
        std::vector<Complex> e(n);
        e[0] = Complex(Real(1.0), Real::with_bits(bits));
        for (std::size_t m = 1; m < n; ++m) {
            e[m] = e[m - 1] * q;
            e[m].re /= static_cast<double>(m);
            e[m].im /= static_cast<double>(m);
        }
        for (std::size_t i = 0; i < term.poly.size(); ++i) {
            if (term.poly[i] == cdouble(0.0)) continue;
            const Complex a = to_mp(term.poly[i]);
            for (std::size_t k = i; k < n; ++k) mp::add_product(c[k], a, e[k - i], t1, t2);
        }
    }
    const bool exact = all_polynomial && poly_len <= n;
    return TaylorSeries::from_complex(c, bits, exact);
}

}  // namespace

TaylorSeries build_fh_coefficients(const HSpec& h, int J, int precision_bits) {
    require(J >= 0, "J must be nonnegative");
    BitsScope scope(precision_bits);
    TaylorSeries s;
    s.precision_bits = precision_bits;
    s.coeffs.reserve(static_cast<std::size_t>(J) + 1);
    s.coeffs.push_back(LogComplex::one(precision_bits));
    if (h.kind() == HSpec::Kind::Tabulated) {
        // Cumulative integration keeps the cost linear in J.
        const HSpec& hh = h;
        Real acc = Real::with_bits(precision_bits);
        for (int j = 1; j <= J; ++j) {
            acc += hh.integral_h_inv(Real(static_cast<double>(j))) - hh.integral_h_inv(Real(static_cast<double>(j - 1)));
            s.coeffs.emplace_back(-acc, Real::with_bits(precision_bits));
        }
        return s;
    }
    for (int j = 1; j <= J; ++j)
        s.coeffs.emplace_back(-h.integral_h_inv(Real(static_cast<double>(j))), Real::with_bits(precision_bits));
    return s;
}

TaylorSeries coefficients_of(const EntireFunctionSpec& spec, int J, int precision_bits) {
    require(J >= 0, "J must be nonnegative");
    require(precision_bits >= 64 && precision_bits <= mp::kMaxBits, "precision out of range");
    BitsScope scope(precision_bits);
    const std::size_t n = static_cast<std::size_t>(J) + 1;
    switch (spec.kind) {
        case FunctionKind::Polynomial: {
            std::vector<Complex> c(n, Complex(Real::with_bits(precision_bits), Real::with_bits(precision_bits)));
            for (std::size_t i = 0; i < std::min(n, spec.poly.size()); ++i) c[i] = to_mp(spec.poly[i]);
            bool exact = true;
            for (std::size_t i = n; i < spec.poly.size(); ++i) exact &= spec.poly[i] == cdouble(0.0);
            return TaylorSeries::from_complex(c, precision_bits, exact);
        }
        case FunctionKind::ExpPolynomial: return exp_polynomial_coefficients(spec.terms, J, precision_bits);
        case FunctionKind::TaylorRule: {
            TaylorSeries s;
            s.precision_bits = precision_bits;
            s.coeffs.reserve(n);
            Real log_fact = Real::with_bits(precision_bits);
            for (std::size_t j = 0; j < n; ++j) {
                const Real jj(static_cast<double>(j));
                Real lm;
                switch (spec.rule) {
                    case TaylorRule::InvFactorial:
                        if (j > 0) log_fact += mp::log(jj);
                        lm = -log_fact;
                        break;
                    case TaylorRule::NegPower: lm = -mp::pow(jj, spec.rule_param); break;
                    case TaylorRule::InvGamma: lm = -mp::lgamma(jj / spec.rule_param + 1.0); break;
                }
                s.coeffs.emplace_back(lm, phase_of(spec.phase_rule, spec.phase_param, j));
            }
            return s;
        }
        case FunctionKind::Theorem111: {
            TaylorSeries s = build_fh_coefficients(*spec.h, J, precision_bits);
            if (spec.phase_rule != PhaseRule::Zero)
                for (std::size_t j = 0; j < n; ++j)
                    s.coeffs[j] = LogComplex(s.coeffs[j].log_mag(), phase_of(spec.phase_rule, spec.phase_param, j));
            return s;
        }
        case FunctionKind::IteratedExp: {
            if (spec.depth > kMaxIteratedDepth)
                fail(ErrorCode::UnsupportedDepth, "iterated exponential depth " + std::to_string(spec.depth) +
                                                      " exceeds " + std::to_string(kMaxIteratedDepth));
            std::vector<Complex> lin{Complex(0.0, 0.0), Complex(spec.scale, 0.0)};
            TaylorSeries a = polynomial_series(lin, precision_bits);
            for (int d = 0; d < spec.depth; ++d) a = series_exp(a, J);
            return a;
        }
        case FunctionKind::ExpOf: {
            TaylorSeries a = coefficients_of(*spec.inner, J, precision_bits);
            return series_exp(a, J);
        }
    }
    return {};
}

// ------------------------------------------------------- FunctionEvaluator

FunctionEvaluator::FunctionEvaluator(EntireFunctionSpec spec, int precision_bits)
    : spec_(std::move(spec)), bits_(precision_bits) {
    require(precision_bits >= 64 && precision_bits <= mp::kMaxBits, "precision out of range");
    if (spec_.kind == FunctionKind::IteratedExp && spec_.depth > kMaxIteratedDepth)
        fail(ErrorCode::UnsupportedDepth, "iterated exponential depth " + std::to_string(spec_.depth) +
                                              " exceeds " + std::to_string(kMaxIteratedDepth));
    if (spec_.kind == FunctionKind::ExpPolynomial) check_distinct_frequencies(spec_.terms);
    if (spec_.kind == FunctionKind::ExpOf) inner_ = std::make_unique<FunctionEvaluator>(*spec_.inner, bits_);
}

const TaylorSeries& FunctionEvaluator::series_with_terms(int J) {
    if (!series_ || series_->degree_bound() < J) series_ = coefficients_of(spec_, J, bits_);
    return *series_;
}

const TaylorSeries& FunctionEvaluator::series_for_radius(const Real& radius) {
    BitsScope scope(bits_);
    const Real log_r = mp::log(radius);
    auto fits = [&](const TaylorSeries& s) {
        try {
            require_tail_converged(s, log_r, 64);
            return true;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::TailNotConverged) throw;
            return false;
        }
    };
    if (series_ && fits(*series_)) return *series_;
    int J = series_ ? std::max(kFirstSeriesTerms, 2 * series_->degree_bound()) : kFirstSeriesTerms;
    if (spec_.kind == FunctionKind::Polynomial) J = std::max<int>(J, static_cast<int>(spec_.poly.size()));
    for (;;) {
        series_ = coefficients_of(spec_, J, bits_);
        if (fits(*series_)) return *series_;
        if (J >= kMaxSeriesTerms)
            fail(ErrorCode::TailNotConverged, "no series of at most " + std::to_string(kMaxSeriesTerms) +
                                                  " terms converges on |z| = " + radius.to_string(8));
        J = std::min(2 * J, kMaxSeriesTerms);
    }
}

namespace {

std::vector<Complex> circle_points(const Real& radius, std::size_t n, double offset) {
    std::vector<Complex> z;
    z.reserve(n);
    const Real two_pi = mp::pi() * 2.0;
    for (std::size_t k = 0; k < n; ++k)
        z.push_back(mp::polar(radius, two_pi * ((static_cast<double>(k) + offset) / static_cast<double>(n))));
    return z;
}

void require_finite(const Complex& v) {
    if (!v.re.is_finite() || !v.im.is_finite())
        fail(ErrorCode::GrowthOverflow, "value exceeds the extended exponent range");
}

Complex exp_checked(const Complex& v) {
    require_finite(v);
    Complex e = mp::exp(v);
    require_finite(e);
    return e;
}

}  // namespace

std::vector<Complex> FunctionEvaluator::values_on_circle(const Real& radius, std::size_t n, double offset) {
    BitsScope scope(bits_);
    switch (spec_.kind) {
        case FunctionKind::ExpPolynomial: {
            auto z = circle_points(radius, n, offset);
            std::vector<Complex> out(n, Complex(Real::with_bits(bits_), Real::with_bits(bits_)));
            for (const auto& term : spec_.terms) {
                const Complex q = to_mp(term.freq);
                for (std::size_t k = 0; k < n; ++k) {
                    Complex p(Real::with_bits(bits_), Real::with_bits(bits_));
                    for (std::size_t i = term.poly.size(); i-- > 0;) p = p * z[k] + to_mp(term.poly[i]);
                    out[k] += p * exp_checked(q * z[k]);
                }
            }
            return out;
        }
        case FunctionKind::IteratedExp: {
            auto v = circle_points(radius, n, offset);
            for (auto& x : v) {
                x *= Real(spec_.scale);
                for (int d = 0; d < spec_.depth; ++d) x = exp_checked(x);
            }
            return v;
        }
        case FunctionKind::ExpOf: {
            auto v = inner_->values_on_circle(radius, n, offset);
            for (auto& x : v) x = exp_checked(x);
            return v;
        }
        default: {
            CircleEvaluator ev(series_for_radius(radius), radius);
            return ev.values_on_grid(n, offset);
        }
    }
}

std::vector<Real> FunctionEvaluator::log_abs_on_circle(const Real& radius, std::size_t n) {
    BitsScope scope(bits_);
    auto log_abs = [&](const Complex& v) { return v.is_zero() ? Real::neg_inf(bits_) : mp::log(mp::abs(v)); };
    std::vector<Real> out;
    out.reserve(n);
    switch (spec_.kind) {
        case FunctionKind::ExpPolynomial: {
            for (const auto& v : values_on_circle(radius, n)) out.push_back(log_abs(v));
            return out;
        }
        case FunctionKind::IteratedExp: {
            // ln|e^{∘p}(nz)| = Re e^{∘(p−1)}(nz)
            auto v = circle_points(radius, n, 0.0);
            for (auto& x : v) {
                x *= Real(spec_.scale);
                for (int d = 0; d + 1 < spec_.depth; ++d) x = exp_checked(x);
                out.push_back(x.re);
            }
            return out;
        }
        case FunctionKind::ExpOf: {
            for (auto& v : inner_->values_on_circle(radius, n)) out.push_back(std::move(v.re));
            return out;
        }
        default: {
            CircleEvaluator ev(series_for_radius(radius), radius);
            return ev.log_abs_on_grid(n);
        }
    }
}

Real FunctionEvaluator::growth(const Real& radius, std::size_t samples) {
    require(samples >= 1, "need at least one sample");
    require(radius > 0.0, "radius must be positive");
    Real best = Real::neg_inf(bits_);
    for (auto& v : log_abs_on_circle(radius, samples))
        if (v > best) best = std::move(v);
    return best;
}

Real growth_m(const EntireFunctionSpec& f, double r, std::size_t samples, int precision_bits) {
    require(samples >= 64, "growth_m needs at least 64 samples");
    require(r > 0.0, "growth_m needs r > 0");
    FunctionEvaluator ev(f, precision_bits);
    BitsScope scope(precision_bits);
    return ev.growth(Real(r), samples);
}

Real growth_phi(const EntireFunctionSpec& f, double t, int precision_bits) {
    FunctionEvaluator ev(f, precision_bits);
    BitsScope scope(precision_bits);
    return ev.growth(mp::exp(Real(t)), kDefaultGrowthSamples);
}

NuValue nu_transform(const TaylorSeries& coeffs, double t) {
    NuValue best{-kInf, 0};
    for (std::size_t j = 1; j < coeffs.size(); ++j) {
        const auto& c = coeffs.coeffs[j];
        if (c.is_zero()) continue;
        const double v = c.log_mag().to_double() + static_cast<double>(j) * t;
        if (v > best.value) best = {v, j};
    }
    if (best.argmax == 0) fail(ErrorCode::AllCoefficientsZero, "no nonzero coefficient beyond the constant term");
    const std::size_t J = coeffs.size() - 1;
    if (best.argmax + 5 >= J)
        fail(ErrorCode::MaximizerAtBoundary, "maximizer " + std::to_string(best.argmax) + " is within 5 of J = " +
                                                 std::to_string(J));
    return best;
}

namespace {

// Least squares by Householder QR on a tall matrix stored by columns.
std::vector<long double> least_squares(std::vector<std::vector<long double>> cols, std::vector<long double> y) {
    const std::size_t m = y.size(), n = cols.size();
    for (std::size_t k = 0; k < n; ++k) {
        long double norm = 0;
        for (std::size_t i = k; i < m; ++i) norm += cols[k][i] * cols[k][i];
        norm = std::sqrt(norm);
        if (norm == 0) continue;
        const long double alpha = cols[k][k] > 0 ? -norm : norm;
        std::vector<long double> v(m, 0);
        for (std::size_t i = k; i < m; ++i) v[i] = cols[k][i];
        v[k] -= alpha;
        long double vv = 0;
        for (std::size_t i = k; i < m; ++i) vv += v[i] * v[i];
        if (vv == 0) continue;
        auto reflect = [&](std::vector<long double>& x) {
            long double d = 0;
            for (std::size_t i = k; i < m; ++i) d += v[i] * x[i];
            d = 2 * d / vv;
            for (std::size_t i = k; i < m; ++i) x[i] -= d * v[i];
        };
        for (std::size_t c = k; c < n; ++c) reflect(cols[c]);
        reflect(y);
    }
    std::vector<long double> beta(n, 0);
    for (std::size_t k = n; k-- > 0;) {
        long double s = y[k];
        for (std::size_t c = k + 1; c < n; ++c) s -= cols[c][k] * beta[c];
        beta[k] = cols[k][k] == 0 ? 0 : s / cols[k][k];
    }
    return beta;
}

}  // namespace

double estimate_order(const TaylorSeries& coeffs) {
    std::vector<std::size_t> nonzero;
    for (std::size_t j = 1; j < coeffs.size(); ++j)
        if (!coeffs.coeffs[j].is_zero()) nonzero.push_back(j);
    if (nonzero.empty()) fail(ErrorCode::AllCoefficientsZero, "no nonzero coefficient beyond the constant term");
    if (nonzero.size() < 32) fail(ErrorCode::InsufficientPoints, "order estimation needs 32 nonzero coefficients");

    // Fit −ln|c_j| ≈ a·j ln j + b·j + c·ln j + d over the last half of the
    // stored indices; the order is 1/a. Written in x = j/J the basis is
    // {J·x ln x, J·x, ln x, 1} with the same leading coefficient a.
    const double J = static_cast<double>(coeffs.size() - 1);
    std::vector<std::vector<long double>> cols(4);
    std::vector<long double> y;
    for (std::size_t j : nonzero) {
        if (static_cast<double>(j) < J / 2 || j < 2) continue;
        const long double x = static_cast<long double>(j) / J;
        const long double lx = std::log(x);
        cols[0].push_back(x * lx);
        cols[1].push_back(x);
        cols[2].push_back(lx);
        cols[3].push_back(1.0L);
        y.push_back(-static_cast<long double>(coeffs.coeffs[j].log_mag().to_long_double()) / J);
    }
    if (y.size() < 8) fail(ErrorCode::InsufficientPoints, "too few nonzero coefficients in the last half");
    // Rescale columns for conditioning.
    std::vector<long double> scale(4);
    for (std::size_t c = 0; c < 4; ++c) {
        long double s = 0;
        for (auto v : cols[c]) s += v * v;
        scale[c] = s > 0 ? std::sqrt(s) : 1;
        for (auto& v : cols[c]) v /= scale[c];
    }
    const auto beta = least_squares(cols, y);
    const long double a = beta[0] / scale[0];
    if (!(a > 0)) return kInf;
    return static_cast<double>(1.0L / a);
}

DegreeType exp_poly_degree_type(const EntireFunctionSpec& g) {
    std::vector<ExpTerm> terms;
    if (g.kind == FunctionKind::ExpPolynomial) terms = g.terms;
    else if (g.kind == FunctionKind::Polynomial) terms = {ExpTerm{g.poly, 0.0}};
    else require(false, "degree and type are defined for exponential polynomials only");
    check_distinct_frequencies(terms);
    DegreeType out{0, 0.0};
    for (const auto& t : terms) {
        int deg = -1;
        for (std::size_t i = 0; i < t.poly.size(); ++i)
            if (t.poly[i] != cdouble(0.0)) deg = static_cast<int>(i);
        if (deg < 0) continue;
        out.degree += 1 + deg;
        out.type = std::max(out.type, std::abs(t.freq));
    }
    return out;
}

std::optional<double> structural_order(const EntireFunctionSpec& f) {
    switch (f.kind) {
        case FunctionKind::Polynomial: return 0.0;
        case FunctionKind::ExpPolynomial: {
            for (const auto& t : f.terms)
                if (t.freq != cdouble(0.0)) return 1.0;
            return 0.0;
        }
        case FunctionKind::TaylorRule:
            switch (f.rule) {
                case TaylorRule::InvFactorial: return 1.0;
                case TaylorRule::NegPower: return 0.0;
                case TaylorRule::InvGamma: return f.rule_param;
            }
            return std::nullopt;
        case FunctionKind::Theorem111: return f.h->known_order();
        case FunctionKind::IteratedExp: return f.depth == 1 ? 1.0 : kInf;
        case FunctionKind::ExpOf: {
            const auto& in = *f.inner;
            bool poly = in.kind == FunctionKind::Polynomial;
            if (in.kind == FunctionKind::ExpPolynomial) {
                poly = true;
                for (const auto& t : in.terms) poly &= t.freq == cdouble(0.0);
            }
            if (!poly) return kInf;
            int deg = 0;
            if (in.kind == FunctionKind::Polynomial) {
                for (std::size_t i = 0; i < in.poly.size(); ++i)
                    if (in.poly[i] != cdouble(0.0)) deg = static_cast<int>(i);
            } else {
                deg = std::max(0, exp_poly_degree_type(in).degree - 1);
            }
            return static_cast<double>(deg);
        }
    }
    return std::nullopt;
}

double order_of(const EntireFunctionSpec& f, int precision_bits) {
    if (auto o = structural_order(f)) return *o;
    const double rho = estimate_order(coefficients_of(f, 4096, precision_bits));
    return rho > 50.0 ? kInf : rho;
}

// ---------------------------------------------------------------- profiles

namespace {

json double_or_string(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double double_from(const json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    return std::numeric_limits<double>::quiet_NaN();
}

json doubles_to_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(double_or_string(x));
    return a;
}

std::vector<double> doubles_from_json(const json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(double_from(x));
    return v;
}

}  // namespace

json GrowthProfile::to_json() const {
    return {{"t_samples", doubles_to_json(t_samples)},
            {"phi_values", doubles_to_json(phi_values)},
            {"nu_values", doubles_to_json(nu_values)},
            {"rho_hat", double_or_string(rho_hat)},
            {"source_spec_hash", source_spec_hash},
            {"precision_bits", precision_bits},
            {"samples", samples}};
}

GrowthProfile GrowthProfile::from_json(const json& j) {
    GrowthProfile p;
    p.t_samples = doubles_from_json(j.at("t_samples"));
    p.phi_values = doubles_from_json(j.at("phi_values"));
    p.nu_values = doubles_from_json(j.at("nu_values"));
    p.rho_hat = double_from(j.at("rho_hat"));
    p.source_spec_hash = j.at("source_spec_hash").get<std::string>();
    p.precision_bits = j.at("precision_bits").get<int>();
    p.samples = j.at("samples").get<std::size_t>();
    return p;
}

GrowthProfile compute_profile(const EntireFunctionSpec& f, const std::vector<double>& t_grid, int precision_bits,
                              std::size_t samples) {
    require(!t_grid.empty(), "profile grid is empty");
    require(std::is_sorted(t_grid.begin(), t_grid.end()), "profile grid must be increasing");
    GrowthProfile p;
    p.t_samples = t_grid;
    p.precision_bits = precision_bits;
    p.samples = samples;
    p.source_spec_hash = f.digest();
    FunctionEvaluator ev(f, precision_bits);
    BitsScope scope(precision_bits);
    const bool track_nu = f.kind == FunctionKind::TaylorRule || f.kind == FunctionKind::Theorem111;
    if (track_nu) ev.series_for_radius(mp::exp(Real(t_grid.back())));
    for (double t : t_grid) {
        p.phi_values.push_back(ev.growth(mp::exp(Real(t)), samples).to_double());
        if (track_nu) {
            const auto& s = ev.series_for_radius(mp::exp(Real(t)));
            p.nu_values.push_back(nu_transform(s, t).value);
        }
    }
    p.rho_hat = order_of(f, precision_bits);
    return p;
}

std::string profile_key(const EntireFunctionSpec& f, const std::vector<double>& t_grid, int precision_bits,
                        std::size_t samples) {
    std::ostringstream os;
    os << f.to_json().dump() << "|bits=" << precision_bits << "|samples=" << samples << "|grid=";
    char buf[40];
    for (double t : t_grid) {
        std::snprintf(buf, sizeof buf, "%.17g,", t);
        os << buf;
    }
    return sha256_hex(os.str());
}

std::map<std::string, EntireFunctionSpec> zoo() {
    using S = EntireFunctionSpec;
    std::map<std::string, S> z;
    z.emplace("exp", S::exp_linear(1.0));
    z.emplace("exp_2z", S::exp_linear(2.0));
    z.emplace("exp_z2", S::exp_of(S::polynomial({0.0, 0.0, 1.0})));
    z.emplace("cubic", S::polynomial({0.0, 0.0, 0.0, 1.0}));
    z.emplace("exp_poly_mixed", S::exp_polynomial({ExpTerm{{1.0, 1.0}, 2.0}, ExpTerm{{0.0, 0.0, 1.0}, -1.0}}));
    z.emplace("inv_factorial", S::taylor(TaylorRule::InvFactorial));
    z.emplace("inv_gamma_half", S::taylor(TaylorRule::InvGamma, 0.5));
    z.emplace("fh_power_1.5", S::theorem_1_11(HSpec::power(1.5)));
    z.emplace("fh_power_1.25", S::theorem_1_11(HSpec::power(1.25)));
    z.emplace("fh_exponential_1", S::theorem_1_11(HSpec::exponential(1.0)));
    z.emplace("fh_exponential_2", S::theorem_1_11(HSpec::exponential(2.0)));
    z.emplace("exp_exp", S::iterated_exp(2, 1.0));
    z.emplace("exp_exp_3z", S::iterated_exp(2, 3.0));
    z.emplace("exp_exp_6z", S::iterated_exp(2, 6.0));
    z.emplace("exp_exp_exp", S::iterated_exp(3, 1.0));
    z.emplace("exp_of_exp", S::exp_of(S::exp_linear(1.0)));
    return z;
}

}  // namespace bernstein
