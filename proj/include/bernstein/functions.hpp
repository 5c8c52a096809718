#pragma once

// The zoo of entire functions: declarative specs, Taylor coefficients,
// circle growth m_f(r), φ_f(t) = m_f(e^t), the coefficient transform ν_f and
// the order estimate.

#include "bernstein/numerics.hpp"

#include <json.hpp>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace bernstein {

using cdouble = std::complex<double>;

/// The increasing function h that generates f_h via ln|c_j| = −∫₀^j h⁻¹(s) ds.
class HSpec {
public:
    enum class Kind { Power, Exponential, Shifted, Tabulated };

    /// h(t) = (t/α)^{1/(α−1)}, α ∈ (1, 2).
    static HSpec power(double alpha);
    /// h(t) = e^{αt−1} − 1, α > 0.
    static HSpec exponential(double alpha);
    /// h(t) = base(t) − c.
    static HSpec shifted(const HSpec& base, double c);
    /// Piecewise-linear h through strictly increasing (t, h) samples.
    static HSpec tabulated(std::vector<std::pair<double, double>> table);

    Kind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double shift() const { return shift_; }
    const HSpec& base() const { return *base_; }
    const std::vector<std::pair<double, double>>& table() const { return table_; }

    Real h(const Real& t) const;
    Real h_inv(const Real& s) const;
    double h(double t) const;
    double h_inv(double s) const;
    /// ∫₀^upper h⁻¹(s) ds (closed form where available, adaptive Simpson otherwise).
    Real integral_h_inv(const Real& upper) const;
    /// ∫_a^b h(s) ds.
    double integral_h(double a, double b) const;
    /// h⁻¹(0), the start of the envelope integrals.
    double h_inv_zero() const { return h_inv(0.0); }
    /// True when h⁻¹(0) lies below the tabulated range and was extrapolated.
    bool zero_extrapolated() const;
    /// limsup ln h(t)/t when it is known in closed form.
    std::optional<double> known_order() const;

    nlohmann::json to_json() const;
    static HSpec from_json(const nlohmann::json& j);

private:
    Kind kind_ = Kind::Power;
    double alpha_ = 1.5;
    double shift_ = 0.0;
    std::shared_ptr<const HSpec> base_;
    std::vector<std::pair<double, double>> table_;
};

enum class FunctionKind { ExpPolynomial, TaylorRule, Theorem111, IteratedExp, ExpOf, Polynomial };

/// Closed-form rules for ln|c_j| of the taylor_rule kind.
enum class TaylorRule {
    InvFactorial,  // −ln j!
    NegPower,      // −j^α
    InvGamma,      // −ln Γ(j/ρ + 1), order ρ
};

enum class PhaseRule { Zero, Alternating, Linear };

struct ExpTerm {
    std::vector<cdouble> poly;  // p_j coefficients, ascending powers
    cdouble freq;               // q_j
};

struct EntireFunctionSpec {
    FunctionKind kind = FunctionKind::Polynomial;
    std::vector<ExpTerm> terms;           // exp_polynomial
    TaylorRule rule = TaylorRule::InvFactorial;
    double rule_param = 1.0;              // α for neg_power, ρ for inv_gamma
    PhaseRule phase_rule = PhaseRule::Zero;
    double phase_param = 0.0;             // θ for the linear rule
    std::optional<HSpec> h;               // theorem_1_11
    int depth = 1;                        // iterated_exp
    double scale = 1.0;                   // iterated_exp
    std::shared_ptr<const EntireFunctionSpec> inner;  // exp_of
    std::vector<cdouble> poly;            // polynomial

    static EntireFunctionSpec polynomial(std::vector<cdouble> coeffs);
    static EntireFunctionSpec exp_polynomial(std::vector<ExpTerm> terms);
    static EntireFunctionSpec exp_linear(cdouble q);  // e^{qz}
    static EntireFunctionSpec taylor(TaylorRule rule, double param = 1.0, PhaseRule phase = PhaseRule::Zero,
                                     double phase_param = 0.0);
    static EntireFunctionSpec theorem_1_11(const HSpec& h);
    static EntireFunctionSpec iterated_exp(int depth, double scale);
    static EntireFunctionSpec exp_of(const EntireFunctionSpec& inner);

    nlohmann::json to_json() const;
    static EntireFunctionSpec from_json(const nlohmann::json& j);
    /// SHA-256 (hex) of the canonical sorted-key serialization.
    std::string digest() const;
};

struct CurveSpec {
    std::vector<EntireFunctionSpec> coords;
    std::string label;

    std::size_t m() const { return coords.size(); }
    nlohmann::json to_json() const;
    static CurveSpec from_json(const nlohmann::json& j);
    std::string digest() const;
};

constexpr int kMaxIteratedDepth = 4;
constexpr std::size_t kDefaultGrowthSamples = 256;

TaylorSeries coefficients_of(const EntireFunctionSpec& spec, int J, int precision_bits);
TaylorSeries build_fh_coefficients(const HSpec& h, int J, int precision_bits = mp::kDefaultBits);

/// Caches one function's coefficient series and evaluates it on circles,
/// using closed forms for exponential kinds.
class FunctionEvaluator {
public:
    FunctionEvaluator(EntireFunctionSpec spec, int precision_bits);

    const EntireFunctionSpec& spec() const { return spec_; }
    int bits() const { return bits_; }

    /// A stored series long enough for evaluation on |z| = radius.
    const TaylorSeries& series_for_radius(const Real& radius);
    /// A stored series with at least J+1 coefficients.
    const TaylorSeries& series_with_terms(int J);
    /// max over `samples` equispaced points of ln|f| on |z| = radius.
    Real growth(const Real& radius, std::size_t samples);
    /// f at the N points radius·e^{2πi(n+offset)/N}.
    std::vector<Complex> values_on_circle(const Real& radius, std::size_t n, double offset = 0.0);
    /// ln|f| at the N equispaced points of |z| = radius.
    std::vector<Real> log_abs_on_circle(const Real& radius, std::size_t n);

private:
    EntireFunctionSpec spec_;
    int bits_;
    std::optional<TaylorSeries> series_;
    std::unique_ptr<FunctionEvaluator> inner_;
};

Real growth_m(const EntireFunctionSpec& f, double r, std::size_t samples = kDefaultGrowthSamples,
              int precision_bits = mp::kDefaultBits);
Real growth_phi(const EntireFunctionSpec& f, double t, int precision_bits = mp::kDefaultBits);

struct NuValue {
    double value;
    std::size_t argmax;
};
NuValue nu_transform(const TaylorSeries& coeffs, double t);

double estimate_order(const TaylorSeries& coeffs);

struct DegreeType {
    int degree;      // m(g) = Σ(1 + deg p_j)
    double type;     // ε(g) = max |q_j|
};
DegreeType exp_poly_degree_type(const EntireFunctionSpec& g);

/// Order known from the structure of the function description; +∞ for infinite order.
std::optional<double> structural_order(const EntireFunctionSpec& f);
/// Structural order when known, otherwise estimated from coefficients.
double order_of(const EntireFunctionSpec& f, int precision_bits = mp::kDefaultBits);

struct GrowthProfile {
    std::vector<double> t_samples;
    std::vector<double> phi_values;
    std::vector<double> nu_values;  // empty when coefficients are not tracked
    double rho_hat = 0.0;
    std::string source_spec_hash;
    int precision_bits = mp::kDefaultBits;
    std::size_t samples = kDefaultGrowthSamples;

    nlohmann::json to_json() const;
    static GrowthProfile from_json(const nlohmann::json& j);
};

GrowthProfile compute_profile(const EntireFunctionSpec& f, const std::vector<double>& t_grid,
                              int precision_bits = mp::kDefaultBits,
                              std::size_t samples = kDefaultGrowthSamples);
/// Digest identifying a profile request: spec + precision + grid + samples.
std::string profile_key(const EntireFunctionSpec& f, const std::vector<double>& t_grid, int precision_bits,
                        std::size_t samples);

/// Named built-in functions (exponential polynomials, f_h examples, iterated
/// exponentials) used by the tests and the CLI.
std::map<std::string, EntireFunctionSpec> zoo();

std::string sha256_hex(const std::string& data);

}  // namespace bernstein
