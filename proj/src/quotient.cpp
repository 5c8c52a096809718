#include "bernstein/quotient.hpp"

#include <algorithm>
#include <atomic>
#include <climits>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

namespace bernstein {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr int kMaxQuadDoublings = 6;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Real pow2(int e, int bits) {
    Real x(1.0, bits);
    mpfr_mul_2si(x.get(), x.get(), e, MPFR_RNDN);
    return x;
}

void parallel_for(std::size_t n, int jobs, const auto& body) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

// ln|c| + j ln ρ to within one bit, from the binary exponents; −∞ for zeros.
double term_log(const Complex& c, std::size_t j, double log_rho) {
    if (c.is_zero()) return -INFINITY;
    long e = LONG_MIN;
    if (!c.re.is_zero()) e = mpfr_get_exp(c.re.get());
    if (!c.im.is_zero()) e = std::max(e, static_cast<long>(mpfr_get_exp(c.im.get())));
    return static_cast<double>(e) * kLn2 + static_cast<double>(j) * log_rho;
}

// Every column's last quarter sits below 2^{-(bits+16)} of its peak on |z| = ρ.
bool tails_negligible(MonomialSeries& ms, const std::vector<MultiIndex>& basis, double rho) {
    const double log_rho = std::log(rho);
    const std::size_t J = static_cast<std::size_t>(ms.J());
    const double drop = (ms.bits() + 16) * kLn2;
    for (const auto& g : basis) {
        const auto& col = ms.monomial(g);
        double top = -INFINITY;
        for (std::size_t j = 0; j <= J; ++j) top = std::max(top, term_log(col[j], j, log_rho));
        if (!std::isfinite(top)) continue;
        for (std::size_t j = (3 * J) / 4; j <= J; ++j) {
            if (term_log(col[j], j, log_rho) > top - drop) return false;
        }
    }
    return true;
}

std::size_t significant_rows(MonomialSeries& ms, const std::vector<MultiIndex>& basis, double rho) {
    const double log_rho = std::log(rho);
    const std::size_t J = static_cast<std::size_t>(ms.J());
    const double drop = (ms.bits() + 16) * kLn2;
    std::size_t last = 0;
    for (const auto& g : basis) {
        const auto& col = ms.monomial(g);
        std::vector<double> logs(J + 1);
        double top = -INFINITY;
        for (std::size_t j = 0; j <= J; ++j) top = std::max(top, logs[j] = term_log(col[j], j, log_rho));
        for (std::size_t j = J + 1; j-- > last;) {
            if (logs[j] > top - drop) {
                last = j;
                break;
            }
        }
    }
    return last + 1;
}

bool curve_is_polynomial(const CurveSpec& curve, std::size_t& degree) {
    degree = 1;
    for (const auto& f : curve.coords) {
        if (f.kind != FunctionKind::Polynomial) return false;
        degree = std::max(degree, f.poly.empty() ? std::size_t{1} : f.poly.size() - 1);
    }
    return true;
}

using Mat = std::vector<std::vector<Complex>>;

}  // namespace

std::string_view method_name(QuotientMethod m) {
    switch (m) {
        case QuotientMethod::GramL2: return "gram_l2";
        case QuotientMethod::KernelWitness: return "kernel_witness";
        case QuotientMethod::RandomSearch: return "random_search";
    }
    return "gram_l2";
}

QuotientMethod method_from_name(std::string_view name) {
    if (name == "gram_l2") return QuotientMethod::GramL2;
    if (name == "kernel_witness") return QuotientMethod::KernelWitness;
    if (name == "random_search") return QuotientMethod::RandomSearch;
    fail(ErrorCode::ConfigInvalid, "unknown quotient method '" + std::string(name) + "'");
}

std::string QuotientEstimate::csv_header() { return "curve_label,k,r,log_quotient,method,precision_bits,samples"; }

std::string QuotientEstimate::csv_row() const {
    return curve_label + "," + std::to_string(k) + "," + fmt17(r) + "," + fmt17(log_quotient) + "," +
           std::string(method_name(method)) + "," + std::to_string(precision_bits) + "," + std::to_string(samples);
}

nlohmann::json QuotientEstimate::to_json() const {
    return {{"curve_label", curve_label}, {"k", k},
            {"r", r},                     {"log_quotient", log_quotient},
            {"method", method_name(method)}, {"precision_bits", precision_bits},
            {"samples", samples},         {"l2_sup_gap", l2_sup_gap},
            {"deflated", deflated}};
}

Real sup_norm_on_circle(const TaylorSeries& s, const Real& r, std::size_t samples) {
    require(samples >= 64, "sup_norm_on_circle needs at least 64 samples");
    require(r > 0.0, "sup_norm_on_circle needs a positive radius");
    std::size_t n = 64;
    while (n < samples) n *= 2;
    return max_log_abs_on_circle(s, r, n);
}

double bernstein_index(const TaylorSeries& s, double r, int grid, std::size_t samples) {
    require(grid >= 8, "bernstein_index needs grid >= 8");
    require(r > 0.0, "bernstein_index needs a positive radius");
    mp::BitsScope scope(s.precision_bits);
    const double top = r / std::exp(1.0);
    double best = -INFINITY;
    for (int i = 0; i < grid; ++i) {
        const double si = top * std::exp(-3.0 * i / (grid - 1));
        const Real inner = sup_norm_on_circle(s, Real(si), samples);
        const Real outer = sup_norm_on_circle(s, Real(si * std::exp(1.0)), samples);
        if (inner.is_neg_inf()) continue;  // identically zero series
        best = std::max(best, (outer - inner).to_double());
    }
    return std::isfinite(best) ? best : 0.0;
}

GramPair gram_matrices(int k, const CurveSpec& curve, double r, int precision_bits, int jobs) {
    require(k >= 0, "gram_matrices: k must be nonnegative");
    require(r > 0.0 && std::isfinite(r), "gram_matrices: radius must be positive");
    mp::BitsScope scope(precision_bits);
    const int m = static_cast<int>(curve.m());
    const auto basis = monomial_basis(m + 1, k);
    const double outer_r = std::exp(1.0) * r;

    std::size_t poly_degree = 1;
    const bool polynomial = curve_is_polynomial(curve, poly_degree);
    int J = polynomial ? static_cast<int>(static_cast<std::size_t>(k) * poly_degree)
                       : std::max(64, 4 * std::max(k, 1) * std::max(8, static_cast<int>(std::ceil(outer_r))));
    std::optional<MonomialSeries> ms;
    ms.emplace(curve, J, precision_bits);
    const int J_cap = J << kMaxQuadDoublings;
    while (!polynomial && !tails_negligible(*ms, basis, outer_r)) {
        if (J >= J_cap) {
            fail(ErrorCode::QuadratureNotStabilized,
                 "gram_matrices: Taylor tail on |z| = " + fmt17(outer_r) + " still significant at " +
                     std::to_string(J) + " terms");
        }
        J = std::min(J_cap, J + J / 4);
        ms->extend(J);
    }

    const std::size_t d = basis.size();
    // Rows past the last significant term on the outer circle add nothing at
    // this precision; trimming them is the same as using fewer nodes.
    std::size_t rows = polynomial ? static_cast<std::size_t>(J) + 1 : significant_rows(*ms, basis, outer_r);
    // Scaled columns a_γ,j = c_γ,j ρ^j for both radii.
    Mat A(d), B(d);
    {
        Real rr(r, precision_bits), ro = Real(r, precision_bits) * mp::exp(Real(1.0, precision_bits));
        std::vector<Real> pr(rows), po(rows);
        pr[0] = Real(1.0, precision_bits);
        po[0] = Real(1.0, precision_bits);
        for (std::size_t j = 1; j < rows; ++j) {
            pr[j] = pr[j - 1] * rr;
            po[j] = po[j - 1] * ro;
        }
        for (std::size_t c = 0; c < d; ++c) {
            const auto& col = ms->monomial(basis[c]);
            A[c].resize(rows);
            B[c].resize(rows);
            for (std::size_t j = 0; j < rows; ++j) {
                A[c][j] = col[j] * pr[j];
                B[c][j] = col[j] * po[j];
            }
        }
    }

    GramPair g;
    g.k = k;
    g.r = r;
    g.quad_points = static_cast<int>(rows);
    g.precision_bits = precision_bits;
    g.inner_gram.assign(d, std::vector<Complex>(d));
    g.outer_gram.assign(d, std::vector<Complex>(d));
    parallel_for(d, jobs, [&](std::size_t a) {
        mp::BitsScope local(precision_bits);
        Real t1, t2;
        for (std::size_t b = a; b < d; ++b) {
            Complex gi(Real::with_bits(precision_bits), Real::with_bits(precision_bits));
            Complex go = gi;
            for (std::size_t j = 0; j < rows; ++j) {
                if (A[a][j].is_zero() || A[b][j].is_zero()) continue;
                mp::add_conj_product(gi, A[a][j], A[b][j], t1, t2);
                mp::add_conj_product(go, B[a][j], B[b][j], t1, t2);
            }
            g.inner_gram[a][b] = gi;
            g.outer_gram[a][b] = go;
        }
    });
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            g.inner_gram[a][b] = mp::conj(g.inner_gram[b][a]);
            g.outer_gram[a][b] = mp::conj(g.outer_gram[b][a]);
        }
    }
    return g;
}

ExtremalResult extremal_from_grams(const GramPair& g, int m) {
    const int bits = g.precision_bits;
    mp::BitsScope scope(bits);
    const std::size_t n = g.size();
    require(n >= 1, "extremal_quotient: empty Gram pair");

    Mat G = g.inner_gram;
    Mat H = g.outer_gram;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    Real trace = Real::with_bits(bits), trace_h = Real::with_bits(bits);
    for (std::size_t i = 0; i < n; ++i) {
        trace += G[i][i].re;
        trace_h += H[i][i].re;
    }
    const Real deflate_below = pow2(-bits / 2, bits) * trace;

    auto swap_sym = [&](Mat& M, std::size_t a, std::size_t b) {
        std::swap(M[a], M[b]);
        for (auto& row : M) std::swap(row[a], row[b]);
    };

    // Outer-product Cholesky with diagonal pivoting; G's leading K×K block is
    // overwritten by L (lower) and the trailing block holds the Schur complement.
    std::size_t K = 0;
    for (; K < n; ++K) {
        std::size_t p = K;
        for (std::size_t t = K + 1; t < n; ++t)
            if (G[t][t].re > G[p][p].re) p = t;
        if (!(G[p][p].re > deflate_below)) break;
        if (p != K) {
            swap_sym(G, K, p);
            swap_sym(H, K, p);
            std::swap(perm[K], perm[p]);
        }
        const Real piv = mp::sqrt(G[K][K].re);
        const Real inv = Real(1.0, bits) / piv;
        G[K][K] = Complex(piv, Real::with_bits(bits));
        for (std::size_t i = K + 1; i < n; ++i) G[i][K] *= inv;
        Real t1, t2;
        for (std::size_t i = K + 1; i < n; ++i) {
            for (std::size_t j = K + 1; j <= i; ++j) {
                // G_ij −= L_iK conj(L_jK)
                Complex prod = G[i][K] * mp::conj(G[j][K]);
                G[i][j] -= prod;
            }
            G[i][i].im = Real::with_bits(bits);
        }
        for (std::size_t i = K + 1; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) G[i][j] = mp::conj(G[j][i]);
        for (std::size_t j = K + 1; j < n; ++j) G[K][j] = Complex(Real::with_bits(bits), Real::with_bits(bits));
    }

    // Forward substitution L y = b for the K×K factor.
    auto lower_solve = [&](std::vector<Complex> b) {
        for (std::size_t i = 0; i < K; ++i) {
            Complex acc = b[i];
            for (std::size_t j = 0; j < i; ++j) acc -= G[i][j] * b[j];
            b[i] = acc / G[i][i];
        }
        return b;
    };
    // Back substitution L^H x = y.
    auto upper_solve = [&](std::vector<Complex> y) {
        for (std::size_t ii = K; ii-- > 0;) {
            Complex acc = y[ii];
            for (std::size_t j = ii + 1; j < K; ++j) acc -= mp::conj(G[j][ii]) * y[j];
            y[ii] = acc / G[ii][ii];
        }
        return y;
    };

    // Deflated directions must be null for the outer form too.
    if (K < n) {
        const Real tol = pow2(-bits / 4, bits) * trace_h;
        for (std::size_t t = K; t < n; ++t) {
            // x_K = −G_KK^{-1} G_Kt using the original permuted inner Gram.
            std::vector<Complex> rhs(K);
            for (std::size_t i = 0; i < K; ++i) rhs[i] = g.inner_gram[perm[i]][perm[t]];
            auto xk = upper_solve(lower_solve(rhs));
            std::vector<Complex> x(n, Complex(Real::with_bits(bits), Real::with_bits(bits)));
            for (std::size_t i = 0; i < K; ++i) x[i] = -xk[i];
            x[t] = Complex(Real(1.0, bits), Real::with_bits(bits));
            Real xx = Real::with_bits(bits);
            Complex q(Real::with_bits(bits), Real::with_bits(bits));
            Real t1, t2;
            for (std::size_t a = 0; a < n; ++a) {
                if (x[a].is_zero()) continue;
                xx += mp::norm(x[a]);
                Complex hx(Real::with_bits(bits), Real::with_bits(bits));
                for (std::size_t b = 0; b < n; ++b)
                    if (!x[b].is_zero()) mp::add_product(hx, H[a][b], x[b], t1, t2);
                mp::add_conj_product(q, x[a], hx, t1, t2);
            }
            if (q.re > tol * xx) {
                fail(ErrorCode::GramSingular, "extremal_quotient: deflated inner direction carries outer mass " +
                                                  (q.re / (trace_h * xx)).to_string(6) + " relative to the trace");
            }
        }
    }

    // W = L^{-1} H_KK L^{-H}: columns of Y = L^{-1} H, then W = L^{-1} Y^H.
    Mat Y(K);
    for (std::size_t c = 0; c < K; ++c) {
        std::vector<Complex> col(K);
        for (std::size_t i = 0; i < K; ++i) col[i] = H[i][c];
        Y[c] = lower_solve(col);  // Y[c][i] = (L^{-1} H)_{i c}
    }
    Mat W(K);
    for (std::size_t c = 0; c < K; ++c) {
        // column c of Y^H is conj of row c of L^{-1}H, i.e. conj(Y[·][c])
        std::vector<Complex> col(K);
        for (std::size_t i = 0; i < K; ++i) col[i] = mp::conj(Y[i][c]);
        W[c] = lower_solve(col);  // W[c][i] = W_{i c}
    }

    // Power iteration from the all-ones vector.
    std::vector<Complex> x(K, Complex(Real(1.0, bits), Real::with_bits(bits)));
    Real lambda = Real::with_bits(bits), prev = Real::with_bits(bits);
    const Real rel_tol = pow2(-64, bits);
    const std::size_t cap = std::max<std::size_t>(10 * K, 20);
    Real t1, t2;
    for (std::size_t it = 0; it < cap; ++it) {
        std::vector<Complex> y(K, Complex(Real::with_bits(bits), Real::with_bits(bits)));
        for (std::size_t c = 0; c < K; ++c) {
            if (x[c].is_zero()) continue;
            for (std::size_t i = 0; i < K; ++i) mp::add_product(y[i], W[c][i], x[c], t1, t2);
        }
        Real xx = Real::with_bits(bits);
        Complex xy(Real::with_bits(bits), Real::with_bits(bits));
        Real yy = Real::with_bits(bits);
        for (std::size_t i = 0; i < K; ++i) {
            xx += mp::norm(x[i]);
            yy += mp::norm(y[i]);
            mp::add_conj_product(xy, x[i], y[i], t1, t2);
        }
        lambda = xy.re / xx;
        const Real inv = Real(1.0, bits) / mp::sqrt(yy);
        for (auto& v : y) v *= inv;
        x = std::move(y);
        if (it > 0 && mp::abs(lambda - prev) < rel_tol * mp::abs(lambda)) break;
        prev = lambda;
    }
    if (!(lambda > 0.0)) fail(ErrorCode::GramSingular, "extremal_quotient: nonpositive top eigenvalue");

    // Coefficient vector c = P [L^{-H} x; 0], scaled to unit norm.
    auto ck = upper_solve(x);
    const int k = g.k;
    GraphPolynomial p = GraphPolynomial::zero(k, m, bits);
    Real nn = Real::with_bits(bits);
    for (const auto& v : ck) nn += mp::norm(v);
    const Real inv = Real(1.0, bits) / mp::sqrt(nn);
    for (std::size_t i = 0; i < K; ++i) p.coeffs[perm[i]] = ck[i] * inv;

    ExtremalResult out{QuotientEstimate{}, std::move(p)};
    auto& e = out.estimate;
    e.k = k;
    e.r = g.r;
    e.log_quotient = (mp::log(lambda) / 2.0).to_double();
    e.method = QuotientMethod::GramL2;
    e.precision_bits = bits;
    e.samples = g.quad_points;
    e.l2_sup_gap = std::log(static_cast<double>(n));
    e.deflated = static_cast<int>(n - K);
    return out;
}

ExtremalResult extremal_quotient_with_vector(int k, const CurveSpec& curve, double r, int precision_bits, int jobs) {
    auto g = gram_matrices(k, curve, r, precision_bits, jobs);
    auto out = extremal_from_grams(g, static_cast<int>(curve.m()));
    out.estimate.curve_label = curve.label;
    return out;
}

QuotientEstimate extremal_quotient(int k, const CurveSpec& curve, double r, int precision_bits, int jobs) {
    return extremal_quotient_with_vector(k, curve, r, precision_bits, jobs).estimate;
}

TaylorSeries restricted_series_for_radius(const GraphPolynomial& p, const CurveSpec& curve, double radius,
                                          int precision_bits) {
    std::size_t degree = 1;
    if (curve_is_polynomial(curve, degree)) {
        return restrict_to_graph(p, curve, static_cast<int>(static_cast<std::size_t>(std::max(p.k, 1)) * degree),
                                 precision_bits);
    }
    {
        // p may only involve z and polynomial coordinates
        auto s = restrict_to_graph(p, curve, std::max(p.k, 1) * static_cast<int>(degree), precision_bits);
        if (s.exact) return s;
    }
    int J = std::max(64, 4 * (p.k + 1) * std::max(8, static_cast<int>(std::ceil(radius))));
    const Real log_r = mp::log(Real(radius, precision_bits));
    for (int attempt = 0;; ++attempt) {
        auto s = restrict_to_graph(p, curve, J, precision_bits);
        try {
            require_tail_converged(s, log_r, 64);
            return s;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::TailNotConverged || attempt == 8) throw;
        }
        J *= 2;
    }
}

double quotient_of_polynomial(const GraphPolynomial& p, const CurveSpec& curve, double r, int precision_bits,
                              std::size_t samples) {
    require(r > 0.0, "quotient_of_polynomial needs a positive radius");
    mp::BitsScope scope(precision_bits);
    const double outer_r = std::exp(1.0) * r;
    const auto s = restricted_series_for_radius(p, curve, outer_r, precision_bits);
    const Real inner = sup_norm_on_circle(s, Real(r), samples);
    if (inner.is_neg_inf()) {
        fail(ErrorCode::RestrictedIdenticallyZero, "quotient_of_polynomial: p vanishes on the graph");
    }
    const Real outer = sup_norm_on_circle(s, Real(outer_r), samples);
    return (outer - inner).to_double();
}

QuotientEstimate kernel_witness_quotient(int k, const CurveSpec& curve, double r, int target_order,
                                         int precision_bits, std::size_t samples) {
    const auto p = kernel_vanishing_poly(k, curve, target_order, precision_bits);
    QuotientEstimate e;
    e.k = k;
    e.r = r;
    e.log_quotient = quotient_of_polynomial(p, curve, r, precision_bits, samples);
    e.method = QuotientMethod::KernelWitness;
    e.precision_bits = precision_bits;
    e.samples = static_cast<int>(samples);
    e.curve_label = curve.label;
    return e;
}

QuotientEstimate random_search_quotient(int k, const CurveSpec& curve, double r, int trials, std::uint64_t seed,
                                        int precision_bits, std::size_t samples) {
    require(trials >= 1, "random_search_quotient needs at least one trial");
    mp::BitsScope scope(precision_bits);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int m = static_cast<int>(curve.m());
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        auto p = GraphPolynomial::zero(k, m, precision_bits);
        for (auto& c : p.coeffs) c = Complex(gauss(rng), gauss(rng));
        try {
            best = std::max(best, quotient_of_polynomial(p, curve, r, precision_bits, samples));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::RestrictedIdenticallyZero) throw;
        }
    }
    QuotientEstimate e;
    e.k = k;
    e.r = r;
    e.log_quotient = best;
    e.method = QuotientMethod::RandomSearch;
    e.precision_bits = precision_bits;
    e.samples = static_cast<int>(samples);
    e.curve_label = curve.label;
    return e;
}

ExpPolyBoundCheck verify_exp_poly_bound(const EntireFunctionSpec& g, double r, std::size_t samples) {
    require(g.kind == FunctionKind::ExpPolynomial || g.kind == FunctionKind::Polynomial,
            "verify_exp_poly_bound needs an exponential polynomial");
    require(r > 0.0, "verify_exp_poly_bound needs a positive radius");
    const auto dt = exp_poly_degree_type(g);
    ExpPolyBoundCheck out;
    out.lhs = (growth_m(g, std::exp(1.0) * r, samples, 128) - growth_m(g, r, samples, 128)).to_double();
    out.rhs = dt.degree + 2.0 * std::exp(1.0) * r * dt.type;
    out.holds = out.lhs <= out.rhs + 1e-9;
    return out;
}

}  // namespace bernstein
