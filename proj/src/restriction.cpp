#include "bernstein/restriction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bernstein {

std::int64_t dim_pk(int N, int k) {
    require(N >= 0 && k >= 0, "dim_pk: N and k must be nonnegative");
    // binomial(N+k, min(N,k)) with exact intermediate division
    const int r = std::min(N, k);
    std::int64_t out = 1;
    for (int i = 1; i <= r; ++i) {
        out = out * (N + k - r + i) / i;
    }
    return out;
}

std::int64_t sk_formula(int n, int k) {
    require(n >= 1 && k >= 0, "sk_formula: need n >= 1 and k >= 0");
    if (k == 0) return 0;
    const long double kk = k;
    const long double v = std::pow(kk, 1.0L + 1.0L / n) / std::pow(static_cast<long double>(n + 2), 1.0L / n);
    // guard against a representable integer landing just below itself
    return static_cast<std::int64_t>(std::floor(v + 1e-12L * v));
}

namespace {

void append_degree(int N, int remaining, MultiIndex& cur, int pos, std::vector<MultiIndex>& out) {
    if (pos == N - 1) {
        cur[pos] = remaining;
        out.push_back(cur);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        cur[pos] = e;
        append_degree(N, remaining - e, cur, pos + 1, out);
    }
}

}  // namespace

std::vector<MultiIndex> monomial_basis(int N, int k) {
    require(N >= 1 && k >= 0, "monomial_basis: need N >= 1 and k >= 0");
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(dim_pk(N, k)));
    MultiIndex cur(N, 0);
    for (int deg = 0; deg <= k; ++deg) append_degree(N, deg, cur, 0, out);
    return out;
}

const std::vector<MultiIndex>& GraphPolynomial::basis() const {
    if (basis_cache_.empty()) basis_cache_ = monomial_basis(m + 1, k);
    return basis_cache_;
}

Real GraphPolynomial::norm() const {
    Real acc = Real::with_bits(coeffs.empty() ? mp::working_bits() : coeffs.front().bits());
    for (const auto& c : coeffs) acc += mp::norm(c);
    return mp::sqrt(acc);
}

bool GraphPolynomial::is_zero() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](const Complex& c) { return c.is_zero(); });
}

Complex GraphPolynomial::coefficient(const MultiIndex& gamma) const {
    const auto& b = basis();
    auto it = std::find(b.begin(), b.end(), gamma);
    if (it == b.end()) return Complex(0.0);
    return coeffs[static_cast<std::size_t>(it - b.begin())];
}

void GraphPolynomial::set(const MultiIndex& gamma, const Complex& c) {
    const auto& b = basis();
    auto it = std::find(b.begin(), b.end(), gamma);
    require(it != b.end(), "GraphPolynomial::set: multi-index outside the degree range");
    coeffs[static_cast<std::size_t>(it - b.begin())] = c;
}

GraphPolynomial GraphPolynomial::zero(int k, int m, int bits) {
    require(k >= 0 && m >= 1, "GraphPolynomial: need k >= 0 and m >= 1");
    mp::BitsScope scope(bits);
    GraphPolynomial p;
    p.k = k;
    p.m = m;
    p.coeffs.assign(static_cast<std::size_t>(dim_pk(m + 1, k)), Complex(0.0));
    return p;
}

nlohmann::json GraphPolynomial::to_json() const {
    nlohmann::json cs = nlohmann::json::array();
    const auto& b = basis();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i].is_zero()) continue;
        const Real mag = mp::abs(coeffs[i]);
        const double log_scale = mp::log(mag).to_double();
        cs.push_back({{"gamma", b[i]},
                      {"re", (coeffs[i].re / mag).to_double()},
                      {"im", (coeffs[i].im / mag).to_double()},
                      {"log_scale", log_scale}});
    }
    return {{"k", k}, {"m", m}, {"coeffs", cs}};
}

GraphPolynomial GraphPolynomial::from_json(const nlohmann::json& j) {
    try {
        auto p = zero(j.at("k").get<int>(), j.at("m").get<int>());
        for (const auto& c : j.at("coeffs")) {
            const Real scale = mp::exp(Real(c.at("log_scale").get<double>()));
            p.set(c.at("gamma").get<MultiIndex>(),
                  Complex(scale * c.at("re").get<double>(), scale * c.at("im").get<double>()));
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ConfigInvalid, std::string("graph polynomial: ") + e.what());
    }
}

MonomialSeries::MonomialSeries(const CurveSpec& curve, int J, int precision_bits)
    : curve_(curve), J_(-1), bits_(precision_bits) {
    require(curve.m() >= 1, "MonomialSeries: curve needs at least one coordinate");
    require(J >= 0, "MonomialSeries: J must be nonnegative");
    extend(J);
}

namespace {

int last_nonzero(const MultiIndex& exps) {
    for (int i = static_cast<int>(exps.size()) - 1; i >= 0; --i)
        if (exps[static_cast<std::size_t>(i)] > 0) return i;
    return -1;
}

}  // namespace

void MonomialSeries::fill_power(const MultiIndex& exps, std::vector<Complex>& out, std::size_t from) {
    const std::size_t n = static_cast<std::size_t>(J_) + 1;
    out.resize(n, Complex(Real::with_bits(bits_), Real::with_bits(bits_)));
    const int last = last_nonzero(exps);
    if (last < 0) {
        if (from == 0) out[0] = Complex(Real(1.0, bits_), Real::with_bits(bits_));
        return;
    }
    MultiIndex smaller = exps;
    --smaller[static_cast<std::size_t>(last)];
    const auto& base = powers_.at(smaller);
    const auto& f = coords_[static_cast<std::size_t>(last)];
    Real t1, t2;
    for (std::size_t a = 0; a < n; ++a) {
        if (base[a].is_zero()) continue;
        for (std::size_t b = (a >= from ? 0 : from - a); a + b < n; ++b) {
            if (f[b].is_zero()) continue;
            mp::add_product(out[a + b], base[a], f[b], t1, t2);
        }
    }
}

void MonomialSeries::extend(int J) {
    if (J <= J_) return;
    mp::BitsScope scope(bits_);
    const std::size_t from = static_cast<std::size_t>(J_ + 1);
    J_ = J;
    coords_.clear();
    for (const auto& f : curve_.coords) {
        auto c = coefficients_of(f, J_, bits_).to_complex();
        c.resize(static_cast<std::size_t>(J_) + 1, Complex(0.0));
        coords_.push_back(std::move(c));
    }
    // map order visits every power after the one it is built from
    for (auto& [exps, out] : powers_) fill_power(exps, out, from);
    monomials_.clear();
}

const std::vector<Complex>& MonomialSeries::power_part(const MultiIndex& exps) {
    if (auto it = powers_.find(exps); it != powers_.end()) return it->second;
    mp::BitsScope scope(bits_);
    if (const int last = last_nonzero(exps); last >= 0) {
        MultiIndex smaller = exps;
        --smaller[static_cast<std::size_t>(last)];
        power_part(smaller);
    }
    std::vector<Complex> out;
    fill_power(exps, out, 0);
    return powers_.emplace(exps, std::move(out)).first->second;
}

const std::vector<Complex>& MonomialSeries::monomial(const MultiIndex& gamma) {
    require(gamma.size() == curve_.m() + 1, "MonomialSeries: multi-index length must be m + 1");
    if (auto it = monomials_.find(gamma); it != monomials_.end()) return it->second;
    mp::BitsScope scope(bits_);
    const MultiIndex exps(gamma.begin() + 1, gamma.end());
    const auto& part = power_part(exps);
    const std::size_t n = static_cast<std::size_t>(J_) + 1;
    const std::size_t shift = static_cast<std::size_t>(gamma[0]);
    std::vector<Complex> out(n, Complex(0.0));
    for (std::size_t j = shift; j < n; ++j) out[j] = part[j - shift];
    return monomials_.emplace(gamma, std::move(out)).first->second;
}

TaylorSeries restrict_to_graph(const GraphPolynomial& p, const CurveSpec& curve, int J, int precision_bits) {
    require(static_cast<int>(curve.m()) == p.m, "restrict_to_graph: polynomial and curve dimensions differ");
    mp::BitsScope scope(precision_bits);
    MonomialSeries ms(curve, J, precision_bits);
    const auto& b = p.basis();
    std::vector<Complex> acc(static_cast<std::size_t>(J) + 1, Complex(0.0));
    Real t1, t2;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (p.coeffs[i].is_zero()) continue;
        const auto& mono = ms.monomial(b[i]);
        for (std::size_t j = 0; j < acc.size(); ++j) {
            if (!mono[j].is_zero()) mp::add_product(acc[j], p.coeffs[i], mono[j], t1, t2);
        }
    }
    // The restriction is a polynomial when every monomial in use only raises
    // polynomial coordinates; its degree is then γ₁ + Σ γ_i deg f_i.
    bool exact = true;
    std::size_t degree = 0;
    for (std::size_t i = 0; i < b.size() && exact; ++i) {
        if (p.coeffs[i].is_zero()) continue;
        std::size_t deg = static_cast<std::size_t>(b[i][0]);
        for (std::size_t c = 0; c < curve.m(); ++c) {
            const int e = b[i][c + 1];
            if (e == 0) continue;
            const auto& f = curve.coords[c];
            if (f.kind != FunctionKind::Polynomial) {
                exact = false;
                break;
            }
            deg += static_cast<std::size_t>(e) * (f.poly.empty() ? 0 : f.poly.size() - 1);
        }
        degree = std::max(degree, deg);
    }
    exact = exact && static_cast<std::size_t>(J) >= degree;
    return TaylorSeries::from_complex(acc, precision_bits, exact);
}

RestrictionMatrix restriction_matrix(int k, MonomialSeries& monomials, int s) {
    require(k >= 0, "restriction_matrix: k must be nonnegative");
    require(s >= -1 && s <= monomials.J(), "restriction_matrix: s outside the available Taylor range");
    RestrictionMatrix M;
    M.k = k;
    M.s = s;
    M.precision_bits = monomials.bits();
    M.basis_order = monomial_basis(monomials.m() + 1, k);
    const std::size_t rows = static_cast<std::size_t>(s + 1);
    M.entries.assign(rows, std::vector<Complex>(M.basis_order.size(), Complex(0.0)));
    for (std::size_t c = 0; c < M.basis_order.size(); ++c) {
        const auto& mono = monomials.monomial(M.basis_order[c]);
        for (std::size_t r = 0; r < rows; ++r) M.entries[r][c] = mono[r];
    }
    return M;
}

RestrictionMatrix restriction_matrix(int k, const CurveSpec& curve, int s, int precision_bits) {
    require(s >= -1, "restriction_matrix: s must be >= 0");
    MonomialSeries ms(curve, std::max(s, 0), precision_bits);
    return restriction_matrix(k, ms, s);
}

namespace {

// Reduced row echelon form over the columns in reversed basis order. A
// column becomes a pivot when its best remaining entry exceeds `tol` times
// the column norm; the null vector attached to the earliest free column
// (in basis order) has its first nonzero coefficient at that column.
std::vector<Complex> leading_null_vector(std::vector<std::vector<Complex>> A, std::size_t cols, int bits) {
    const std::size_t rows = A.size();
    // Row equilibration leaves the nullspace unchanged and removes the
    // j!-type decay of Taylor rows.
    for (auto& row : A) {
        Real mx = Real::with_bits(bits);
        for (const auto& v : row) mx = mp::max(mx, mp::abs(v));
        if (mx.is_zero()) continue;
        const Real inv = Real(1.0, bits) / mx;
        for (auto& v : row) v *= inv;
    }
    std::vector<Real> col_norm(cols, Real::with_bits(bits));
    for (std::size_t c = 0; c < cols; ++c) {
        Real acc = Real::with_bits(bits);
        for (std::size_t r = 0; r < rows; ++r) acc += mp::norm(A[r][c]);
        col_norm[c] = mp::sqrt(acc);
    }
    Real tol = Real(1.0, bits);
    mpfr_mul_2si(tol.get(), tol.get(), -bits / 2, MPFR_RNDN);

    std::vector<int> pivot_row_of(cols, -1);
    std::size_t next_row = 0;
    for (std::size_t ci = 0; ci < cols; ++ci) {
        const std::size_t c = cols - 1 - ci;
        if (next_row >= rows) break;
        std::size_t best = next_row;
        Real best_mag = Real::with_bits(bits);
        for (std::size_t r = next_row; r < rows; ++r) {
            Real mag = mp::norm(A[r][c]);
            if (mag > best_mag) {
                best_mag = mag;
                best = r;
            }
        }
        if (col_norm[c].is_zero() || !(mp::sqrt(best_mag) > tol * col_norm[c])) continue;
        std::swap(A[best], A[next_row]);
        const Complex inv = Complex(1.0) / A[next_row][c];
        for (auto& v : A[next_row]) v = v * inv;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == next_row || A[r][c].is_zero()) continue;
            const Complex factor = A[r][c];
            for (std::size_t cc = 0; cc < cols; ++cc) {
                if (!A[next_row][cc].is_zero()) A[r][cc] -= factor * A[next_row][cc];
            }
        }
        pivot_row_of[c] = static_cast<int>(next_row);
        ++next_row;
    }

    std::size_t free_col = cols;
    for (std::size_t c = 0; c < cols; ++c) {
        if (pivot_row_of[c] < 0) {
            free_col = c;
            break;
        }
    }
    if (free_col == cols) return {};
    std::vector<Complex> x(cols, Complex(Real::with_bits(bits)));
    x[free_col] = Complex(Real(1.0, bits));
    for (std::size_t c = 0; c < cols; ++c) {
        const int r = pivot_row_of[c];
        if (r >= 0) x[c] = -A[static_cast<std::size_t>(r)][free_col];
    }
    return x;
}

}  // namespace

int precision_for_degree(int k) {
    // The smallest inner-Gram pivot of the exponential curve decays like
    // 2^{-5.2 k²}; the quadratic term keeps it above the deflation cut.
    return std::min(mp::kMaxBits, std::max({512, 64 * k + 256, 12 * k * k + 256}));
}

GraphPolynomial kernel_vanishing_poly(int k, const CurveSpec& curve, int target_order, int precision_bits) {
    require(k >= 0, "kernel_vanishing_poly: k must be nonnegative");
    require(target_order >= 0, "kernel_vanishing_poly: target order must be nonnegative");
    const int m = static_cast<int>(curve.m());
    const auto d = dim_pk(m + 1, k);
    if (target_order > d - 1) {
        fail(ErrorCode::NullspaceEmpty, "kernel_vanishing_poly: target order " + std::to_string(target_order) +
                                            " exceeds d - 1 = " + std::to_string(d - 1));
    }
    mp::BitsScope scope(precision_bits);
    const int verify_to = target_order + k + 16;
    MonomialSeries ms(curve, verify_to, precision_bits);
    const auto M = restriction_matrix(k, ms, target_order - 1);

    auto x = leading_null_vector(M.entries, M.cols(), precision_bits);
    if (x.empty()) {
        fail(ErrorCode::NullspaceEmpty,
             "kernel_vanishing_poly: no numerical null vector for k = " + std::to_string(k) +
                 ", target order " + std::to_string(target_order));
    }

    // leading coefficient is 1 already; rescale to unit 2-norm
    GraphPolynomial p = GraphPolynomial::zero(k, m, precision_bits);
    Real nrm = Real::with_bits(precision_bits);
    for (const auto& c : x) nrm += mp::norm(c);
    nrm = mp::sqrt(nrm);
    const Real inv = Real(1.0, precision_bits) / nrm;
    for (std::size_t i = 0; i < x.size(); ++i) p.coeffs[i] = x[i] * inv;

    // re-restriction check through verify_to
    std::vector<Complex> acc(static_cast<std::size_t>(verify_to) + 1, Complex(Real::with_bits(precision_bits)));
    Real t1, t2;
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
        if (p.coeffs[i].is_zero()) continue;
        const auto& mono = ms.monomial(M.basis_order[i]);
        for (std::size_t j = 0; j < acc.size(); ++j) {
            if (!mono[j].is_zero()) mp::add_product(acc[j], p.coeffs[i], mono[j], t1, t2);
        }
    }
    Real thr = Real(1.0, precision_bits);
    mpfr_mul_2si(thr.get(), thr.get(), -precision_bits / 4, MPFR_RNDN);
    for (int j = 0; j < target_order; ++j) {
        if (mp::abs(acc[static_cast<std::size_t>(j)]) > thr) {
            fail(ErrorCode::VerificationFailed, "kernel_vanishing_poly: restricted coefficient " + std::to_string(j) +
                                                    " is " + mp::abs(acc[static_cast<std::size_t>(j)]).to_string(6) +
                                                    ", above the vanishing threshold");
        }
    }
    bool nonzero = false;
    for (int j = target_order; j <= verify_to && !nonzero; ++j) {
        nonzero = mp::abs(acc[static_cast<std::size_t>(j)]) > thr;
    }
    if (!nonzero) {
        fail(ErrorCode::RestrictedIdenticallyZero,
             "kernel_vanishing_poly: p restricted to the graph vanishes through order " + std::to_string(verify_to));
    }
    return p;
}

}  // namespace bernstein
