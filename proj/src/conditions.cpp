#include "bernstein/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace bernstein {

using mp::BitsScope;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kStepTolerance = 1e-2;

std::size_t final_third_start(std::size_t n) { return n - (n + 2) / 3; }

double final_third_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t start = final_third_start(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = start; i < x.size(); ++i) {
        if (!std::isfinite(y[i])) return kNaN;
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        ++n;
    }
    if (n < 2) return kNaN;
    const double den = n * sxx - sx * sx;
    return den == 0 ? kNaN : (n * sxy - sx * sy) / den;
}

void require_increasing(const std::vector<double>& g, const char* what) {
    require(!g.empty(), std::string(what) + " grid is empty");
    for (std::size_t i = 1; i < g.size(); ++i)
        require(g[i] > g[i - 1], std::string(what) + " grid must be strictly increasing");
}

// Shared verdict rules over the final third of the witness sequence.
struct Judgement {
    Verdict verdict;
    std::optional<std::size_t> index;
};

Judgement too_short_or_nonfinite(const std::vector<double>& w, bool& stop) {
    const std::size_t start = final_third_start(w.size());
    stop = true;
    if (w.size() - start < 3) return {Verdict::Inconclusive, {}};
    for (std::size_t i = start; i < w.size(); ++i)
        if (!std::isfinite(w[i])) return {Verdict::Inconclusive, {}};
    stop = false;
    return {Verdict::Inconclusive, {}};
}

// Bounded with a running maximum that never rises above its first value.
Judgement judge_bounded_max(const std::vector<double>& w) {
    bool stop;
    auto j = too_short_or_nonfinite(w, stop);
    if (stop) return j;
    const std::size_t start = final_third_start(w.size());
    const double cap = w[start] * (1.0 + kStepTolerance);
    for (std::size_t i = start + 1; i < w.size(); ++i)
        if (w[i] > cap) return {Verdict::ViolatedAt, i};
    return {Verdict::SatisfiedOnGrid, {}};
}

// |w| nonincreasing step to step (within tolerance) and smaller at the end.
Judgement judge_decreasing_to_zero(const std::vector<double>& w) {
    bool stop;
    auto j = too_short_or_nonfinite(w, stop);
    if (stop) return j;
    const std::size_t start = final_third_start(w.size());
    for (std::size_t i = start + 1; i < w.size(); ++i)
        if (std::abs(w[i]) > std::abs(w[i - 1]) * (1.0 + kStepTolerance)) return {Verdict::ViolatedAt, i};
    if (!(std::abs(w.back()) < std::abs(w[start]))) return {Verdict::ViolatedAt, w.size() - 1};
    return {Verdict::SatisfiedOnGrid, {}};
}

// Every witness in the final third strictly below the bound.
Judgement judge_below(const std::vector<double>& w, double bound) {
    bool stop;
    auto j = too_short_or_nonfinite(w, stop);
    if (stop) return j;
    const std::size_t start = final_third_start(w.size());
    for (std::size_t i = start; i < w.size(); ++i)
        if (!(w[i] < bound)) return {Verdict::ViolatedAt, i};
    return {Verdict::SatisfiedOnGrid, {}};
}

Judgement judge_strictly_increasing(const std::vector<double>& w) {
    bool stop;
    auto j = too_short_or_nonfinite(w, stop);
    if (stop) return j;
    const std::size_t start = final_third_start(w.size());
    for (std::size_t i = start + 1; i < w.size(); ++i)
        if (!(w[i] > w[i - 1])) return {Verdict::ViolatedAt, i};
    return {Verdict::SatisfiedOnGrid, {}};
}

ConditionReport make_report(std::string id, const std::vector<double>& grid, std::vector<double> w,
                            const Judgement& j) {
    ConditionReport r;
    r.condition_id = std::move(id);
    r.grid = grid;
    r.witness_values = std::move(w);
    r.verdict = j.verdict;
    if (j.index) r.violated_at = grid[*j.index];
    r.trend = final_third_slope(r.grid, r.witness_values);
    return r;
}

// φ_f at arbitrary t, evaluated once per distinct point.
class PhiTable {
public:
    PhiTable(const EntireFunctionSpec& f, int bits) : ev_(f, bits), bits_(bits) {}

    const Real& at(double t) {
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
        BitsScope scope(bits_);
        return cache_.emplace(t, ev_.growth(mp::exp(Real(t)), kDefaultGrowthSamples)).first->second;
    }
    const Real& m(double r) {
        auto it = cache_r_.find(r);
        if (it != cache_r_.end()) return it->second;
        BitsScope scope(bits_);
        return cache_r_.emplace(r, ev_.growth(Real(r), kDefaultGrowthSamples)).first->second;
    }

private:
    FunctionEvaluator ev_;
    int bits_;
    std::map<double, Real> cache_;
    std::map<double, Real> cache_r_;
};

bool is_infinite_order(const EntireFunctionSpec& f, int bits) {
    if (f.kind == FunctionKind::ExpOf || f.kind == FunctionKind::IteratedExp) {
        const auto o = structural_order(f);
        return !o || *o > kInfiniteOrderThreshold;
    }
    return order_of(f, bits) > kInfiniteOrderThreshold;
}

// Isotonic regression (pool adjacent violators) of slopes with weights.
std::vector<double> isotonic(const std::vector<double>& v, const std::vector<double>& w) {
    struct Block {
        double value, weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < v.size(); ++i) {
        blocks.push_back({v[i], w[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
            Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            a.value = (a.value * a.weight + b.value * b.weight) / (a.weight + b.weight);
            a.weight += b.weight;
            a.count += b.count;
        }
    }
    std::vector<double> out;
    for (const auto& b : blocks) out.insert(out.end(), b.count, b.value);
    return out;
}

}  // namespace

// Convex increasing piecewise-linear surrogate: slopes are made monotone by
// isotonic regression (weighted by interval length) and clipped at zero,
// then the level is chosen to minimize the squared residual.
std::vector<double> convex_increasing_fit(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    if (n < 2) return y;
    std::vector<double> slope(n - 1), weight(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        weight[i] = t[i + 1] - t[i];
        slope[i] = (y[i + 1] - y[i]) / weight[i];
    }
    auto s = isotonic(slope, weight);
    for (auto& x : s) x = std::max(x, 0.0);
    std::vector<double> fit(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) fit[i + 1] = fit[i] + s[i] * weight[i];
    double shift = 0;
    for (std::size_t i = 0; i < n; ++i) shift += y[i] - fit[i];
    shift /= static_cast<double>(n);
    for (auto& x : fit) x += shift;
    return fit;
}

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::SatisfiedOnGrid: return "satisfied_on_grid";
        case Verdict::ViolatedAt: return "violated_at";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "";
}

json ConditionReport::to_json() const {
    auto num = [](double v) -> json {
        if (std::isfinite(v)) return v;
        if (std::isnan(v)) return "nan";
        return v > 0 ? "inf" : "-inf";
    };
    json w = json::array();
    for (double v : witness_values) w.push_back(num(v));
    json j = {{"condition_id", condition_id},
              {"grid", grid},
              {"witness_values", w},
              {"verdict", verdict_name(verdict)},
              {"trend", num(trend)}};
    if (violated_at) j["violated_at"] = *violated_at;
    if (!note.empty()) j["note"] = note;
    if (pair.first > 0) j["pair"] = {pair.first, pair.second};
    return j;
}

ConditionReport check_condition_I(const EntireFunctionSpec& f, const std::vector<double>& t_grid, int precision_bits) {
    require_increasing(t_grid, "condition I");
    require(t_grid.front() >= 1.0, "condition I grid must start at t >= 1");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        require(t_grid[i] - t_grid[i - 1] >= 0.25 - 1e-12, "condition I grid step must be at least 0.25");
    // φ of a polynomial is asymptotically deg·t, so its increments never separate from a constant
    if (f.kind == FunctionKind::Polynomial)
        fail(ErrorCode::DegenerateDifference, "condition I is defined for transcendental functions only");
    PhiTable phi(f, precision_bits);
    BitsScope scope(precision_bits);
    std::vector<double> w;
    for (double t : t_grid) {
        const Real num = phi.at(t + 1.0) - phi.at(t);
        const Real den = phi.at(t) - phi.at(t - 1.0);
        if (den < 1e-9)
            fail(ErrorCode::DegenerateDifference,
                 "φ(t) − φ(t−1) = " + den.to_string(6) + " at t = " + std::to_string(t));
        w.push_back((num / den).to_double());
    }
    const auto verdict = judge_bounded_max(w);
    return make_report("cI", t_grid, std::move(w), verdict);
}

ConditionReport check_condition_II(const EntireFunctionSpec& f, const std::vector<double>& t_grid, int precision_bits) {
    require_increasing(t_grid, "condition II");
    require(t_grid.size() >= 2, "condition II needs at least two grid points");
    if (!is_infinite_order(f, precision_bits))
        fail(ErrorCode::NotInfiniteOrder, "finite-order functions are checked with condition I");
    PhiTable phi(f, precision_bits);
    BitsScope scope(precision_bits);
    std::vector<double> log_phi;
    for (double t : t_grid) {
        const Real& p = phi.at(t);
        log_phi.push_back(p > 0.0 ? mp::log(p).to_double() : kNaN);
    }
    for (double v : log_phi) {
        if (!std::isfinite(v)) {
            std::vector<double> w(t_grid.size(), kNaN);
            auto r = make_report("cII", t_grid, std::move(w), {Verdict::Inconclusive, {}});
            r.note = "ln φ is undefined on part of the grid";
            return r;
        }
    }
    const auto L = convex_increasing_fit(t_grid, log_phi);
    const std::size_t n = t_grid.size();
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = i + 1 == n ? n - 1 : i + 1;
        if (L[a] <= 0 || L[b] <= 0) {
            w[i] = kNaN;
            continue;
        }
        const double d = (1.0 / L[b] - 1.0 / L[a]) / (t_grid[b] - t_grid[a]);
        w[i] = t_grid[i] * t_grid[i] * d;
    }
    return make_report("cII", t_grid, w, judge_decreasing_to_zero(w));
}

ConditionReport check_growth_1_11(const EntireFunctionSpec& f, const std::vector<double>& t_grid, int precision_bits) {
    require_increasing(t_grid, "growth condition");
    PhiTable phi(f, precision_bits);
    BitsScope scope(precision_bits);
    std::vector<double> w;
    for (double t : t_grid) {
        require(t != 0.0, "growth condition grid must avoid t = 0");
        w.push_back((phi.at(t) / (t * t)).to_double());
    }
    auto r = make_report("growth_1_11", t_grid, w, judge_strictly_increasing(w));
    return r;
}

std::vector<ConditionReport> check_chain_conditions(const CurveSpec& curve, const std::vector<double>& r_grid,
                                                    int precision_bits) {
    require(curve.m() >= 2, "chain conditions need at least two coordinates");
    require_increasing(r_grid, "chain");
    require(r_grid.front() > 0.0, "chain radii must be positive");
    std::vector<double> orders;
    for (const auto& c : curve.coords) {
        const double o = order_of(c, precision_bits);
        orders.push_back(o > kInfiniteOrderThreshold ? std::numeric_limits<double>::infinity() : o);
    }
    for (std::size_t j = 0; j + 1 < orders.size(); ++j)
        if (orders[j] > orders[j + 1] + 1e-9)
            fail(ErrorCode::OrdersNotSorted, "coordinate orders must be nondecreasing (coordinate " +
                                                 std::to_string(j + 1) + " exceeds coordinate " +
                                                 std::to_string(j + 2) + ")");

    std::vector<PhiTable> m;
    m.reserve(curve.m());
    for (const auto& c : curve.coords) m.emplace_back(c, precision_bits);
    BitsScope scope(precision_bits);
    const double inv_e = std::exp(-1.0);

    std::vector<ConditionReport> out;
    for (std::size_t j = 0; j + 1 < curve.m(); ++j) {
        const bool next_finite = std::isfinite(orders[j + 1]);
        const bool this_infinite = !std::isfinite(orders[j]);
        std::vector<double> w;
        ConditionReport r;
        if (next_finite || !this_infinite) {
            // Quotient of growth increments over [r/e, r].
            for (double rr : r_grid) {
                const Real num = m[j].m(rr) - m[j].m(rr * inv_e);
                const Real den = m[j + 1].m(rr) - m[j + 1].m(rr * inv_e);
                w.push_back(den > 0.0 ? (num / mp::sqrt(den)).to_double() : kNaN);
            }
            if (next_finite) {
                r = make_report("chain_1_4", r_grid, w, judge_decreasing_to_zero(w));
            } else {
                r = make_report("chain_1_4", r_grid, w, {Verdict::SatisfiedOnGrid, {}});
                r.note = "no condition applies when a finite-order coordinate precedes an infinite-order one; "
                         "witness shown for reference";
            }
        } else {
            for (double rr : r_grid) {
                const Real& a = m[j].m(rr);
                const Real& b = m[j + 1].m(rr * inv_e);
                if (a <= 1.0 || b <= 1.0) {
                    w.push_back(kNaN);
                    continue;
                }
                w.push_back((mp::log(a) / mp::log(b)).to_double());
            }
            r = make_report("chain_1_5", r_grid, w, judge_below(w, 0.5));
        }
        r.pair = {static_cast<int>(j + 1), static_cast<int>(j + 2)};
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ConditionReport> check_h_chain(const std::vector<HSpec>& h, int split_l, const std::vector<double>& t_grid) {
    const int m = static_cast<int>(h.size());
    require(m >= 2, "an h-chain needs at least two functions");
    require(split_l >= 0 && split_l <= m, "split must lie in [0, m]");
    require_increasing(t_grid, "h-chain");

    std::vector<ConditionReport> out;
    // Pairs (j, j+1) with 1 ≤ j ≤ l−1, 1-based.
    for (int j = 1; j <= split_l - 1; ++j) {
        const HSpec& a = h[j - 1];
        const HSpec& b = h[j];
        std::vector<double> w;
        for (double t : t_grid) {
            const double hb = b.h(t);
            w.push_back(hb > 0 ? a.h(t) / std::sqrt(hb) : kNaN);
        }
        auto r = make_report("h_chain_1_13", t_grid, w, judge_decreasing_to_zero(w));
        r.pair = {j, j + 1};
        out.push_back(std::move(r));
    }

    if (split_l + 1 <= m - 1) {
        double M = -std::numeric_limits<double>::infinity();
        bool extrapolated = false;
        for (int j = split_l + 1; j <= m; ++j) {
            M = std::max(M, h[j - 1].h_inv_zero());
            extrapolated |= h[j - 1].zero_extrapolated();
        }
        const std::string flag =
            extrapolated ? "h⁻¹(0) extrapolated linearly below a tabulated range" : std::string();
        for (int j = split_l + 1; j <= m - 1; ++j) {
            const HSpec& a = h[j - 1];
            const HSpec& b = h[j];
            std::vector<double> wi, wr;
            for (double t : t_grid) {
                const double num = t > M ? a.integral_h(M, t) : kNaN;
                const double den = t - 1.0 > M ? b.integral_h(M, t - 1.0) : kNaN;
                wi.push_back(den > 0 && std::isfinite(num) ? num / den : kNaN);
                const double hb = b.h(t);
                wr.push_back(hb > 0 ? a.h(t + 1.0) / hb : kNaN);
            }
            auto r = make_report("h_chain_1_14", t_grid, wi, judge_below(wi, 0.5));
            r.pair = {j, j + 1};
            r.note = "M = " + std::to_string(M) + (flag.empty() ? "" : "; " + flag);
            out.push_back(std::move(r));
            auto s = make_report("remark_1_22", t_grid, wr, judge_below(wr, 0.5));
            s.pair = {j, j + 1};
            s.note = flag;
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace bernstein
