#include "bernstein/conditions.hpp"
#include "bernstein/lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace bernstein {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

CurveSpec single(const EntireFunctionSpec& f, const std::string& label) {
    CurveSpec c;
    c.coords = {f};
    c.label = label;
    return c;
}

struct TouchedSeries {
    std::string origin;
    TaylorSeries series;
    double r;
};

// Results shared between criteria in one run.
struct SuiteState {
    const AcceptanceOptions& opts;
    std::vector<TouchedSeries> touched;
    std::vector<LowerBoundRecord> chain;  // criterion 3 records, k = 1..8

    int bits(int k, int extra_floor = 0) const {
        return std::max({opts.precision_floor, extra_floor, precision_for_degree(k)});
    }
};

struct Outcome {
    bool passed = true;
    std::ostringstream detail;
};

void touch_restricted(SuiteState& st, const std::string& origin, const GraphPolynomial& p, const CurveSpec& c,
                      double r, int bits) {
    if (p.is_zero()) return;
    st.touched.push_back({origin, restricted_series_for_radius(p, c, std::exp(1.0) * r, bits), r});
}

// 1: on f(z) = z every quotient equals k exactly.
void algebraic_calibration(SuiteState& st, Outcome& o) {
    const auto id = single(EntireFunctionSpec::polynomial({0.0, 1.0}), "z");
    double worst = 0.0, worst_slope = 0.0;
    for (double r : {0.5, 1.0, 2.0}) {
        std::vector<QuotientEstimate> est;
        for (int k = 1; k <= 12; ++k) {
            const int bits = st.bits(k);
            auto res = extremal_quotient_with_vector(k, id, r, bits, st.opts.jobs);
            res.estimate.curve_label = id.label;
            worst = std::max(worst, std::abs(res.estimate.log_quotient - k));
            est.push_back(res.estimate);
            touch_restricted(st, "criterion 1 maximizer k=" + std::to_string(k), res.maximizer, id, r, bits);
        }
        const double slope = fit_exponent(est).slope;
        worst_slope = std::max(worst_slope, std::abs(slope - 1.0));
        o.detail << "r=" << num(r) << " slope " << num(slope, 8) << "; ";
    }
    o.passed = worst < 1e-6 && worst_slope <= 0.05;
    o.detail << "max |B(k,r) - k| = " << num(worst, 3);
}

// 2: the gram_l2 slope on (e^z), k = 2..16.
void exponential_exponent(SuiteState& st, Outcome& o) {
    const auto c = single(EntireFunctionSpec::exp_linear(1.0), "exp");
    std::vector<QuotientEstimate> est;
    for (int k = 2; k <= 16; ++k) {
        const int bits = st.bits(k, 1024);
        auto res = extremal_quotient_with_vector(k, c, 1.0, bits, st.opts.jobs);
        res.estimate.curve_label = c.label;
        est.push_back(res.estimate);
        touch_restricted(st, "criterion 2 maximizer k=" + std::to_string(k), res.maximizer, c, 1.0, bits);
        if (res.estimate.deflated > 0) o.detail << "k=" << k << " deflated " << res.estimate.deflated << "; ";
    }
    const auto fit = fit_exponent(est);
    const auto cmp = compare_fit(fit, theoretical_exponent(CurveClass::ExpCurve, 1), 0.4);
    o.passed = fit.slope >= 1.6 && fit.slope <= 2.4;
    o.detail << "B(2,1)=" << num(est.front().log_quotient, 8) << " B(16,1)=" << num(est.back().log_quotient, 8)
             << " slope " << num(fit.slope, 6) << " +- " << num(fit.stderr_slope, 2) << " ("
             << fit_verdict_name(cmp.verdict) << " with exponent 2)";
}

void ensure_chain(SuiteState& st) {
    if (!st.chain.empty()) return;
    const auto c = single(EntireFunctionSpec::exp_linear(1.0), "exp");
    for (int k = 1; k <= 8; ++k)
        st.chain.push_back(lower_bound_experiment(k, c, LowerBoundMode::Thm14, 1.0, st.bits(k)));
}

// 3: kernel witnesses of order d - 1 and their Jensen chain.
void kernel_chain(SuiteState& st, Outcome& o) {
    st.chain.clear();
    ensure_chain(st);
    const double jc = jensen_constant();
    int violations = 0;
    for (const auto& rec : st.chain) {
        const int d = static_cast<int>(dim_pk(2, rec.k));
        const bool ok = rec.vanishing_order == d - 1 && rec.log_quotient >= (d - 1) * jc && rec.chain_holds;
        if (!ok) {
            ++violations;
            o.detail << "k=" << rec.k << " order " << rec.vanishing_order << " quotient " << num(rec.log_quotient)
                     << " count " << rec.count << "; ";
        }
    }
    o.passed = violations == 0;
    const auto& last = st.chain.back();
    o.detail << "violations " << violations << " of 8; k=8 quotient " << num(last.log_quotient) << " >= "
             << num(last.vanishing_order * jc) << ", count " << last.count << ", Jensen bound " << num(last.jensen_bound);
}

// 4: slope of the criterion 3 witness quotients over k = 2..8.
void witness_slope(SuiteState& st, Outcome& o) {
    ensure_chain(st);
    std::vector<QuotientEstimate> est;
    for (const auto& rec : st.chain) {
        QuotientEstimate e;
        e.k = rec.k;
        e.r = rec.r;
        e.log_quotient = rec.log_quotient;
        e.curve_label = "exp";
        e.method = QuotientMethod::KernelWitness;
        est.push_back(e);
    }
    const auto fit = fit_exponent(est, 2);
    o.passed = fit.slope >= 1.6;
    o.detail << "slope " << num(fit.slope, 6) << " over k=2..8 (needs >= 1.6); quotients for k=1..8:";
    for (const auto& e : est) o.detail << " " << num(e.log_quotient, 4);
}

EntireFunctionSpec random_exp_poly(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nterms(1, 4), degree(0, 6);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<ExpTerm> terms;
    const int n = nterms(rng);
    while (static_cast<int>(terms.size()) < n) {
        cdouble q(3.0 * unit(rng), 3.0 * unit(rng));
        if (std::abs(q) > 3.0) continue;
        std::vector<cdouble> p(static_cast<std::size_t>(degree(rng)) + 1);
        for (auto& c : p) c = cdouble(unit(rng), unit(rng));
        terms.push_back({p, q});
    }
    return EntireFunctionSpec::exp_polynomial(terms);
}

// 5: the explicit Bernstein bound for exponential polynomials.
void exp_poly_suite(SuiteState& st, Outcome& o) {
    std::mt19937_64 rng(cell_seed(st.opts.seed, "exponential polynomial suite", 0, 0.0));
    int violations = 0, checks = 0;
    double tightest = INFINITY;
    for (int i = 0; i < 100; ++i) {
        const auto g = random_exp_poly(rng);
        for (double r : {0.5, 1.0, 2.0}) {
            const auto res = verify_exp_poly_bound(g, r, 1024);
            ++checks;
            if (!res.holds) ++violations;
            tightest = std::min(tightest, res.rhs - res.lhs);
        }
        if (i < 10) st.touched.push_back({"criterion 5 exponential polynomial " + std::to_string(i),
                                          coefficients_of(g, 160, 256), 1.0});
    }
    o.passed = violations == 0;
    o.detail << violations << " violations in " << checks << " checks; smallest margin " << num(tightest);
}

// 6: ν/φ sandwiches and order estimates for the two coefficient-built examples.
void sandwich_suite(SuiteState& st, Outcome& o) {
    std::vector<double> grid;
    for (double t = 5.0; t <= 12.0 + 1e-9; t += 0.5) grid.push_back(t);
    int violations = 0;
    struct Case {
        HSpec h;
        double order;
        double tol;
        int J;
        const char* name;
    };
    for (const auto& cs : {Case{HSpec::power(1.5), 0.0, 0.05, 4000, "power 1.5"},
                           Case{HSpec::exponential(1.0), 1.0, 0.1, 400, "exponential 1"}}) {
        const auto f = EntireFunctionSpec::theorem_1_11(cs.h);
        const auto prof = compute_profile(f, grid);
        if (prof.nu_values.size() != grid.size()) {
            ++violations;
            continue;
        }
        const double c = prof.rho_hat + 1.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double t = grid[i];
            const double integral = cs.h.integral_h(cs.h.h_inv_zero(), t);
            const double nu = prof.nu_values[i], phi = prof.phi_values[i];
            if (!(integral - t <= nu && nu <= integral + 1e-9)) ++violations;
            if (!(nu <= phi + 1e-9 && phi <= 2.0 * c * t + nu)) ++violations;
        }
        const auto coeffs = coefficients_of(f, cs.J, 256);
        const double est = estimate_order(coeffs);
        if (std::abs(est - cs.order) > cs.tol) ++violations;
        o.detail << cs.name << ": order " << num(est, 4) << " (rho_hat " << num(prof.rho_hat, 4) << "); ";
        for (double r : {1.0, 2.0}) st.touched.push_back({std::string("criterion 6 f_h ") + cs.name, coeffs, r});
    }
    o.passed = violations == 0;
    o.detail << violations << " violations";
}

std::vector<double> grid(double a, double b, double h) {
    std::vector<double> g;
    for (double t = a; t <= b + 1e-9; t += h) g.push_back(t);
    return g;
}

// 7: class C verdicts on the standard examples.
void classc_suite(SuiteState& st, Outcome& o) {
    int bad = 0;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) {
            ++bad;
            o.detail << "failed: " << what << "; ";
        }
    };
    const auto e = EntireFunctionSpec::exp_linear(1.0);
    const auto ci = check_condition_I(e, grid(1, 8, 0.5));
    bool near_e = true;
    for (double w : ci.witness_values) near_e = near_e && std::abs(w / std::exp(1.0) - 1.0) <= 0.01;
    expect(ci.satisfied() && near_e, "condition I on e^z");
    expect(check_growth_1_11(e, grid(2, 8, 0.5)).satisfied(), "growth condition on e^z");
    for (const auto& p : {EntireFunctionSpec::polynomial({1.0}), EntireFunctionSpec::polynomial({0.0, 0.0, 0.0, 1.0}),
                          EntireFunctionSpec::polynomial({2.0, 1.0})}) {
        bool ok = false;
        try {
            ok = check_condition_I(p, grid(1, 8, 0.5)).verdict == Verdict::ViolatedAt;
        } catch (const Error& err) {
            ok = err.code() == ErrorCode::DegenerateDifference;
        }
        expect(ok, "condition I on a polynomial");
    }
    CurveSpec pattern{{EntireFunctionSpec::exp_of(EntireFunctionSpec::polynomial({0.0, 1.0})),
                       EntireFunctionSpec::exp_of(EntireFunctionSpec::polynomial({0.0, 0.0, 0.0, 1.0})),
                       EntireFunctionSpec::iterated_exp(2, 1.0), EntireFunctionSpec::iterated_exp(2, 6.0)},
                      "chain pattern"};
    for (const auto& rep : check_chain_conditions(pattern, grid(2, 6, 0.5)))
        expect(rep.satisfied(), "chain pattern " + rep.condition_id);
    CurveSpec depth3{{EntireFunctionSpec::iterated_exp(3, 1.0), EntireFunctionSpec::iterated_exp(3, 4.0)}, "depth3"};
    for (const auto& rep : check_chain_conditions(depth3, grid(1, 4, 0.25)))
        expect(rep.satisfied(), "depth-three chain " + rep.condition_id);
    for (const auto& rep : check_h_chain({HSpec::power(1.8), HSpec::power(1.3)}, 2, grid(4, 40, 2.0)))
        expect(rep.satisfied(), "power h chain " + rep.condition_id);
    for (const auto& rep : check_h_chain({HSpec::exponential(1.0), HSpec::exponential(3.0)}, 0, grid(2, 10, 0.5)))
        expect(rep.satisfied(), "exponential h chain " + rep.condition_id);
    const auto same = check_h_chain({HSpec::power(1.5), HSpec::power(1.5)}, 2, grid(4, 40, 2.0));
    expect(same.size() == 1 && same[0].verdict == Verdict::ViolatedAt, "identical pair is violated");
    CurveSpec same_exp{{EntireFunctionSpec::iterated_exp(2, 1.0), EntireFunctionSpec::iterated_exp(2, 1.0)}, "same"};
    const auto same_rep = check_chain_conditions(same_exp, grid(2, 6, 0.5));
    expect(!same_rep.empty() && same_rep[0].verdict == Verdict::ViolatedAt, "identical iterated pair is violated");
    st.touched.push_back({"criterion 7 e^z", coefficients_of(e, 200, 256), 1.0});
    o.passed = bad == 0;
    o.detail << "condition I witness at t=8: " << num(ci.witness_values.back(), 7) << "; " << bad << " failed verdicts";
}

TaylorSeries from_roots(const std::vector<std::complex<double>>& roots) {
    mp::BitsScope scope(256);
    std::vector<Complex> c{Complex(1.0)};
    for (const auto& a : roots) {
        std::vector<Complex> next(c.size() + 1, Complex(0.0));
        const Complex ma(-a.real(), -a.imag());
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] += ma * c[i];
        }
        c = std::move(next);
    }
    return polynomial_series(c, 256);
}

// 8: closed-form zero counts and count <= Jensen bound + 1/2 on every touched series.
void zero_suite(SuiteState& st, Outcome& o) {
    int mismatches = 0, jensen_bad = 0, jensen_checked = 0, unchecked = 0;
    auto jensen = [&](const ZeroCountResult& z, const std::string& what) {
        if (!std::isfinite(z.jensen_bound)) {
            ++unchecked;
            return;
        }
        ++jensen_checked;
        if (!(z.count <= z.jensen_bound + 0.5)) {
            ++jensen_bad;
            o.detail << what << " count " << z.count << " > bound " << num(z.jensen_bound) << "; ";
        }
    };
    auto em1 = coefficients_of(EntireFunctionSpec::exp_linear(1.0), 400, 256);
    em1.coeffs[0] = LogComplex::zero(256);
    const int expect[3] = {1, 3, 5};
    const double radii[3] = {1.0, 7.0, 13.0};
    for (int i = 0; i < 3; ++i) {
        const auto z = count_zeros_argument(em1, radii[i]);
        if (z.count != expect[i] || !z.winding_ok) ++mismatches;
        jensen(z, "e^z-1");
    }
    for (int k = 0; k <= 10; ++k) {
        const auto z = count_zeros_argument(monomial_series(k, 256), 1.5);
        if (z.count != k) ++mismatches;
        jensen(z, "z^k");
    }
    std::mt19937_64 rng(cell_seed(st.opts.seed, "linear factor products", 0, 0.0));
    std::uniform_real_distribution<double> mod(0.0, 3.0), ang(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<int> nroots(1, 9);
    int products = 0;
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<std::complex<double>> roots;
        const int n = nroots(rng);
        for (int i = 0; i < n; ++i) roots.push_back(std::polar(mod(rng), ang(rng)));
        const auto s = from_roots(roots);
        for (double r : {0.7, 1.5, 2.5}) {
            bool clear = true;
            int inside = 0;
            for (const auto& a : roots) {
                clear = clear && std::abs(std::abs(a) - r) > 0.02;
                inside += std::abs(a) < r;
            }
            if (!clear) continue;
            ++products;
            const auto z = count_zeros_argument(s, r);
            if (z.count != inside) ++mismatches;
            jensen(z, "linear-factor product");
        }
    }
    for (const auto& t : st.touched) {
        try {
            jensen(count_zeros_argument(t.series, t.r), t.origin);
        } catch (const Error& e) {
            ++jensen_bad;
            o.detail << t.origin << ": " << e.what() << "; ";
        }
    }
    for (const auto& rec : st.chain) {
        ++jensen_checked;
        if (!(rec.count <= rec.jensen_bound + 0.5)) ++jensen_bad;
    }
    o.passed = mismatches == 0 && jensen_bad == 0;
    o.detail << mismatches << " count mismatches (" << products << " products); " << jensen_bad
             << " Jensen violations in " << jensen_checked << " checks";
    if (unchecked > 0) o.detail << "; " << unchecked << " series without convergence on |z|=er";
}

// 9: numerics property suite.
void numerics_suite(SuiteState& st, Outcome& o) {
    int bad = 0;
    const auto z = zoo();
    for (const auto& [name, f] : z) {
        const auto order = structural_order(f);
        if (!order || !std::isfinite(*order)) continue;
        const auto prof = compute_profile(f, grid(1.0, 6.0, 0.25));
        for (std::size_t i = 1; i + 1 < prof.phi_values.size(); ++i) {
            const double d2 = prof.phi_values[i + 1] - 2 * prof.phi_values[i] + prof.phi_values[i - 1];
            if (d2 < -1e-6 * std::max(1.0, std::abs(prof.phi_values[i]))) {
                ++bad;
                o.detail << name << " not convex at t=" << num(prof.t_samples[i]) << "; ";
            }
        }
    }
    double worst_doubling = 0.0;
    for (const auto& [name, f] : z) {
        for (double r : {0.5, 1.0, 2.0}) {
            const Real a = growth_m(f, r, 256), b = growth_m(f, r, 512);
            const double rel = (mp::abs(b - a) / mp::max(mp::abs(b), Real(1e-300))).to_double();
            worst_doubling = std::max(worst_doubling, rel);
        }
    }
    if (worst_doubling >= 1e-6) ++bad;
    std::mt19937_64 rng(cell_seed(st.opts.seed, "log_sum_exp permutations", 0, 0.0));
    std::uniform_real_distribution<double> mag(-50.0, 50.0), ph(-3.0, 3.0);
    double worst_perm = 0.0;
    {
        mp::BitsScope scope(512);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<LogComplex> t;
            for (int i = 0; i < 40; ++i) t.emplace_back(Real(mag(rng)), Real(ph(rng)));
            const auto a = log_sum_exp_complex(t);
            std::shuffle(t.begin(), t.end(), rng);
            const auto b = log_sum_exp_complex(t);
            const Real diff = mp::abs(a.log_mag() - b.log_mag()) / mp::max(mp::abs(a.log_mag()), Real(1e-300));
            worst_perm = std::max(worst_perm, diff.to_double());
        }
    }
    if (worst_perm >= std::ldexp(1.0, -500)) ++bad;
    double worst_fit = 0.0;
    std::uniform_real_distribution<double> mu(1.0, 4.5), cst(0.01, 50.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double m = mu(rng), c = cst(rng);
        std::vector<QuotientEstimate> est;
        for (int k = 2; k <= 14; ++k) {
            QuotientEstimate e;
            e.k = k;
            e.log_quotient = c * std::pow(static_cast<double>(k), m);
            est.push_back(e);
        }
        worst_fit = std::max(worst_fit, std::abs(fit_exponent(est).slope - m));
    }
    if (worst_fit >= 1e-9) ++bad;
    o.passed = bad == 0;
    o.detail << "sample doubling " << num(worst_doubling, 2) << ", permutation " << num(worst_perm, 2)
             << ", power-law fit " << num(worst_fit, 2) << "; " << bad << " failures";
}

// 10: two identical runs give identical CSV bodies.
void reproducibility(SuiteState& st, Outcome& o) {
    namespace fs = std::filesystem;
    std::vector<nlohmann::json> configs = {
        {{"experiment", "verify"}, {"criteria", {1, 9}}, {"seed", st.opts.seed}},
        {{"experiment", "quotient"},
         {"curve", {{"coords", {"exp"}}}},
         {"k_range", {1, 4}},
         {"r_values", {0.5, 1.0}},
         {"method", "random_search"},
         {"trials", 16},
         {"seed", st.opts.seed}},
        {{"experiment", "zeros"}, {"curve", {{"coords", {"exp"}}}}, {"k_range", {1, 4}}}};
    int differing = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        std::string bodies[2];
        for (int run = 0; run < 2; ++run) {
            auto cfg = ExperimentConfig::from_json(configs[i]);
            cfg.jobs = st.opts.jobs;
            cfg.precision_bits = st.opts.precision_floor;
            cfg.out_dir = (st.opts.scratch_dir / ("config" + std::to_string(i)) / ("run" + std::to_string(run))).string();
            cfg.cache_dir = (st.opts.scratch_dir / "cache").string();
            fs::remove_all(cfg.out_dir);
            const auto res = run_config(cfg);
            bodies[run] = csv_body(res.csv_path);
        }
        const bool same = bodies[0] == bodies[1] && !bodies[0].empty();
        if (!same) ++differing;
        o.detail << (i ? "; " : "") << configs[i]["experiment"].get<std::string>() << (same ? " identical" : " differs");
    }
    o.passed = differing == 0;
}

struct CriterionDef {
    int id;
    const char* title;
    double limit_seconds;
    void (*run)(SuiteState&, Outcome&);
};

const CriterionDef kCriteria[] = {
    {1, "algebraic calibration", 60.0, algebraic_calibration},
    {2, "exponential curve exponent", 1800.0, exponential_exponent},
    {3, "kernel and Jensen chain", 600.0, kernel_chain},
    {4, "lower-bound slope", 0.0, witness_slope},
    {5, "exponential polynomial bound suite", 300.0, exp_poly_suite},
    {6, "coefficient-built sandwiches", 300.0, sandwich_suite},
    {7, "class C verdicts", 300.0, classc_suite},
    {8, "zero counting and Jensen consistency", 300.0, zero_suite},
    {9, "numerics properties", 120.0, numerics_suite},
    {10, "reproducibility", 0.0, reproducibility},
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
    std::set<int> wanted(opts.criteria.begin(), opts.criteria.end());
    if (wanted.empty())
        for (int i = 1; i <= kCriteriaCount; ++i) wanted.insert(i);
    SuiteState st{opts, {}, {}};
    std::vector<CriterionResult> out;
    for (const auto& def : kCriteria) {
        if (!wanted.count(def.id)) continue;
        CriterionResult r;
        r.id = def.id;
        r.title = def.title;
        r.limit_seconds = def.limit_seconds;
        Outcome o;
        const auto t0 = Clock::now();
        try {
            def.run(st, o);
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail << "aborted: " << e.what();
        }
        r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        r.passed = o.passed;
        r.detail = o.detail.str();
        if (r.limit_seconds > 0.0 && r.seconds > r.limit_seconds) {
            r.passed = false;
            r.detail += "; runtime limit " + num(r.limit_seconds) + " s exceeded";
        }
        if (opts.on_result) opts.on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace bernstein
