#include "bernstein/lab.hpp"
#include "bernstein/cache.hpp"
#include "bernstein/conditions.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace bernstein {

using json = nlohmann::json;

namespace {

const char* const kExperimentNames[] = {"profile", "classc", "quotient", "exponent", "zeros", "kernel", "verify"};

[[noreturn]] void invalid(const std::string& pointer, const std::string& msg) {
    fail(ErrorCode::ConfigInvalid, (pointer.empty() ? std::string("/") : pointer) + ": " + msg);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int int_field(const json& j, const std::string& ptr, int lo, int hi) {
    if (!j.is_number_integer()) invalid(ptr, "must be an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > hi) invalid(ptr, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

double positive_field(const json& j, const std::string& ptr) {
    if (!j.is_number()) invalid(ptr, "must be a number");
    const double v = j.get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) invalid(ptr, "must be positive and finite");
    return v;
}

std::string string_field(const json& j, const std::string& ptr) {
    if (!j.is_string()) invalid(ptr, "must be a string");
    return j.get<std::string>();
}

std::uint64_t seed_field(const json& j, const std::string& ptr) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        try {
            std::size_t used = 0;
            const auto v = std::stoull(s, &used, 0);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
    }
    invalid(ptr, "must be a non-negative 64-bit integer or a decimal/0x-hex string");
}

std::vector<double> t_grid_field(const json& j, const std::string& ptr) {
    std::vector<double> g;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) invalid(ptr + "/" + std::to_string(i), "must be a number");
            g.push_back(j[i].get<double>());
        }
    } else if (j.is_object()) {
        for (const auto& key : {"start", "stop", "step"})
            if (!j.contains(key) || !j.at(key).is_number()) invalid(ptr + "/" + key, "must be a number");
        const double a = j.at("start").get<double>(), b = j.at("stop").get<double>(),
                     h = j.at("step").get<double>();
        if (!(h > 0.0) || b < a) invalid(ptr, "needs step > 0 and stop >= start");
        const int n = static_cast<int>(std::floor((b - a) / h + 1e-9));
        for (int i = 0; i <= n; ++i) g.push_back(a + i * h);
    } else {
        invalid(ptr, "must be an array of numbers or {start, stop, step}");
    }
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) invalid(ptr, "must be strictly increasing");
    if (g.size() < 3) invalid(ptr, "needs at least 3 points");
    return g;
}

TheoreticalExponent theory_field(const json& j, const std::string& ptr) {
    if (!j.is_object() || !j.contains("class")) invalid(ptr, "must be an object with a 'class'");
    const std::string c = string_field(j.at("class"), ptr + "/class");
    const int p = j.contains("parameter") ? int_field(j.at("parameter"), ptr + "/parameter", 1, 64) : 1;
    if (c == "algebraic") return theoretical_exponent(CurveClass::Algebraic);
    if (c == "exp_curve") return theoretical_exponent(CurveClass::ExpCurve, p);
    if (c == "classC_finite_order") return theoretical_exponent(CurveClass::ClassCFiniteOrder);
    if (c == "chain") return theoretical_exponent(CurveClass::Chain, p);
    if (c == "lower_bound") return theoretical_exponent(CurveClass::LowerBound, p);
    if (c == "product") {
        if (!j.contains("members") || !j.at("members").is_array() || j.at("members").empty())
            invalid(ptr + "/members", "must be a non-empty array of exponents");
        std::vector<double> ex;
        for (std::size_t i = 0; i < j.at("members").size(); ++i) {
            const auto& v = j.at("members")[i];
            if (!v.is_number() || v.get<double>() < 1.0)
                invalid(ptr + "/members/" + std::to_string(i), "must be a number >= 1");
            ex.push_back(v.get<double>());
        }
        return theoretical_product(ex);
    }
    invalid(ptr + "/class", "unknown curve class '" + c + "'");
}

TheoreticalExponent infer_theory(const CurveSpec& c) {
    bool all_poly = true, all_exp = true;
    for (const auto& f : c.coords) {
        all_poly = all_poly && f.kind == FunctionKind::Polynomial;
        all_exp = all_exp && f.kind == FunctionKind::ExpPolynomial;
    }
    if (all_poly) return theoretical_exponent(CurveClass::Algebraic);
    if (all_exp) return theoretical_exponent(CurveClass::ExpCurve, static_cast<int>(c.m()));
    if (c.m() == 1) {
        const auto o = structural_order(c.coords[0]);
        if (o && std::isfinite(*o)) return theoretical_exponent(CurveClass::ClassCFiniteOrder);
    }
    return theoretical_exponent(CurveClass::Chain, static_cast<int>(c.m()));
}

std::string quote_csv(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Runs fn(i) for i in [0, n) on `jobs` threads; results land by index.
template <class Fn>
void parallel_cells(std::size_t n, int jobs, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

struct CellOutcome {
    std::vector<ReportRow> rows;
    json record;
    bool ok = true;
    std::optional<QuotientEstimate> estimate;
};

struct Cell {
    int k = 0;
    double r = 1.0;
};

std::string error_status(const Error& e) { return "error:" + std::string(error_name(e.code())); }

int bits_for(const ExperimentConfig& cfg, int k) { return std::max(cfg.precision_bits, precision_for_degree(k)); }

std::vector<Cell> kr_cells(const ExperimentConfig& cfg) {
    std::vector<Cell> cells;
    for (int k = cfg.k_min; k <= cfg.k_max; ++k)
        for (double r : cfg.r_values) cells.push_back({k, r});
    return cells;
}

ReportRow row(const ExperimentConfig& cfg, std::string experiment, std::string k, std::string r) {
    ReportRow x;
    x.curve_label = cfg.curve.label;
    x.experiment = std::move(experiment);
    x.k = std::move(k);
    x.r = std::move(r);
    return x;
}

// Wraps one cell so any library error becomes a failed row rather than aborting the grid.
template <class Fn>
CellOutcome isolated(const ExperimentConfig& cfg, const std::string& k, const std::string& r, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        CellOutcome out;
        out.ok = false;
        auto x = row(cfg, std::string(experiment_name(cfg.experiment)), k, r);
        x.status = error_status(e);
        out.rows.push_back(x);
        out.record = {{"k", k}, {"r", r}, {"status", x.status}, {"error", e.what()}};
        return out;
    }
}

template <class Fn>
CellOutcome isolated(const ExperimentConfig& cfg, const Cell& c, Fn&& fn) {
    return isolated(cfg, std::to_string(c.k), fmt(c.r), std::forward<Fn>(fn));
}

CellOutcome quotient_cell(const ExperimentConfig& cfg, const Cell& c, QuotientMethod method, int inner_jobs) {
    return isolated(cfg, c, [&] {
        const int bits = bits_for(cfg, c.k);
        QuotientEstimate e;
        switch (method) {
            case QuotientMethod::GramL2: e = extremal_quotient(c.k, cfg.curve, c.r, bits, inner_jobs); break;
            case QuotientMethod::KernelWitness:
                e = kernel_witness_quotient(c.k, cfg.curve, c.r, lower_bound_target(c.k, cfg.curve, cfg.mode), bits,
                                            static_cast<std::size_t>(cfg.samples));
                break;
            case QuotientMethod::RandomSearch:
                e = random_search_quotient(c.k, cfg.curve, c.r, cfg.trials,
                                           cell_seed(cfg.seed, cfg.curve.digest(), c.k, c.r), bits,
                                           static_cast<std::size_t>(cfg.samples));
                break;
        }
        e.curve_label = cfg.curve.label;
        CellOutcome out;
        auto x = row(cfg, std::string(experiment_name(cfg.experiment)), std::to_string(c.k), fmt(c.r));
        x.value = fmt(e.log_quotient);
        x.aux1 = std::string(method_name(e.method));
        x.aux2 = std::to_string(e.precision_bits);
        x.status = "ok";
        out.rows.push_back(x);
        out.record = e.to_json();
        out.record["status"] = "ok";
        out.estimate = e;
        return out;
    });
}

CellOutcome zeros_cell(const ExperimentConfig& cfg, const Cell& c) {
    return isolated(cfg, c, [&] {
        const auto rec = lower_bound_experiment(c.k, cfg.curve, cfg.mode, c.r, bits_for(cfg, c.k));
        CellOutcome out;
        auto x = row(cfg, "zeros", std::to_string(c.k), fmt(c.r));
        x.value = std::to_string(rec.count);
        x.aux1 = std::to_string(rec.vanishing_order);
        x.aux2 = fmt(rec.jensen_bound);
        x.status = rec.chain_holds ? "ok" : "chain_violated";
        out.rows.push_back(x);
        out.record = rec.to_json();
        out.record["status"] = x.status;
        return out;
    });
}

CellOutcome kernel_cell(const ExperimentConfig& cfg, const Cell& c) {
    return isolated(cfg, c, [&] {
        const int target = lower_bound_target(c.k, cfg.curve, cfg.mode);
        const auto e = kernel_witness_quotient(c.k, cfg.curve, c.r, target, bits_for(cfg, c.k),
                                               static_cast<std::size_t>(cfg.samples));
        // a zero of order `target` at the origin forces this much growth
        const double floor = target * jensen_constant();
        CellOutcome out;
        auto x = row(cfg, "kernel", std::to_string(c.k), fmt(c.r));
        x.value = fmt(e.log_quotient);
        x.aux1 = std::to_string(target);
        x.aux2 = fmt(floor);
        x.status = e.log_quotient >= floor ? "ok" : "below_bound";
        out.rows.push_back(x);
        out.record = e.to_json();
        out.record["target_order"] = target;
        out.record["jensen_floor"] = floor;
        out.record["status"] = x.status;
        return out;
    });
}

CellOutcome profile_cell(const ExperimentConfig& cfg, std::size_t coord, ProfileCache& cache) {
    return isolated(cfg, std::to_string(coord), "", [&] {
        const auto& f = cfg.curve.coords[coord];
        const int bits = cfg.precision_bits > 0 ? cfg.precision_bits : mp::kDefaultBits;
        const auto samples = static_cast<std::size_t>(cfg.samples);
        const auto key = profile_key(f, cfg.t_grid, bits, samples);
        bool hit = true;
        auto prof = cache.lookup(key, bits);
        if (!prof) {
            hit = false;
            prof = compute_profile(f, cfg.t_grid, bits, samples);
            cache.store(key, *prof);
        }
        CellOutcome out;
        for (std::size_t i = 0; i < prof->t_samples.size(); ++i) {
            auto x = row(cfg, "profile", std::to_string(coord), fmt(prof->t_samples[i]));
            x.value = fmt(prof->phi_values[i]);
            x.aux1 = prof->nu_values.empty() ? "" : fmt(prof->nu_values[i]);
            x.aux2 = fmt(prof->rho_hat);
            x.status = "ok";
            out.rows.push_back(x);
        }
        out.record = prof->to_json();
        out.record["coordinate"] = coord;
        out.record["cache_key"] = key;
        out.record["cache_hit"] = hit;
        out.record["status"] = "ok";
        return out;
    });
}

void add_condition(const ExperimentConfig& cfg, CellOutcome& out, const std::string& k, const ConditionReport& rep) {
    auto x = row(cfg, "classc", k, rep.grid.empty() ? "" : fmt(rep.grid.back()));
    x.value = rep.witness_values.empty() ? "" : fmt(rep.witness_values.back());
    x.aux1 = fmt(rep.trend);
    x.aux2 = rep.condition_id;
    x.status = std::string(verdict_name(rep.verdict));
    out.rows.push_back(x);
    out.record["reports"].push_back(rep.to_json());
}

CellOutcome classc_cell(const ExperimentConfig& cfg, std::size_t idx) {
    const bool chain = idx == cfg.curve.m();
    return isolated(cfg, chain ? "chain" : std::to_string(idx), "", [&] {
        const int bits = cfg.precision_bits > 0 ? cfg.precision_bits : mp::kDefaultBits;
        CellOutcome out;
        out.record = {{"reports", json::array()}, {"status", "ok"}};
        if (chain) {
            out.record["coordinate"] = "chain";
            for (const auto& rep : check_chain_conditions(cfg.curve, cfg.t_grid, bits))
                add_condition(cfg, out, "chain", rep);
            return out;
        }
        const auto& f = cfg.curve.coords[idx];
        out.record["coordinate"] = idx;
        const double order = order_of(f, bits);
        out.record["order"] = std::isfinite(order) ? json(order) : json("inf");
        const std::string k = std::to_string(idx);
        if (std::isfinite(order)) {
            add_condition(cfg, out, k, check_condition_I(f, cfg.t_grid, bits));
            add_condition(cfg, out, k, check_growth_1_11(f, cfg.t_grid, bits));
        } else {
            add_condition(cfg, out, k, check_condition_II(f, cfg.t_grid, bits));
        }
        return out;
    });
}

void write_reports(const ExperimentConfig& cfg, RunResult& res) {
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    res.csv_path = dir / "report.csv";
    res.json_path = dir / "report.json";
    const std::string stamp = utc_timestamp();
    {
        std::ofstream out(res.csv_path, std::ios::trunc);
        out << "# bernstein_lab " << experiment_name(cfg.experiment) << " report generated " << stamp << "\n";
        out << csv_header_line() << "\n";
        for (const auto& r : res.rows) out << csv_line(r) << "\n";
        if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + res.csv_path.string());
    }
    res.report["generated_at"] = stamp;
    std::ofstream out(res.json_path, std::ios::trunc);
    out << res.report.dump(2) << "\n";
    if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + res.json_path.string());
}

}  // namespace

std::string_view experiment_name(Experiment e) { return kExperimentNames[static_cast<int>(e)]; }

Experiment experiment_from_name(std::string_view name) {
    for (int i = 0; i < 7; ++i)
        if (name == kExperimentNames[i]) return static_cast<Experiment>(i);
    fail(ErrorCode::ConfigInvalid, "unknown experiment '" + std::string(name) + "'");
}

CurveSpec curve_from_json(const json& j) {
    if (j.is_string()) return curve_from_json(json{{"coords", json::array({j})}});
    if (!j.is_object()) invalid("/curve", "must be an object or a built-in function name");
    if (!j.contains("coords") || !j.at("coords").is_array() || j.at("coords").empty())
        invalid("/curve/coords", "must be a non-empty array");
    for (const auto& [key, v] : j.items())
        if (key != "coords" && key != "label") invalid("/curve/" + key, "unknown property");
    const auto built_in = zoo();
    CurveSpec c;
    std::string names;
    bool all_named = true;
    const auto& coords = j.at("coords");
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const std::string ptr = "/curve/coords/" + std::to_string(i);
        if (coords[i].is_string()) {
            const auto it = built_in.find(coords[i].get<std::string>());
            if (it == built_in.end()) invalid(ptr, "unknown built-in function '" + coords[i].get<std::string>() + "'");
            c.coords.push_back(it->second);
            names += (names.empty() ? "" : "+") + it->first;
        } else {
            all_named = false;
            try {
                c.coords.push_back(EntireFunctionSpec::from_json(coords[i]));
            } catch (const Error& e) {
                invalid(ptr, e.what());
            }
        }
    }
    if (j.contains("label")) c.label = string_field(j.at("label"), "/curve/label");
    else c.label = all_named ? names : "curve";
    return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) invalid("", "config must be a JSON object");
    static const std::set<std::string> known = {
        "experiment", "curve",   "k_range", "r_values", "precision_bits", "samples", "seed",
        "out_dir",    "cache_dir", "jobs",  "t_grid",   "method",         "trials",  "mode",
        "band",       "k_floor", "theory",  "criteria"};
    for (const auto& [key, v] : j.items())
        if (!known.count(key)) invalid("/" + key, "unknown property");
    if (!j.contains("experiment")) invalid("/experiment", "is required");
    ExperimentConfig c;
    try {
        c.experiment = experiment_from_name(string_field(j.at("experiment"), "/experiment"));
    } catch (const Error&) {
        invalid("/experiment", "must be one of profile, classc, quotient, exponent, zeros, kernel, verify");
    }
    c = default_config(c.experiment);
    if (j.contains("curve")) c.curve = curve_from_json(j.at("curve"));
    if (j.contains("k_range")) {
        const auto& kr = j.at("k_range");
        if (!kr.is_array() || kr.size() != 2) invalid("/k_range", "must be [k_min, k_max]");
        c.k_min = int_field(kr[0], "/k_range/0", 0, 64);
        c.k_max = int_field(kr[1], "/k_range/1", 0, 64);
        if (c.k_max < c.k_min) invalid("/k_range", "k_max must be >= k_min");
    }
    if (j.contains("r_values")) {
        const auto& rv = j.at("r_values");
        if (!rv.is_array() || rv.empty()) invalid("/r_values", "must be a non-empty array");
        c.r_values.clear();
        for (std::size_t i = 0; i < rv.size(); ++i) c.r_values.push_back(positive_field(rv[i], "/r_values/" + std::to_string(i)));
    }
    if (j.contains("precision_bits")) {
        c.precision_bits = int_field(j.at("precision_bits"), "/precision_bits", 0, 8192);
        if (c.precision_bits != 0 && c.precision_bits < 64) invalid("/precision_bits", "must be 0 or at least 64");
    }
    if (j.contains("samples")) c.samples = int_field(j.at("samples"), "/samples", 64, 1 << 20);
    if (j.contains("seed")) c.seed = seed_field(j.at("seed"), "/seed");
    if (j.contains("out_dir")) c.out_dir = string_field(j.at("out_dir"), "/out_dir");
    if (j.contains("cache_dir")) c.cache_dir = string_field(j.at("cache_dir"), "/cache_dir");
    if (j.contains("jobs")) c.jobs = int_field(j.at("jobs"), "/jobs", 1, 1024);
    if (j.contains("t_grid")) c.t_grid = t_grid_field(j.at("t_grid"), "/t_grid");
    if (j.contains("method")) {
        try {
            c.method = method_from_name(string_field(j.at("method"), "/method"));
        } catch (const Error&) {
            invalid("/method", "must be one of gram_l2, kernel_witness, random_search");
        }
    }
    if (j.contains("trials")) c.trials = int_field(j.at("trials"), "/trials", 1, 1 << 20);
    if (j.contains("mode")) {
        try {
            c.mode = mode_from_name(string_field(j.at("mode"), "/mode"));
        } catch (const Error&) {
            invalid("/mode", "must be thm1c or thm14");
        }
    }
    if (j.contains("band")) c.band = positive_field(j.at("band"), "/band");
    if (j.contains("k_floor")) c.k_floor = int_field(j.at("k_floor"), "/k_floor", 1, 64);
    if (j.contains("theory")) c.theory = theory_field(j.at("theory"), "/theory");
    if (j.contains("criteria")) {
        const auto& cr = j.at("criteria");
        if (!cr.is_array()) invalid("/criteria", "must be an array of criterion numbers");
        for (std::size_t i = 0; i < cr.size(); ++i)
            c.criteria.push_back(int_field(cr[i], "/criteria/" + std::to_string(i), 1, kCriteriaCount));
    }
    const bool needs_k = c.experiment == Experiment::Quotient || c.experiment == Experiment::Exponent ||
                         c.experiment == Experiment::Kernel || c.experiment == Experiment::Zeros;
    if (needs_k && c.k_max < c.k_min) invalid("/k_range", "must be non-empty");
    if ((c.experiment == Experiment::Kernel || c.experiment == Experiment::Zeros) && c.k_min < 1)
        invalid("/k_range/0", "kernel and zeros experiments need k >= 1");
    return c;
}

json ExperimentConfig::to_json() const {
    json j = {{"experiment", experiment_name(experiment)},
              {"curve", curve.to_json()},
              {"k_range", {k_min, k_max}},
              {"r_values", r_values},
              {"precision_bits", precision_bits},
              {"samples", samples},
              {"seed", seed},
              {"out_dir", out_dir},
              {"cache_dir", cache_dir},
              {"jobs", jobs},
              {"method", method_name(method)},
              {"trials", trials},
              {"mode", mode_name(mode)},
              {"band", band},
              {"k_floor", k_floor},
              {"criteria", criteria}};
    if (!t_grid.empty()) j["t_grid"] = t_grid;
    if (theory) {
        static const char* const names[] = {"algebraic", "exp_curve", "classC_finite_order",
                                            "chain", "lower_bound", "product"};
        j["theory"] = {{"class", names[static_cast<int>(theory->curve_class)]}};
        if (theory->curve_class == CurveClass::Product) j["theory"]["members"] = {theory->exponent};
        else if (theory->parameter > 0) j["theory"]["parameter"] = theory->parameter;
    }
    return j;
}

ExperimentConfig default_config(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    c.curve = curve_from_json(json{{"coords", {"exp"}}});
    switch (e) {
        case Experiment::Profile:
        case Experiment::ClassC:
            c.samples = static_cast<int>(kDefaultGrowthSamples);
            for (double t = 2.0; t <= 10.0 + 1e-9; t += 0.5) c.t_grid.push_back(t);
            break;
        case Experiment::Quotient: c.k_min = 2, c.k_max = 6; break;
        case Experiment::Exponent: c.k_min = 2, c.k_max = 10; break;
        case Experiment::Zeros:
        case Experiment::Kernel: c.k_min = 1, c.k_max = 6; break;
        case Experiment::Verify: break;
    }
    return c;
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& curve_digest, int k, double r) {
    const std::string h = sha256_hex(std::to_string(seed) + "|" + curve_digest + "|" + std::to_string(k) + "|" + fmt(r));
    return std::stoull(h.substr(0, 16), nullptr, 16);
}

std::string csv_header_line() { return "curve_label,experiment,k,r,value,aux1,aux2,status"; }

std::string csv_line(const ReportRow& x) {
    std::string out;
    for (const auto* f : {&x.curve_label, &x.experiment, &x.k, &x.r, &x.value, &x.aux1, &x.aux2, &x.status}) {
        if (!out.empty() || f != &x.curve_label) out += ',';
        out += quote_csv(*f);
    }
    return out;
}

std::string csv_body(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) fail(ErrorCode::InvalidArgument, "cannot read " + csv_path.string());
    std::string line, body;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') body += line + "\n";
    return body;
}

RunResult run_config(const ExperimentConfig& cfg) {
    RunResult res;
    res.report = {{"config", cfg.to_json()}, {"cells", json::array()}};
    std::vector<CellOutcome> outcomes;

    auto run_kr = [&](auto&& cell_fn) {
        const auto cells = kr_cells(cfg);
        outcomes.resize(cells.size());
        const int inner = cells.size() >= static_cast<std::size_t>(cfg.jobs) ? 1 : cfg.jobs;
        parallel_cells(cells.size(), cfg.jobs, [&](std::size_t i) { outcomes[i] = cell_fn(cells[i], inner); });
    };

    switch (cfg.experiment) {
        case Experiment::Profile: {
            ProfileCache cache(resolve_cache_dir(cfg.cache_dir, ""));
            outcomes.resize(cfg.curve.m());
            parallel_cells(outcomes.size(), cfg.jobs, [&](std::size_t i) { outcomes[i] = profile_cell(cfg, i, cache); });
            res.report["cache_dir"] = cache.dir().string();
            res.report["cache_warnings"] = cache.warnings();
            break;
        }
        case Experiment::ClassC: {
            outcomes.resize(cfg.curve.m() + (cfg.curve.m() >= 2 ? 1 : 0));
            parallel_cells(outcomes.size(), cfg.jobs, [&](std::size_t i) { outcomes[i] = classc_cell(cfg, i); });
            break;
        }
        case Experiment::Quotient:
            run_kr([&](const Cell& c, int inner) { return quotient_cell(cfg, c, cfg.method, inner); });
            break;
        case Experiment::Exponent:
            run_kr([&](const Cell& c, int inner) { return quotient_cell(cfg, c, QuotientMethod::GramL2, inner); });
            break;
        case Experiment::Zeros: run_kr([&](const Cell& c, int) { return zeros_cell(cfg, c); }); break;
        case Experiment::Kernel: run_kr([&](const Cell& c, int) { return kernel_cell(cfg, c); }); break;
        case Experiment::Verify: {
            AcceptanceOptions opts;
            opts.criteria = cfg.criteria;
            opts.jobs = cfg.jobs;
            opts.seed = cfg.seed;
            opts.precision_floor = cfg.precision_bits;
            opts.scratch_dir = std::filesystem::path(cfg.out_dir) / "scratch";
            bool all = true;
            json crit = json::array();
            for (const auto& r : run_acceptance(opts)) {
                all = all && r.passed;
                ReportRow x;
                x.experiment = "verify";
                x.k = std::to_string(r.id);
                x.value = r.passed ? "1" : "0";
                x.aux1 = r.title;
                x.aux2 = r.detail;
                x.status = r.passed ? "PASS" : "FAIL";
                res.rows.push_back(x);
                crit.push_back({{"id", r.id},
                                {"title", r.title},
                                {"passed", r.passed},
                                {"detail", r.detail},
                                {"seconds", r.seconds},
                                {"limit_seconds", r.limit_seconds}});
            }
            res.report["criteria"] = crit;
            res.exit_status = all ? 0 : 1;
            res.cells = static_cast<int>(crit.size());
            write_reports(cfg, res);
            return res;
        }
    }

    std::vector<QuotientEstimate> estimates;
    for (auto& o : outcomes) {
        ++res.cells;
        if (!o.ok) ++res.failed_cells;
        for (auto& x : o.rows) res.rows.push_back(std::move(x));
        res.report["cells"].push_back(std::move(o.record));
        if (o.estimate) estimates.push_back(*o.estimate);
    }

    if (cfg.experiment == Experiment::Exponent) {
        const auto theory = cfg.theory ? *cfg.theory : infer_theory(cfg.curve);
        res.report["fits"] = json::array();
        for (double r : cfg.r_values) {
            std::vector<QuotientEstimate> at_r;
            for (const auto& e : estimates)
                if (e.r == r) at_r.push_back(e);
            auto x = row(cfg, "exponent_fit", "", fmt(r));
            try {
                const auto fit = fit_exponent(at_r, cfg.k_floor);
                const auto cmp = compare_fit(fit, theory, cfg.band);
                x.value = fmt(fit.slope);
                x.aux1 = fmt(fit.stderr_slope);
                x.aux2 = std::to_string(fit.points_used);
                x.status = std::string(fit_verdict_name(cmp.verdict));
                res.report["fits"].push_back(fit_report(fit, theory, cmp));
            } catch (const Error& e) {
                x.status = error_status(e);
                res.report["fits"].push_back({{"r", r}, {"status", x.status}, {"error", e.what()}});
            }
            res.rows.push_back(x);
        }
    }
    res.report["failed_cells"] = res.failed_cells;
    res.exit_status = res.failed_cells > 0 ? 3 : 0;
    write_reports(cfg, res);
    return res;
}

}  // namespace bernstein
