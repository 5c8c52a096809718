#include "bernstein/cache.hpp"
#include "bernstein/lab.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace bernstein;

namespace {

struct Flags {
    std::string config, out, cache_dir, seed;
    int precision = -1, jobs = 0, kmax = -1;
};

ExperimentConfig load(Experiment e, const Flags& f) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) fail(ErrorCode::ConfigInvalid, "cannot open config " + f.config);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& err) {
            fail(ErrorCode::ConfigInvalid, f.config + " is not valid JSON: " + err.what());
        }
        if (!j.is_object()) fail(ErrorCode::ConfigInvalid, "/: config must be a JSON object");
        if (!j.contains("experiment")) j["experiment"] = std::string(experiment_name(e));
        else if (j["experiment"] != experiment_name(e))
            fail(ErrorCode::ConfigInvalid, "/experiment: config is for '" + j["experiment"].dump() +
                                               "' but the subcommand is '" + std::string(experiment_name(e)) + "'");
        cfg = ExperimentConfig::from_json(j);
    } else {
        cfg = default_config(e);
    }
    if (!f.out.empty()) cfg.out_dir = f.out;
    cfg.cache_dir = resolve_cache_dir(f.cache_dir, cfg.cache_dir).string();
    if (f.precision >= 0) cfg.precision_bits = f.precision;
    if (f.jobs > 0) cfg.jobs = f.jobs;
    if (!f.seed.empty()) cfg.seed = ExperimentConfig::from_json({{"experiment", "verify"}, {"seed", f.seed}}).seed;
    if (f.kmax >= 0) {
        cfg.k_max = f.kmax;
        if (cfg.k_min > cfg.k_max) fail(ErrorCode::ConfigInvalid, "--kmax is below the configured k_min");
    }
    return cfg;
}

int run(Experiment e, const Flags& f) {
    try {
        const auto cfg = load(e, f);
        const auto res = run_config(cfg);
        if (e == Experiment::Verify) {
            for (const auto& r : res.rows)
                std::printf("[%s] criterion %s (%s): %s\n", r.status.c_str(), r.k.c_str(), r.aux1.c_str(),
                            r.aux2.c_str());
        }
        std::printf("%s: %d cells, %d failed\n  %s\n  %s\n", std::string(experiment_name(e)).c_str(), res.cells,
                    res.failed_cells, res.csv_path.string().c_str(), res.json_path.string().c_str());
        return res.exit_status;
    } catch (const Error& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return err.code() == ErrorCode::ConfigInvalid ? 2 : 4;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 4;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bernstein lab: Bernstein-type quotients of polynomials restricted to entire curves"};
    app.require_subcommand(1);
    Flags flags;
    const std::pair<Experiment, const char*> subs[] = {
        {Experiment::Profile, "growth profiles phi, nu and the order estimate of each coordinate"},
        {Experiment::ClassC, "class C condition checks on each coordinate and on the chain"},
        {Experiment::Quotient, "extremal or witness quotients B(k, r) on a (k, r) grid"},
        {Experiment::Exponent, "quotients plus a log-log exponent fit per radius"},
        {Experiment::Zeros, "kernel witnesses, zero counts and the Jensen chain"},
        {Experiment::Kernel, "kernel witness quotients against the Jensen floor"},
        {Experiment::Verify, "run the acceptance suite"},
    };
    Experiment chosen = Experiment::Quotient;
    for (const auto& [e, help] : subs) {
        auto* sub = app.add_subcommand(std::string(experiment_name(e)), help);
        sub->add_option("--config", flags.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, "Output directory for report.csv and report.json");
        sub->add_option("--cache-dir", flags.cache_dir, "Profile cache directory (overrides BERNSTEIN_LAB_CACHE)");
        sub->add_option("--precision", flags.precision, "Precision floor in bits")->check(CLI::Range(0, 8192));
        sub->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", flags.seed, "Global 64-bit seed (decimal or 0x hex)");
        sub->add_option("--kmax", flags.kmax, "Largest degree k")->check(CLI::Range(0, 64));
        sub->callback([&chosen, e = e] { chosen = e; });
    }
    CLI11_PARSE(app, argc, argv);
    return run(chosen, flags);
}
