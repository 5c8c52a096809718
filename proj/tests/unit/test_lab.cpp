#include <doctest.h>

#include "bernstein/cache.hpp"
#include "bernstein/lab.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace bernstein;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("bernstein_lab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
}

std::string config_error(const json& j) {
    try {
        ExperimentConfig::from_json(j);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigInvalid) return e.what();
        return "wrong code";
    }
    return "no error";
}

std::vector<std::string> lines(const std::string& body) {
    std::vector<std::string> out;
    std::istringstream in(body);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            f.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    f.push_back(cur);
    return f;
}

GrowthProfile sample_profile(int bits) {
    GrowthProfile p;
    p.t_samples = {1.0, 2.0, 3.0};
    p.phi_values = {std::exp(1.0), std::exp(2.0), std::exp(3.0)};
    p.nu_values = {1.0, 2.0, 3.0};
    p.rho_hat = 1.0;
    p.source_spec_hash = "abc";
    p.precision_bits = bits;
    return p;
}

}  // namespace

TEST_CASE("cache store then lookup is a bit-identical hit") {
    ProfileCache cache(scratch("cache_hit"));
    const auto p = sample_profile(512);
    cache.store("key", p);
    const auto got = cache.lookup("key", 512);
    REQUIRE(got.has_value());
    CHECK(ProfileCache::encode(*got) == ProfileCache::encode(p));
    CHECK(slurp(cache.path_for("key")) == ProfileCache::encode(p));
    CHECK(cache.warnings().empty());
}

TEST_CASE("cache never serves another precision") {
    ProfileCache cache(scratch("cache_precision"));
    cache.store("key", sample_profile(512));
    CHECK_FALSE(cache.lookup("key", 1024).has_value());
    CHECK(cache.lookup("key", 512).has_value());
    CHECK_FALSE(cache.lookup("absent", 512).has_value());
}

TEST_CASE("cache file layout") {
    const auto bytes = ProfileCache::encode(sample_profile(768));
    REQUIRE(bytes.size() > 52);
    CHECK(bytes.substr(0, 4) == "BLPC");
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[12 + i])) << (8 * i);
    CHECK(len == bytes.size() - 20 - 32);
    CHECK(static_cast<unsigned char>(bytes[8]) + 256 * static_cast<unsigned char>(bytes[9]) == 768);
    // the trailer is SHA-256 of everything before it
    const std::string body = bytes.substr(0, bytes.size() - 32);
    std::string hex;
    for (unsigned char c : bytes.substr(bytes.size() - 32)) {
        static const char* d = "0123456789abcdef";
        hex += d[c >> 4];
        hex += d[c & 15];
    }
    CHECK(hex == sha256_hex(body));
}

TEST_CASE("corrupt cache entries are misses with a warning") {
    ProfileCache cache(scratch("cache_corrupt"));
    cache.store("flip", sample_profile(512));
    auto bytes = slurp(cache.path_for("flip"));
    bytes[30] ^= 0x01;
    spit(cache.path_for("flip"), bytes);
    CHECK_FALSE(cache.lookup("flip", 512).has_value());
    CHECK(cache.warnings().size() == 1);

    cache.store("short", sample_profile(512));
    spit(cache.path_for("short"), slurp(cache.path_for("short")).substr(0, 40));
    CHECK_FALSE(cache.lookup("short", 512).has_value());
    CHECK(cache.warnings().size() == 2);

    CHECK_THROWS_AS(ProfileCache::decode("nonsense"), Error);
    try {
        ProfileCache::decode(bytes);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CacheCorrupt);
    }
}

TEST_CASE("cache directory precedence") {
    ::unsetenv("BERNSTEIN_LAB_CACHE");
    CHECK(resolve_cache_dir("", "cfg") == fs::path("cfg"));
    CHECK(resolve_cache_dir("", "") == fs::path(".bernstein_cache"));
    ::setenv("BERNSTEIN_LAB_CACHE", "/tmp/env_cache", 1);
    CHECK(resolve_cache_dir("", "cfg") == fs::path("/tmp/env_cache"));
    CHECK(resolve_cache_dir("flag", "cfg") == fs::path("flag"));
    ::unsetenv("BERNSTEIN_LAB_CACHE");
}

TEST_CASE("config validation reports json pointers") {
    CHECK(config_error({{"experiment", "quotient"}, {"bogus", 1}}).find("/bogus") != std::string::npos);
    CHECK(config_error({{"k_range", {1, 2}}}).find("/experiment") != std::string::npos);
    CHECK(config_error({{"experiment", "nope"}}).find("/experiment") != std::string::npos);
    CHECK(config_error({{"experiment", "quotient"}, {"k_range", {4, 2}}}).find("/k_range") != std::string::npos);
    CHECK(config_error({{"experiment", "quotient"}, {"k_range", {1, "x"}}}).find("/k_range/1") != std::string::npos);
    CHECK(config_error({{"experiment", "quotient"}, {"r_values", {1.0, -2.0}}}).find("/r_values/1") !=
          std::string::npos);
    CHECK(config_error({{"experiment", "quotient"}, {"curve", {{"coords", {"exp", "unknown_fn"}}}}})
              .find("/curve/coords/1") != std::string::npos);
    CHECK(config_error({{"experiment", "quotient"}, {"curve", {{"coords", {{{"kind", "weird"}}}}}}})
              .find("/curve/coords/0") != std::string::npos);
    CHECK(config_error({{"experiment", "quotient"}, {"method", "sideways"}}).find("/method") != std::string::npos);
    CHECK(config_error({{"experiment", "zeros"}, {"mode", "thm9"}}).find("/mode") != std::string::npos);
    CHECK(config_error({{"experiment", "profile"}, {"t_grid", {3, 2, 1}}}).find("/t_grid") != std::string::npos);
    CHECK(config_error({{"experiment", "verify"}, {"criteria", {1, 11}}}).find("/criteria/1") != std::string::npos);
    CHECK(config_error({{"experiment", "quotient"}, {"seed", "0xZZ"}}).find("/seed") != std::string::npos);
    CHECK(config_error({{"experiment", "kernel"}, {"k_range", {0, 3}}}).find("/k_range/0") != std::string::npos);
}

TEST_CASE("config defaults and shorthands") {
    auto c = ExperimentConfig::from_json({{"experiment", "quotient"}, {"seed", "0xB3A57E1D"}});
    CHECK(c.seed == kDefaultSeed);
    CHECK(c.curve.label == "exp");
    CHECK(c.curve.m() == 1);
    CHECK(ExperimentConfig::from_json({{"experiment", "quotient"}}).seed == 0xB3A57E1DULL);
    auto p = ExperimentConfig::from_json(
        {{"experiment", "profile"}, {"t_grid", {{"start", 2}, {"stop", 10}, {"step", 0.5}}}});
    CHECK(p.t_grid.size() == 17);
    CHECK(p.t_grid.back() == 10.0);
    auto two = curve_from_json({{"coords", {"exp", "exp_z2"}}});
    CHECK(two.label == "exp+exp_z2");
    CHECK(two.m() == 2);
    auto round = ExperimentConfig::from_json(c.to_json());
    CHECK(round.to_json() == c.to_json());
    auto t = ExperimentConfig::from_json({{"experiment", "exponent"}, {"theory", {{"class", "exp_curve"}, {"parameter", 2}}}});
    REQUIRE(t.theory.has_value());
    CHECK(t.theory->exponent == 3.0);
    CHECK(ExperimentConfig::from_json(t.to_json()).to_json() == t.to_json());
    CHECK(ExperimentConfig::from_json(p.to_json()).t_grid == p.t_grid);
}

TEST_CASE("cell seeds depend on every coordinate of the cell") {
    const auto a = cell_seed(1, "d", 2, 1.0);
    CHECK(a == cell_seed(1, "d", 2, 1.0));
    CHECK(a != cell_seed(2, "d", 2, 1.0));
    CHECK(a != cell_seed(1, "e", 2, 1.0));
    CHECK(a != cell_seed(1, "d", 3, 1.0));
    CHECK(a != cell_seed(1, "d", 2, 0.5));
}

TEST_CASE("csv quoting") {
    ReportRow r{"a,b", "verify", "1", "", "1", "say \"hi\"", "x", "PASS"};
    CHECK(csv_line(r) == "\"a,b\",verify,1,,1,\"say \"\"hi\"\"\",x,PASS");
    CHECK(csv_header_line() == "curve_label,experiment,k,r,value,aux1,aux2,status");
}

TEST_CASE("quotient grid on e^z, k = 2..6") {
    auto cfg = ExperimentConfig::from_json({{"experiment", "quotient"}, {"k_range", {2, 6}}, {"r_values", {1.0}}});
    cfg.out_dir = scratch("quotient").string();
    const auto res = run_config(cfg);
    CHECK(res.exit_status == 0);
    const auto body = lines(csv_body(res.csv_path));
    REQUIRE(body.size() == 6);
    CHECK(body[0] == csv_header_line());
    double prev = 0.0;
    for (std::size_t i = 1; i < body.size(); ++i) {
        const auto f = split(body[i]);
        REQUIRE(f.size() == 8);
        CHECK(f[2] == std::to_string(i + 1));
        const double v = std::stod(f[4]);
        CHECK(v > prev);
        prev = v;
        CHECK(f[7] == "ok");
    }
    const auto file = slurp(res.csv_path);
    CHECK(file.rfind("# ", 0) == 0);
    const auto report = json::parse(slurp(res.json_path));
    CHECK(report["cells"].size() == 5);
    CHECK(report.contains("generated_at"));
}

TEST_CASE("failed cells are isolated and recorded") {
    auto cfg = ExperimentConfig::from_json(
        {{"experiment", "kernel"}, {"curve", {{"coords", {"cubic"}}}}, {"k_range", {1, 4}}});
    cfg.out_dir = scratch("isolation").string();
    const auto res = run_config(cfg);
    CHECK(res.cells == 4);
    CHECK(res.failed_cells == 2);
    CHECK(res.exit_status == 3);
    REQUIRE(res.rows.size() == 4);
    CHECK(res.rows[0].status == "ok");
    CHECK(res.rows[2].status == "error:RestrictedIdenticallyZero");
    CHECK(std::stod(res.rows[0].value) >= std::stod(res.rows[0].aux2));
}

TEST_CASE("exponent fits use the surviving cells") {
    auto cfg = ExperimentConfig::from_json(
        {{"experiment", "exponent"}, {"curve", {{"coords", {"cubic"}}}}, {"k_range", {1, 7}}});
    cfg.out_dir = scratch("exponent").string();
    const auto res = run_config(cfg);
    const auto& fit = res.rows.back();
    CHECK(fit.experiment == "exponent_fit");
    CHECK(std::stoi(fit.aux2) == 6);
    CHECK(std::abs(std::stod(fit.value) - 1.0) < 0.05);
    CHECK(fit.status == "consistent");
}

TEST_CASE("identical configs give identical csv bodies") {
    const json j = {{"experiment", "quotient"},
                    {"k_range", {1, 3}},
                    {"r_values", {0.5, 1.0}},
                    {"method", "random_search"},
                    {"trials", 8},
                    {"jobs", 2}};
    std::string bodies[2];
    for (int run = 0; run < 2; ++run) {
        auto cfg = ExperimentConfig::from_json(j);
        cfg.out_dir = scratch("repro" + std::to_string(run)).string();
        bodies[run] = csv_body(run_config(cfg).csv_path);
    }
    CHECK(bodies[0] == bodies[1]);
    CHECK(lines(bodies[0]).size() == 7);
    auto other = ExperimentConfig::from_json(j);
    other.seed = 7;
    other.out_dir = scratch("repro_seed").string();
    CHECK(csv_body(run_config(other).csv_path) != bodies[0]);
}

TEST_CASE("profile runs go through the cache and failures never reach it") {
    const auto dir = scratch("profile");
    json j = {{"experiment", "profile"},
              {"curve", {{"coords", {"exp", "exp_exp_exp"}}}},
              {"t_grid", {{"start", 2}, {"stop", 10}, {"step", 1}}}};
    auto cfg = ExperimentConfig::from_json(j);
    cfg.cache_dir = (dir / "cache").string();
    cfg.out_dir = (dir / "a").string();
    const auto first = run_config(cfg);
    CHECK(first.failed_cells == 1);
    CHECK(first.report["cells"][0]["cache_hit"] == false);
    int entries = 0;
    for (const auto& e : fs::directory_iterator(dir / "cache")) entries += e.path().extension() == ".blpc";
    CHECK(entries == 1);
    cfg.out_dir = (dir / "b").string();
    const auto second = run_config(cfg);
    CHECK(second.report["cells"][0]["cache_hit"] == true);
    CHECK(csv_body(first.csv_path) == csv_body(second.csv_path));
}

TEST_CASE("profile of f_h with power h has order zero") {
    auto cfg = ExperimentConfig::from_json({{"experiment", "profile"},
                                            {"curve", {{"coords", {"fh_power_1.5"}}}},
                                            {"t_grid", {{"start", 2}, {"stop", 10}, {"step", 1}}}});
    cfg.out_dir = scratch("fh_profile").string();
    cfg.cache_dir = scratch("fh_cache").string();
    const auto res = run_config(cfg);
    const auto& cell = res.report["cells"][0];
    CHECK(cell["phi_values"].size() == 9);
    CHECK(cell["nu_values"].size() == 9);
    CHECK(std::abs(cell["rho_hat"].get<double>()) < 0.05);
}

TEST_CASE("classc on a two-coordinate curve") {
    auto cfg = ExperimentConfig::from_json({{"experiment", "classc"},
                                            {"curve", {{"coords", {"exp", "exp_z2"}}}},
                                            {"t_grid", {{"start", 2}, {"stop", 5}, {"step", 0.5}}}});
    cfg.out_dir = scratch("classc").string();
    const auto res = run_config(cfg);
    CHECK(res.failed_cells == 0);
    bool saw_chain = false;
    for (const auto& r : res.rows) {
        if (r.k == "chain") saw_chain = true;
        if (r.aux2 == "cI") CHECK(r.status == "satisfied_on_grid");
    }
    CHECK(saw_chain);
}

TEST_CASE("verify runs the selected criteria") {
    auto cfg = ExperimentConfig::from_json({{"experiment", "verify"}, {"criteria", {7}}});
    cfg.out_dir = scratch("verify").string();
    const auto res = run_config(cfg);
    CHECK(res.exit_status == 0);
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0].status == "PASS");
    CHECK(res.rows[0].k == "7");
}
