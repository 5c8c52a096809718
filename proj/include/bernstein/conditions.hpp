#pragma once

// Finite-grid checks of the growth conditions defining class 𝒞 and of the
// chain hypotheses for multi-coordinate curves. Every verdict is "on grid":
// the witness sequence and its trend are reported, never a proof.

#include "bernstein/functions.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace bernstein {

enum class Verdict { SatisfiedOnGrid, ViolatedAt, Inconclusive };

std::string_view verdict_name(Verdict v);

struct ConditionReport {
    std::string condition_id;  // cI, cII, growth_1_11, chain_1_4, chain_1_5, h_chain_1_13, h_chain_1_14, remark_1_22
    std::vector<double> grid;
    std::vector<double> witness_values;
    Verdict verdict = Verdict::Inconclusive;
    std::optional<double> violated_at;  // grid sample, present iff verdict == ViolatedAt
    double trend = 0.0;                 // least-squares slope over the final third
    std::string note;
    std::pair<int, int> pair{0, 0};     // 1-based coordinate pair for chain reports

    bool satisfied() const { return verdict == Verdict::SatisfiedOnGrid; }
    nlohmann::json to_json() const;
};

ConditionReport check_condition_I(const EntireFunctionSpec& f, const std::vector<double>& t_grid,
                                  int precision_bits = mp::kDefaultBits);
ConditionReport check_condition_II(const EntireFunctionSpec& f, const std::vector<double>& t_grid,
                                   int precision_bits = mp::kDefaultBits);
ConditionReport check_growth_1_11(const EntireFunctionSpec& f, const std::vector<double>& t_grid,
                                  int precision_bits = mp::kDefaultBits);
std::vector<ConditionReport> check_chain_conditions(const CurveSpec& curve, const std::vector<double>& r_grid,
                                                    int precision_bits = mp::kDefaultBits);
/// split_l = 0 puts every pair in the upper (integral-quotient) block.
std::vector<ConditionReport> check_h_chain(const std::vector<HSpec>& h_specs, int split_l,
                                           const std::vector<double>& t_grid);

/// Convex nondecreasing piecewise-linear surrogate of y(t) built from an
/// isotonic regression of the slopes; used as ln ψ for condition II.
std::vector<double> convex_increasing_fit(const std::vector<double>& t, const std::vector<double>& y);

/// Threshold above which an estimated order is treated as infinite.
constexpr double kInfiniteOrderThreshold = 50.0;

}  // namespace bernstein
