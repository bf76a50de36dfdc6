#pragma once

#include "cpdp/simplify.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace cpdp {

// One target's outcome under both instance filters.
struct PredictionPair {
    std::string target;
    double dpr = 0.0;
    double measure1 = 0.0; // riTDS-1
    double measure2 = 0.0; // riTDS-2
};

// True when the pair belongs to the riTDS-1 group (strictly better measure).
inline bool prefers_ritds1(const PredictionPair& p) noexcept { return p.measure1 > p.measure2; }

struct Grouping {
    std::vector<std::size_t> ritds1;
    std::vector<std::size_t> ritds2;
};

Grouping group(std::span<const PredictionPair> pairs);

enum class Assumption {
    rho_plus,  // riTDS-1 when dpr >= rho
    rho_minus, // riTDS-2 when dpr >= rho
    both,      // best combination of the two
};

const char* to_string(Assumption a) noexcept;
Assumption parse_assumption(std::string_view text);

// Half-open DPR interval [lower, upper).
struct DprInterval {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool contains(double dpr) const noexcept { return lower <= dpr && dpr < upper; }
};

struct RhoRule {
    Assumption assumption = Assumption::rho_plus;
    // rho for a single-assumption rule; for `both` the rho+ and rho- values
    // the combination was built from
    double threshold = 0.0;
    double rho_plus = std::numeric_limits<double>::quiet_NaN();
    double rho_minus = std::numeric_limits<double>::quiet_NaN();
    double accuracy = 0.0;
    // union of intervals on which riTDS-1 is recommended
    std::vector<DprInterval> ritds1_ranges;

    std::string describe() const;
};

Strategy recommend(double dpr, const RhoRule& rule);

// Candidate thresholds: min + i (max - min) / 100 for i = 0..100 (i = 100 is
// exactly max), then the sentinel max + (max - min) / 100.
std::vector<double> rho_grid(std::span<const double> dprs);

// Fits a threshold rule by sweeping rho over rho_grid. The argmax-accuracy
// threshold wins, ties to the smallest rho. Throws ErrorKind::parameter with
// fewer than two pairs or when all dpr values are equal.
RhoRule sweep_rho(std::span<const PredictionPair> pairs, Assumption assumption);

// Same sweep over explicit group labels (true = riTDS-1 group).
RhoRule sweep_rho(std::span<const double> dprs, const std::vector<bool>& in_group1,
                  Assumption assumption);

// Accuracy of a rule (fraction of pairs whose recommended filter is the one
// the pair's grouping picked).
double recommendation_accuracy(std::span<const PredictionPair> pairs, const RhoRule& rule);

struct RuleEvaluation {
    std::size_t n = 0;
    double accuracy_rule = 0.0;
    double accuracy_always1 = 0.0;
    double accuracy_always2 = 0.0;
    // relative change of the rule's accuracy over each baseline (0.408 = +40.8%);
    // NaN when the baseline accuracy is 0
    double gain_vs_always1 = 0.0;
    double gain_vs_always2 = 0.0;
    double mean_measure_rule = 0.0;
    double mean_measure_always1 = 0.0;
    double mean_measure_always2 = 0.0;
    double mean_measure_best = 0.0; // per-pair max of the two filters
};

RuleEvaluation evaluate_rule(std::span<const PredictionPair> pairs, const RhoRule& rule);

} // namespace cpdp
