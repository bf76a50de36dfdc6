#include "cpdp/selector.hpp"

#include "cpdp/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cpdp {

Grouping group(std::span<const PredictionPair> pairs)
{
    Grouping g;
    for (std::size_t i = 0; i < pairs.size(); ++i)
        (prefers_ritds1(pairs[i]) ? g.ritds1 : g.ritds2).push_back(i);
    return g;
}

const char* to_string(Assumption a) noexcept
{
    switch (a) {
    case Assumption::rho_plus: return "plus";
    case Assumption::rho_minus: return "minus";
    case Assumption::both: return "both";
    }
    return "?";
}

Assumption parse_assumption(std::string_view text)
{
    if (text == "plus" || text == "rho+" || text == "rho_plus") return Assumption::rho_plus;
    if (text == "minus" || text == "rho-" || text == "rho_minus") return Assumption::rho_minus;
    if (text == "both") return Assumption::both;
    throw Error(ErrorKind::parameter, "unknown assumption '" + std::string(text) + "'");
}

std::string RhoRule::describe() const
{
    if (ritds1_ranges.empty())
        return "never riTDS-1";
    std::ostringstream out;
    out.precision(4);
    for (std::size_t i = 0; i < ritds1_ranges.size(); ++i) {
        const auto& r = ritds1_ranges[i];
        if (i > 0)
            out << " or ";
        const bool lo = std::isfinite(r.lower), hi = std::isfinite(r.upper);
        if (lo && hi) out << r.lower << " <= DPR < " << r.upper;
        else if (lo) out << r.lower << " <= DPR";
        else if (hi) out << "DPR < " << r.upper;
        else out << "any DPR";
    }
    return out.str();
}

Strategy recommend(double dpr, const RhoRule& rule)
{
    for (const auto& r : rule.ritds1_ranges)
        if (r.contains(dpr))
            return Strategy::ritds1;
    return Strategy::ritds2;
}

std::vector<double> rho_grid(std::span<const double> dprs)
{
    if (dprs.size() < 2)
        throw Error(ErrorKind::parameter, "rho sweep needs at least two pairs");
    const auto [lo_it, hi_it] = std::minmax_element(dprs.begin(), dprs.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo))
        throw Error(ErrorKind::parameter, "rho sweep needs at least two distinct DPR values");
    const double step = (hi - lo) / 100.0;
    std::vector<double> grid;
    grid.reserve(102);
    for (int i = 0; i < 100; ++i)
        grid.push_back(lo + i * step);
    grid.push_back(hi);
    grid.push_back(hi + step);
    return grid;
}

namespace {

std::vector<DprInterval> ranges_for(Assumption a, double rho)
{
    if (a == Assumption::rho_plus)
        return {DprInterval{rho, std::numeric_limits<double>::infinity()}};
    return {DprInterval{-std::numeric_limits<double>::infinity(), rho}};
}

double accuracy_of(std::span<const double> dprs, const std::vector<bool>& in_group1,
                   const std::vector<DprInterval>& ranges)
{
    RhoRule probe;
    probe.ritds1_ranges = ranges;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < dprs.size(); ++i)
        correct += (recommend(dprs[i], probe) == Strategy::ritds1) == in_group1[i];
    return static_cast<double>(correct) / static_cast<double>(dprs.size());
}

RhoRule sweep_single(std::span<const double> dprs, const std::vector<bool>& in_group1,
                     Assumption assumption)
{
    RhoRule best;
    best.assumption = assumption;
    best.accuracy = -1.0;
    for (double rho : rho_grid(dprs)) {
        auto ranges = ranges_for(assumption, rho);
        const double acc = accuracy_of(dprs, in_group1, ranges);
        if (acc > best.accuracy) {
            best.threshold = rho;
            best.accuracy = acc;
            best.ritds1_ranges = std::move(ranges);
        }
    }
    (assumption == Assumption::rho_plus ? best.rho_plus : best.rho_minus) = best.threshold;
    return best;
}

} // namespace

RhoRule sweep_rho(std::span<const double> dprs, const std::vector<bool>& in_group1,
                  Assumption assumption)
{
    if (dprs.size() != in_group1.size())
        throw Error(ErrorKind::shape, "dpr values and group labels differ in length");
    for (double d : dprs)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw Error(ErrorKind::domain, "DPR values must be finite and nonnegative");
    if (assumption != Assumption::both)
        return sweep_single(dprs, in_group1, assumption);

    const auto plus = sweep_single(dprs, in_group1, Assumption::rho_plus);
    const auto minus = sweep_single(dprs, in_group1, Assumption::rho_minus);
    const double a = plus.threshold, b = minus.threshold;

    // riTDS-1 on [a, inf) and on (-inf, b): keep whichever reading of the two
    // optima scores best, simplest first on ties.
    std::vector<std::vector<DprInterval>> options{plus.ritds1_ranges, minus.ritds1_ranges};
    if (a < b)
        options.push_back({DprInterval{a, b}});
    else
        options.push_back({DprInterval{-std::numeric_limits<double>::infinity(), b},
                           DprInterval{a, std::numeric_limits<double>::infinity()}});

    RhoRule best;
    best.assumption = Assumption::both;
    best.rho_plus = a;
    best.rho_minus = b;
    best.accuracy = -1.0;
    for (std::size_t i = 0; i < options.size(); ++i) {
        const double acc = accuracy_of(dprs, in_group1, options[i]);
        if (acc > best.accuracy) {
            best.accuracy = acc;
            best.ritds1_ranges = options[i];
            best.threshold = i == 1 ? b : a;
        }
    }
    return best;
}

RhoRule sweep_rho(std::span<const PredictionPair> pairs, Assumption assumption)
{
    std::vector<double> dprs;
    std::vector<bool> in_group1;
    for (const auto& p : pairs) {
        dprs.push_back(p.dpr);
        in_group1.push_back(prefers_ritds1(p));
    }
    return sweep_rho(dprs, in_group1, assumption);
}

double recommendation_accuracy(std::span<const PredictionPair> pairs, const RhoRule& rule)
{
    if (pairs.empty())
        throw Error(ErrorKind::empty_input, "no prediction pairs");
    std::size_t correct = 0;
    for (const auto& p : pairs)
        correct += (recommend(p.dpr, rule) == Strategy::ritds1) == prefers_ritds1(p);
    return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

RuleEvaluation evaluate_rule(std::span<const PredictionPair> pairs, const RhoRule& rule)
{
    if (pairs.empty())
        throw Error(ErrorKind::empty_input, "no prediction pairs");
    RuleEvaluation ev;
    ev.n = pairs.size();
    const auto n = static_cast<double>(pairs.size());
    std::size_t correct = 0, group1 = 0;
    for (const auto& p : pairs) {
        const bool pick1 = recommend(p.dpr, rule) == Strategy::ritds1;
        correct += pick1 == prefers_ritds1(p);
        group1 += prefers_ritds1(p);
        ev.mean_measure_rule += pick1 ? p.measure1 : p.measure2;
        ev.mean_measure_always1 += p.measure1;
        ev.mean_measure_always2 += p.measure2;
        ev.mean_measure_best += std::max(p.measure1, p.measure2);
    }
    ev.accuracy_rule = static_cast<double>(correct) / n;
    ev.accuracy_always1 = static_cast<double>(group1) / n;
    ev.accuracy_always2 = static_cast<double>(pairs.size() - group1) / n;
    auto gain = [&](double base) {
        return base > 0.0 ? (ev.accuracy_rule - base) / base
                          : std::numeric_limits<double>::quiet_NaN();
    };
    ev.gain_vs_always1 = gain(ev.accuracy_always1);
    ev.gain_vs_always2 = gain(ev.accuracy_always2);
    ev.mean_measure_rule /= n;
    ev.mean_measure_always1 /= n;
    ev.mean_measure_always2 /= n;
    ev.mean_measure_best /= n;
    return ev;
}

} // namespace cpdp
