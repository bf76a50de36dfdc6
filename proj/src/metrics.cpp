#include "cpdp/metrics.hpp"

#include "cpdp/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace cpdp {

ConfusionMatrix confusion(std::span<const Prediction> predictions, std::span<const Label> truth)
{
    if (predictions.size() != truth.size())
        throw Error(ErrorKind::shape, "predictions and truth differ in length (" +
                                          std::to_string(predictions.size()) + " vs " +
                                          std::to_string(truth.size()) + ")");
    if (predictions.empty())
        throw Error(ErrorKind::empty_input, "no predictions to evaluate");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool predicted = predictions[i].label == Label::buggy;
        const bool actual = truth[i] == Label::buggy;
        if (predicted && actual) ++cm.tp;
        else if (predicted) ++cm.fp;
        else if (actual) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

ConfusionMatrix confusion(std::span<const Prediction> predictions, const Release& truth)
{
    std::vector<Label> labels;
    labels.reserve(truth.size());
    for (const auto& inst : truth.instances())
        labels.push_back(inst.label);
    return confusion(predictions, labels);
}

MeasureSet measures(const ConfusionMatrix& cm)
{
    if (cm.total() == 0)
        throw Error(ErrorKind::empty_input, "confusion matrix is empty");
    const auto tp = static_cast<double>(cm.tp);
    const auto fp = static_cast<double>(cm.fp);
    const auto tn = static_cast<double>(cm.tn);
    const auto fn = static_cast<double>(cm.fn);

    MeasureSet m;
    if (cm.tp + cm.fp > 0) m.prec = tp / (tp + fp);
    if (cm.tp + cm.fn > 0) m.pd = tp / (tp + fn);
    if (cm.fp + cm.tn > 0) m.pf = fp / (fp + tn);
    m.accuracy = (tp + tn) / (tp + fp + tn + fn);

    if (m.pd && m.prec) {
        const double pd = *m.pd, prec = *m.prec;
        m.f_measure = (pd + prec) > 0.0 ? 2 * pd * prec / (pd + prec) : 0.0;
    }
    if (m.pd && m.pf) {
        const double pd = *m.pd, spec = 1 - *m.pf;
        m.g_measure = (pd + spec) > 0.0 ? 2 * pd * spec / (pd + spec) : 0.0;
    }
    return m;
}

double auc(std::span<const double> scores, std::span<const Label> truth)
{
    if (scores.size() != truth.size())
        throw Error(ErrorKind::shape, "scores and truth differ in length");
    for (double s : scores)
        if (std::isnan(s))
            throw Error(ErrorKind::domain, "NaN score");
    const auto n = scores.size();
    const auto n_pos = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), Label::buggy));
    const auto n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw Error(ErrorKind::undefined, "AUC needs both buggy and clean instances");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of (1-based, tie-averaged) ranks of the positives, kept doubled so
    // every quantity stays an exact integer.
    std::uint64_t doubled_rank_sum = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]])
            ++j;
        const std::uint64_t doubled_rank = i + 1 + j; // (i+1) + j == 2 * average rank
        for (std::size_t t = i; t < j; ++t)
            if (truth[order[t]] == Label::buggy)
                doubled_rank_sum += doubled_rank;
        i = j;
    }
    const auto doubled_u = doubled_rank_sum - static_cast<std::uint64_t>(n_pos) * (n_pos + 1);
    return static_cast<double>(doubled_u) / 2.0 /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

DprResult dpr(std::size_t training_buggy, std::size_t training_total, std::size_t test_buggy,
              std::size_t test_total)
{
    if (training_total == 0 || test_total == 0)
        throw Error(ErrorKind::empty_input, "DPR needs nonempty training and test sets");
    if (training_buggy > training_total || test_buggy > test_total)
        throw Error(ErrorKind::parameter, "buggy count exceeds set size");
    if (test_buggy == 0)
        throw Error(ErrorKind::undefined, "DPR is undefined: the test set has no buggy instances");
    const double train_ratio =
        static_cast<double>(training_buggy) / static_cast<double>(training_total);
    const double test_ratio = static_cast<double>(test_buggy) / static_cast<double>(test_total);
    return {train_ratio / test_ratio, training_buggy == 0};
}

DprResult dpr(std::span<const Instance> training, const Release& test)
{
    const auto buggy = static_cast<std::size_t>(std::count_if(
        training.begin(), training.end(), [](const Instance& i) { return i.buggy(); }));
    return dpr(buggy, training.size(), test.buggy_count(), test.size());
}

// ---------------------------------------------------------------------------

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw Error(ErrorKind::shape, "paired samples differ in length");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (std::isnan(d))
            throw Error(ErrorKind::domain, "NaN in paired samples");
        if (d != 0.0)
            diffs.push_back(d);
    }
    WilcoxonResult result;
    result.n = diffs.size();
    if (diffs.empty() && !a.empty()) {
        result.exact = true;
        return result; // no evidence either way: p = 1
    }
    if (diffs.size() < wilcoxon::min_pairs)
        throw Error(ErrorKind::sample_size,
                    "signed-rank test needs at least " + std::to_string(wilcoxon::min_pairs) +
                        " nonzero differences, got " + std::to_string(diffs.size()));

    const auto n = diffs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diffs[x]) < std::abs(diffs[y]);
    });
    // doubled ranks are integers even with ties
    std::vector<std::uint64_t> doubled_rank(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]]))
            ++j;
        for (std::size_t t = i; t < j; ++t)
            doubled_rank[order[t]] = i + 1 + j;
        const auto t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    std::uint64_t doubled_plus = 0, doubled_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        doubled_total += doubled_rank[i];
        if (diffs[i] > 0)
            doubled_plus += doubled_rank[i];
    }
    result.w_plus = static_cast<double>(doubled_plus) / 2.0;
    result.w_minus = static_cast<double>(doubled_total - doubled_plus) / 2.0;
    result.statistic = result.w_plus - result.w_minus;

    if (n <= wilcoxon::exact_limit) {
        // Null distribution of the doubled W+: every rank enters with sign +
        // or - independently with probability 1/2.
        std::vector<double> ways(doubled_total + 1, 0.0);
        ways[0] = 1.0;
        for (auto r : doubled_rank)
            for (std::size_t s = doubled_total; s >= r; --s)
                ways[s] += ways[s - r];
        const double all = std::ldexp(1.0, static_cast<int>(n));
        double lower = 0.0, upper = 0.0;
        for (std::size_t s = 0; s <= doubled_total; ++s) {
            if (s <= doubled_plus) lower += ways[s];
            if (s >= doubled_plus) upper += ways[s];
        }
        result.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
        result.exact = true;
    } else {
        const auto nn = static_cast<double>(n);
        const double mean = nn * (nn + 1) / 4.0;
        const double var = nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_term / 48.0;
        if (var <= 0.0) {
            result.p_value = 1.0;
        } else {
            const double z = (result.w_plus - mean) / std::sqrt(var);
            result.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
        }
        result.exact = false;
    }
    return result;
}

} // namespace cpdp
