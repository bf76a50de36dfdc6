#pragma once

#include "cpdp/classifiers.hpp"
#include "cpdp/dataset.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cpdp {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Buggy is the positive class.
ConfusionMatrix confusion(std::span<const Prediction> predictions, std::span<const Label> truth);
ConfusionMatrix confusion(std::span<const Prediction> predictions, const Release& truth);

// A measure whose denominator is zero is left empty rather than set to 0.
struct MeasureSet {
    std::optional<double> prec;
    std::optional<double> pd;
    std::optional<double> pf;
    std::optional<double> f_measure;
    std::optional<double> g_measure;
    std::optional<double> accuracy;
    std::optional<double> auc;
    std::optional<double> dpr;
};

// Scalar measures from a confusion matrix (auc and dpr stay empty).
MeasureSet measures(const ConfusionMatrix& cm);

// Probability that a random buggy instance outscores a random clean one,
// ties counting one half. Throws ErrorKind::undefined with a single class.
double auc(std::span<const double> scores, std::span<const Label> truth);

struct DprResult {
    double value = 0.0;
    // training set had no buggy instances
    bool degenerate = false;
};

// (%buggy in training) / (%buggy in test). Throws ErrorKind::undefined when
// the test set has no buggy instances.
DprResult dpr(std::span<const Instance> training, const Release& test);
DprResult dpr(std::size_t training_buggy, std::size_t training_total, std::size_t test_buggy,
              std::size_t test_total);

struct WilcoxonResult {
    // W+ - W-; sign flips when the samples are swapped.
    double statistic = 0.0;
    double w_plus = 0.0;
    double w_minus = 0.0;
    double p_value = 1.0;
    // pairs left after dropping zero differences
    std::size_t n = 0;
    bool exact = false;
};

// Paired two-sided signed-rank test on a - b. Zero differences are dropped,
// tied |differences| get average ranks. Exact null distribution for n <= 20,
// normal approximation with tie correction above that.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

namespace wilcoxon {
constexpr std::size_t min_pairs = 5;
constexpr std::size_t exact_limit = 20;
} // namespace wilcoxon

} // namespace cpdp
