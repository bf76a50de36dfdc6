#pragma once

#include "cpdp/dataset.hpp"
#include "cpdp/simplify.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cpdp {

enum class ModelKind { nb, lr, dt };

const char* to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view text);

struct NaiveBayesParams {
    static constexpr double variance_floor = 1e-9;

    // Indexed by Label: [clean, buggy].
    std::array<double, 2> priors{};
    std::array<std::vector<double>, 2> means;
    std::array<std::vector<double>, 2> variances;
};

struct LogisticParams {
    // weights[0] is the intercept; weights[i + 1] multiplies metric i.
    std::vector<double> weights;
};

struct TreeNode {
    // feature < 0 marks a leaf
    int feature = -1;
    double threshold = 0.0;
    std::size_t left = 0;  // taken when value <= threshold
    std::size_t right = 0;
    std::size_t buggy = 0;
    std::size_t clean = 0;

    bool leaf() const noexcept { return feature < 0; }
};

struct TreeParams {
    static constexpr std::size_t min_leaf = 2;
    std::vector<TreeNode> nodes; // nodes[0] is the root
};

// Fitted on a single-class training set: always returns `score`.
struct ConstantParams {
    double score = 0.0;
};

struct TrainingProvenance {
    std::size_t n_instances = 0;
    std::size_t n_buggy = 0;
    bool degenerate = false;
    // LR only
    bool converged = true;
    std::size_t iterations = 0;
    double learning_rate = 0.0;
    std::size_t max_iterations = 0;
    double tolerance = 0.0;
};

struct TrainedModel {
    ModelKind kind = ModelKind::nb;
    std::size_t arity = 0;
    std::variant<NaiveBayesParams, LogisticParams, TreeParams, ConstantParams> params;
    TrainingProvenance provenance;
};

struct Prediction {
    double score = 0.0; // P(buggy)
    Label label = Label::clean;

    // Scores exactly at 0.5 count as buggy.
    static Prediction from_score(double score) noexcept
    {
        return {score, score >= 0.5 ? Label::buggy : Label::clean};
    }
};

TrainedModel train_nb(std::span<const Instance> data);

struct LogisticOptions {
    double learning_rate = 0.1;
    std::size_t max_iterations = 5000;
    double tolerance = 1e-6;
};

TrainedModel train_lr(std::span<const Instance> data, LogisticOptions options = {});
TrainedModel train_dt(std::span<const Instance> data);

TrainedModel train(ModelKind kind, std::span<const Instance> data);
inline TrainedModel train(ModelKind kind, const SimplifiedTDS& tds)
{
    return train(kind, tds.instances);
}

Prediction predict(const TrainedModel& model, std::span<const double> metrics);
inline Prediction predict(const TrainedModel& model, const Instance& instance)
{
    return predict(model, instance.metrics);
}
std::vector<Prediction> predict(const TrainedModel& model, const Release& release);

namespace logistic {

// P(Y = label | x) = 1 / (1 + exp(-+z)), z = w0 + sum w_i x_i.
double probability(std::span<const double> weights, std::span<const double> x, Label label);

// Binomial log-likelihood summed over `data`, and its gradient w.r.t. weights.
double log_likelihood(std::span<const double> weights, std::span<const Instance> data);
std::vector<double> gradient(std::span<const double> weights, std::span<const Instance> data);

} // namespace logistic

namespace tree {

// Shannon entropy in bits of a class histogram.
double entropy(std::span<const std::size_t> counts);

// Parent entropy minus the size-weighted entropy of a binary partition;
// left/right hold [clean, buggy] counts.
double information_gain(std::array<std::size_t, 2> left, std::array<std::size_t, 2> right);

} // namespace tree

// Versioned JSON document: {"format":"cpdp-model","version":1,...}.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);

} // namespace cpdp
