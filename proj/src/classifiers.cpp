#include "cpdp/classifiers.hpp"

#include "cpdp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <type_traits>

namespace cpdp {

const char* to_string(ModelKind kind) noexcept
{
    switch (kind) {
    case ModelKind::nb: return "nb";
    case ModelKind::lr: return "lr";
    case ModelKind::dt: return "dt";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view text)
{
    std::string key;
    for (char c : text)
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (key == "nb" || key == "naivebayes") return ModelKind::nb;
    if (key == "lr" || key == "logistic") return ModelKind::lr;
    if (key == "dt" || key == "tree" || key == "j48") return ModelKind::dt;
    throw Error(ErrorKind::parameter, "unknown classifier '" + std::string(text) + "'");
}

namespace {

constexpr std::size_t kClean = 0;
constexpr std::size_t kBuggy = 1;

std::size_t check_training_set(std::span<const Instance> data)
{
    if (data.empty())
        throw Error(ErrorKind::parameter, "training set is empty");
    const auto arity = data.front().metrics.size();
    for (const auto& inst : data)
        if (inst.metrics.size() != arity)
            throw Error(ErrorKind::shape, "training instances have mixed arity");
    return arity;
}

std::size_t count_buggy(std::span<const Instance> data)
{
    return static_cast<std::size_t>(
        std::count_if(data.begin(), data.end(), [](const Instance& i) { return i.buggy(); }));
}

// Returns a constant model when `data` holds a single class.
std::optional<TrainedModel> degenerate(ModelKind kind, std::size_t arity,
                                       std::span<const Instance> data)
{
    const auto n_buggy = count_buggy(data);
    if (n_buggy != 0 && n_buggy != data.size())
        return std::nullopt;
    TrainedModel model;
    model.kind = kind;
    model.arity = arity;
    model.params = ConstantParams{n_buggy == 0 ? 0.0 : 1.0};
    model.provenance.n_instances = data.size();
    model.provenance.n_buggy = n_buggy;
    model.provenance.degenerate = true;
    return model;
}

} // namespace

// ---------------------------------------------------------------------------
// Naive Bayes

TrainedModel train_nb(std::span<const Instance> data)
{
    const auto arity = check_training_set(data);
    if (auto constant = degenerate(ModelKind::nb, arity, data))
        return *constant;

    NaiveBayesParams p;
    std::array<std::size_t, 2> counts{};
    for (auto c : {kClean, kBuggy}) {
        p.means[c].assign(arity, 0.0);
        p.variances[c].assign(arity, 0.0);
    }
    for (const auto& inst : data) {
        const auto c = static_cast<std::size_t>(inst.label);
        ++counts[c];
        for (std::size_t j = 0; j < arity; ++j)
            p.means[c][j] += inst.metrics[j];
    }
    for (auto c : {kClean, kBuggy}) {
        for (auto& m : p.means[c])
            m /= static_cast<double>(counts[c]);
        p.priors[c] = static_cast<double>(counts[c]) / static_cast<double>(data.size());
    }
    for (const auto& inst : data) {
        const auto c = static_cast<std::size_t>(inst.label);
        for (std::size_t j = 0; j < arity; ++j) {
            const double d = inst.metrics[j] - p.means[c][j];
            p.variances[c][j] += d * d;
        }
    }
    for (auto c : {kClean, kBuggy})
        for (auto& v : p.variances[c])
            v = std::max(v / static_cast<double>(counts[c]), NaiveBayesParams::variance_floor);

    TrainedModel model;
    model.kind = ModelKind::nb;
    model.arity = arity;
    model.params = std::move(p);
    model.provenance.n_instances = data.size();
    model.provenance.n_buggy = counts[kBuggy];
    return model;
}

namespace {

double nb_score(const NaiveBayesParams& p, std::span<const double> x)
{
    std::array<double, 2> log_joint{};
    for (auto c : {kClean, kBuggy}) {
        double s = std::log(p.priors[c]);
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double var = p.variances[c][j];
            const double d = x[j] - p.means[c][j];
            s -= 0.5 * std::log(2.0 * std::numbers::pi * var) + d * d / (2.0 * var);
        }
        log_joint[c] = s;
    }
    // P(buggy | x) = 1 / (1 + exp(log P(clean, x) - log P(buggy, x)))
    const double diff = log_joint[kClean] - log_joint[kBuggy];
    if (diff == 0.0)
        return 0.5;
    return 1.0 / (1.0 + std::exp(diff));
}

} // namespace

// ---------------------------------------------------------------------------
// Logistic regression

namespace logistic {

namespace {

double linear(std::span<const double> w, std::span<const double> x)
{
    double z = w[0];
    for (std::size_t i = 0; i < x.size(); ++i)
        z += w[i + 1] * x[i];
    return z;
}

void check_weights(std::span<const double> w, std::size_t arity)
{
    if (w.size() != arity + 1)
        throw Error(ErrorKind::shape, "weight vector has " + std::to_string(w.size()) +
                                          " entries, expected " + std::to_string(arity + 1));
}

// log(1 / (1 + exp(-z))) without overflow
double log_sigmoid(double z)
{
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

} // namespace

double probability(std::span<const double> weights, std::span<const double> x, Label label)
{
    check_weights(weights, x.size());
    const double z = linear(weights, x);
    const double s = label == Label::buggy ? -z : z;
    return 1.0 / (1.0 + std::exp(s));
}

double log_likelihood(std::span<const double> weights, std::span<const Instance> data)
{
    double ll = 0.0;
    for (const auto& inst : data) {
        check_weights(weights, inst.metrics.size());
        const double z = linear(weights, inst.metrics);
        ll += inst.buggy() ? log_sigmoid(z) : log_sigmoid(-z);
    }
    return ll;
}

std::vector<double> gradient(std::span<const double> weights, std::span<const Instance> data)
{
    std::vector<double> g(weights.size(), 0.0);
    for (const auto& inst : data) {
        check_weights(weights, inst.metrics.size());
        const double residual =
            (inst.buggy() ? 1.0 : 0.0) - probability(weights, inst.metrics, Label::buggy);
        g[0] += residual;
        for (std::size_t i = 0; i < inst.metrics.size(); ++i)
            g[i + 1] += residual * inst.metrics[i];
    }
    return g;
}

} // namespace logistic

TrainedModel train_lr(std::span<const Instance> data, LogisticOptions options)
{
    const auto arity = check_training_set(data);
    if (!(options.learning_rate > 0.0) || options.max_iterations == 0 || !(options.tolerance > 0.0))
        throw Error(ErrorKind::parameter, "invalid logistic regression options");
    TrainedModel model;
    model.kind = ModelKind::lr;
    model.arity = arity;
    model.provenance.learning_rate = options.learning_rate;
    model.provenance.max_iterations = options.max_iterations;
    model.provenance.tolerance = options.tolerance;
    if (auto constant = degenerate(ModelKind::lr, arity, data)) {
        constant->provenance = {constant->provenance.n_instances, constant->provenance.n_buggy,
                                true, true, 0, options.learning_rate, options.max_iterations,
                                options.tolerance};
        return *constant;
    }
    const auto n = data.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    // Standardize each column; constant columns keep scale 1.
    std::vector<double> center(arity, 0.0), scale(arity, 0.0);
    for (const auto& inst : data)
        for (std::size_t j = 0; j < arity; ++j)
            center[j] += inst.metrics[j];
    for (auto& c : center)
        c *= inv_n;
    for (const auto& inst : data)
        for (std::size_t j = 0; j < arity; ++j) {
            const double d = inst.metrics[j] - center[j];
            scale[j] += d * d;
        }
    for (auto& s : scale) {
        s = std::sqrt(s * inv_n);
        if (s < 1e-12)
            s = 1.0;
    }
    std::vector<double> z(n * arity);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = data[i].buggy() ? 1.0 : 0.0;
        for (std::size_t j = 0; j < arity; ++j)
            z[i * arity + j] = (data[i].metrics[j] - center[j]) / scale[j];
    }

    std::vector<double> w(arity + 1, 0.0), g(arity + 1);
    std::size_t iter = 0;
    bool converged = false;
    while (iter < options.max_iterations) {
        ++iter;
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &z[i * arity];
            double s = w[0];
            for (std::size_t j = 0; j < arity; ++j)
                s += w[j + 1] * row[j];
            const double residual = y[i] - 1.0 / (1.0 + std::exp(-s));
            g[0] += residual;
            for (std::size_t j = 0; j < arity; ++j)
                g[j + 1] += residual * row[j];
        }
        double max_step = 0.0;
        for (std::size_t j = 0; j <= arity; ++j) {
            const double step = options.learning_rate * g[j] * inv_n;
            w[j] += step;
            max_step = std::max(max_step, std::abs(step));
        }
        if (max_step < options.tolerance) {
            converged = true;
            break;
        }
    }

    // Map back to raw features: w_j' = w_j / s_j, w_0' = w_0 - sum w_j c_j / s_j.
    LogisticParams p;
    p.weights.assign(arity + 1, 0.0);
    p.weights[0] = w[0];
    for (std::size_t j = 0; j < arity; ++j) {
        p.weights[j + 1] = w[j + 1] / scale[j];
        p.weights[0] -= w[j + 1] * center[j] / scale[j];
    }
    for (double v : p.weights)
        if (!std::isfinite(v))
            throw Error(ErrorKind::domain, "logistic regression diverged");

    model.params = std::move(p);
    model.provenance.n_instances = n;
    model.provenance.n_buggy = count_buggy(data);
    model.provenance.converged = converged;
    model.provenance.iterations = iter;
    return model;
}

// ---------------------------------------------------------------------------
// Decision tree

namespace tree {

double entropy(std::span<const std::size_t> counts)
{
    const auto total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (total == 0)
        return 0.0;
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0)
            continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double information_gain(std::array<std::size_t, 2> left, std::array<std::size_t, 2> right)
{
    const std::array<std::size_t, 2> parent{left[0] + right[0], left[1] + right[1]};
    const double n = static_cast<double>(parent[0] + parent[1]);
    if (n == 0.0)
        return 0.0;
    const double nl = static_cast<double>(left[0] + left[1]);
    const double nr = static_cast<double>(right[0] + right[1]);
    const double gain = entropy(parent) - (nl / n) * entropy(left) - (nr / n) * entropy(right);
    // Rounding can leave a tiny negative residue for uninformative splits.
    return std::max(gain, 0.0);
}

} // namespace tree

namespace {

constexpr double kMinGain = 1e-12;

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

SplitChoice best_split(std::span<const Instance> data, std::span<const std::size_t> rows,
                       std::size_t arity, std::vector<std::size_t>& order)
{
    SplitChoice best;
    std::array<std::size_t, 2> total{};
    for (auto r : rows)
        ++total[static_cast<std::size_t>(data[r].label)];
    for (std::size_t f = 0; f < arity; ++f) {
        order.assign(rows.begin(), rows.end());
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = data[a].metrics[f], vb = data[b].metrics[f];
            return va < vb || (va == vb && a < b);
        });
        std::array<std::size_t, 2> left{};
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            ++left[static_cast<std::size_t>(data[order[i]].label)];
            const double lo = data[order[i]].metrics[f];
            const double hi = data[order[i + 1]].metrics[f];
            if (lo == hi)
                continue;
            const auto n_left = i + 1;
            const auto n_right = order.size() - n_left;
            if (n_left < TreeParams::min_leaf || n_right < TreeParams::min_leaf)
                continue;
            const std::array<std::size_t, 2> right{total[0] - left[0], total[1] - left[1]};
            const double gain = tree::information_gain(left, right);
            if (gain > best.gain) {
                double mid = lo + (hi - lo) / 2.0;
                if (!(mid < hi))
                    mid = lo;
                best = {static_cast<int>(f), mid, gain};
            }
        }
    }
    return best;
}

double tree_score(const TreeParams& p, std::span<const double> x)
{
    std::size_t at = 0;
    while (!p.nodes[at].leaf()) {
        const auto& node = p.nodes[at];
        at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    const auto& leaf = p.nodes[at];
    return (static_cast<double>(leaf.buggy) + 1.0) /
           (static_cast<double>(leaf.buggy + leaf.clean) + 2.0);
}

} // namespace

TrainedModel train_dt(std::span<const Instance> data)
{
    const auto arity = check_training_set(data);
    if (data.size() < TreeParams::min_leaf)
        throw Error(ErrorKind::parameter, "decision tree needs at least " +
                                              std::to_string(TreeParams::min_leaf) + " instances");
    TreeParams p;
    struct Pending {
        std::size_t node;
        std::vector<std::size_t> rows;
    };
    std::vector<Pending> stack;
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    p.nodes.emplace_back();
    stack.push_back({0, std::move(all)});
    std::vector<std::size_t> order;

    while (!stack.empty()) {
        auto job = std::move(stack.back());
        stack.pop_back();
        TreeNode node;
        for (auto r : job.rows)
            (data[r].buggy() ? node.buggy : node.clean) += 1;
        const bool pure = node.buggy == 0 || node.clean == 0;
        SplitChoice split;
        if (!pure && job.rows.size() >= 2 * TreeParams::min_leaf)
            split = best_split(data, job.rows, arity, order);
        if (split.feature >= 0 && split.gain > kMinGain) {
            std::vector<std::size_t> left, right;
            for (auto r : job.rows)
                (data[r].metrics[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right)
                    .push_back(r);
            node.feature = split.feature;
            node.threshold = split.threshold;
            node.left = p.nodes.size();
            node.right = p.nodes.size() + 1;
            p.nodes.emplace_back();
            p.nodes.emplace_back();
            // right pushed first so the left subtree is expanded first
            stack.push_back({node.right, std::move(right)});
            stack.push_back({node.left, std::move(left)});
        }
        p.nodes[job.node] = node;
    }

    TrainedModel model;
    model.kind = ModelKind::dt;
    model.arity = arity;
    model.params = std::move(p);
    model.provenance.n_instances = data.size();
    model.provenance.n_buggy = count_buggy(data);
    model.provenance.degenerate = count_buggy(data) == 0 || count_buggy(data) == data.size();
    return model;
}

TrainedModel train(ModelKind kind, std::span<const Instance> data)
{
    switch (kind) {
    case ModelKind::nb: return train_nb(data);
    case ModelKind::lr: return train_lr(data);
    case ModelKind::dt: return train_dt(data);
    }
    throw Error(ErrorKind::parameter, "unknown classifier");
}

// ---------------------------------------------------------------------------

Prediction predict(const TrainedModel& model, std::span<const double> metrics)
{
    if (metrics.size() != model.arity)
        throw Error(ErrorKind::shape, "instance has " + std::to_string(metrics.size()) +
                                          " metrics, model expects " + std::to_string(model.arity));
    const double score = std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, NaiveBayesParams>)
                return nb_score(p, metrics);
            else if constexpr (std::is_same_v<T, LogisticParams>)
                return logistic::probability(p.weights, metrics, Label::buggy);
            else if constexpr (std::is_same_v<T, TreeParams>)
                return tree_score(p, metrics);
            else
                return p.score;
        },
        model.params);
    return Prediction::from_score(std::clamp(score, 0.0, 1.0));
}

std::vector<Prediction> predict(const TrainedModel& model, const Release& release)
{
    std::vector<Prediction> out;
    out.reserve(release.size());
    for (const auto& inst : release.instances())
        out.push_back(predict(model, inst));
    return out;
}

} // namespace cpdp
