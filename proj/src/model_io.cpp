#include "cpdp/classifiers.hpp"

#include "cpdp/error.hpp"

#include "json.hpp"

namespace cpdp {

namespace {

using nlohmann::json;

constexpr int kModelFormatVersion = 1;

json provenance_json(const TrainingProvenance& p)
{
    return {{"n_instances", p.n_instances}, {"n_buggy", p.n_buggy},
            {"degenerate", p.degenerate},   {"converged", p.converged},
            {"iterations", p.iterations},   {"learning_rate", p.learning_rate},
            {"max_iterations", p.max_iterations}, {"tolerance", p.tolerance}};
}

TrainingProvenance provenance_from(const json& j)
{
    TrainingProvenance p;
    p.n_instances = j.at("n_instances").get<std::size_t>();
    p.n_buggy = j.at("n_buggy").get<std::size_t>();
    p.degenerate = j.at("degenerate").get<bool>();
    p.converged = j.at("converged").get<bool>();
    p.iterations = j.at("iterations").get<std::size_t>();
    p.learning_rate = j.at("learning_rate").get<double>();
    p.max_iterations = j.at("max_iterations").get<std::size_t>();
    p.tolerance = j.at("tolerance").get<double>();
    return p;
}

} // namespace

std::string model_to_json(const TrainedModel& model)
{
    json doc{{"format", "cpdp-model"},
             {"version", kModelFormatVersion},
             {"kind", to_string(model.kind)},
             {"arity", model.arity},
             {"provenance", provenance_json(model.provenance)}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, NaiveBayesParams>) {
                doc["params"] = {{"type", "gaussian_nb"},
                                 {"priors", p.priors},
                                 {"means", p.means},
                                 {"variances", p.variances}};
            } else if constexpr (std::is_same_v<T, LogisticParams>) {
                doc["params"] = {{"type", "logistic"}, {"weights", p.weights}};
            } else if constexpr (std::is_same_v<T, TreeParams>) {
                json nodes = json::array();
                for (const auto& n : p.nodes)
                    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold},
                                     {"left", n.left},       {"right", n.right},
                                     {"buggy", n.buggy},     {"clean", n.clean}});
                doc["params"] = {{"type", "tree"}, {"nodes", std::move(nodes)}};
            } else {
                doc["params"] = {{"type", "constant"}, {"score", p.score}};
            }
        },
        model.params);
    return doc.dump(2);
}

TrainedModel model_from_json(std::string_view text)
{
    try {
        const auto doc = json::parse(text);
        if (doc.at("format") != "cpdp-model")
            throw Error(ErrorKind::parse, "not a cpdp-model document");
        if (doc.at("version").get<int>() != kModelFormatVersion)
            throw Error(ErrorKind::parse, "unsupported model format version " +
                                              doc.at("version").dump());
        TrainedModel model;
        model.kind = parse_model_kind(doc.at("kind").get<std::string>());
        model.arity = doc.at("arity").get<std::size_t>();
        model.provenance = provenance_from(doc.at("provenance"));
        const auto& p = doc.at("params");
        const auto type = p.at("type").get<std::string>();
        if (type == "gaussian_nb") {
            NaiveBayesParams nb;
            nb.priors = p.at("priors").get<std::array<double, 2>>();
            nb.means = p.at("means").get<std::array<std::vector<double>, 2>>();
            nb.variances = p.at("variances").get<std::array<std::vector<double>, 2>>();
            for (std::size_t c = 0; c < 2; ++c)
                if (nb.means[c].size() != model.arity || nb.variances[c].size() != model.arity)
                    throw Error(ErrorKind::shape, "naive Bayes parameters do not match arity");
            model.params = std::move(nb);
        } else if (type == "logistic") {
            LogisticParams lr{p.at("weights").get<std::vector<double>>()};
            if (lr.weights.size() != model.arity + 1)
                throw Error(ErrorKind::shape, "logistic weights do not match arity");
            model.params = std::move(lr);
        } else if (type == "tree") {
            TreeParams tp;
            for (const auto& n : p.at("nodes")) {
                TreeNode node;
                node.feature = n.at("feature").get<int>();
                node.threshold = n.at("threshold").get<double>();
                node.left = n.at("left").get<std::size_t>();
                node.right = n.at("right").get<std::size_t>();
                node.buggy = n.at("buggy").get<std::size_t>();
                node.clean = n.at("clean").get<std::size_t>();
                tp.nodes.push_back(node);
            }
            if (tp.nodes.empty())
                throw Error(ErrorKind::parse, "tree has no nodes");
            for (const auto& n : tp.nodes)
                if (!n.leaf() && (n.left >= tp.nodes.size() || n.right >= tp.nodes.size() ||
                                  static_cast<std::size_t>(n.feature) >= model.arity))
                    throw Error(ErrorKind::parse, "tree node references are out of range");
            model.params = std::move(tp);
        } else if (type == "constant") {
            model.params = ConstantParams{p.at("score").get<double>()};
        } else {
            throw Error(ErrorKind::parse, "unknown model parameter type '" + type + "'");
        }
        return model;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed model document: ") + e.what());
    }
}

} // namespace cpdp
