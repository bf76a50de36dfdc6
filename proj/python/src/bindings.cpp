#include "cpdp/classifiers.hpp"
#include "cpdp/dataset.hpp"
#include "cpdp/error.hpp"
#include "cpdp/harness.hpp"
#include "cpdp/metrics.hpp"
#include "cpdp/selector.hpp"
#include "cpdp/simplify.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

namespace py = pybind11;
using namespace cpdp;

namespace {

std::vector<Label> labels_of(const std::vector<bool>& buggy)
{
    std::vector<Label> out;
    out.reserve(buggy.size());
    for (bool b : buggy)
        out.push_back(b ? Label::buggy : Label::clean);
    return out;
}

py::dict measure_dict(const MeasureSet& m)
{
    py::dict d;
    d["prec"] = m.prec;
    d["pd"] = m.pd;
    d["pf"] = m.pf;
    d["f_measure"] = m.f_measure;
    d["g_measure"] = m.g_measure;
    d["accuracy"] = m.accuracy;
    d["auc"] = m.auc;
    d["dpr"] = m.dpr;
    return d;
}

Release make_release(const std::string& id, const std::vector<std::vector<double>>& rows,
                     const std::vector<std::uint32_t>& bugs, bool log_transformed)
{
    if (rows.size() != bugs.size())
        throw Error(ErrorKind::shape, "rows and bugs differ in length");
    std::vector<Instance> inst;
    inst.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        inst.emplace_back(rows[i], bugs[i]);
    return Release(ReleaseId::parse(id), std::move(inst), log_transformed);
}

std::vector<PredictionPair> to_pairs(const std::vector<std::tuple<std::string, double, double, double>>& rows)
{
    std::vector<PredictionPair> out;
    for (const auto& [t, d, m1, m2] : rows)
        out.push_back({t, d, m1, m2});
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Training data simplification for cross-project defect prediction";

    static py::exception<Error> error(m, "CpdpError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            auto type = py::reinterpret_borrow<py::object>(error.ptr());
            py::object exc = type(e.what());
            exc.attr("kind") = to_string(e.kind());
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    // dataset

    py::class_<Release>(m, "Release")
        .def(py::init(&make_release), py::arg("id"), py::arg("rows"), py::arg("bugs"),
             py::arg("log_transformed") = false)
        .def_property_readonly("id", [](const Release& r) { return r.id().str(); })
        .def_property_readonly("project", [](const Release& r) { return r.id().project; })
        .def_property_readonly("version", [](const Release& r) { return r.id().version; })
        .def_property_readonly("log_transformed", &Release::log_transformed)
        .def_property_readonly("arity", &Release::arity)
        .def_property_readonly("buggy_count", &Release::buggy_count)
        .def_property_readonly("defect_ratio", &Release::defect_ratio)
        .def_property_readonly("rows",
                               [](const Release& r) {
                                   std::vector<std::vector<double>> out;
                                   for (const auto& i : r.instances())
                                       out.push_back(i.metrics);
                                   return out;
                               })
        .def_property_readonly("bugs",
                               [](const Release& r) {
                                   std::vector<std::uint32_t> out;
                                   for (const auto& i : r.instances())
                                       out.push_back(i.bug_count);
                                   return out;
                               })
        .def("__len__", &Release::size)
        .def("__repr__", [](const Release& r) {
            return "<Release " + r.id().str() + " n=" + std::to_string(r.size()) + ">";
        });

    py::class_<Repository>(m, "Repository")
        .def(py::init<>())
        .def(py::init<std::vector<Release>>())
        .def("add", &Repository::add)
        .def_property_readonly("releases", &Repository::releases)
        .def_property_readonly("instance_count", &Repository::instance_count)
        .def("find",
             [](const Repository& repo, const std::string& id) -> std::optional<Release> {
                 if (const auto* r = repo.find(ReleaseId::parse(id)))
                     return *r;
                 return std::nullopt;
             })
        .def("__len__", &Repository::size);

    m.def("metric_names", [] { return MetricSchema::promise20().names(); });
    m.def(
        "read_csv",
        [](const std::string& path) {
            std::ifstream in(path, std::ios::binary);
            if (!in)
                throw Error(ErrorKind::io, "cannot open " + path);
            return parse_csv(in, MetricSchema::promise20());
        },
        py::arg("path"));
    m.def(
        "read_repository", [](const std::string& dir) { return read_repository(dir, MetricSchema::promise20()); },
        py::arg("dir"));
    m.def(
        "log_transform",
        [](const Release& r, bool clamp) { return log_transform(r, {clamp}); }, py::arg("release"),
        py::arg("clamp_negative") = false);
    m.def(
        "candidate_pool",
        [](const Repository& repo, const std::string& target) {
            return candidate_pool(repo, ReleaseId::parse(target));
        },
        py::arg("repo"), py::arg("target"));

    // simplification

    m.def("characterize", [](const Release& r) { return characterize(r).values; });

    py::class_<SimplifiedTDS>(m, "SimplifiedTDS")
        .def_property_readonly("strategy", [](const SimplifiedTDS& t) { return to_string(t.strategy); })
        .def_readonly("r", &SimplifiedTDS::r)
        .def_readonly("k", &SimplifiedTDS::k)
        .def_property_readonly("buggy_count", &SimplifiedTDS::buggy_count)
        .def_property_readonly("source_releases",
                               [](const SimplifiedTDS& t) {
                                   std::vector<std::string> out;
                                   for (const auto& id : t.source_releases)
                                       out.push_back(id.str());
                                   return out;
                               })
        .def_property_readonly("origins",
                               [](const SimplifiedTDS& t) {
                                   std::vector<std::pair<std::string, std::size_t>> out;
                                   for (const auto& o : t.origins)
                                       out.emplace_back(o.release.str(), o.row);
                                   return out;
                               })
        .def("__len__", &SimplifiedTDS::size);

    m.def(
        "simplify",
        [](const Repository& pool, const Release& target, const std::string& strategy, std::size_t r,
           std::size_t k) { return simplify(pool, target, parse_strategy(strategy), {r, k}); },
        py::arg("pool"), py::arg("target"), py::arg("strategy"), py::arg("r") = 1, py::arg("k") = 10);

    // classifiers

    py::class_<TrainedModel>(m, "Model")
        .def_property_readonly("kind", [](const TrainedModel& t) { return to_string(t.kind); })
        .def_readonly("arity", &TrainedModel::arity)
        .def_property_readonly("degenerate", [](const TrainedModel& t) { return t.provenance.degenerate; })
        .def("score", [](const TrainedModel& t, const std::vector<double>& x) { return predict(t, x).score; })
        .def("scores",
             [](const TrainedModel& t, const Release& r) {
                 std::vector<double> out;
                 for (const auto& p : predict(t, r))
                     out.push_back(p.score);
                 return out;
             })
        .def("to_json", [](const TrainedModel& t) { return model_to_json(t); })
        .def_static("from_json", [](const std::string& s) { return model_from_json(s); });

    m.def(
        "train",
        [](const std::string& kind, const SimplifiedTDS& tds) { return train(parse_model_kind(kind), tds); },
        py::arg("kind"), py::arg("tds"));
    m.def(
        "train_release",
        [](const std::string& kind, const Release& r) {
            return train(parse_model_kind(kind), std::span<const Instance>(r.instances()));
        },
        py::arg("kind"), py::arg("release"));

    // metrics

    m.def(
        "measures",
        [](std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
            return measure_dict(measures({tp, fp, tn, fn}));
        },
        py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));
    m.def(
        "auc",
        [](const std::vector<double>& scores, const std::vector<bool>& buggy) {
            return auc(scores, labels_of(buggy));
        },
        py::arg("scores"), py::arg("buggy"));
    m.def(
        "dpr",
        [](std::size_t tb, std::size_t tt, std::size_t sb, std::size_t st) { return dpr(tb, tt, sb, st).value; },
        py::arg("train_buggy"), py::arg("train_total"), py::arg("test_buggy"), py::arg("test_total"));
    m.def(
        "wilcoxon",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const auto w = wilcoxon_signed_rank(a, b);
            py::dict d;
            d["statistic"] = w.statistic;
            d["w_plus"] = w.w_plus;
            d["w_minus"] = w.w_minus;
            d["p_value"] = w.p_value;
            d["n"] = w.n;
            d["exact"] = w.exact;
            return d;
        },
        py::arg("a"), py::arg("b"));

    // selector

    py::class_<RhoRule>(m, "RhoRule")
        .def_property_readonly("assumption", [](const RhoRule& r) { return to_string(r.assumption); })
        .def_readonly("threshold", &RhoRule::threshold)
        .def_readonly("rho_plus", &RhoRule::rho_plus)
        .def_readonly("rho_minus", &RhoRule::rho_minus)
        .def_readonly("accuracy", &RhoRule::accuracy)
        .def("describe", &RhoRule::describe)
        .def("recommend", [](const RhoRule& r, double d) { return to_string(recommend(d, r)); })
        .def("__repr__", [](const RhoRule& r) { return "<RhoRule " + r.describe() + ">"; });

    m.def(
        "sweep_rho",
        [](const std::vector<std::tuple<std::string, double, double, double>>& pairs,
           const std::string& assumption) { return sweep_rho(to_pairs(pairs), parse_assumption(assumption)); },
        py::arg("pairs"), py::arg("assumption") = "both",
        "pairs: (target, dpr, measure with riTDS-1, measure with riTDS-2)");
    m.def(
        "evaluate_rule",
        [](const std::vector<std::tuple<std::string, double, double, double>>& pairs, const RhoRule& rule) {
            const auto e = evaluate_rule(to_pairs(pairs), rule);
            py::dict d;
            d["n"] = e.n;
            d["accuracy_rule"] = e.accuracy_rule;
            d["accuracy_always1"] = e.accuracy_always1;
            d["accuracy_always2"] = e.accuracy_always2;
            d["mean_measure_rule"] = e.mean_measure_rule;
            d["mean_measure_best"] = e.mean_measure_best;
            return d;
        },
        py::arg("pairs"), py::arg("rule"));

    // harness; records come back as JSON lines and are decoded in Python

    m.def(
        "run_experiment",
        [](const Repository& repo, const std::vector<std::string>& methods,
           const std::vector<std::string>& classifiers, const std::vector<std::size_t>& r_values, std::size_t k,
           std::size_t jobs) {
            ExperimentConfig cfg;
            cfg.methods.clear();
            for (const auto& s : methods)
                cfg.methods.push_back(parse_method(s));
            cfg.classifiers.clear();
            for (const auto& s : classifiers)
                cfg.classifiers.push_back(parse_model_kind(s));
            cfg.r_values = r_values;
            cfg.k = k;
            cfg.jobs = jobs;
            std::vector<EvaluationRecord> records;
            {
                py::gil_scoped_release release;
                records = run_experiment(repo, cfg);
            }
            std::vector<std::string> out;
            for (const auto& r : records)
                out.push_back(record_to_json(r));
            return out;
        },
        py::arg("repo"), py::arg("methods") = std::vector<std::string>{"ritds2"},
        py::arg("classifiers") = std::vector<std::string>{"nb"},
        py::arg("r_values") = std::vector<std::size_t>{1, 2, 3}, py::arg("k") = 10, py::arg("jobs") = 1);
}
