#include "cpdp/harness.hpp"

#include "cpdp/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cpdp {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kRecordFormatVersion = 1;

ordered_json opt(const std::optional<double>& v)
{
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> opt_from(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<double>();
}

std::string fmt(double v)
{
    if (std::isnan(v))
        return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

ordered_json rule_json(const RhoRule& rule)
{
    ordered_json ranges = ordered_json::array();
    for (const auto& r : rule.ritds1_ranges)
        ranges.push_back({{"lower", std::isfinite(r.lower) ? ordered_json(r.lower) : ordered_json(nullptr)},
                          {"upper", std::isfinite(r.upper) ? ordered_json(r.upper) : ordered_json(nullptr)}});
    return {{"assumption", to_string(rule.assumption)},
            {"threshold", rule.threshold},
            {"rho_plus", std::isnan(rule.rho_plus) ? ordered_json(nullptr) : ordered_json(rule.rho_plus)},
            {"rho_minus", std::isnan(rule.rho_minus) ? ordered_json(nullptr) : ordered_json(rule.rho_minus)},
            {"accuracy", rule.accuracy},
            {"ritds1_ranges", std::move(ranges)},
            {"description", rule.describe()}};
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    out << content;
}

} // namespace

std::string record_to_json(const EvaluationRecord& rec, bool with_runtime)
{
    ordered_json j;
    j["v"] = kRecordFormatVersion;
    j["target"] = rec.target;
    j["strategy"] = to_string(rec.method);
    j["classifier"] = to_string(rec.classifier);
    j["r"] = rec.r;
    j["ok"] = rec.ok();
    if (rec.failure) {
        j["failure"] = *rec.failure;
    } else {
        j["tds_size"] = rec.tds_size;
        j["tds_buggy"] = rec.tds_buggy;
        j["tp"] = rec.cm.tp;
        j["fp"] = rec.cm.fp;
        j["tn"] = rec.cm.tn;
        j["fn"] = rec.cm.fn;
        const auto& m = rec.measures;
        j["prec"] = opt(m.prec);
        j["pd"] = opt(m.pd);
        j["pf"] = opt(m.pf);
        j["f_measure"] = opt(m.f_measure);
        j["g_measure"] = opt(m.g_measure);
        j["accuracy"] = opt(m.accuracy);
        j["auc"] = opt(m.auc);
        j["dpr"] = opt(m.dpr);
        j["degenerate_model"] = rec.degenerate_model;
        j["sources"] = rec.sources;
        if (rec.chosen)
            j["chosen"] = to_string(*rec.chosen);
    }
    if (with_runtime)
        j["runtime_ms"] = rec.runtime_ms;
    return j.dump();
}

EvaluationRecord record_from_json(std::string_view line)
{
    try {
        const auto j = json::parse(line);
        if (j.at("v").get<int>() != kRecordFormatVersion)
            throw Error(ErrorKind::parse, "unsupported record version");
        EvaluationRecord rec;
        rec.target = j.at("target").get<std::string>();
        rec.method = parse_method(j.at("strategy").get<std::string>());
        rec.classifier = parse_model_kind(j.at("classifier").get<std::string>());
        rec.r = j.at("r").get<std::size_t>();
        if (!j.at("ok").get<bool>()) {
            rec.failure = j.at("failure").get<std::string>();
        } else {
            rec.tds_size = j.at("tds_size").get<std::size_t>();
            rec.tds_buggy = j.at("tds_buggy").get<std::size_t>();
            rec.cm = {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(),
                      j.at("tn").get<std::size_t>(), j.at("fn").get<std::size_t>()};
            auto& m = rec.measures;
            m.prec = opt_from(j, "prec");
            m.pd = opt_from(j, "pd");
            m.pf = opt_from(j, "pf");
            m.f_measure = opt_from(j, "f_measure");
            m.g_measure = opt_from(j, "g_measure");
            m.accuracy = opt_from(j, "accuracy");
            m.auc = opt_from(j, "auc");
            m.dpr = opt_from(j, "dpr");
            rec.degenerate_model = j.at("degenerate_model").get<bool>();
            rec.sources = j.at("sources").get<std::vector<std::string>>();
            if (j.contains("chosen"))
                rec.chosen = parse_strategy(j.at("chosen").get<std::string>());
        }
        if (j.contains("runtime_ms"))
            rec.runtime_ms = j.at("runtime_ms").get<double>();
        return rec;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed record: ") + e.what());
    }
}

std::vector<EvaluationRecord> read_records(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot open '" + path + "'");
    std::vector<EvaluationRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(record_from_json(line));
        } catch (const Error& e) {
            throw Error(e.kind(), path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    if (out.empty())
        throw Error(ErrorKind::empty_input, "no records in '" + path + "'");
    return out;
}

std::string summary_csv(const Summary& s)
{
    std::ostringstream out;
    out << "strategy,classifier,r,records,failed,mean_tds_size,mean_f_measure,mean_g_measure,"
           "mean_prec,mean_pd,mean_pf,mean_auc,excluded_f,excluded_g,excluded_prec,excluded_auc\n";
    for (const auto& row : s.rows) {
        out << to_string(row.method) << ',' << to_string(row.classifier) << ',' << row.r << ','
            << row.records << ',' << row.failed << ',' << fmt(row.mean_tds_size) << ','
            << fmt(row.mean_f) << ',' << fmt(row.mean_g) << ',' << fmt(row.mean_prec) << ','
            << fmt(row.mean_pd) << ',' << fmt(row.mean_pf) << ',' << fmt(row.mean_auc) << ','
            << row.excluded_f << ',' << row.excluded_g << ',' << row.excluded_prec << ','
            << row.excluded_auc << '\n';
    }
    return out.str();
}

std::string wilcoxon_csv(const Summary& s)
{
    std::ostringstream out;
    out << "strategy,classifier,r,measure,pairs,ratio_to_itds,statistic,w_plus,w_minus,p_value,exact,note\n";
    for (const auto& row : s.wilcoxon) {
        out << to_string(row.method) << ',' << to_string(row.classifier) << ',' << row.r << ','
            << to_string(row.measure) << ',' << row.pairs << ',' << fmt(row.ratio_of_means) << ',';
        if (row.test)
            out << fmt(row.test->statistic) << ',' << fmt(row.test->w_plus) << ','
                << fmt(row.test->w_minus) << ',' << fmt(row.test->p_value) << ','
                << (row.test->exact ? "exact" : "normal");
        else
            out << ",,,,";
        std::string note = row.note;
        std::replace(note.begin(), note.end(), ',', ';');
        out << ',' << note << '\n';
    }
    return out.str();
}

std::string rho_rules_json(const Summary& s)
{
    ordered_json rules = ordered_json::array();
    for (const auto& rep : s.rho) {
        ordered_json j;
        j["classifier"] = to_string(rep.classifier);
        j["measure"] = to_string(rep.measure);
        j["pairs"] = rep.pairs;
        j["skipped"] = rep.skipped;
        j["plus"] = rep.plus ? rule_json(*rep.plus) : ordered_json(nullptr);
        j["minus"] = rep.minus ? rule_json(*rep.minus) : ordered_json(nullptr);
        j["combined"] = rep.combined ? rule_json(*rep.combined) : ordered_json(nullptr);
        if (rep.evaluation) {
            const auto& ev = *rep.evaluation;
            auto num = [](double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); };
            j["evaluation"] = {{"accuracy_rule", ev.accuracy_rule},
                               {"accuracy_always_ritds1", ev.accuracy_always1},
                               {"accuracy_always_ritds2", ev.accuracy_always2},
                               {"gain_vs_ritds1", num(ev.gain_vs_always1)},
                               {"gain_vs_ritds2", num(ev.gain_vs_always2)},
                               {"mean_measure_rule", ev.mean_measure_rule},
                               {"mean_measure_ritds1", ev.mean_measure_always1},
                               {"mean_measure_ritds2", ev.mean_measure_always2},
                               {"mean_measure_best", ev.mean_measure_best}};
        } else {
            j["evaluation"] = nullptr;
        }
        if (!rep.note.empty())
            j["note"] = rep.note;
        rules.push_back(std::move(j));
    }
    return ordered_json{{"format", "cpdp-rho-rules"}, {"version", 1}, {"rules", std::move(rules)}}.dump(2) + "\n";
}

std::string config_json(const ExperimentConfig& c)
{
    ordered_json methods = ordered_json::array(), classifiers = ordered_json::array();
    for (auto m : c.methods)
        methods.push_back(to_string(m));
    for (auto k : c.classifiers)
        classifiers.push_back(to_string(k));
    return ordered_json{{"repo", c.repo_path},
                        {"strategies", methods},
                        {"classifiers", classifiers},
                        {"r", c.r_values},
                        {"k", c.k},
                        {"seed", c.seed},
                        {"rho_measure", to_string(c.rho_measure)},
                        {"log_transform", c.log_transform},
                        {"clamp_negative", c.clamp_negative}}
               .dump(2) + "\n";
}

void write_reports(const std::string& dir, const std::vector<EvaluationRecord>& records,
                   const ExperimentConfig* config)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorKind::io, "cannot create '" + dir + "': " + ec.message());
    std::string lines;
    for (const auto& rec : records)
        lines += record_to_json(rec) + "\n";
    write_file(fs::path(dir) / "records.jsonl", lines);
    const auto summary = summarize(records);
    write_file(fs::path(dir) / "summary.csv", summary_csv(summary));
    write_file(fs::path(dir) / "wilcoxon.csv", wilcoxon_csv(summary));
    write_file(fs::path(dir) / "rho_rules.json", rho_rules_json(summary));
    if (config)
        write_file(fs::path(dir) / "config.json", config_json(*config));
}

} // namespace cpdp
