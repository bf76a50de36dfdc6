#include "cpdp/cli.hpp"

#include "cpdp/classifiers.hpp"
#include "cpdp/dataset.hpp"
#include "cpdp/error.hpp"
#include "cpdp/harness.hpp"
#include "cpdp/metrics.hpp"
#include "cpdp/selector.hpp"
#include "cpdp/simplify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cpdp::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kDataDirEnv = "CPDP_DATA_DIR";

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    out << text;
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Release prepare(Release rel, bool log, bool clamp)
{
    if (!log || rel.log_transformed())
        return rel;
    return log_transform(rel, {clamp});
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::vector<std::string>& items, Parse parse)
{
    std::vector<T> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ','))
            if (!part.empty())
                out.push_back(parse(part));
    }
    return out;
}

std::string tds_csv(const SimplifiedTDS& tds, const MetricSchema& schema)
{
    std::ostringstream out;
    out << "# log_transformed=1\nname,version";
    for (const auto& n : schema.names()) {
        std::string lower = n;
        for (auto& c : lower)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out << ',' << lower;
    }
    out << ",bug\n";
    char buf[32];
    for (std::size_t i = 0; i < tds.size(); ++i) {
        out << tds.origins[i].release.project << ',' << tds.origins[i].release.version;
        for (double v : tds.instances[i].metrics) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
        }
        out << ',' << tds.instances[i].bug_count << '\n';
    }
    return out.str();
}

std::string tds_provenance(const SimplifiedTDS& tds, const ReleaseId& target)
{
    ordered_json sources = ordered_json::array(), origins = ordered_json::array();
    for (const auto& s : tds.source_releases)
        sources.push_back(s.str());
    for (const auto& o : tds.origins)
        origins.push_back({{"release", o.release.str()}, {"row", o.row}});
    return ordered_json{{"format", "cpdp-tds-provenance"},
                        {"version", 1},
                        {"target", target.str()},
                        {"strategy", to_string(tds.strategy)},
                        {"r", tds.r},
                        {"k", tds.k},
                        {"size", tds.size()},
                        {"buggy", tds.buggy_count()},
                        {"source_releases", sources},
                        {"origins", origins}}
               .dump(2) + "\n";
}

ordered_json measures_json(const MeasureSet& m)
{
    auto opt = [](const std::optional<double>& v) {
        return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    return {{"prec", opt(m.prec)},           {"pd", opt(m.pd)},
            {"pf", opt(m.pf)},               {"f_measure", opt(m.f_measure)},
            {"g_measure", opt(m.g_measure)}, {"accuracy", opt(m.accuracy)},
            {"auc", opt(m.auc)},             {"dpr", opt(m.dpr)}};
}

std::vector<PredictionPair> read_pairs(const std::string& path)
{
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::empty_input, "pairs file '" + path + "' is empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) {
            while (!col.empty() && (col.back() == '\r' || col.back() == ' '))
                col.pop_back();
            header.push_back(col);
        }
    }
    auto column = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw Error(ErrorKind::schema, "pairs file lacks column '" + name + "'");
    };
    const auto c_target = column("target"), c_dpr = column("dpr"), c_m1 = column("measure1"),
               c_m2 = column("measure2");
    std::vector<PredictionPair> pairs;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        ++row;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (cells.size() < header.size())
            throw Error(ErrorKind::parse, "pairs row " + std::to_string(row) + " is short");
        auto num = [&](std::size_t c) {
            try {
                std::size_t used = 0;
                double v = std::stod(cells[c], &used);
                return v;
            } catch (const std::exception&) {
                throw Error(ErrorKind::parse, "pairs row " + std::to_string(row) + ", column '" +
                                                  header[c] + "' is not numeric");
            }
        };
        PredictionPair p{cells[c_target], num(c_dpr), num(c_m1), num(c_m2)};
        if (!(p.dpr > 0.0))
            throw Error(ErrorKind::domain, "pairs row " + std::to_string(row) + ": dpr must be positive");
        pairs.push_back(std::move(p));
    }
    if (pairs.empty())
        throw Error(ErrorKind::empty_input, "pairs file '" + path + "' has no rows");
    return pairs;
}

ordered_json rule_summary(const RhoRule& rule, std::span<const PredictionPair> pairs)
{
    ordered_json ranges = ordered_json::array();
    for (const auto& r : rule.ritds1_ranges)
        ranges.push_back({{"lower", std::isfinite(r.lower) ? ordered_json(r.lower) : ordered_json(nullptr)},
                          {"upper", std::isfinite(r.upper) ? ordered_json(r.upper) : ordered_json(nullptr)}});
    const auto ev = evaluate_rule(pairs, rule);
    auto num = [](double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); };
    return {{"assumption", to_string(rule.assumption)},
            {"threshold", rule.threshold},
            {"accuracy", rule.accuracy},
            {"ritds1_ranges", ranges},
            {"description", rule.describe()},
            {"accuracy_always_ritds1", ev.accuracy_always1},
            {"accuracy_always_ritds2", ev.accuracy_always2},
            {"gain_vs_ritds1", num(ev.gain_vs_always1)},
            {"gain_vs_ritds2", num(ev.gain_vs_always2)},
            {"mean_measure_rule", ev.mean_measure_rule},
            {"mean_measure_best", ev.mean_measure_best}};
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Training-data simplification for cross-project defect prediction", "cpdp"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse and log-transform PROMISE CSVs");
    std::string schema_spec = "builtin:promise20";
    std::vector<std::string> inputs;
    std::string out_dir;
    bool clamp = false, no_log = false;
    ingest->add_option("--schema", schema_spec, "builtin:promise20 or a file of metric names");
    ingest->add_option("--input", inputs, "CSV files")->required()->expected(1, -1);
    ingest->add_option("--out", out_dir, "output directory")->required();
    ingest->add_flag("--clamp-negative", clamp, "clamp negative metric values to 0");
    ingest->add_flag("--no-log", no_log, "skip the ln(x+1) transform");

    // simplify
    auto* simp = app.add_subcommand("simplify", "Build a simplified training set for one target");
    std::string strategy_text, target_text, repo_dir, out_file;
    std::size_t r = 1, k = 10;
    simp->add_option("--strategy", strategy_text, "rtds|itds|ritds1|ritds2|none")->required();
    simp->add_option("--r", r, "number of nearest releases");
    simp->add_option("--k", k, "number of nearest instances");
    simp->add_option("--target", target_text, "target release, project:version")->required();
    simp->add_option("--repo", repo_dir, "directory of release CSVs")->envname(kDataDirEnv)->required();
    simp->add_option("--out", out_file, "output CSV; provenance goes to <out>.provenance.json")->required();
    simp->add_option("--schema", schema_spec);
    simp->add_flag("--clamp-negative", clamp);
    simp->add_flag("--no-log", no_log);

    // predict
    auto* pred = app.add_subcommand("predict", "Train on one CSV, predict another");
    std::string classifier_text = "nb", train_path, test_path, model_in, model_out;
    pred->add_option("--classifier", classifier_text, "nb|lr|dt");
    pred->add_option("--train", train_path, "training CSV");
    pred->add_option("--model", model_in, "load a saved model instead of training");
    pred->add_option("--test", test_path, "test CSV")->required();
    pred->add_option("--out", out_dir, "output directory")->required();
    pred->add_option("--save-model", model_out, "write the trained model as JSON");
    pred->add_option("--schema", schema_spec);
    pred->add_flag("--clamp-negative", clamp);
    pred->add_flag("--no-log", no_log);

    // experiment
    auto* exp = app.add_subcommand("experiment", "Leave-one-release-out CPDP over a repository");
    ExperimentConfig config;
    std::vector<std::string> strategies{"ritds2"}, classifiers{"nb"}, rs{"1,2,3"};
    std::string rho_measure = "f";
    bool timings = false;
    exp->add_option("--repo", config.repo_path, "directory of release CSVs")->envname(kDataDirEnv)->required();
    exp->add_option("--strategies", strategies, "none,rtds,itds,ritds1,ritds2,ritds-rho")->delimiter(',');
    exp->add_option("--classifiers", classifiers, "nb,lr,dt")->delimiter(',');
    exp->add_option("--r", rs, "r values, e.g. 1,2,3")->delimiter(',');
    exp->add_option("--k", config.k, "nearest instances per query");
    exp->add_option("--seed", config.seed, "recorded for provenance; the pipeline is deterministic");
    exp->add_option("--jobs", config.jobs, "worker threads (no effect on results)");
    exp->add_option("--rho-measure", rho_measure, "f|g: grouping measure for riTDS-rho");
    exp->add_option("--out", config.output_dir, "output directory")->required();
    exp->add_option("--schema", schema_spec);
    exp->add_flag("--clamp-negative", config.clamp_negative);
    exp->add_flag("--no-log", no_log);
    exp->add_flag("--timings", timings, "add runtime_ms to records.jsonl");

    // sweep-rho
    auto* sweep = app.add_subcommand("sweep-rho", "Fit the DPR threshold rule on prediction pairs");
    std::string pairs_path, assumption_text = "both";
    sweep->add_option("--pairs", pairs_path, "CSV with target,dpr,measure1,measure2")->required();
    sweep->add_option("--assumption", assumption_text, "plus|minus|both");
    sweep->add_option("--out", out_file, "output JSON")->required();

    // report
    auto* report = app.add_subcommand("report", "Regenerate reports from records.jsonl");
    std::string records_path;
    report->add_option("--records", records_path, "records.jsonl")->required();
    report->add_option("--out", out_dir, "output directory")->required();

    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        const auto schema = MetricSchema::load(schema_spec);

        if (*ingest) {
            ordered_json manifest = ordered_json::array();
            fs::create_directories(out_dir);
            Repository seen;
            for (const auto& path : inputs) {
                auto rel = prepare(read_csv_file(path, schema), !no_log, clamp);
                std::ostringstream csv;
                write_csv(csv, rel, schema);
                const auto file = fs::path(out_dir) / (rel.id().str() + ".csv");
                write_text(file, csv.str());
                manifest.push_back({{"release", rel.id().str()},
                                    {"source", path},
                                    {"instances", rel.size()},
                                    {"buggy", rel.buggy_count()},
                                    {"defect_ratio", rel.defect_ratio()},
                                    {"log_transformed", rel.log_transformed()}});
                seen.add(std::move(rel));
                out << file.string() << '\n';
            }
            write_text(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
            return exit_ok;
        }

        if (*simp) {
            ExperimentConfig c;
            c.repo_path = repo_dir;
            c.log_transform = !no_log;
            c.clamp_negative = clamp;
            const auto repo = load_repository(c, schema);
            const auto target_id = ReleaseId::parse(target_text);
            const auto& target = repo.at(target_id);
            const auto pool = candidate_pool(repo, target_id);
            const auto tds = simplify(pool, target, parse_strategy(strategy_text), {r, k});
            write_text(out_file, tds_csv(tds, schema));
            write_text(out_file + ".provenance.json", tds_provenance(tds, target_id));
            out << tds.size() << " instances from " << tds.source_releases.size() << " releases\n";
            return exit_ok;
        }

        if (*pred) {
            if (train_path.empty() == model_in.empty())
                throw CLI::ValidationError("predict", "give exactly one of --train or --model");
            TrainedModel model;
            if (!model_in.empty()) {
                model = model_from_json(read_text(model_in));
            } else {
                auto train_rel = prepare(read_csv_file(train_path, schema), !no_log, clamp);
                model = train(parse_model_kind(classifier_text), train_rel.instances());
            }
            const auto test = prepare(read_csv_file(test_path, schema), !no_log, clamp);
            const auto predictions = predict(model, test);
            std::ostringstream csv;
            csv << "row,score,label,truth\n";
            for (std::size_t i = 0; i < predictions.size(); ++i)
                csv << i << ',' << predictions[i].score << ',' << to_string(predictions[i].label)
                    << ',' << to_string(test.instances()[i].label) << '\n';
            write_text(fs::path(out_dir) / "predictions.csv", csv.str());
            auto m = measures(confusion(predictions, test));
            if (test.buggy_count() > 0 && test.buggy_count() < test.size()) {
                std::vector<double> scores;
                std::vector<Label> truth;
                for (std::size_t i = 0; i < predictions.size(); ++i) {
                    scores.push_back(predictions[i].score);
                    truth.push_back(test.instances()[i].label);
                }
                m.auc = auc(scores, truth);
            }
            const auto cm = confusion(predictions, test);
            ordered_json doc{{"target", test.id().str()},
                             {"classifier", to_string(model.kind)},
                             {"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn},
                             {"measures", measures_json(m)}};
            write_text(fs::path(out_dir) / "measures.json", doc.dump(2) + "\n");
            if (!model_out.empty())
                write_text(model_out, model_to_json(model) + "\n");
            out << doc.dump() << '\n';
            return exit_ok;
        }

        if (*exp) {
            config.methods = parse_list<Method>(strategies, parse_method);
            config.classifiers = parse_list<ModelKind>(classifiers, parse_model_kind);
            config.r_values = parse_list<std::size_t>(rs, [](const std::string& s) {
                try {
                    return static_cast<std::size_t>(std::stoul(s));
                } catch (const std::exception&) {
                    throw Error(ErrorKind::parameter, "r value '" + s + "' is not an integer");
                }
            });
            config.rho_measure = parse_measure(rho_measure);
            config.log_transform = !no_log;
            try {
                config.validate();
            } catch (const Error& e) {
                err << "error: " << e.what() << '\n' << exp->help();
                return exit_usage;
            }
            const auto repo = load_repository(config, schema);
            auto records = run_experiment(repo, config);
            write_reports(config.output_dir, records, &config);
            if (timings) {
                std::string lines;
                for (const auto& rec : records)
                    lines += record_to_json(rec, true) + "\n";
                write_text(fs::path(config.output_dir) / "records.jsonl", lines);
            }
            std::size_t failed = 0;
            for (const auto& rec : records)
                failed += !rec.ok();
            out << records.size() << " records (" << failed << " failed) written to "
                << config.output_dir << '\n';
            return exit_ok;
        }

        if (*sweep) {
            const auto pairs = read_pairs(pairs_path);
            const auto assumption = parse_assumption(assumption_text);
            const auto g = group(pairs);
            ordered_json doc{{"format", "cpdp-rho-sweep"},
                             {"version", 1},
                             {"pairs", pairs.size()},
                             {"group_ritds1", g.ritds1.size()},
                             {"group_ritds2", g.ritds2.size()}};
            if (assumption == Assumption::both) {
                doc["plus"] = rule_summary(sweep_rho(pairs, Assumption::rho_plus), pairs);
                doc["minus"] = rule_summary(sweep_rho(pairs, Assumption::rho_minus), pairs);
                doc["combined"] = rule_summary(sweep_rho(pairs, Assumption::both), pairs);
            } else {
                doc[to_string(assumption)] = rule_summary(sweep_rho(pairs, assumption), pairs);
            }
            write_text(out_file, doc.dump(2) + "\n");
            out << doc.dump() << '\n';
            return exit_ok;
        }

        if (*report) {
            const auto records = read_records(records_path);
            write_reports(out_dir, records);
            out << records.size() << " records summarized into " << out_dir << '\n';
            return exit_ok;
        }
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return e.kind() == ErrorKind::parameter ? exit_usage : exit_data;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    }
    return exit_usage;
}

} // namespace cpdp::cli
