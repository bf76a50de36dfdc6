#pragma once

#include "cpdp/classifiers.hpp"
#include "cpdp/dataset.hpp"
#include "cpdp/metrics.hpp"
#include "cpdp/selector.hpp"
#include "cpdp/simplify.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cpdp {

// Strategies as they appear in experiment cells. `ritds_rho` defers to the
// DPR rule fitted on the riTDS-1/riTDS-2 outcomes of the same run.
enum class Method { none, rtds, itds, ritds1, ritds2, ritds_rho };

const char* to_string(Method m) noexcept;
Method parse_method(std::string_view text);

enum class Measure { f_measure, g_measure, prec };

const char* to_string(Measure m) noexcept;
Measure parse_measure(std::string_view text);
std::optional<double> get(const MeasureSet& m, Measure which) noexcept;

struct ExperimentConfig {
    std::string repo_path;
    std::vector<Method> methods{Method::ritds2};
    std::vector<ModelKind> classifiers{ModelKind::nb};
    std::vector<std::size_t> r_values{1, 2, 3};
    std::size_t k = 10;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::size_t jobs = 1;
    // measure that decides the riTDS-1/riTDS-2 grouping for riTDS-rho
    Measure rho_measure = Measure::f_measure;
    bool log_transform = true;
    bool clamp_negative = false;

    // Throws ErrorKind::parameter on an empty method/classifier/r set, k = 0,
    // or r outside {1, 2, 3}.
    void validate() const;
};

struct EvaluationRecord {
    std::string target;
    Method method = Method::none;
    ModelKind classifier = ModelKind::nb;
    std::size_t r = 0; // 0 for none and itds
    std::size_t tds_size = 0;
    std::size_t tds_buggy = 0;
    ConfusionMatrix cm;
    // auc is filled when the target has both classes; dpr is computed on the
    // rTDS for r-indexed methods and on the training set otherwise
    MeasureSet measures;
    std::vector<std::string> sources;
    // ritds_rho only: the filter the rule picked
    std::optional<Strategy> chosen;
    bool degenerate_model = false;
    std::optional<std::string> failure;
    double runtime_ms = 0.0;

    bool ok() const noexcept { return !failure.has_value(); }
};

// Leave-one-release-out over `repo`: every release is the target once and is
// predicted in full by a model trained on the simplified pool of the other
// projects. The repository is used as given (no transform). Records are
// ordered by (target, method, classifier, r). Failing cells are recorded,
// not thrown.
std::vector<EvaluationRecord> run_experiment(const Repository& repo, const ExperimentConfig& config);

// Loads config.repo_path and applies the log transform unless disabled or
// already applied.
Repository load_repository(const ExperimentConfig& config,
                           const MetricSchema& schema = MetricSchema::promise20());

// PredictionPairs for one classifier: riTDS-1 vs riTDS-2 records matched on
// (target, r). Pairs with an undefined measure or DPR are skipped.
std::vector<PredictionPair> prediction_pairs(const std::vector<EvaluationRecord>& records,
                                             ModelKind classifier, Measure measure,
                                             std::size_t* skipped = nullptr);

struct SummaryRow {
    Method method = Method::none;
    ModelKind classifier = ModelKind::nb;
    std::size_t r = 0;
    std::size_t records = 0;
    std::size_t failed = 0;
    double mean_tds_size = 0.0;
    // Means over records where the measure is defined; `excluded_*` counts the
    // successful records left out.
    std::optional<double> mean_f, mean_g, mean_prec, mean_pd, mean_pf, mean_auc;
    std::size_t excluded_f = 0, excluded_g = 0, excluded_prec = 0, excluded_auc = 0;
};

struct WilcoxonRow {
    Method method = Method::ritds1; // compared against iTDS
    ModelKind classifier = ModelKind::nb;
    std::size_t r = 0;
    Measure measure = Measure::f_measure;
    std::size_t pairs = 0;
    std::optional<double> ratio_of_means; // riTDS mean / iTDS mean
    std::optional<WilcoxonResult> test;
    std::string note;
};

struct RhoReport {
    ModelKind classifier = ModelKind::nb;
    Measure measure = Measure::f_measure;
    std::size_t pairs = 0;
    std::size_t skipped = 0;
    std::optional<RhoRule> plus, minus, combined;
    std::optional<RuleEvaluation> evaluation; // of `combined`
    std::string note;
};

struct Summary {
    std::vector<SummaryRow> rows;
    std::vector<WilcoxonRow> wilcoxon;
    std::vector<RhoReport> rho;
};

Summary summarize(const std::vector<EvaluationRecord>& records);

// Record persistence: one JSON object per line.
std::string record_to_json(const EvaluationRecord& record, bool with_runtime = false);
EvaluationRecord record_from_json(std::string_view line);
std::vector<EvaluationRecord> read_records(const std::string& path);

// Writes records.jsonl, summary.csv, wilcoxon.csv, rho_rules.json (and
// config.json when a config is given) into `dir`.
void write_reports(const std::string& dir, const std::vector<EvaluationRecord>& records,
                   const ExperimentConfig* config = nullptr);

std::string summary_csv(const Summary& summary);
std::string wilcoxon_csv(const Summary& summary);
std::string rho_rules_json(const Summary& summary);
std::string config_json(const ExperimentConfig& config);

} // namespace cpdp
