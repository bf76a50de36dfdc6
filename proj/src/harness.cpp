#include "cpdp/harness.hpp"

#include "cpdp/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

namespace cpdp {

const char* to_string(Method m) noexcept
{
    switch (m) {
    case Method::none: return "none";
    case Method::rtds: return "rtds";
    case Method::itds: return "itds";
    case Method::ritds1: return "ritds1";
    case Method::ritds2: return "ritds2";
    case Method::ritds_rho: return "ritds_rho";
    }
    return "?";
}

Method parse_method(std::string_view text)
{
    std::string key;
    for (char c : text)
        if (c != '-' && c != '_')
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (key == "ritdsrho" || key == "rho") return Method::ritds_rho;
    switch (parse_strategy(key)) {
    case Strategy::none: return Method::none;
    case Strategy::rtds: return Method::rtds;
    case Strategy::itds: return Method::itds;
    case Strategy::ritds1: return Method::ritds1;
    case Strategy::ritds2: return Method::ritds2;
    }
    throw Error(ErrorKind::parameter, "unknown method '" + std::string(text) + "'");
}

const char* to_string(Measure m) noexcept
{
    switch (m) {
    case Measure::f_measure: return "f_measure";
    case Measure::g_measure: return "g_measure";
    case Measure::prec: return "prec";
    }
    return "?";
}

Measure parse_measure(std::string_view text)
{
    if (text == "f" || text == "f_measure" || text == "f-measure") return Measure::f_measure;
    if (text == "g" || text == "g_measure" || text == "g-measure") return Measure::g_measure;
    if (text == "prec" || text == "precision") return Measure::prec;
    throw Error(ErrorKind::parameter, "unknown measure '" + std::string(text) + "'");
}

std::optional<double> get(const MeasureSet& m, Measure which) noexcept
{
    switch (which) {
    case Measure::f_measure: return m.f_measure;
    case Measure::g_measure: return m.g_measure;
    case Measure::prec: return m.prec;
    }
    return std::nullopt;
}

void ExperimentConfig::validate() const
{
    if (methods.empty())
        throw Error(ErrorKind::parameter, "no strategies configured");
    if (classifiers.empty())
        throw Error(ErrorKind::parameter, "no classifiers configured");
    if (r_values.empty())
        throw Error(ErrorKind::parameter, "no r values configured");
    for (auto r : r_values)
        if (r < 1 || r > 3)
            throw Error(ErrorKind::parameter, "r must be 1, 2 or 3, got " + std::to_string(r));
    if (k < 1)
        throw Error(ErrorKind::parameter, "k must be at least 1");
}

Repository load_repository(const ExperimentConfig& config, const MetricSchema& schema)
{
    auto raw = read_repository(config.repo_path, schema);
    if (!config.log_transform)
        return raw;
    Repository out;
    for (const auto& rel : raw.releases())
        out.add(rel.log_transformed() ? rel
                                      : log_transform(rel, {config.clamp_negative}));
    return out;
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

bool has(const std::vector<Method>& methods, Method m)
{
    return std::find(methods.begin(), methods.end(), m) != methods.end();
}

std::vector<std::string> ids(const std::vector<ReleaseId>& releases)
{
    std::vector<std::string> out;
    for (const auto& r : releases)
        out.push_back(r.str());
    return out;
}

EvaluationRecord failed(const Release& target, Method method, ModelKind classifier,
                        std::size_t r, const std::string& reason)
{
    EvaluationRecord rec;
    rec.target = target.id().str();
    rec.method = method;
    rec.classifier = classifier;
    rec.r = r;
    rec.failure = reason;
    return rec;
}

EvaluationRecord evaluate_cell(const SimplifiedTDS& tds, const Release& target, Method method,
                               ModelKind classifier, std::size_t r,
                               std::optional<double> selection_dpr)
{
    const auto start = Clock::now();
    EvaluationRecord rec;
    rec.target = target.id().str();
    rec.method = method;
    rec.classifier = classifier;
    rec.r = r;
    rec.tds_size = tds.size();
    rec.tds_buggy = tds.buggy_count();
    rec.sources = ids(tds.source_releases);
    if (tds.size() == 0)
        throw Error(ErrorKind::no_candidates, "simplified training set is empty");

    const auto model = train(classifier, tds);
    rec.degenerate_model = model.provenance.degenerate;
    const auto predictions = predict(model, target);
    rec.cm = confusion(predictions, target);
    rec.measures = measures(rec.cm);

    std::vector<double> scores;
    std::vector<Label> truth;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        scores.push_back(predictions[i].score);
        truth.push_back(target.instances()[i].label);
    }
    if (target.buggy_count() > 0 && target.buggy_count() < target.size())
        rec.measures.auc = auc(scores, truth);
    if (selection_dpr)
        rec.measures.dpr = selection_dpr;
    else if (target.buggy_count() > 0)
        rec.measures.dpr = dpr(tds.instances, target).value;
    rec.runtime_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return rec;
}

// All cells for one target except riTDS-rho, which needs every target first.
std::vector<EvaluationRecord> run_target(const Repository& repo, const Release& target,
                                         const ExperimentConfig& config)
{
    std::vector<EvaluationRecord> out;
    const bool want_rho = has(config.methods, Method::ritds_rho);

    auto cells = [&](Method method, std::size_t r, auto&& make_tds,
                     std::optional<double> selection_dpr) {
        std::optional<SimplifiedTDS> tds;
        std::string reason;
        try {
            tds = make_tds();
        } catch (const std::exception& e) {
            reason = e.what();
        }
        for (auto classifier : config.classifiers) {
            if (!tds) {
                out.push_back(failed(target, method, classifier, r, reason));
                continue;
            }
            try {
                out.push_back(evaluate_cell(*tds, target, method, classifier, r, selection_dpr));
            } catch (const std::exception& e) {
                out.push_back(failed(target, method, classifier, r, e.what()));
            }
        }
    };

    Repository pool;
    try {
        pool = candidate_pool(repo, target.id());
    } catch (const std::exception& e) {
        for (auto m : config.methods) {
            const std::vector<std::size_t> rs =
                (m == Method::none || m == Method::itds) ? std::vector<std::size_t>{0}
                                                          : config.r_values;
            for (auto classifier : config.classifiers)
                for (auto r : rs)
                    out.push_back(failed(target, m, classifier, r, e.what()));
        }
        return out;
    }

    if (has(config.methods, Method::none))
        cells(Method::none, 0, [&] { return whole_pool(pool); }, std::nullopt);
    if (has(config.methods, Method::itds))
        cells(Method::itds, 0, [&] { return select_itds(pool, target, config.k); }, std::nullopt);

    const bool any_r = has(config.methods, Method::rtds) || has(config.methods, Method::ritds1) ||
                       has(config.methods, Method::ritds2) || want_rho;
    if (!any_r)
        return out;
    for (auto r : config.r_values) {
        std::optional<Repository> rtds;
        std::string reason;
        try {
            rtds = select_rtds(pool, target, r);
        } catch (const std::exception& e) {
            reason = e.what();
        }
        std::optional<double> selection_dpr;
        if (rtds && target.buggy_count() > 0) {
            const auto flat = rtds->flatten();
            selection_dpr = dpr(flat, target).value;
        }
        auto from_rtds = [&](auto&& build) {
            return [&, build] {
                if (!rtds)
                    throw Error(ErrorKind::parameter, reason);
                auto tds = build(*rtds);
                tds.r = r;
                tds.source_releases.clear();
                for (const auto& rel : rtds->releases())
                    tds.source_releases.push_back(rel.id());
                return tds;
            };
        };
        if (has(config.methods, Method::rtds))
            cells(Method::rtds, r,
                  from_rtds([](const Repository& s) { return whole_pool(s, Strategy::rtds); }),
                  selection_dpr);
        if (has(config.methods, Method::ritds1) || want_rho)
            cells(Method::ritds1, r,
                  from_rtds([&](const Repository& s) { return filter_ritds1(s, target, config.k); }),
                  selection_dpr);
        if (has(config.methods, Method::ritds2) || want_rho)
            cells(Method::ritds2, r,
                  from_rtds([&](const Repository& s) { return filter_ritds2(s, target, config.k); }),
                  selection_dpr);
    }
    return out;
}

auto record_key(const EvaluationRecord& r)
{
    return std::make_tuple(r.target, static_cast<int>(r.method), static_cast<int>(r.classifier), r.r);
}

} // namespace

std::vector<EvaluationRecord> run_experiment(const Repository& repo, const ExperimentConfig& config)
{
    config.validate();
    if (repo.size() < 2)
        throw Error(ErrorKind::parameter, "leave-one-out needs at least two releases");

    std::vector<const Release*> targets;
    for (const auto& rel : repo.releases())
        targets.push_back(&rel);
    std::sort(targets.begin(), targets.end(),
              [](const Release* a, const Release* b) { return a->id() < b->id(); });

    std::vector<std::vector<EvaluationRecord>> per_target(targets.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < targets.size(); i = next++)
            per_target[i] = run_target(repo, *targets[i], config);
    };
    const auto jobs = std::max<std::size_t>(1, std::min(config.jobs, targets.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    std::vector<EvaluationRecord> records;
    for (auto& batch : per_target)
        for (auto& rec : batch)
            records.push_back(std::move(rec));

    if (has(config.methods, Method::ritds_rho)) {
        // index riTDS-1/riTDS-2 records by (classifier, target, r)
        std::map<std::tuple<int, std::string, std::size_t>, const EvaluationRecord*> one, two;
        for (const auto& rec : records) {
            auto key = std::make_tuple(static_cast<int>(rec.classifier), rec.target, rec.r);
            if (rec.method == Method::ritds1) one[key] = &rec;
            if (rec.method == Method::ritds2) two[key] = &rec;
        }
        std::vector<EvaluationRecord> rho_records;
        for (auto classifier : config.classifiers) {
            std::optional<RhoRule> rule;
            std::string reason;
            try {
                auto pairs = prediction_pairs(records, classifier, config.rho_measure);
                rule = sweep_rho(pairs, Assumption::both);
            } catch (const std::exception& e) {
                reason = std::string("cannot fit DPR rule: ") + e.what();
            }
            for (const auto* target : targets) {
                for (auto r : config.r_values) {
                    auto key = std::make_tuple(static_cast<int>(classifier), target->id().str(), r);
                    const auto* a = one.count(key) ? one[key] : nullptr;
                    const auto* b = two.count(key) ? two[key] : nullptr;
                    if (!rule) {
                        rho_records.push_back(failed(*target, Method::ritds_rho, classifier, r, reason));
                        continue;
                    }
                    if (!a || !a->ok() || !a->measures.dpr) {
                        rho_records.push_back(failed(*target, Method::ritds_rho, classifier, r,
                                                     "DPR undefined or riTDS cell failed"));
                        continue;
                    }
                    const auto choice = recommend(*a->measures.dpr, *rule);
                    const auto* picked = choice == Strategy::ritds1 ? a : b;
                    if (!picked || !picked->ok()) {
                        rho_records.push_back(failed(*target, Method::ritds_rho, classifier, r,
                                                     "recommended riTDS cell failed"));
                        continue;
                    }
                    EvaluationRecord rec = *picked;
                    rec.method = Method::ritds_rho;
                    rec.chosen = choice;
                    rho_records.push_back(std::move(rec));
                }
            }
        }
        // drop the helper riTDS-1/riTDS-2 cells nobody asked for
        std::erase_if(records, [&](const EvaluationRecord& rec) { return !has(config.methods, rec.method); });
        for (auto& rec : rho_records)
            records.push_back(std::move(rec));
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const auto& a, const auto& b) { return record_key(a) < record_key(b); });
    return records;
}

std::vector<PredictionPair> prediction_pairs(const std::vector<EvaluationRecord>& records,
                                             ModelKind classifier, Measure measure,
                                             std::size_t* skipped)
{
    std::map<std::pair<std::string, std::size_t>, const EvaluationRecord*> two;
    for (const auto& rec : records)
        if (rec.classifier == classifier && rec.method == Method::ritds2)
            two[{rec.target, rec.r}] = &rec;
    std::vector<PredictionPair> pairs;
    std::size_t dropped = 0;
    for (const auto& rec : records) {
        if (rec.classifier != classifier || rec.method != Method::ritds1)
            continue;
        auto it = two.find({rec.target, rec.r});
        if (it == two.end())
            continue;
        const auto& other = *it->second;
        const auto m1 = get(rec.measures, measure);
        const auto m2 = get(other.measures, measure);
        if (!rec.ok() || !other.ok() || !m1 || !m2 || !rec.measures.dpr || !(*rec.measures.dpr > 0.0)) {
            ++dropped;
            continue;
        }
        pairs.push_back({rec.target + "@r" + std::to_string(rec.r), *rec.measures.dpr, *m1, *m2});
    }
    if (skipped)
        *skipped = dropped;
    return pairs;
}

// ---------------------------------------------------------------------------

Summary summarize(const std::vector<EvaluationRecord>& records)
{
    Summary s;
    std::map<std::tuple<int, int, std::size_t>, std::vector<const EvaluationRecord*>> cells;
    for (const auto& rec : records)
        cells[{static_cast<int>(rec.method), static_cast<int>(rec.classifier), rec.r}].push_back(&rec);

    for (const auto& [key, recs] : cells) {
        SummaryRow row;
        row.method = static_cast<Method>(std::get<0>(key));
        row.classifier = static_cast<ModelKind>(std::get<1>(key));
        row.r = std::get<2>(key);
        row.records = recs.size();
        std::size_t ok = 0;
        double size_sum = 0.0;
        auto mean_of = [&](auto getter, std::size_t& excluded) -> std::optional<double> {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto* rec : recs) {
                if (!rec->ok())
                    continue;
                if (auto v = getter(rec->measures)) {
                    sum += *v;
                    ++n;
                } else {
                    ++excluded;
                }
            }
            if (n == 0)
                return std::nullopt;
            return sum / static_cast<double>(n);
        };
        for (const auto* rec : recs) {
            if (!rec->ok()) {
                ++row.failed;
                continue;
            }
            ++ok;
            size_sum += static_cast<double>(rec->tds_size);
        }
        row.mean_tds_size = ok ? size_sum / static_cast<double>(ok) : 0.0;
        std::size_t unused = 0;
        row.mean_f = mean_of([](const MeasureSet& m) { return m.f_measure; }, row.excluded_f);
        row.mean_g = mean_of([](const MeasureSet& m) { return m.g_measure; }, row.excluded_g);
        row.mean_prec = mean_of([](const MeasureSet& m) { return m.prec; }, row.excluded_prec);
        row.mean_pd = mean_of([](const MeasureSet& m) { return m.pd; }, unused);
        row.mean_pf = mean_of([](const MeasureSet& m) { return m.pf; }, unused);
        row.mean_auc = mean_of([](const MeasureSet& m) { return m.auc; }, row.excluded_auc);
        s.rows.push_back(row);
    }

    // riTDS variants against iTDS, paired by target
    std::map<std::pair<int, std::string>, const EvaluationRecord*> itds;
    for (const auto& rec : records)
        if (rec.method == Method::itds)
            itds[{static_cast<int>(rec.classifier), rec.target}] = &rec;
    for (const auto& [key, recs] : cells) {
        const auto method = static_cast<Method>(std::get<0>(key));
        if (method != Method::ritds1 && method != Method::ritds2)
            continue;
        for (auto measure : {Measure::f_measure, Measure::g_measure}) {
            WilcoxonRow row;
            row.method = method;
            row.classifier = static_cast<ModelKind>(std::get<1>(key));
            row.r = std::get<2>(key);
            row.measure = measure;
            std::vector<double> a, b;
            for (const auto* rec : recs) {
                auto it = itds.find({std::get<1>(key), rec->target});
                if (it == itds.end() || !rec->ok() || !it->second->ok())
                    continue;
                auto x = get(rec->measures, measure);
                auto y = get(it->second->measures, measure);
                if (x && y) {
                    a.push_back(*x);
                    b.push_back(*y);
                }
            }
            row.pairs = a.size();
            if (a.empty()) {
                row.note = "no iTDS pairs";
            } else {
                double sa = 0.0, sb = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) {
                    sa += a[i];
                    sb += b[i];
                }
                if (sb > 0.0)
                    row.ratio_of_means = sa / sb;
                try {
                    row.test = wilcoxon_signed_rank(a, b);
                } catch (const Error& e) {
                    row.note = e.what();
                }
            }
            s.wilcoxon.push_back(row);
        }
    }

    std::vector<ModelKind> classifiers;
    for (const auto& rec : records)
        if ((rec.method == Method::ritds1 || rec.method == Method::ritds2) &&
            std::find(classifiers.begin(), classifiers.end(), rec.classifier) == classifiers.end())
            classifiers.push_back(rec.classifier);
    std::sort(classifiers.begin(), classifiers.end());
    for (auto classifier : classifiers) {
        for (auto measure : {Measure::f_measure, Measure::g_measure}) {
            RhoReport rep;
            rep.classifier = classifier;
            rep.measure = measure;
            auto pairs = prediction_pairs(records, classifier, measure, &rep.skipped);
            rep.pairs = pairs.size();
            try {
                rep.plus = sweep_rho(pairs, Assumption::rho_plus);
                rep.minus = sweep_rho(pairs, Assumption::rho_minus);
                rep.combined = sweep_rho(pairs, Assumption::both);
                rep.evaluation = evaluate_rule(pairs, *rep.combined);
            } catch (const Error& e) {
                rep.note = e.what();
            }
            s.rho.push_back(std::move(rep));
        }
    }
    return s;
}

} // namespace cpdp
