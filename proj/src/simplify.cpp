#include "cpdp/simplify.hpp"

#include "cpdp/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace cpdp {

const char* to_string(Strategy s) noexcept
{
    switch (s) {
    case Strategy::none: return "none";
    case Strategy::rtds: return "rtds";
    case Strategy::itds: return "itds";
    case Strategy::ritds1: return "ritds1";
    case Strategy::ritds2: return "ritds2";
    }
    return "?";
}

Strategy parse_strategy(std::string_view text)
{
    std::string key;
    for (char c : text)
        if (c != '-' && c != '_')
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (key == "none") return Strategy::none;
    if (key == "rtds") return Strategy::rtds;
    if (key == "itds") return Strategy::itds;
    if (key == "ritds1") return Strategy::ritds1;
    if (key == "ritds2") return Strategy::ritds2;
    throw Error(ErrorKind::parameter, "unknown strategy '" + std::string(text) + "'");
}

std::size_t SimplifiedTDS::buggy_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(
        instances.begin(), instances.end(), [](const Instance& i) { return i.buggy(); }));
}

// ---------------------------------------------------------------------------

CharacteristicVector characterize(const Release& release)
{
    const auto m = release.size();
    const auto n = release.arity();
    CharacteristicVector cv;
    cv.values.resize(n * CharacteristicVector::indicators);
    std::vector<double> column(m);
    for (std::size_t f = 0; f < n; ++f) {
        for (std::size_t i = 0; i < m; ++i)
            column[i] = release.instances()[i].metrics[f];
        std::sort(column.begin(), column.end());

        const double median = (m % 2 == 1) ? column[m / 2]
                                            : (column[m / 2 - 1] + column[m / 2]) / 2.0;
        // Summing sorted values keeps the result independent of row order.
        const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(m);
        double ss = 0.0;
        for (double v : column)
            ss += (v - mean) * (v - mean);

        double* slot = &cv.values[f * CharacteristicVector::indicators];
        slot[CharacteristicVector::median] = median;
        slot[CharacteristicVector::mean] = std::clamp(mean, column.front(), column.back());
        slot[CharacteristicVector::min] = column.front();
        slot[CharacteristicVector::max] = column.back();
        slot[CharacteristicVector::stddev] = std::sqrt(ss / static_cast<double>(m));
    }
    return cv;
}

double distance_releases(const CharacteristicVector& a, const CharacteristicVector& b)
{
    if (a.values.size() != b.values.size())
        throw Error(ErrorKind::shape, "characteristic vectors differ in length (" +
                                          std::to_string(a.values.size()) + " vs " +
                                          std::to_string(b.values.size()) + ")");
    return distance_instances(a.values, b.values);
}

double distance_instances(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw Error(ErrorKind::shape, "vectors differ in length (" + std::to_string(a.size()) +
                                          " vs " + std::to_string(b.size()) + ")");
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

double distance_instances(const Instance& a, const Instance& b)
{
    return distance_instances(a.metrics, b.metrics);
}

// ---------------------------------------------------------------------------

namespace {

// Training rows laid out contiguously in (project, version, row) order, so a
// row's index doubles as its tie-break rank.
class FlatPool {
public:
    explicit FlatPool(const Repository& repo)
    {
        std::vector<const Release*> ordered;
        for (const auto& r : repo.releases())
            ordered.push_back(&r);
        std::sort(ordered.begin(), ordered.end(),
                  [](const Release* a, const Release* b) { return a->id() < b->id(); });
        arity_ = repo.empty() ? 0 : repo.releases().front().arity();
        for (const auto* rel : ordered) {
            for (std::size_t row = 0; row < rel->size(); ++row) {
                const auto& inst = rel->instances()[row];
                values_.insert(values_.end(), inst.metrics.begin(), inst.metrics.end());
                refs_.push_back({rel->id(), row});
                source_.push_back(&inst);
            }
        }
    }

    std::size_t size() const noexcept { return refs_.size(); }
    std::span<const double> row(std::size_t i) const
    {
        return {values_.data() + i * arity_, arity_};
    }
    const InstanceRef& ref(std::size_t i) const { return refs_[i]; }
    const Instance& instance(std::size_t i) const { return *source_[i]; }

private:
    std::size_t arity_ = 0;
    std::vector<double> values_;
    std::vector<InstanceRef> refs_;
    std::vector<const Instance*> source_;
};

struct Neighbor {
    double distance;
    std::size_t index;

    friend bool operator<(const Neighbor& a, const Neighbor& b)
    {
        return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    }
};

// The k nearest rows of `rows(i)` for i < count, ascending by (distance, index).
template <typename RowFn>
std::vector<Neighbor> k_nearest(std::span<const double> query, std::size_t count, RowFn rows,
                                std::size_t k, std::vector<Neighbor>& scratch)
{
    scratch.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        scratch[i] = {distance_instances(query, rows(i)), i};
    const auto take = std::min(k, count);
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take),
                      scratch.end());
    return {scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take)};
}

void check_schema(const FlatPool& pool, const Release& target)
{
    if (pool.size() > 0 && pool.row(0).size() != target.arity())
        throw Error(ErrorKind::shape, "target " + target.id().str() +
                                          " does not share the training schema");
}

SimplifiedTDS collect(const FlatPool& pool, const std::vector<bool>& chosen, Strategy strategy,
                      std::size_t r, std::size_t k)
{
    SimplifiedTDS tds;
    tds.strategy = strategy;
    tds.r = r;
    tds.k = k;
    std::set<ReleaseId> sources;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!chosen[i])
            continue;
        tds.instances.push_back(pool.instance(i));
        tds.origins.push_back(pool.ref(i));
        sources.insert(pool.ref(i).release);
    }
    tds.source_releases.assign(sources.begin(), sources.end());
    return tds;
}

std::vector<bool> pull_nearest(const FlatPool& pool, const Release& target, std::size_t k)
{
    std::vector<bool> chosen(pool.size(), false);
    std::vector<Neighbor> scratch;
    for (const auto& inst : target.instances()) {
        auto nn = k_nearest(inst.metrics, pool.size(),
                            [&](std::size_t i) { return pool.row(i); }, k, scratch);
        for (const auto& n : nn)
            chosen[n.index] = true;
    }
    return chosen;
}

void require_k(std::size_t k)
{
    if (k < 1)
        throw Error(ErrorKind::parameter, "k must be at least 1");
}

} // namespace

Repository select_rtds(const Repository& pool, const Release& target, std::size_t r)
{
    if (pool.empty())
        throw Error(ErrorKind::no_candidates, "candidate pool is empty");
    if (r < 1 || r > pool.size())
        throw Error(ErrorKind::parameter, "r must lie in [1, " + std::to_string(pool.size()) +
                                              "], got " + std::to_string(r));
    const auto reference = characterize(target);
    std::vector<std::pair<double, const Release*>> ranked;
    ranked.reserve(pool.size());
    for (const auto& rel : pool.releases())
        ranked.emplace_back(distance_releases(characterize(rel), reference), &rel);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first < b.first || (a.first == b.first && a.second->id() < b.second->id());
    });
    Repository out;
    for (std::size_t i = 0; i < r; ++i)
        out.add(*ranked[i].second);
    return out;
}

SimplifiedTDS select_itds(const Repository& pool, const Release& target, std::size_t k)
{
    require_k(k);
    FlatPool flat(pool);
    if (flat.size() == 0)
        throw Error(ErrorKind::no_candidates, "candidate pool is empty");
    check_schema(flat, target);
    return collect(flat, pull_nearest(flat, target, k), Strategy::itds, 0, k);
}

SimplifiedTDS filter_ritds1(const Repository& rtds, const Release& target, std::size_t k)
{
    require_k(k);
    FlatPool flat(rtds);
    if (flat.size() == 0)
        throw Error(ErrorKind::no_candidates, "rTDS is empty");
    check_schema(flat, target);
    return collect(flat, pull_nearest(flat, target, k), Strategy::ritds1, rtds.size(), k);
}

SimplifiedTDS filter_ritds2(const Repository& rtds, const Release& target, std::size_t k)
{
    require_k(k);
    FlatPool flat(rtds);
    if (flat.size() == 0)
        throw Error(ErrorKind::no_candidates, "rTDS is empty");
    check_schema(flat, target);

    const auto& tests = target.instances();
    // labelers[t] = training rows that labeled target row t, with distances
    std::vector<std::vector<Neighbor>> labelers(tests.size());
    std::vector<Neighbor> scratch;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        auto nn = k_nearest(flat.row(i), tests.size(),
                            [&](std::size_t t) { return std::span<const double>(tests[t].metrics); },
                            k, scratch);
        for (const auto& n : nn)
            labelers[n.index].push_back({n.distance, i});
    }

    std::vector<bool> chosen(flat.size(), false);
    for (auto& candidates : labelers) {
        std::sort(candidates.begin(), candidates.end());
        for (const auto& c : candidates) {
            if (!chosen[c.index]) {
                chosen[c.index] = true;
                break;
            }
        }
    }
    return collect(flat, chosen, Strategy::ritds2, rtds.size(), k);
}

SimplifiedTDS whole_pool(const Repository& pool, Strategy strategy, std::size_t r)
{
    FlatPool flat(pool);
    if (flat.size() == 0)
        throw Error(ErrorKind::no_candidates, "candidate pool is empty");
    return collect(flat, std::vector<bool>(flat.size(), true), strategy, r, 0);
}

SimplifiedTDS simplify(const Repository& pool, const Release& target, Strategy strategy,
                       SimplifyOptions options)
{
    if (pool.find(target.id()))
        throw Error(ErrorKind::parameter,
                    "target " + target.id().str() + " is part of its own candidate pool");
    switch (strategy) {
    case Strategy::none:
        return whole_pool(pool);
    case Strategy::itds:
        return select_itds(pool, target, options.k);
    case Strategy::rtds: {
        auto rtds = select_rtds(pool, target, options.r);
        auto tds = whole_pool(rtds, Strategy::rtds, options.r);
        tds.source_releases.clear();
        for (const auto& rel : rtds.releases())
            tds.source_releases.push_back(rel.id());
        return tds;
    }
    case Strategy::ritds1:
    case Strategy::ritds2: {
        auto rtds = select_rtds(pool, target, options.r);
        auto tds = strategy == Strategy::ritds1 ? filter_ritds1(rtds, target, options.k)
                                                : filter_ritds2(rtds, target, options.k);
        tds.r = options.r;
        tds.source_releases.clear();
        for (const auto& rel : rtds.releases())
            tds.source_releases.push_back(rel.id());
        return tds;
    }
    }
    throw Error(ErrorKind::parameter, "unknown strategy");
}

} // namespace cpdp
