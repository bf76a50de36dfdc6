#pragma once

#include "cpdp/dataset.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cpdp {

// Five indicators per feature, grouped per feature in this order.
struct CharacteristicVector {
    static constexpr std::size_t indicators = 5;
    enum Slot : std::size_t { median = 0, mean = 1, min = 2, max = 3, stddev = 4 };

    std::vector<double> values;

    std::size_t features() const noexcept { return values.size() / indicators; }
    double at(std::size_t feature, Slot slot) const { return values.at(feature * indicators + slot); }
};

// Per feature: median (mean of the middle pair for even sizes), arithmetic
// mean, min, max and population standard deviation.
CharacteristicVector characterize(const Release& release);

double distance_releases(const CharacteristicVector& a, const CharacteristicVector& b);
double distance_instances(std::span<const double> a, std::span<const double> b);
double distance_instances(const Instance& a, const Instance& b);

enum class Strategy { none, rtds, itds, ritds1, ritds2 };

const char* to_string(Strategy s) noexcept;
// Accepts "none", "rtds", "itds", "ritds1"/"ritds-1", "ritds2"/"ritds-2".
Strategy parse_strategy(std::string_view text);

// Identifies a training row by its source release and 0-based row index.
struct InstanceRef {
    ReleaseId release;
    std::size_t row = 0;

    friend auto operator<=>(const InstanceRef&, const InstanceRef&) = default;
    friend bool operator==(const InstanceRef&, const InstanceRef&) = default;
};

// A simplified training set. `instances[i]` was copied from `origins[i]`;
// entries are sorted by origin and unique.
struct SimplifiedTDS {
    std::vector<Instance> instances;
    std::vector<InstanceRef> origins;
    Strategy strategy = Strategy::none;
    std::size_t r = 0;
    std::size_t k = 0;
    std::vector<ReleaseId> source_releases;

    std::size_t size() const noexcept { return instances.size(); }
    std::size_t buggy_count() const noexcept;
};

// The r releases nearest to the target by characteristic distance, ascending;
// equal distances are ordered by (project, version).
Repository select_rtds(const Repository& pool, const Release& target, std::size_t r);

// Union over target instances of their k nearest pool instances.
SimplifiedTDS select_itds(const Repository& pool, const Release& target, std::size_t k);

// Test-set-driven filter: every target instance pulls its k nearest rTDS
// instances.
SimplifiedTDS filter_ritds1(const Repository& rtds, const Release& target, std::size_t k);

// Training-set-driven filter. Each rTDS instance labels its k nearest target
// instances; then each labeled target instance, in ascending row order, keeps
// its nearest labeler that has not been kept yet (none if all were).
SimplifiedTDS filter_ritds2(const Repository& rtds, const Release& target, std::size_t k);

// Every instance of `pool`, tagged with the given strategy.
SimplifiedTDS whole_pool(const Repository& pool, Strategy strategy = Strategy::none,
                         std::size_t r = 0);

struct SimplifyOptions {
    std::size_t r = 1;
    std::size_t k = 10;
};

SimplifiedTDS simplify(const Repository& pool, const Release& target, Strategy strategy,
                       SimplifyOptions options = {});

} // namespace cpdp
