#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cpdp {

enum class Label : std::uint8_t { clean = 0, buggy = 1 };

const char* to_string(Label label) noexcept;

// A class is non-buggy only when it has no recorded bugs.
constexpr Label binarize(std::uint32_t bug_count) noexcept
{
    return bug_count > 0 ? Label::buggy : Label::clean;
}

struct Instance {
    std::vector<double> metrics;
    std::uint32_t bug_count = 0;
    Label label = Label::clean;

    Instance() = default;
    Instance(std::vector<double> values, std::uint32_t bugs)
        : metrics(std::move(values)), bug_count(bugs), label(binarize(bugs))
    {
    }

    bool buggy() const noexcept { return label == Label::buggy; }

    friend bool operator==(const Instance&, const Instance&) = default;
};

// Ordered metric names. Lookup by name is case-insensitive.
class MetricSchema {
public:
    MetricSchema() = default;
    explicit MetricSchema(std::vector<std::string> names);

    // The 20 CK/QMOOM/McCabe metrics of the PROMISE Java data sets.
    static const MetricSchema& promise20();

    // Either "builtin:promise20" or a path to a file listing one name per
    // line (blank lines and '#' comments ignored).
    static MetricSchema load(const std::string& spec);

    std::size_t arity() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::optional<std::size_t> index_of(std::string_view name) const;

    friend bool operator==(const MetricSchema&, const MetricSchema&) = default;

private:
    std::vector<std::string> names_;
};

struct ReleaseId {
    std::string project;
    std::string version;

    // "ant-1.3"
    std::string str() const { return project + "-" + version; }

    // Accepts "project:version" or "project-version" (split at the last '-').
    static ReleaseId parse(std::string_view text);

    friend auto operator<=>(const ReleaseId&, const ReleaseId&) = default;
    friend bool operator==(const ReleaseId&, const ReleaseId&) = default;
};

class Release {
public:
    Release(ReleaseId id, std::vector<Instance> instances, bool log_transformed = false);

    const ReleaseId& id() const noexcept { return id_; }
    const std::vector<Instance>& instances() const noexcept { return instances_; }
    std::size_t size() const noexcept { return instances_.size(); }
    std::size_t arity() const noexcept { return instances_.front().metrics.size(); }
    bool log_transformed() const noexcept { return log_transformed_; }

    std::size_t buggy_count() const noexcept;
    double defect_ratio() const noexcept;

    friend bool operator==(const Release&, const Release&) = default;

private:
    ReleaseId id_;
    std::vector<Instance> instances_;
    bool log_transformed_ = false;
};

class Repository {
public:
    Repository() = default;
    explicit Repository(std::vector<Release> releases);

    // Throws ErrorKind::schema on a duplicate (project, version).
    void add(Release release);

    const std::vector<Release>& releases() const noexcept { return releases_; }
    std::size_t size() const noexcept { return releases_.size(); }
    bool empty() const noexcept { return releases_.empty(); }
    std::size_t instance_count() const noexcept;

    const Release* find(const ReleaseId& id) const noexcept;
    const Release& at(const ReleaseId& id) const;

    // All instances, releases in stored order.
    std::vector<Instance> flatten() const;

private:
    std::vector<Release> releases_;
};

// ---------------------------------------------------------------------------
// Ingestion

// Parses a PROMISE-style CSV. Columns are matched to the schema by header
// name; "bug" is required, extra columns are ignored. When `id` is not given
// the release id is taken from the "name"/"version" columns of the first row.
// An optional first line "# log_transformed=1" marks already transformed data
// (written by write_csv).
Release parse_csv(std::istream& in, const MetricSchema& schema,
                  std::optional<ReleaseId> id = std::nullopt);

// Reads a file. Without name/version columns the id comes from the file stem
// ("ant-1.3.csv").
Release read_csv_file(const std::string& path, const MetricSchema& schema);

// Canonical form: "# log_transformed=<0|1>", then name,version,<metrics>,bug.
void write_csv(std::ostream& out, const Release& release, const MetricSchema& schema);

// Loads every *.csv in a directory, sorted by file name.
Repository read_repository(const std::string& dir, const MetricSchema& schema);

struct LogTransformOptions {
    bool clamp_negative = false;
};

// f' = ln(f + 1) on every metric value. Throws ErrorKind::domain on a second
// application or on a negative value (unless clamping is enabled).
Release log_transform(const Release& release, LogTransformOptions options = {});

// Every release whose project differs from the target's.
Repository candidate_pool(const Repository& repo, const ReleaseId& target);

struct SynthesisSpec {
    std::size_t n_instances = 100;
    double defect_ratio = 0.2;
    std::size_t arity = 20;
    // Per-feature means for each class; a single value is broadcast.
    std::vector<double> buggy_means{2.0};
    std::vector<double> clean_means{1.0};
    double spread = 0.5;
    std::uint64_t seed = 0;
    ReleaseId id{"synthetic", "1.0"};
};

// Two Gaussian clusters, one per class. Exactly round(n * ratio) buggy rows,
// positioned by a seeded shuffle.
Release synthesize(const SynthesisSpec& spec);

} // namespace cpdp
