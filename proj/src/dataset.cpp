#include "cpdp/dataset.hpp"

#include "cpdp/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace cpdp {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::schema: return "schema error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::no_candidates: return "no candidates";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::undefined: return "undefined";
    case ErrorKind::sample_size: return "sample size error";
    case ErrorKind::io: return "i/o error";
    }
    return "error";
}

const char* to_string(Label label) noexcept
{
    return label == Label::buggy ? "buggy" : "clean";
}

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// Splits one CSV record. Handles double-quoted fields with "" escapes; a
// quoted field may not span lines (PROMISE exports never do).
std::vector<std::string> split_record(std::string_view line)
{
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string location(std::size_t row, const std::string& column)
{
    return "row " + std::to_string(row) + ", column '" + column + "'";
}

double parse_real(std::string_view text, std::size_t row, const std::string& column)
{
    text = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(ErrorKind::parse,
                    "non-numeric value '" + std::string(text) + "' at " + location(row, column));
    if (!std::isfinite(value))
        throw Error(ErrorKind::parse, "non-finite value at " + location(row, column));
    return value;
}

std::uint32_t parse_bug_count(std::string_view text, std::size_t row)
{
    double value = parse_real(text, row, "bug");
    if (value < 0.0 || value != std::floor(value) || value > 4294967295.0)
        throw Error(ErrorKind::parse, "bug count must be a nonnegative integer at " +
                                          location(row, "bug"));
    return static_cast<std::uint32_t>(value);
}

} // namespace

// ---------------------------------------------------------------------------

MetricSchema::MetricSchema(std::vector<std::string> names) : names_(std::move(names))
{
    if (names_.empty())
        throw Error(ErrorKind::schema, "metric schema is empty");
    std::set<std::string> seen;
    for (const auto& name : names_) {
        if (lower(name) == "bug")
            throw Error(ErrorKind::schema, "'bug' is the label column, not a metric");
        if (!seen.insert(lower(name)).second)
            throw Error(ErrorKind::schema, "duplicate metric name '" + name + "'");
    }
}

const MetricSchema& MetricSchema::promise20()
{
    static const MetricSchema schema({"WMC", "DIT", "LCOM", "RFC", "CBO", "NOC", "CA",
                                      "CE", "DAM", "NPM", "MFA", "CAM", "MOA", "IC", "CBM",
                                      "AMC", "LCOM3", "MAX_CC", "AVG_CC", "LOC"});
    return schema;
}

MetricSchema MetricSchema::load(const std::string& spec)
{
    if (spec == "builtin:promise20")
        return promise20();
    std::ifstream in(spec);
    if (!in)
        throw Error(ErrorKind::io, "cannot open schema file '" + spec + "'");
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        auto name = trim(line);
        if (name.empty() || name.front() == '#')
            continue;
        names.emplace_back(name);
    }
    return MetricSchema(std::move(names));
}

std::optional<std::size_t> MetricSchema::index_of(std::string_view name) const
{
    auto key = lower(trim(name));
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (lower(names_[i]) == key)
            return i;
    return std::nullopt;
}

ReleaseId ReleaseId::parse(std::string_view text)
{
    auto split = text.find(':');
    if (split == std::string_view::npos)
        split = text.rfind('-');
    if (split == std::string_view::npos || split == 0 || split + 1 == text.size())
        throw Error(ErrorKind::parameter,
                    "release id '" + std::string(text) + "' is not of the form project:version");
    return {lower(text.substr(0, split)), std::string(text.substr(split + 1))};
}

Release::Release(ReleaseId id, std::vector<Instance> instances, bool log_transformed)
    : id_(std::move(id)), instances_(std::move(instances)), log_transformed_(log_transformed)
{
    if (instances_.empty())
        throw Error(ErrorKind::empty_input, "release " + id_.str() + " has no instances");
    const auto arity = instances_.front().metrics.size();
    for (std::size_t row = 0; row < instances_.size(); ++row) {
        const auto& inst = instances_[row];
        if (inst.metrics.size() != arity)
            throw Error(ErrorKind::schema, "release " + id_.str() + ": row " +
                                               std::to_string(row) + " has " +
                                               std::to_string(inst.metrics.size()) +
                                               " metrics, expected " + std::to_string(arity));
        if (inst.label != binarize(inst.bug_count))
            throw Error(ErrorKind::domain, "release " + id_.str() + ": row " +
                                               std::to_string(row) +
                                               " label disagrees with bug count");
        for (double v : inst.metrics)
            if (!std::isfinite(v))
                throw Error(ErrorKind::domain, "release " + id_.str() + ": row " +
                                                   std::to_string(row) + " has a non-finite metric");
    }
}

std::size_t Release::buggy_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(
        instances_.begin(), instances_.end(), [](const Instance& i) { return i.buggy(); }));
}

double Release::defect_ratio() const noexcept
{
    return static_cast<double>(buggy_count()) / static_cast<double>(instances_.size());
}

Repository::Repository(std::vector<Release> releases)
{
    for (auto& r : releases)
        add(std::move(r));
}

void Repository::add(Release release)
{
    if (find(release.id()))
        throw Error(ErrorKind::schema, "duplicate release " + release.id().str());
    if (!releases_.empty() && releases_.front().arity() != release.arity())
        throw Error(ErrorKind::schema, "release " + release.id().str() +
                                           " does not share the repository's schema");
    releases_.push_back(std::move(release));
}

std::size_t Repository::instance_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& r : releases_)
        n += r.size();
    return n;
}

const Release* Repository::find(const ReleaseId& id) const noexcept
{
    for (const auto& r : releases_)
        if (r.id() == id)
            return &r;
    return nullptr;
}

const Release& Repository::at(const ReleaseId& id) const
{
    if (const auto* r = find(id))
        return *r;
    throw Error(ErrorKind::parameter, "release " + id.str() + " is not in the repository");
}

std::vector<Instance> Repository::flatten() const
{
    std::vector<Instance> out;
    out.reserve(instance_count());
    for (const auto& r : releases_)
        out.insert(out.end(), r.instances().begin(), r.instances().end());
    return out;
}

// ---------------------------------------------------------------------------

Release parse_csv(std::istream& in, const MetricSchema& schema, std::optional<ReleaseId> id)
{
    std::string line;
    bool transformed = false;
    bool have_header = false;
    std::vector<std::string> header;

    while (!have_header && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        // UTF-8 byte order mark
        if (line.rfind("\xEF\xBB\xBF", 0) == 0)
            line.erase(0, 3);
        auto t = trim(line);
        if (t.empty())
            continue;
        if (t.front() == '#') {
            if (t.find("log_transformed=1") != std::string_view::npos)
                transformed = true;
            continue;
        }
        header = split_record(line);
        have_header = true;
    }
    if (!have_header)
        throw Error(ErrorKind::empty_input, "CSV has no header row");

    // First match wins so PROMISE's duplicated "name" column resolves to the
    // project name, not the class name.
    std::vector<std::optional<std::size_t>> metric_col(schema.arity());
    std::optional<std::size_t> bug_col, name_col, version_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto key = lower(trim(header[c]));
        if (key == "bug" || key == "bugs") {
            if (!bug_col)
                bug_col = c;
        } else if (key == "name" || key == "project") {
            if (!name_col)
                name_col = c;
        } else if (key == "version") {
            if (!version_col)
                version_col = c;
        } else if (auto m = schema.index_of(key); m && !metric_col[*m]) {
            metric_col[*m] = c;
        }
    }
    for (std::size_t m = 0; m < schema.arity(); ++m)
        if (!metric_col[m])
            throw Error(ErrorKind::schema, "missing required column '" + schema.names()[m] + "'");
    if (!bug_col)
        throw Error(ErrorKind::schema, "missing required column 'bug'");

    std::vector<Instance> instances;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        ++row;
        auto fields = split_record(line);
        if (fields.size() < header.size())
            throw Error(ErrorKind::parse, "row " + std::to_string(row) + " has " +
                                              std::to_string(fields.size()) + " fields, header has " +
                                              std::to_string(header.size()));
        if (!id && name_col && version_col) {
            auto project = trim(fields[*name_col]);
            auto version = trim(fields[*version_col]);
            if (!project.empty() && !version.empty())
                id = ReleaseId{lower(project), std::string(version)};
        }
        std::vector<double> metrics(schema.arity());
        for (std::size_t m = 0; m < schema.arity(); ++m)
            metrics[m] = parse_real(fields[*metric_col[m]], row, schema.names()[m]);
        instances.emplace_back(std::move(metrics), parse_bug_count(fields[*bug_col], row));
    }
    if (instances.empty())
        throw Error(ErrorKind::empty_input, "CSV has a header but no data rows");
    if (!id)
        throw Error(ErrorKind::schema,
                    "release id not given and no name/version columns in the CSV");
    return Release(std::move(*id), std::move(instances), transformed);
}

Release read_csv_file(const std::string& path, const MetricSchema& schema)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot open '" + path + "'");
    // Peek at the header: if the file carries name/version columns we let the
    // parser take the id from there.
    std::string first;
    std::streampos start = in.tellg();
    bool has_id_columns = false;
    while (std::getline(in, first)) {
        auto t = trim(first);
        if (t.empty() || t.front() == '#')
            continue;
        auto cols = split_record(first);
        bool name = false, version = false;
        for (auto& c : cols) {
            auto k = lower(trim(c));
            name = name || k == "name" || k == "project";
            version = version || k == "version";
        }
        has_id_columns = name && version;
        break;
    }
    in.clear();
    in.seekg(start);
    std::optional<ReleaseId> id;
    if (!has_id_columns)
        id = ReleaseId::parse(std::filesystem::path(path).stem().string());
    try {
        return parse_csv(in, schema, id);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

void write_csv(std::ostream& out, const Release& release, const MetricSchema& schema)
{
    if (schema.arity() != release.arity())
        throw Error(ErrorKind::schema, "schema arity does not match release " + release.id().str());
    out << "# log_transformed=" << (release.log_transformed() ? 1 : 0) << '\n';
    out << "name,version";
    for (const auto& n : schema.names())
        out << ',' << lower(n);
    out << ",bug\n";
    char buf[32];
    for (const auto& inst : release.instances()) {
        out << release.id().project << ',' << release.id().version;
        for (double v : inst.metrics) {
            // shortest representation that round-trips
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
        }
        out << ',' << inst.bug_count << '\n';
    }
}

Repository read_repository(const std::string& dir, const MetricSchema& schema)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw Error(ErrorKind::io, "'" + dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && lower(entry.path().extension().string()) == ".csv")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    Repository repo;
    for (const auto& f : files)
        repo.add(read_csv_file(f.string(), schema));
    if (repo.empty())
        throw Error(ErrorKind::empty_input, "no CSV files in '" + dir + "'");
    return repo;
}

Release log_transform(const Release& release, LogTransformOptions options)
{
    if (release.log_transformed())
        throw Error(ErrorKind::domain, "release " + release.id().str() + " is already log-transformed");
    std::vector<Instance> out = release.instances();
    for (std::size_t row = 0; row < out.size(); ++row) {
        for (std::size_t m = 0; m < out[row].metrics.size(); ++m) {
            double& v = out[row].metrics[m];
            if (v < 0.0) {
                if (!options.clamp_negative)
                    throw Error(ErrorKind::domain,
                                "release " + release.id().str() + ": negative value " +
                                    std::to_string(v) + " at row " + std::to_string(row + 1) +
                                    ", metric " + std::to_string(m));
                v = 0.0;
            }
            v = std::log1p(v);
        }
    }
    return Release(release.id(), std::move(out), true);
}

Repository candidate_pool(const Repository& repo, const ReleaseId& target)
{
    const auto& project = repo.at(target).id().project;
    Repository pool;
    for (const auto& r : repo.releases())
        if (r.id().project != project)
            pool.add(r);
    if (pool.empty())
        throw Error(ErrorKind::no_candidates,
                    "no releases outside project '" + project + "' for target " + target.str());
    return pool;
}

Release synthesize(const SynthesisSpec& spec)
{
    if (spec.n_instances < 1)
        throw Error(ErrorKind::parameter, "n_instances must be at least 1");
    if (!(spec.defect_ratio >= 0.0 && spec.defect_ratio <= 1.0))
        throw Error(ErrorKind::parameter, "defect_ratio must lie in [0, 1]");
    if (spec.arity < 1)
        throw Error(ErrorKind::parameter, "arity must be at least 1");
    if (!(spec.spread >= 0.0))
        throw Error(ErrorKind::parameter, "spread must be nonnegative");
    auto check_means = [&](const std::vector<double>& means, const char* what) {
        if (means.size() != 1 && means.size() != spec.arity)
            throw Error(ErrorKind::parameter,
                        std::string(what) + " must have 1 or arity entries");
    };
    check_means(spec.buggy_means, "buggy_means");
    check_means(spec.clean_means, "clean_means");

    const auto n = spec.n_instances;
    const auto n_buggy =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.defect_ratio));

    std::mt19937_64 rng(spec.seed);
    std::vector<bool> is_buggy(n, false);
    std::fill(is_buggy.begin(), is_buggy.begin() + static_cast<std::ptrdiff_t>(n_buggy), true);
    std::shuffle(is_buggy.begin(), is_buggy.end(), rng);

    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_int_distribution<std::uint32_t> bugs(1, 3);
    std::vector<Instance> instances;
    instances.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& means = is_buggy[i] ? spec.buggy_means : spec.clean_means;
        std::vector<double> metrics(spec.arity);
        for (std::size_t m = 0; m < spec.arity; ++m)
            metrics[m] = means[means.size() == 1 ? 0 : m] + spec.spread * noise(rng);
        instances.emplace_back(std::move(metrics), is_buggy[i] ? bugs(rng) : 0u);
    }
    return Release(spec.id, std::move(instances));
}

} // namespace cpdp
