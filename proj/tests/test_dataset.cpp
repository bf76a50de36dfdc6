#include "doctest.h"

#include "cpdp/dataset.hpp"
#include "cpdp/error.hpp"
#include "fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace cpdp;

namespace {

std::string header()
{
    std::string h = "name,version,name_of_class";
    for (const auto& n : MetricSchema::promise20().names())
        h += "," + n;
    return h + ",bug\n";
}

std::string row(const std::string& prefix, double base, int bug)
{
    std::string r = prefix;
    for (int i = 0; i < 20; ++i)
        r += "," + std::to_string(base + i);
    return r + "," + std::to_string(bug) + "\n";
}

ErrorKind kind_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no cpdp::Error thrown");
    return ErrorKind::io;
}

} // namespace

TEST_CASE("binarize")
{
    CHECK(binarize(0) == Label::clean);
    CHECK(binarize(1) == Label::buggy);
    CHECK(binarize(437) == Label::buggy);
}

TEST_CASE("promise20 schema")
{
    const auto& s = MetricSchema::promise20();
    CHECK(s.arity() == 20);
    CHECK(s.index_of("wmc") == 0u);
    CHECK(s.index_of("LOC") == 19u);
    CHECK(s.index_of("max_cc") == 17u);
    CHECK_FALSE(s.index_of("bug").has_value());
    CHECK(MetricSchema::load("builtin:promise20") == s);
}

TEST_CASE("release id parsing")
{
    CHECK(ReleaseId::parse("Ant:1.3") == ReleaseId{"ant", "1.3"});
    CHECK(ReleaseId::parse("xerces-init") == ReleaseId{"xerces", "init"});
    CHECK(ReleaseId::parse("ant-1.3").str() == "ant-1.3");
    CHECK(kind_of([] { ReleaseId::parse("ant"); }) == ErrorKind::parameter);
}

TEST_CASE("parse_csv")
{
    SUBCASE("one buggy row")
    {
        std::istringstream in(header() + row("ant,1.3,a.B", 1.0, 3));
        const auto rel = parse_csv(in, MetricSchema::promise20());
        CHECK(rel.id() == ReleaseId{"ant", "1.3"});
        REQUIRE(rel.size() == 1);
        CHECK(rel.instances()[0].label == Label::buggy);
        CHECK(rel.instances()[0].bug_count == 3);
        CHECK(rel.instances()[0].metrics[19] == 20.0);
        CHECK_FALSE(rel.log_transformed());
    }
    SUBCASE("zero bugs is clean")
    {
        std::istringstream in(header() + row("ant,1.3,x", 0.0, 0));
        CHECK(parse_csv(in, MetricSchema::promise20()).instances()[0].label == Label::clean);
    }
    SUBCASE("columns matched by name, any order, any case")
    {
        std::string h = "BUG";
        auto names = MetricSchema::promise20().names();
        for (auto it = names.rbegin(); it != names.rend(); ++it)
            h += "," + *it;
        std::string r = "2";
        for (int i = 19; i >= 0; --i)
            r += "," + std::to_string(i);
        std::istringstream in("\xEF\xBB\xBF" + h + "\r\n" + r + "\r\n");
        const auto rel = parse_csv(in, MetricSchema::promise20(), ReleaseId{"x", "1"});
        CHECK(rel.instances()[0].metrics[0] == 0.0);
        CHECK(rel.instances()[0].metrics[19] == 19.0);
        CHECK(rel.buggy_count() == 1);
    }
    SUBCASE("missing column names it")
    {
        std::istringstream in("wmc,bug\n1,0\n");
        try {
            parse_csv(in, MetricSchema::promise20(), ReleaseId{"x", "1"});
            FAIL("expected schema error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::schema);
            CHECK(std::string(e.what()).find("DIT") != std::string::npos);
        }
    }
    SUBCASE("non-numeric cell")
    {
        std::string bad = row("ant,1.3,x", 1.0, 0);
        bad.replace(bad.find(",1.0"), 4, ",abc");
        std::istringstream in(header() + row("ant,1.3,y", 1.0, 0) + bad);
        try {
            parse_csv(in, MetricSchema::promise20());
            FAIL("expected parse error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::parse);
            CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        }
    }
    SUBCASE("no data rows")
    {
        std::istringstream in(header());
        CHECK(kind_of([&] { parse_csv(in, MetricSchema::promise20()); }) == ErrorKind::empty_input);
    }
}

TEST_CASE("csv round trip is exact")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        SynthesisSpec spec;
        spec.n_instances = 37;
        spec.seed = rng();
        spec.id = {"rt", std::to_string(trial)};
        auto rel = synthesize(spec);
        if (trial % 2)
            rel = log_transform(rel, {true});
        std::stringstream buf;
        write_csv(buf, rel, MetricSchema::promise20());
        const auto back = parse_csv(buf, MetricSchema::promise20());
        CHECK(back == rel);
    }
}

TEST_CASE("log_transform")
{
    Release rel({"a", "1"}, {Instance({0.0, std::exp(1.0) - 1.0, 10.0}, 0)});
    const auto t = log_transform(rel);
    CHECK(t.log_transformed());
    CHECK(t.instances()[0].metrics[0] == 0.0);
    CHECK(t.instances()[0].metrics[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(t.instances()[0].metrics[2] - 2.3978952728) < 1e-9);
    CHECK(kind_of([&] { log_transform(t); }) == ErrorKind::domain);

    Release neg({"a", "1"}, {Instance({-1.0, 2.0}, 0)});
    CHECK(kind_of([&] { log_transform(neg); }) == ErrorKind::domain);
    CHECK(log_transform(neg, {true}).instances()[0].metrics[0] == 0.0);
}

TEST_CASE("log_transform keeps column order")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    std::vector<Instance> rows;
    for (int i = 0; i < 200; ++i)
        rows.emplace_back(std::vector<double>{u(rng), u(rng)}, 0);
    Release rel({"m", "1"}, rows);
    const auto t = log_transform(rel);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j)
            if (rows[i].metrics[0] < rows[j].metrics[0])
                REQUIRE(t.instances()[i].metrics[0] <= t.instances()[j].metrics[0]);
}

TEST_CASE("release validation")
{
    CHECK(kind_of([] { Release({"a", "1"}, {}); }) == ErrorKind::empty_input);
    CHECK(kind_of([] { Release({"a", "1"}, {Instance({1.0}, 0), Instance({1.0, 2.0}, 0)}); }) ==
          ErrorKind::schema);
    CHECK(kind_of([] { Release({"a", "1"}, {Instance({NAN}, 0)}); }) == ErrorKind::domain);
}

TEST_CASE("repository rejects duplicates")
{
    Repository repo;
    repo.add(Release({"a", "1"}, {Instance({1.0}, 0)}));
    CHECK(kind_of([&] { repo.add(Release({"a", "1"}, {Instance({2.0}, 0)})); }) == ErrorKind::schema);
    CHECK(repo.find({"a", "1"}) != nullptr);
    CHECK(repo.find({"a", "2"}) == nullptr);
}

TEST_CASE("candidate_pool on the 34-release layout")
{
    const auto repo = fixtures::promise_like(2);
    REQUIRE(repo.size() == 34);
    CHECK(repo.instance_count() == 13246);

    const auto xalan = candidate_pool(repo, {"xalan", "2.5"});
    CHECK(xalan.size() == 31);
    CHECK(xalan.find({"xalan", "2.4"}) == nullptr);
    CHECK(xalan.find({"xalan", "2.6"}) == nullptr);
    CHECK(candidate_pool(repo, {"ant", "1.7"}).size() == 29);

    for (const auto& rel : repo.releases()) {
        const auto pool = candidate_pool(repo, rel.id());
        std::size_t same = 0;
        for (const auto& other : repo.releases())
            same += other.id().project == rel.id().project;
        CHECK(pool.size() == repo.size() - same);
        for (const auto& p : pool.releases())
            CHECK(p.id().project != rel.id().project);
    }
}

TEST_CASE("candidate_pool of a single-project repo is empty")
{
    Repository repo;
    repo.add(Release({"a", "1"}, {Instance({1.0}, 0)}));
    repo.add(Release({"a", "2"}, {Instance({1.0}, 0)}));
    CHECK(kind_of([&] { candidate_pool(repo, {"a", "1"}); }) == ErrorKind::no_candidates);
}

TEST_CASE("table layout counts")
{
    const auto repo = fixtures::promise_like(2);
    for (const auto& s : fixtures::promise_shape()) {
        const auto& rel = repo.at({s.project, s.version});
        CHECK(rel.size() == s.instances);
        CHECK(rel.buggy_count() == s.defects);
    }
    CHECK(repo.at({"ant", "1.3"}).defect_ratio() == doctest::Approx(0.16));
}

TEST_CASE("synthesize")
{
    SynthesisSpec spec;
    spec.n_instances = 100;
    spec.defect_ratio = 0.2;
    spec.seed = 7;
    const auto a = synthesize(spec);
    CHECK(a.buggy_count() == 20);
    CHECK(a == synthesize(spec));
    spec.seed = 8;
    CHECK_FALSE(a == synthesize(spec));

    spec.defect_ratio = 1.5;
    CHECK(kind_of([&] { synthesize(spec); }) == ErrorKind::parameter);
    spec.defect_ratio = 0.2;
    spec.n_instances = 0;
    CHECK(kind_of([&] { synthesize(spec); }) == ErrorKind::parameter);
}

TEST_CASE("read_repository and file stem ids")
{
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "cpdp_test_repo";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::string h;
        for (const auto& n : MetricSchema::promise20().names())
            h += n + ",";
        std::ofstream(dir / "ant-1.3.csv") << h << "bug\n" << row("", 1.0, 0).substr(1);
        std::ofstream(dir / "camel-1.0.csv") << header() << row("camel,1.0,z", 2.0, 1);
        std::ofstream(dir / "notes.txt") << "ignored";
    }
    const auto repo = read_repository(dir.string(), MetricSchema::promise20());
    REQUIRE(repo.size() == 2);
    CHECK(repo.releases()[0].id() == ReleaseId{"ant", "1.3"});
    CHECK(repo.releases()[1].id() == ReleaseId{"camel", "1.0"});
    fs::remove_all(dir);
}
