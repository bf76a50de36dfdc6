#include "doctest.h"

#include "cpdp/cli.hpp"
#include "cpdp/dataset.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cpdp;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "cpdp");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Raw PROMISE-style files for three projects.
fs::path make_raw(const fs::path& root)
{
    fs::remove_all(root);
    fs::create_directories(root / "raw");
    const std::vector<std::tuple<const char*, const char*, double, std::uint64_t>> shape{
        {"ant", "1.3", 0.2, 1}, {"ant", "1.4", 0.3, 2}, {"ivy", "1.1", 0.5, 3}, {"poi", "2.0", 0.15, 4}};
    for (const auto& [p, v, ratio, seed] : shape) {
        SynthesisSpec spec;
        spec.n_instances = 40;
        spec.defect_ratio = ratio;
        spec.seed = seed;
        spec.buggy_means = {8.0};
        spec.clean_means = {4.0};
        spec.spread = 1.5;
        spec.id = {p, v};
        auto rel = synthesize(spec);
        // raw files carry no transform marker
        std::ostringstream csv;
        write_csv(csv, Release(rel.id(), rel.instances(), false), MetricSchema::promise20());
        std::string text = csv.str();
        text = text.substr(text.find('\n') + 1);
        std::ofstream(root / "raw" / (std::string(p) + "-" + v + ".csv")) << text;
    }
    return root / "raw";
}

} // namespace

TEST_CASE("usage errors exit 1")
{
    auto r = invoke({});
    CHECK(r.code == cli::exit_usage);
    CHECK_FALSE(r.err.empty());
    r = invoke({"experiment", "--bogus"});
    CHECK(r.code == cli::exit_usage);
    CHECK(invoke({"--help"}).code == cli::exit_ok);
}

TEST_CASE("missing repo path is a usage error")
{
    unsetenv("CPDP_DATA_DIR");
    const auto r = invoke({"experiment", "--out", "/tmp/cpdp_nowhere"});
    CHECK(r.code == cli::exit_usage);
    CHECK(r.err.find("--repo") != std::string::npos);
}

TEST_CASE("end to end")
{
    const auto root = fs::temp_directory_path() / "cpdp_cli_test";
    const auto raw = make_raw(root);
    const auto data = root / "data";

    std::vector<std::string> ingest{"ingest", "--out", data.string(), "--input"};
    for (const auto& e : fs::directory_iterator(raw))
        ingest.push_back(e.path().string());
    // the generator produces a few negative cells
    auto r = invoke(ingest);
    CHECK(r.code == cli::exit_data);
    CHECK(r.err.find("negative") != std::string::npos);
    ingest.push_back("--clamp-negative");
    r = invoke(ingest);
    REQUIRE(r.code == 0);
    CHECK(fs::exists(data / "manifest.json"));
    {
        std::ifstream in(data / "ant-1.3.csv");
        const auto rel = parse_csv(in, MetricSchema::promise20());
        CHECK(rel.log_transformed());
        CHECK(rel.size() == 40);
    }
    // ingest is idempotent on already transformed files
    CHECK(invoke({"ingest", "--out", (root / "again").string(), "--input", (data / "ant-1.3.csv").string()})
              .code == 0);
    CHECK(slurp(root / "again" / "ant-1.3.csv") == slurp(data / "ant-1.3.csv"));

    SUBCASE("simplify writes rows and provenance")
    {
        const auto out = root / "tds.csv";
        r = invoke({"simplify", "--strategy", "ritds2", "--r", "2", "--k", "5", "--target", "ant:1.3",
                 "--repo", data.string(), "--out", out.string()});
        REQUIRE(r.code == 0);
        const auto prov = nlohmann::json::parse(slurp(out.string() + ".provenance.json"));
        CHECK(prov["strategy"] == "ritds2");
        CHECK(prov["r"] == 2);
        CHECK(prov["k"] == 5);
        CHECK(prov["source_releases"].size() == 2);
        for (const auto& o : prov["origins"])
            CHECK(o["release"].get<std::string>().rfind("ant", 0) != 0);
        std::ifstream in(out);
        const auto tds = parse_csv(in, MetricSchema::promise20(), ReleaseId{"tds", "1"});
        CHECK(tds.size() == prov["size"].get<std::size_t>());

        r = invoke({"simplify", "--strategy", "rtds", "--r", "9", "--target", "ant:1.3", "--repo",
                 data.string(), "--out", out.string()});
        CHECK(r.code == cli::exit_usage);
        r = invoke({"simplify", "--strategy", "rtds", "--target", "nope:1", "--repo", data.string(),
                 "--out", out.string()});
        CHECK(r.code == cli::exit_usage);
        r = invoke({"simplify", "--strategy", "rtds", "--target", "ant:1.3", "--repo",
                 (root / "missing").string(), "--out", out.string()});
        CHECK(r.code == cli::exit_data);
    }

    SUBCASE("predict, save and reload a model")
    {
        const auto out = root / "pred";
        r = invoke({"predict", "--classifier", "nb", "--train", (data / "ivy-1.1.csv").string(), "--test",
                 (data / "ant-1.3.csv").string(), "--out", out.string(), "--save-model",
                 (root / "m.json").string()});
        REQUIRE(r.code == 0);
        const auto m = nlohmann::json::parse(slurp(out / "measures.json"));
        CHECK(m["tp"].get<int>() + m["fp"].get<int>() + m["tn"].get<int>() + m["fn"].get<int>() == 40);
        const auto first = slurp(out / "predictions.csv");
        r = invoke({"predict", "--model", (root / "m.json").string(), "--test",
                 (data / "ant-1.3.csv").string(), "--out", out.string()});
        REQUIRE(r.code == 0);
        CHECK(slurp(out / "predictions.csv") == first);
        CHECK(invoke({"predict", "--test", (data / "ant-1.3.csv").string(), "--out", out.string()}).code ==
              cli::exit_usage);
    }

    SUBCASE("experiment, report and sweep")
    {
        const auto out = root / "exp";
        r = invoke({"experiment", "--repo", data.string(), "--strategies", "ritds2", "--classifiers", "nb",
                 "--r", "1,2,3", "--out", out.string()});
        REQUIRE(r.code == 0);
        std::ifstream in(out / "records.jsonl");
        std::size_t lines = 0;
        for (std::string line; std::getline(in, line);)
            ++lines;
        CHECK(lines == 3 * 4);
        for (const char* f : {"summary.csv", "wilcoxon.csv", "rho_rules.json", "config.json"})
            CHECK(fs::exists(out / f));

        const auto again = root / "exp2";
        REQUIRE(invoke({"experiment", "--repo", data.string(), "--strategies", "ritds2", "--classifiers",
                     "nb", "--r", "1,2,3", "--out", again.string(), "--jobs", "3"})
                    .code == 0);
        CHECK(slurp(out / "records.jsonl") == slurp(again / "records.jsonl"));
        CHECK(slurp(out / "summary.csv") == slurp(again / "summary.csv"));

        REQUIRE(invoke({"report", "--records", (out / "records.jsonl").string(), "--out",
                     (root / "rep").string()})
                    .code == 0);
        CHECK(slurp(root / "rep" / "summary.csv") == slurp(out / "summary.csv"));

        CHECK(invoke({"experiment", "--repo", data.string(), "--r", "5", "--out", out.string()}).code ==
              cli::exit_usage);
    }

    SUBCASE("sweep-rho")
    {
        std::ofstream(root / "pairs.csv") << "target,dpr,measure1,measure2\n"
                                             "a,0.5,0.2,0.4\nb,1.0,0.3,0.5\nc,2.0,0.6,0.4\nd,3.0,0.7,0.1\n";
        r = invoke({"sweep-rho", "--pairs", (root / "pairs.csv").string(), "--assumption", "plus", "--out",
                 (root / "rule.json").string()});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(slurp(root / "rule.json"));
        CHECK(j["plus"]["accuracy"] == 1.0);
        CHECK(j["group_ritds1"] == 2);

        std::ofstream(root / "bad.csv") << "target,dpr,measure1\na,1,0.2\n";
        r = invoke({"sweep-rho", "--pairs", (root / "bad.csv").string(), "--out", (root / "x.json").string()});
        CHECK(r.code == cli::exit_data);
    }
    fs::remove_all(root);
}
