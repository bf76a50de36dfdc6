#include "doctest.h"

#include "cpdp/error.hpp"
#include "cpdp/simplify.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace cpdp;

namespace {

std::set<oracle::RowKey> keys(const SimplifiedTDS& tds)
{
    std::set<oracle::RowKey> out;
    for (const auto& o : tds.origins)
        out.insert({o.release.project, o.release.version, o.row});
    return out;
}

Release single_feature(ReleaseId id, std::vector<double> values)
{
    std::vector<Instance> rows;
    for (double v : values)
        rows.emplace_back(std::vector<double>{v}, 0);
    return Release(std::move(id), std::move(rows), true);
}

Release points(ReleaseId id, std::vector<std::pair<double, double>> xy)
{
    std::vector<Instance> rows;
    for (auto [x, y] : xy)
        rows.emplace_back(std::vector<double>{x, y}, 0);
    return Release(std::move(id), std::move(rows), true);
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

TEST_CASE("characterize")
{
    SUBCASE("1..4")
    {
        const auto cv = characterize(single_feature({"a", "1"}, {4, 1, 3, 2}));
        CHECK(cv.features() == 1);
        CHECK(cv.at(0, CharacteristicVector::median) == 2.5);
        CHECK(cv.at(0, CharacteristicVector::mean) == 2.5);
        CHECK(cv.at(0, CharacteristicVector::min) == 1.0);
        CHECK(cv.at(0, CharacteristicVector::max) == 4.0);
        CHECK(std::abs(cv.at(0, CharacteristicVector::stddev) - 1.1180339887) < 1e-10);
    }
    SUBCASE("constant column")
    {
        const auto cv = characterize(single_feature({"a", "1"}, {0.3, 0.3, 0.3}));
        for (auto slot : {CharacteristicVector::median, CharacteristicVector::mean,
                          CharacteristicVector::min, CharacteristicVector::max})
            CHECK(cv.at(0, slot) == 0.3);
        CHECK(cv.at(0, CharacteristicVector::stddev) == 0.0);
    }
    SUBCASE("single instance")
    {
        const auto cv = characterize(single_feature({"a", "1"}, {7.5}));
        CHECK(cv.values == std::vector<double>{7.5, 7.5, 7.5, 7.5, 0.0});
    }
}

TEST_CASE("characterize properties")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto repo = fixtures::random_repo(rng, 1, 40, 4, trial % 2 == 0);
        const auto& rel = repo.releases().front();
        const auto cv = characterize(rel);
        REQUIRE(cv.values.size() == 5 * rel.arity());
        const auto expect = oracle::characteristics(rel);
        for (std::size_t i = 0; i < expect.size(); ++i)
            CHECK(cv.values[i] == doctest::Approx(expect[i]).epsilon(1e-12));
        for (std::size_t f = 0; f < cv.features(); ++f) {
            CHECK(cv.at(f, CharacteristicVector::min) <= cv.at(f, CharacteristicVector::median));
            CHECK(cv.at(f, CharacteristicVector::median) <= cv.at(f, CharacteristicVector::max));
            CHECK(cv.at(f, CharacteristicVector::min) <= cv.at(f, CharacteristicVector::mean));
            CHECK(cv.at(f, CharacteristicVector::mean) <= cv.at(f, CharacteristicVector::max));
            CHECK(cv.at(f, CharacteristicVector::stddev) >= 0.0);
        }
        // permutation invariance
        auto rows = rel.instances();
        std::shuffle(rows.begin(), rows.end(), rng);
        CHECK(characterize(Release(rel.id(), rows, true)).values == cv.values);
    }
}

TEST_CASE("distances")
{
    CHECK(distance_instances(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(distance_instances(std::vector<double>{0, 0, 1}, std::vector<double>{3, 4, 1}) == 5.0);
    std::vector<double> a(20, 1.0), b(20, 1.0);
    b[19] += 7.0;
    CHECK(distance_instances(a, b) == 7.0);
    CHECK(kind_of([] {
              distance_instances(std::vector<double>{1}, std::vector<double>{1, 2});
          }) == ErrorKind::shape);

    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        auto repo = fixtures::random_repo(rng, 2, 20, 3, false);
        const auto& r0 = repo.releases().front();
        const auto& r1 = repo.releases().back();
        CHECK(distance_releases(characterize(r0), characterize(r1)) ==
              doctest::Approx(oracle::euclid(oracle::characteristics(r0), oracle::characteristics(r1)))
                  .epsilon(1e-12));
        CHECK(distance_instances(r0.instances()[0], r1.instances()[0]) ==
              oracle::euclid(r0.instances()[0].metrics, r1.instances()[0].metrics));
    }
}

TEST_CASE("select_rtds")
{
    Repository pool;
    pool.add(single_feature({"b", "1"}, {0, 1, 2}));
    pool.add(single_feature({"c", "1"}, {5, 6, 7}));
    pool.add(single_feature({"d", "1"}, {1, 2, 3}));
    const auto target = single_feature({"t", "1"}, {1, 2, 3});

    SUBCASE("exact duplicate wins")
    {
        const auto r1 = select_rtds(pool, target, 1);
        REQUIRE(r1.size() == 1);
        CHECK(r1.releases()[0].id() == ReleaseId{"d", "1"});
    }
    SUBCASE("r = |pool| returns everything by distance")
    {
        const auto all = select_rtds(pool, target, 3);
        REQUIRE(all.size() == 3);
        CHECK(all.releases()[0].id().project == "d");
        CHECK(all.releases()[1].id().project == "b");
        CHECK(all.releases()[2].id().project == "c");
    }
    SUBCASE("equal distances fall back to id order")
    {
        Repository twin;
        twin.add(single_feature({"z", "1"}, {2, 3, 4}));
        twin.add(single_feature({"a", "9"}, {0, 1, 2}));
        CHECK(select_rtds(twin, target, 1).releases()[0].id() == ReleaseId{"a", "9"});
    }
    SUBCASE("errors")
    {
        CHECK(kind_of([&] { select_rtds(pool, target, 4); }) == ErrorKind::parameter);
        CHECK(kind_of([&] { select_rtds(pool, target, 0); }) == ErrorKind::parameter);
        CHECK(kind_of([&] { select_rtds(Repository{}, target, 1); }) == ErrorKind::no_candidates);
    }
}

TEST_CASE("select_rtds matches brute force on five-release pools")
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        Repository pool;
        for (int p = 0; p < 5; ++p) {
            auto one = fixtures::random_repo(rng, 1, 15, 3, false);
            const auto& rel = one.releases().front();
            pool.add(Release({"q" + std::to_string(p), "1"}, rel.instances(), true));
        }
        const auto target = fixtures::random_repo(rng, 1, 15, 3, false).releases().front();
        const auto got = select_rtds(pool, target, 3);
        const auto want = oracle::rtds(pool, target, 3);
        REQUIRE(got.size() == 3);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(got.releases()[i].id() == want[i]);
    }
}

TEST_CASE("select_itds")
{
    SUBCASE("saturates when the pool is no larger than k")
    {
        Repository pool;
        pool.add(points({"a", "1"}, {{0, 0}, {1, 1}, {2, 2}}));
        const auto target = points({"t", "1"}, {{5, 5}});
        CHECK(select_itds(pool, target, 10).size() == 3);
    }
    SUBCASE("one target, unique nearest")
    {
        Repository pool;
        pool.add(points({"a", "1"}, {{0, 0}, {1, 1}, {2, 2}}));
        const auto tds = select_itds(pool, points({"t", "1"}, {{0.9, 1.2}}), 1);
        REQUIRE(tds.size() == 1);
        CHECK(tds.origins[0].row == 1);
    }
    SUBCASE("30-instance pool, 5 targets, k=10")
    {
        std::mt19937_64 rng(30);
        std::normal_distribution<double> n(0, 1);
        std::vector<std::pair<double, double>> a, b, t;
        for (int i = 0; i < 15; ++i) {
            a.emplace_back(n(rng), n(rng));
            b.emplace_back(n(rng) + 1, n(rng));
        }
        for (int i = 0; i < 5; ++i)
            t.emplace_back(n(rng), n(rng));
        Repository pool;
        pool.add(points({"a", "1"}, a));
        pool.add(points({"b", "1"}, b));
        const auto target = points({"t", "1"}, t);
        CHECK(keys(select_itds(pool, target, 10)) == oracle::pull(pool, target, 10));
    }
    CHECK(kind_of([] { select_itds(Repository{}, points({"t", "1"}, {{0, 0}}), 1); }) ==
          ErrorKind::no_candidates);
}

TEST_CASE("riTDS-1 on disjoint clusters stays inside the near cluster")
{
    Repository rtds;
    rtds.add(points({"a", "1"}, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0.5, 0.5}}));
    rtds.add(points({"b", "1"}, {{100, 100}, {100, 101}, {101, 100}}));
    const auto target = points({"t", "1"}, {{0.2, 0.3}, {0.8, 0.9}});
    const auto tds = filter_ritds1(rtds, target, 3);
    for (const auto& o : tds.origins)
        CHECK(o.release.project == "a");
    CHECK(keys(tds) == oracle::pull(rtds, target, 3));
    CHECK(filter_ritds1(rtds, target, 50).size() == 8);
}

TEST_CASE("riTDS-2 hand trace")
{
    // T0..T5 training, Q0..Q3 target, k=2.
    // Phase 1 labelMap:
    //   Q0 <- T0 (1), T1 (1.414)
    //   Q1 <- T2 (1), T3 (1.414), T5 (6.403), T4 (7.81)
    //   Q2 <- T2 (1), T3 (1.414), T1 (5.657), T0 (6.403), T4 (6.403)
    //   Q3 <- T5 (1.414)
    // Phase 2: Q0 takes T0, Q1 takes T2, Q2 finds T2 taken and takes T3,
    // Q3 takes T5.
    Repository rtds;
    rtds.add(points({"tr", "1"}, {{0, 0}, {1, 0}, {5, 5}, {6, 5}, {10, 0}, {0, 10}}));
    const auto target = points({"tg", "1"}, {{0, 1}, {5, 6}, {5, 4}, {1, 9}});

    const auto tds = filter_ritds2(rtds, target, 2);
    std::vector<std::size_t> rows;
    for (const auto& o : tds.origins)
        rows.push_back(o.row);
    CHECK(rows == std::vector<std::size_t>{0, 2, 3, 5});
    CHECK(tds.strategy == Strategy::ritds2);
    CHECK(keys(tds) == oracle::push(rtds, target, 2));

    // the test-set driven filter with k=1 picks T2 twice and so keeps only three
    const auto pulled = filter_ritds1(rtds, target, 1);
    rows.clear();
    for (const auto& o : pulled.origins)
        rows.push_back(o.row);
    CHECK(rows == std::vector<std::size_t>{0, 2, 5});
}

TEST_CASE("riTDS-2 edge cases")
{
    const auto target = points({"tg", "1"}, {{0, 1}, {5, 6}, {5, 4}});
    SUBCASE("single training instance is kept once")
    {
        Repository one;
        one.add(points({"tr", "1"}, {{3, 3}}));
        CHECK(filter_ritds2(one, target, 10).size() == 1);
    }
    SUBCASE("k >= |target| labels everything")
    {
        Repository many;
        many.add(points({"tr", "1"}, {{0, 0}, {1, 0}, {5, 5}, {6, 5}, {10, 0}}));
        CHECK(filter_ritds2(many, target, 3).size() == 3);
        Repository two;
        two.add(points({"tr", "1"}, {{0, 0}, {1, 0}}));
        CHECK(filter_ritds2(two, target, 5).size() == 2);
    }
    CHECK(kind_of([&] { filter_ritds2(Repository{}, target, 1); }) == ErrorKind::no_candidates);
    Repository one;
    one.add(points({"tr", "1"}, {{3, 3}}));
    CHECK(kind_of([&] { filter_ritds2(one, target, 0); }) == ErrorKind::parameter);
}

TEST_CASE("filters match the exhaustive oracles")
{
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 60; ++trial) {
        const bool grid = trial % 2 == 0;
        const auto pool = fixtures::random_repo(rng, 3, 20, 3, grid);
        const auto target = fixtures::random_repo(rng, 1, 15, 3, grid).releases().front();
        const Release tgt({"target", "1"}, target.instances(), true);
        const std::size_t k = 1 + rng() % 6;
        CHECK(keys(select_itds(pool, tgt, k)) == oracle::pull(pool, tgt, k));
        CHECK(keys(filter_ritds1(pool, tgt, k)) == oracle::pull(pool, tgt, k));
        CHECK(keys(filter_ritds2(pool, tgt, k)) == oracle::push(pool, tgt, k));
    }
}

TEST_CASE("simplify dispatch and size chain")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const auto pool = fixtures::random_repo(rng, 4, 25, 4, trial % 3 == 0);
        const Release target({"target", "1"},
                             fixtures::random_repo(rng, 1, 25, 4, false).releases().front().instances(),
                             true);
        std::size_t pool_rows = pool.instance_count();
        std::size_t prev_rtds = 0;
        for (std::size_t r = 1; r <= std::min<std::size_t>(3, pool.size()); ++r) {
            const auto rt = simplify(pool, target, Strategy::rtds, {r, 10});
            const auto r1 = simplify(pool, target, Strategy::ritds1, {r, 10});
            const auto r2 = simplify(pool, target, Strategy::ritds2, {r, 10});
            CHECK(r1.size() <= rt.size());
            CHECK(r2.size() <= rt.size());
            CHECK(rt.size() <= pool_rows);
            CHECK(r2.size() <= target.size());
            CHECK(rt.size() >= prev_rtds);
            prev_rtds = rt.size();

            const auto rt_keys = keys(rt);
            for (const auto& k : keys(r1))
                CHECK(rt_keys.count(k) == 1);
            for (const auto& k : keys(r2))
                CHECK(rt_keys.count(k) == 1);
            CHECK(rt.source_releases == r1.source_releases);
            CHECK(rt.source_releases.size() == r);
            CHECK(r1.r == r);
            CHECK(r2.k == 10);
        }
        const auto none = simplify(pool, target, Strategy::none);
        CHECK(none.size() == pool_rows);
        const auto it = simplify(pool, target, Strategy::itds, {1, 10});
        CHECK(it.r == 0);
        CHECK(std::is_sorted(it.origins.begin(), it.origins.end()));
        CHECK(std::adjacent_find(it.origins.begin(), it.origins.end()) == it.origins.end());
    }
}

TEST_CASE("riTDS-2 can keep more rows than riTDS-1")
{
    // x=0 labels B=-1; y=3.5 labels A=1.5, whose own nearest row is x.
    // Pulling keeps {x}, pushing keeps {x, y}.
    Repository rtds;
    rtds.add(single_feature({"tr", "1"}, {0.0, 3.5}));
    const auto target = single_feature({"tg", "1"}, {-1.0, 1.5});
    CHECK(filter_ritds1(rtds, target, 1).size() == 1);
    CHECK(filter_ritds2(rtds, target, 1).size() == 2);
}

TEST_CASE("simplify with r=1 is the nearest release")
{
    Repository pool;
    pool.add(single_feature({"b", "1"}, {0, 1, 2}));
    pool.add(single_feature({"c", "1"}, {1, 2, 3, 4}));
    const auto target = single_feature({"t", "1"}, {1, 2, 3, 4});
    const auto tds = simplify(pool, target, Strategy::rtds, {1, 10});
    CHECK(tds.size() == 4);
    CHECK(tds.source_releases == std::vector<ReleaseId>{{"c", "1"}});
}

TEST_CASE("pool order does not matter")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 15; ++trial) {
        const auto pool = fixtures::random_repo(rng, 4, 15, 3, true);
        const Release target({"target", "1"},
                             fixtures::random_repo(rng, 1, 10, 3, true).releases().front().instances(),
                             true);
        auto rels = pool.releases();
        std::shuffle(rels.begin(), rels.end(), rng);
        const Repository shuffled(rels);
        for (auto s : {Strategy::itds, Strategy::ritds1, Strategy::ritds2, Strategy::rtds}) {
            const auto a = simplify(pool, target, s, {2 <= pool.size() ? 2u : 1u, 3});
            const auto b = simplify(shuffled, target, s, {2 <= pool.size() ? 2u : 1u, 3});
            CHECK(a.origins == b.origins);
        }
    }
}

TEST_CASE("simplify rejects a target inside its pool")
{
    Repository pool;
    pool.add(single_feature({"b", "1"}, {0, 1, 2}));
    CHECK(kind_of([&] { simplify(pool, pool.releases()[0], Strategy::rtds); }) == ErrorKind::parameter);
}

TEST_CASE("strategy names")
{
    for (auto s : {Strategy::none, Strategy::rtds, Strategy::itds, Strategy::ritds1, Strategy::ritds2})
        CHECK(parse_strategy(to_string(s)) == s);
    CHECK(parse_strategy("riTDS-1") == Strategy::ritds1);
    CHECK(kind_of([] { parse_strategy("bogus"); }) == ErrorKind::parameter);
}
