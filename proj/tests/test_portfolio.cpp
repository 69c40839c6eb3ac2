#include "corrnet/error.hpp"
#include "corrnet/portfolio.hpp"
#include "fixture.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

using namespace corrnet;

namespace {

CircularOrdering identity(std::size_t n)
{
    CircularOrdering o;
    o.taxa.resize(n);
    std::iota(o.taxa.begin(), o.taxa.end(), std::size_t{0});
    return o;
}

std::vector<std::string> names(std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back("T" + std::to_string(i));
    return out;
}

SelectionUniverse period_one(std::vector<double> returns = {})
{
    const auto f = fixture::load_period_one(CORRNET_TEST_DATA "/..");
    if (returns.empty())
        for (std::size_t i = 0; i < f.tickers.size(); ++i)
            returns.push_back(0.001 * static_cast<double>(i));
    return make_universe(f.tickers, f.industry, returns, f.clusters);
}

/// |observed - expected| within three binomial standard deviations.
bool within_3_sigma(std::size_t hits, std::size_t trials, double p)
{
    const double sd = std::sqrt(static_cast<double>(trials) * p * (1 - p));
    return std::abs(static_cast<double>(hits) - static_cast<double>(trials) * p) <= 3 * sd;
}

std::multiset<std::size_t> as_multiset(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST_CASE("rng streams are deterministic and bounded", "[rng]")
{
    Rng a(42, {1, 2, 3}), b(42, {1, 2, 3}), c(42, {1, 2, 4});
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        REQUIRE(x == b.next());
        differs = differs || x != c.next();
    }
    CHECK(differs);

    Rng r(7);
    std::vector<std::size_t> counts(5, 0);
    const std::size_t trials = 50000;
    for (std::size_t i = 0; i < trials; ++i) {
        const auto v = r.below(5);
        REQUIRE(v < 5);
        ++counts[v];
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
    for (auto n : counts)
        CHECK(within_3_sigma(n, trials, 0.2));
    CHECK_THROWS_AS(r.below(0), ValidationError);

    const auto s = sample_without_replacement(10, 10, r);
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 10);
    CHECK_THROWS_AS(sample_without_replacement(3, 4, r), ValidationError);
}

TEST_CASE("allocate_counts follows the quotient and remainder rule", "[portfolio][allocation]")
{
    Rng rng(3);
    CHECK(as_multiset(allocate_counts(16, 5, rng)) == std::multiset<std::size_t>{4, 3, 3, 3, 3});
    CHECK(as_multiset(allocate_counts(8, 5, rng)) == std::multiset<std::size_t>{2, 2, 2, 1, 1});
    CHECK(allocate_counts(10, 5, rng) == std::vector<std::size_t>(5, 2));
    CHECK(as_multiset(allocate_counts(4, 5, rng)) == std::multiset<std::size_t>{1, 1, 1, 1, 0});
    CHECK(allocate_counts(0, 3, rng) == std::vector<std::size_t>(3, 0));
    CHECK_THROWS_AS(allocate_counts(3, 0, rng), ValidationError);

    SECTION("remainder placement is uniform")
    {
        const std::size_t trials = 10000;
        std::vector<std::size_t> extra16(5, 0), extra8(5, 0);
        for (std::size_t t = 0; t < trials; ++t) {
            Rng r(99, {t});
            const auto a = allocate_counts(16, 5, r);
            const auto b = allocate_counts(8, 5, r);
            for (std::size_t g = 0; g < 5; ++g) {
                extra16[g] += a[g] == 4;
                extra8[g] += b[g] == 2;
            }
        }
        for (std::size_t g = 0; g < 5; ++g) {
            CHECK(within_3_sigma(extra16[g], trials, 1.0 / 5));
            CHECK(within_3_sigma(extra8[g], trials, 3.0 / 5));
        }
    }
}

TEST_CASE("select_random", "[portfolio]")
{
    const auto u = make_universe(names(5), std::vector<Industry>(5, Industry::Energy), {0.1, 0.2, 0.3, 0.4, 0.5});
    Rng rng(1);
    auto all = select_random(u, 5, rng).members;
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(select_random(u, 5, rng).period_return == Catch::Approx(0.3));
    CHECK_THROWS_AS(select_random(u, 6, rng), ValidationError);

    Rng x(5, {9}), y(5, {9});
    CHECK(select_random(u, 3, x).members == select_random(u, 3, y).members);

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> freq;
    const std::size_t trials = 100000;
    for (std::size_t t = 0; t < trials; ++t) {
        auto m = select_random(u, 2, rng).members;
        REQUIRE(m[0] != m[1]);
        ++freq[{std::min(m[0], m[1]), std::max(m[0], m[1])}];
    }
    REQUIRE(freq.size() == 10);
    for (const auto& [pair, n] : freq)
        CHECK(within_3_sigma(n, trials, 0.1));
}

TEST_CASE("select_by_industry", "[portfolio]")
{
    const auto u = period_one();
    for (std::uint64_t t = 0; t < 2000; ++t) {
        Rng rng(11, {t});
        const auto p5 = select_by_industry(u, 5, rng);
        std::set<Industry> seen;
        for (auto m : p5.members)
            seen.insert(u.industry[m]);
        REQUIRE(seen.size() == 5);
        const auto p2 = select_by_industry(u, 2, rng);
        REQUIRE(u.industry[p2.members[0]] != u.industry[p2.members[1]]);
        const auto p16 = select_by_industry(u, 16, rng);
        std::map<Industry, std::size_t> per;
        for (auto m : p16.members)
            ++per[u.industry[m]];
        std::vector<std::size_t> counts;
        for (auto& [ind, n] : per)
            counts.push_back(n);
        REQUIRE(as_multiset(counts) == std::multiset<std::size_t>{4, 3, 3, 3, 3});
    }

    SECTION("excess moves to groups with room")
    {
        std::vector<Industry> ind(11, Industry::Finance);
        ind[0] = Industry::Energy;
        const auto small = make_universe(names(11), ind, std::vector<double>(11, 0.0));
        Rng rng(4);
        const auto p = select_by_industry(small, 6, rng);
        REQUIRE(p.members.size() == 6);
        CHECK(std::count(p.members.begin(), p.members.end(), std::size_t{0}) == 1);
    }
    SECTION("single industry falls back to sampling within it")
    {
        const auto one = make_universe(names(4), std::vector<Industry>(4, Industry::Materials),
                                       std::vector<double>(4, 0.0));
        Rng rng(4);
        const auto p = select_by_industry(one, 2, rng);
        CHECK(p.members.size() == 2);
        CHECK(p.members[0] != p.members[1]);
    }
}

TEST_CASE("select_by_cluster", "[portfolio]")
{
    const auto u = period_one();
    const auto& a = *u.clusters;
    const auto& pairing = *u.pairing;
    REQUIRE(pairing.pair_of == std::vector<std::size_t>{5, 6, 7, 8, 1, 2, 3, 4});

    for (std::uint64_t t = 0; t < 2000; ++t) {
        Rng rng(21, {t});
        const auto p2 = select_by_cluster(u, 2, rng);
        REQUIRE(p2.pairs.size() == 1);
        REQUIRE(a.labels[p2.pairs[0].second] == pairing(a.labels[p2.pairs[0].first]));

        const auto p5 = select_by_cluster(u, 5, rng);
        REQUIRE(p5.members.size() == 5);
        REQUIRE(p5.pairs.size() == 2);
        // Drawing without replacement, the second pair avoids the first pair's clusters.
        std::set<std::size_t> used;
        for (auto [x, y] : p5.pairs) {
            used.insert(a.labels[x]);
            used.insert(a.labels[y]);
        }
        REQUIRE(used.size() == 4);

        const auto p16 = select_by_cluster(u, 16, rng);
        std::vector<std::size_t> per(8, 0);
        for (auto m : p16.members)
            ++per[a.labels[m] - 1];
        REQUIRE(per == std::vector<std::size_t>(8, 2));
        REQUIRE(p16.pairs.empty());
    }

    Rng rng(1);
    CHECK_THROWS_AS(select_by_cluster(u, 1, rng), ValidationError);
    const auto bare = make_universe(names(4), std::vector<Industry>(4, Industry::Energy), std::vector<double>(4, 0.0));
    CHECK_THROWS_AS(select_by_cluster(bare, 2, rng), ValidationError);

    SECTION("with replacement the same cluster pair may repeat")
    {
        bool repeated = false;
        for (std::uint64_t t = 0; t < 500 && !repeated; ++t) {
            Rng r(8, {t});
            const auto p = select_by_cluster(u, 8, r, ClusterSampling::WithReplacement);
            std::set<std::size_t> firsts;
            for (auto [x, y] : p.pairs)
                firsts.insert(std::min(a.labels[x], a.labels[y]));
            repeated = firsts.size() < p.pairs.size();
        }
        CHECK(repeated);
    }
}

TEST_CASE("select_by_industry_cluster", "[portfolio]")
{
    const auto u = period_one();
    for (std::uint64_t t = 0; t < 2000; ++t) {
        Rng rng(31, {t});
        for (std::size_t k : {2, 4, 7}) {
            const auto p = select_by_industry_cluster(u, k, rng);
            REQUIRE(p.members.size() == k);
            for (auto [x, y] : p.pairs)
                REQUIRE(u.industry[x] != u.industry[y]);
        }
    }

    SECTION("pairs of single-industry clusters are infeasible")
    {
        std::vector<Industry> ind(8, Industry::Materials);
        const auto assignment = delineate_manual(identity(8), {0, 4});
        const auto mono = make_universe(names(8), ind, std::vector<double>(8, 0.0), assignment);
        Rng rng(2);
        CHECK_THROWS_AS(select_by_industry_cluster(mono, 2, rng), ValidationError);
        CHECK_NOTHROW(select_by_cluster(mono, 2, rng));
    }
}

TEST_CASE("strategy contracts over seeded trials", "[portfolio]")
{
    const auto u = period_one();
    for (auto s : all_strategies())
        for (std::size_t k : {2, 3, 4, 8, 16}) {
            for (std::uint64_t t = 0; t < 300; ++t) {
                Rng rng(77, {static_cast<std::uint64_t>(s), k, t});
                const auto p = select(u, s, k, rng);
                std::set<std::size_t> distinct(p.members.begin(), p.members.end());
                REQUIRE(distinct.size() == k);
                REQUIRE(*distinct.rbegin() < u.size());
            }
        }
}

TEST_CASE("simulate", "[portfolio][simulate]")
{
    SECTION("identical returns give zero spread")
    {
        const auto u = period_one(std::vector<double>(126, 0.037));
        for (auto s : all_strategies()) {
            const auto r = simulate(u, s, 4, {200, 5, 1});
            CHECK(r.mean == Catch::Approx(0.037).margin(1e-15));
            CHECK(r.std_dev < 1e-15);
            CHECK(r.returns.size() == 200);
        }
    }
    SECTION("mean and std match the returns")
    {
        const auto u = period_one();
        const auto r = simulate(u, Strategy::Cluster, 8, {500, 9, 1});
        const double mean = std::accumulate(r.returns.begin(), r.returns.end(), 0.0) / 500.0;
        double ss = 0;
        for (double x : r.returns)
            ss += (x - mean) * (x - mean);
        CHECK(std::abs(r.mean - mean) < 1e-12);
        CHECK(std::abs(r.std_dev - std::sqrt(ss / 499.0)) < 1e-12);
        CHECK(r.seed == 9);
        CHECK(r.rng_algorithm == kRngAlgorithm);
    }
    SECTION("deterministic and independent of the thread count")
    {
        const auto u = period_one();
        for (auto s : all_strategies()) {
            const auto a = simulate(u, s, 4, {300, 1234, 1});
            const auto b = simulate(u, s, 4, {300, 1234, 1});
            const auto c = simulate(u, s, 4, {300, 1234, 3});
            CHECK(a.returns == b.returns);
            CHECK(a.returns == c.returns);
            CHECK(a.std_dev == c.std_dev);
        }
    }
    SECTION("selection errors carry the iteration")
    {
        const auto u = period_one();
        try {
            simulate(u, Strategy::Random, 500, {10, 1, 2});
            FAIL("expected an error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).rfind("iteration 0:", 0) == 0);
        }
        CHECK_THROWS_AS(simulate(u, Strategy::Random, 2, {1, 1, 1}), ValidationError);
    }
    SECTION("random draws ignore the cluster assignment")
    {
        auto u = period_one();
        auto v = u;
        v.clusters = delineate_manual(u.clusters->ordering, {0, 60});
        v.pairing = pair_clusters(*v.clusters);
        CHECK(simulate(u, Strategy::Random, 4, {100, 3, 1}).returns ==
              simulate(v, Strategy::Random, 4, {100, 3, 1}).returns);
    }
}

TEST_CASE("cluster pairs reduce spread on a two-block universe", "[portfolio][simulate]")
{
    // Two blocks of 20 whose returns move in opposite directions each replication.
    const std::size_t n = 40;
    std::vector<Industry> ind;
    for (std::size_t i = 0; i < n; ++i)
        ind.push_back(static_cast<Industry>(i % 5));
    const auto assignment = delineate_manual(identity(n), {0, 20});
    std::size_t wins = 0;
    for (std::uint64_t rep = 0; rep < 30; ++rep) {
        Rng rng(500, {rep});
        const double shock = 0.05 + 0.1 * rng.uniform();
        std::vector<double> returns(n);
        for (std::size_t i = 0; i < n; ++i)
            returns[i] = (i < 20 ? shock : -shock) + 0.02 * (rng.uniform() - 0.5);
        const auto u = make_universe(names(n), ind, returns, assignment);
        const auto cluster = simulate(u, Strategy::Cluster, 4, {1000, rep, 1});
        const auto random = simulate(u, Strategy::Random, 4, {1000, rep, 1});
        wins += cluster.std_dev < random.std_dev;
    }
    // One-sided sign test at 95%: at least 20 of 30.
    CHECK(wins >= 20);
}

TEST_CASE("simulation table csv", "[portfolio][report]")
{
    const auto u = period_one();
    auto table = simulate_table(u, all_strategies(), {2, 4}, {100, 17, 1});
    table.estimation_period = "P1";
    table.evaluation_period = "P2";
    REQUIRE(table.rows.size() == 2);
    REQUIRE(table.rows[0].results.size() == 4);
    CHECK(table.rows[0].anova.df1 == 3);
    CHECK(table.rows[0].anova.df2 == 396);
    CHECK(table.rows[0].levene.center == LeveneCenter::Median);

    std::ostringstream out;
    write_table_csv(out, table);
    std::istringstream lines(out.str());
    std::string header, mean_line, std_line;
    std::getline(lines, header);
    std::getline(lines, mean_line);
    std::getline(lines, std_line);
    CHECK(header == "size,Random,Industry,Cluster,IndustryCluster,p_value");
    CHECK(mean_line.rfind("2,", 0) == 0);
    CHECK(std_line.rfind(",(", 0) == 0);
    CHECK(std::count(std_line.begin(), std_line.end(), '(') == 5);

    std::ostringstream again;
    write_table_csv(again, simulate_table(u, all_strategies(), {2, 4}, {100, 17, 1}));
    CHECK(again.str() == out.str());

    const auto flat = period_one(std::vector<double>(126, 0.01));
    std::ostringstream na;
    write_table_csv(na, simulate_table(flat, all_strategies(), {2}, {50, 1, 1}));
    CHECK(na.str().find(",NA\n") != std::string::npos);
}
