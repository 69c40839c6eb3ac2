#include "corrnet/error.hpp"
#include "corrnet/splits.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

using namespace corrnet;
using Catch::Matchers::WithinAbs;

namespace {

DistanceMatrix wrap(const Eigen::MatrixXd& m)
{
    DistanceMatrix d;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        d.tickers.push_back("t" + std::to_string(i));
    d.d = m;
    return d;
}

double weight_of(const WeightedSplitSystem& s, const CircularSplit& split)
{
    for (const auto& ws : s.splits)
        if (ws.split == split)
            return ws.weight;
    return 0.0;
}

} // namespace

TEST_CASE("make_split canonical form", "[splits]")
{
    REQUIRE(make_split(2, 3, 6) == CircularSplit{2, 3});
    REQUIRE(make_split(4, 1, 6) == CircularSplit{2, 3}); // complement arc wraps through 0
    REQUIRE(make_split(0, 1, 6) == CircularSplit{2, 5});
    REQUIRE(make_split(0, 0, 6) == CircularSplit{0, 0});
    REQUIRE(make_split(1, 5, 6) == CircularSplit{0, 0});
    REQUIRE_THROWS_AS(make_split(2, 1, 6), ValidationError);
    REQUIRE_THROWS_AS(make_split(0, 6, 6), ValidationError);
    REQUIRE(arc_size(CircularSplit{2, 4}) == 3);
    const CircularOrdering o{{4, 2, 0, 5, 1, 3}};
    REQUIRE(split_members({1, 3}, o) == std::vector<std::size_t>{2, 0, 5});
    REQUIRE(split_members({0, 0}, o) == std::vector<std::size_t>{4});
    REQUIRE(separates({1, 3}, 6, 0, 2));
    REQUIRE_FALSE(separates({1, 3}, 6, 1, 3));
    REQUIRE(separates({0, 0}, 6, 0, 4));
}

TEST_CASE("enumerate_splits", "[splits]")
{
    REQUIRE(enumerate_splits(4).size() == 6);
    REQUIRE(enumerate_splits(2).size() == 1);
    REQUIRE(enumerate_splits(126).size() == 7875);
    REQUIRE(candidate_split_count(126) == 7875);
    for (std::size_t n = 2; n <= 12; ++n) {
        const auto all = enumerate_splits(n);
        REQUIRE(all.size() == n * (n - 1) / 2);
        REQUIRE(std::set<CircularSplit>(all.begin(), all.end()).size() == all.size());
        // Each split is identified with the pair of cycle edges it cuts.
        std::set<std::pair<std::size_t, std::size_t>> cut_edges;
        for (std::size_t k = 0; k < all.size(); ++k) {
            REQUIRE(split_index(all[k], n) == k);
            REQUIRE(make_split(all[k].p, all[k].q, n) == all[k]);
            const auto s = all[k].p == 0 ? CircularSplit{1, n - 1} : all[k];
            cut_edges.insert({s.p - 1, s.q});
        }
        REQUIRE(cut_edges.size() == all.size());
    }
}

TEST_CASE("split_metric", "[splits]")
{
    SECTION("single quartet split")
    {
        WeightedSplitSystem s{{{0, 1, 2, 3}}, {{make_split(2, 3, 4), 0.7}}, 0.0};
        const auto d = split_metric(s);
        REQUIRE(d(0, 2) == 0.7);
        REQUIRE(d(0, 1) == 0.0);
        REQUIRE(d(2, 3) == 0.0);
        REQUIRE(d(1, 3) == 0.7);
    }
    SECTION("empty system")
    {
        WeightedSplitSystem s{{{0, 1, 2, 3, 4}}, {}, 0.0};
        REQUIRE(split_metric(s).d.isZero());
    }
    SECTION("matches per-pair brute force")
    {
        std::mt19937_64 rng(6);
        for (int trial = 0; trial < 30; ++trial) {
            const auto s = oracle::random_circular_system(6 + static_cast<std::size_t>(trial % 5), rng, 0.6);
            const auto fast = split_metric(s);
            const auto slow = oracle::split_metric(s);
            REQUIRE((fast.d - slow).cwiseAbs().maxCoeff() < 1e-12);
            REQUIRE(fast.d.isApprox(fast.d.transpose()));
            REQUIRE(fast.d.diagonal().isZero());
        }
    }
}

TEST_CASE("structured operator matches the dense incidence matrix", "[splits]")
{
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal;
    for (std::size_t n = 2; n <= 11; ++n) {
        const CircularSplitOperator op(n);
        const Eigen::MatrixXd a = oracle::incidence(n);
        Eigen::VectorXd w(a.cols()), r(a.rows());
        for (auto& x : w)
            x = normal(rng);
        for (auto& x : r)
            x = normal(rng);
        REQUIRE((op.apply(w) - a * w).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((op.apply_transpose(r) - a.transpose() * r).cwiseAbs().maxCoeff() < 1e-12);
        const Eigen::MatrixXd g = a.transpose() * a;
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < g.cols(); ++j)
                REQUIRE(op.gram(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) == g(i, j));
    }
}

TEST_CASE("fit_weights", "[splits]")
{
    SECTION("four-taxon tree metric")
    {
        Eigen::MatrixXd m(4, 4);
        m << 0, 2, 3, 3,
             2, 0, 3, 3,
             3, 3, 0, 2,
             3, 3, 2, 0;
        const CircularOrdering o{{0, 1, 2, 3}};
        const auto s = fit_weights(wrap(m), o);
        REQUIRE(s.splits.size() == 5);
        REQUIRE_THAT(weight_of(s, make_split(2, 3, 4)), WithinAbs(1.0, 1e-12));
        for (std::size_t p = 0; p < 4; ++p)
            REQUIRE_THAT(weight_of(s, make_split(p, p, 4)), WithinAbs(1.0, 1e-12));
        REQUIRE(weight_of(s, make_split(1, 2, 4)) == 0.0);
        REQUIRE(s.fit_residual < 1e-12);

        // Dense brute-force NNLS on the six unknowns agrees.
        const Eigen::MatrixXd a = oracle::incidence(4);
        const CircularSplitOperator op(4);
        const Eigen::VectorXd x = oracle::nnls_enumerate(a, op.pair_vector(wrap(m), o));
        const auto splits = enumerate_splits(4);
        for (std::size_t k = 0; k < splits.size(); ++k)
            REQUIRE_THAT(weight_of(s, splits[k]), WithinAbs(x(static_cast<Eigen::Index>(k)), 1e-10));
    }
    SECTION("zero matrix")
    {
        const auto s = fit_weights(wrap(Eigen::MatrixXd::Zero(5, 5)), {{0, 1, 2, 3, 4}});
        REQUIRE(s.splits.empty());
        REQUIRE(s.fit_residual == 0.0);
    }
    SECTION("recovers known weights on six taxa")
    {
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 20; ++trial) {
            const auto truth = oracle::random_circular_system(6, rng);
            const auto fit = fit_weights(wrap(oracle::split_metric(truth)), truth.ordering);
            for (const auto& ws : truth.splits)
                REQUIRE_THAT(weight_of(fit, ws.split), WithinAbs(ws.weight, 1e-6));
            REQUIRE(fit.fit_residual < 1e-8);
        }
    }
    SECTION("ordering must cover the matrix")
    {
        REQUIRE_THROWS_AS(fit_weights(wrap(Eigen::MatrixXd::Zero(4, 4)), {{0, 1, 2}}), ValidationError);
        REQUIRE_THROWS_AS(fit_weights(wrap(Eigen::MatrixXd::Zero(3, 3)), {{0, 1, 1}}), ValidationError);
    }
}

TEST_CASE("fit_weights properties", "[splits][property]")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(trial % 6);
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = i + 1; j < m.cols(); ++j)
                m(i, j) = m(j, i) = u(rng);
        const auto d = wrap(m);
        CircularOrdering o;
        for (std::size_t i = 0; i < n; ++i)
            o.taxa.push_back(i);
        std::shuffle(o.taxa.begin(), o.taxa.end(), rng);

        const auto fit = fit_weights(d, o);
        INFO("trial " << trial);
        for (const auto& ws : fit.splits)
            REQUIRE(ws.weight > 0.0);
        REQUIRE(kkt_violation(d, fit) < 1e-8);

        // Never worse than fitting nothing.
        const double zero_rms = std::sqrt(m.squaredNorm() / 2.0 / static_cast<double>(n * (n - 1) / 2));
        REQUIRE(fit.fit_residual <= zero_rms);

        REQUIRE(split_metric(fit).d.minCoeff() >= 0.0);

        // Projection: refitting the fitted metric returns the same weights.
        const auto again = fit_weights(split_metric(fit), o);
        REQUIRE(again.fit_residual < 1e-8);
        for (const auto& ws : fit.splits)
            REQUIRE_THAT(weight_of(again, ws.split), WithinAbs(ws.weight, 1e-6));

        // Scale equivariance.
        const auto scaled = fit_weights(wrap(3.5 * m), o);
        REQUIRE(scaled.splits.size() == fit.splits.size());
        for (std::size_t k = 0; k < fit.splits.size(); ++k) {
            REQUIRE(scaled.splits[k].split == fit.splits[k].split);
            REQUIRE_THAT(scaled.splits[k].weight, WithinAbs(3.5 * fit.splits[k].weight, 1e-9));
        }
    }
}

TEST_CASE("iteration cap raises with the best iterate", "[splits]")
{
    std::mt19937_64 rng(5);
    const auto truth = oracle::random_circular_system(8, rng);
    FitOptions opts;
    opts.solver.max_iterations = 3;
    try {
        fit_weights(wrap(oracle::split_metric(truth)), truth.ordering, opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        REQUIRE(e.best().splits.size() <= 3);
        REQUIRE(e.best().fit_residual > 0.0);
        REQUIRE(e.kind() == Error::Kind::Numerical);
    }
}
