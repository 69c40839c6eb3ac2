#pragma once

#include "corrnet/clustering.hpp"
#include "corrnet/inference.hpp"
#include "corrnet/marketdata.hpp"
#include "corrnet/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace corrnet {

enum class Strategy { Random, Industry, Cluster, IndustryCluster };

std::string to_string(Strategy strategy);
/// Accepts the names produced by to_string, case-insensitively.
Strategy parse_strategy(const std::string& text);
const std::vector<Strategy>& all_strategies();

/// How the cluster of each pair is drawn.
enum class ClusterSampling {
    /// Without replacement until every cluster has been drawn, then with replacement.
    ExhaustFirst,
    WithReplacement,
};

/// Stocks available for selection. Taxon i of the cluster assignment is
/// ticker i.
struct SelectionUniverse {
    std::vector<std::string> tickers;
    std::vector<Industry> industry;
    /// Equal-weight portfolio inputs: the out-of-sample return of each ticker.
    std::vector<double> period_returns;
    std::optional<ClusterAssignment> clusters;
    std::optional<ClusterPairing> pairing;

    std::size_t size() const { return tickers.size(); }
    /// Throws ValidationError when the per-ticker vectors disagree in length,
    /// a return is not finite, or the cluster data does not cover every ticker.
    void validate() const;
};

/// Builds a universe and derives the pairing from the assignment when given.
SelectionUniverse make_universe(std::vector<std::string> tickers, std::vector<Industry> industry,
                                std::vector<double> period_returns,
                                std::optional<ClusterAssignment> clusters = std::nullopt);

struct Portfolio {
    /// Ticker indices in selection order.
    std::vector<std::size_t> members;
    /// Pairs drawn from a cluster and its partner (cluster strategies only).
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double period_return = 0.0;
};

/// Retries allowed for constrained redraws before a selection is declared infeasible.
inline constexpr int kMaxRetries = 100;

/// Spreads `total` picks over `groups`: with total <= groups, `total` distinct
/// groups get one each; otherwise every group gets total / groups and
/// total % groups distinct random groups get one more.
std::vector<std::size_t> allocate_counts(std::size_t total, std::size_t groups, Rng& rng);

Portfolio select_random(const SelectionUniverse& u, std::size_t k, Rng& rng);

/// Counts from allocate_counts over the industries present. A group asked for
/// more stocks than it has gives the excess, one at a time, to random groups
/// with room left.
Portfolio select_by_industry(const SelectionUniverse& u, std::size_t k, Rng& rng);

/// floor(k/2) pairs, each one stock from a drawn cluster and one from its
/// partner; odd k adds a stock from a random cluster. With k above the cluster
/// count the industry-style allocation runs over clusters instead.
Portfolio select_by_cluster(const SelectionUniverse& u, std::size_t k, Rng& rng,
                            ClusterSampling sampling = ClusterSampling::ExhaustFirst);

/// As select_by_cluster, and the two stocks of every pair differ in industry.
Portfolio select_by_industry_cluster(const SelectionUniverse& u, std::size_t k, Rng& rng,
                                     ClusterSampling sampling = ClusterSampling::ExhaustFirst);

Portfolio select(const SelectionUniverse& u, Strategy strategy, std::size_t k, Rng& rng,
                 ClusterSampling sampling = ClusterSampling::ExhaustFirst);

struct SimulationOptions {
    std::size_t iterations = 1000;
    std::uint64_t seed = 1;
    /// 0 or 1 runs on the calling thread.
    unsigned threads = 1;
    ClusterSampling sampling = ClusterSampling::ExhaustFirst;
};

struct SimulationResult {
    Strategy strategy = Strategy::Random;
    std::size_t size = 0;
    std::vector<double> returns;
    double mean = 0.0;
    double std_dev = 0.0; ///< sample (n - 1) denominator
    std::uint64_t seed = 0;
    std::string rng_algorithm;
    std::string stream; ///< how each iteration's generator was derived
};

/// Iteration i draws from Rng(seed, {strategy, k, i}), so results do not
/// depend on the thread count. Selection errors are rethrown with the
/// iteration index.
SimulationResult simulate(const SelectionUniverse& u, Strategy strategy, std::size_t k,
                          const SimulationOptions& options = {});

/// One row of a results table: every strategy at one portfolio size.
struct SizeRow {
    std::size_t size = 0;
    std::vector<SimulationResult> results; ///< in the order of `strategies`
    TestReport anova;
    TestReport levene;
};

struct SimulationTable {
    std::string estimation_period;
    std::string evaluation_period;
    std::vector<Strategy> strategies;
    std::vector<SizeRow> rows;
};

/// Simulates every (size, strategy) cell and tests the strategies against
/// each other within each size.
SimulationTable simulate_table(const SelectionUniverse& u, const std::vector<Strategy>& strategies,
                               const std::vector<std::size_t>& sizes, const SimulationOptions& options,
                               LeveneCenter center = LeveneCenter::Median);

/// Two lines per size: means with the ANOVA p-value, then standard deviations
/// and the Levene p-value in brackets.
void write_table_csv(std::ostream& out, const SimulationTable& table);

} // namespace corrnet
