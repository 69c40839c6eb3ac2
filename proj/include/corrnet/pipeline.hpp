#pragma once

#include "corrnet/clustering.hpp"
#include "corrnet/corrdist.hpp"
#include "corrnet/inference.hpp"
#include "corrnet/marketdata.hpp"
#include "corrnet/portfolio.hpp"
#include "corrnet/splits.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace corrnet {

struct PipelineConfig {
    std::filesystem::path metadata;
    /// Empty: generate prices from `synthetic_seed`.
    std::filesystem::path prices;
    std::uint64_t synthetic_seed = 2005;
    std::filesystem::path out = "out";
    std::vector<Date> boundaries;
    FitOptions fit;
    std::size_t k = 8;
    std::size_t min_size = 4;
    /// Period label -> `ticker,cluster` file replacing the automatic delineation.
    std::map<std::string, std::filesystem::path> cluster_files;
    std::vector<std::size_t> sizes{2, 4, 8, 16};
    std::size_t iterations = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::vector<Strategy> strategies = all_strategies();
    LeveneCenter center = LeveneCenter::Median;
    ClusterSampling sampling = ClusterSampling::ExhaustFirst;

    std::vector<StudyPeriod> periods() const;
    SimulationOptions simulation_options() const;
    /// Throws ValidationError for inconsistent settings (no existence checks).
    void validate() const;
};

/// Defaults: bundled metadata under `data_dir`, the four study periods,
/// synthetic prices.
PipelineConfig default_config(const std::filesystem::path& data_dir);

/// INI file with sections [data], [periods], [network], [clusters],
/// [cluster_files] and [simulation]. Relative paths are resolved against the
/// file's directory; unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& ini);

/// Comma separated list of positive integers.
std::vector<std::size_t> parse_sizes(const std::string& text);

struct MarketData {
    Metadata metadata;
    std::vector<PriceSeries> series; ///< metadata order
    std::vector<StudyPeriod> periods;

    std::vector<std::string> tickers() const;
    std::vector<Industry> industries() const;
    /// Index of the period with this label; throws ValidationError.
    std::size_t period_index(const std::string& label) const;
};

/// Factor model shaped like the study: one regime per period, each with its
/// own cluster map, and the metadata's industries.
SyntheticSpec synthetic_spec(const Metadata& metadata, const std::vector<StudyPeriod>& periods, std::uint64_t seed);

MarketData load_market_data(const PipelineConfig& config);

/// Everything estimated from one period's weekly returns.
struct PeriodNetwork {
    StudyPeriod period;
    std::size_t windows = 0;
    CorrelationSummary summary;
    DistanceMatrix distances;
    WeightedSplitSystem system;
};

PeriodNetwork build_network(const MarketData& data, std::size_t period, const FitOptions& fit);

/// The configured cluster file for this period, or automatic delineation.
ClusterAssignment choose_clusters(const PipelineConfig& config, const MarketData& data, const PeriodNetwork& network);

/// Tickers with their returns over `evaluation` and clusters from the estimation period.
SelectionUniverse evaluation_universe(const MarketData& data, std::size_t evaluation, const ClusterAssignment& clusters);

SimulationTable simulate_pair(const PipelineConfig& config, const MarketData& data, std::size_t estimation,
                              const ClusterAssignment& clusters);

/// `period,mean,std_dev,min,max,negative` with negatives as count/pairs.
void write_summary_csv(std::ostream& out, const std::vector<PeriodNetwork>& networks);

/// Runs every stage and writes, under config.out: correlation_summary.csv,
/// <P>_network.nex for each period, <P>_clusters.csv for each estimation
/// period and report_<P>_<Q>.csv / .json for each consecutive pair. Errors are
/// rethrown with the stage name. Returns the files written.
std::vector<std::filesystem::path> cmd_run(const PipelineConfig& config, std::ostream& log);

} // namespace corrnet
