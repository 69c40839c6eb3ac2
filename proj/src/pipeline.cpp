#include "corrnet/pipeline.hpp"

#include "corrnet/error.hpp"
#include "corrnet/json.hpp"
#include "corrnet/neighbornet.hpp"
#include "corrnet/nexus.hpp"
#include "corrnet/rng.hpp"
#include "csv.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace corrnet {

namespace fs = std::filesystem;

std::vector<StudyPeriod> PipelineConfig::periods() const
{
    return boundaries.empty() ? default_periods() : periods_from_boundaries(boundaries);
}

SimulationOptions PipelineConfig::simulation_options() const
{
    SimulationOptions o;
    o.iterations = iterations;
    o.seed = seed;
    o.threads = threads;
    o.sampling = sampling;
    return o;
}

void PipelineConfig::validate() const
{
    if (metadata.empty())
        throw ValidationError("config: metadata path is required");
    if (!boundaries.empty() && boundaries.size() < 3)
        throw ValidationError("config: need at least three period boundaries (two periods)");
    if (sizes.empty())
        throw ValidationError("config: at least one portfolio size is required");
    for (auto s : sizes)
        if (s == 0)
            throw ValidationError("config: portfolio sizes must be positive");
    if (iterations < 2)
        throw ValidationError("config: iterations must be at least 2");
    if (k < 2 || min_size == 0)
        throw ValidationError("config: need k >= 2 and min_size >= 1");
    if (strategies.empty())
        throw ValidationError("config: at least one strategy is required");
    periods();
}

PipelineConfig default_config(const fs::path& data_dir)
{
    PipelineConfig c;
    c.metadata = data_dir / "shanghai_a_metadata.csv";
    return c;
}

namespace {

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    for (auto part : csv::split(text))
        if (!part.empty())
            out.emplace_back(part);
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        T value{};
        if constexpr (std::is_floating_point_v<T>)
            value = static_cast<T>(std::stod(text, &used));
        else {
            if (!text.empty() && text.front() == '-')
                throw std::invalid_argument("negative");
            value = static_cast<T>(std::stoull(text, &used));
        }
        if (used != text.size())
            throw std::invalid_argument("trailing text");
        return value;
    } catch (const std::exception&) {
        throw ValidationError("config: " + key + " = '" + text + "' is not a valid number");
    }
}

} // namespace

std::vector<std::size_t> parse_sizes(const std::string& text)
{
    std::vector<std::size_t> out;
    for (const auto& s : split_list(text)) {
        const auto v = parse_number<std::size_t>("sizes", s);
        if (v == 0)
            throw ValidationError("portfolio sizes must be positive");
        out.push_back(v);
    }
    if (out.empty())
        throw ValidationError("no portfolio sizes given");
    return out;
}

PipelineConfig load_config(const fs::path& ini)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(ini.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        if (!fs::exists(ini))
            throw IoError("cannot open config " + ini.string());
        throw ParseError(e.message(), e.line());
    }
    const fs::path base = ini.has_parent_path() ? ini.parent_path() : fs::path(".");
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    PipelineConfig c;
    for (const auto& [section, body] : tree) {
        if (!body.data().empty())
            throw ValidationError("config: key '" + section + "' outside a section");
        for (const auto& [key, node] : body) {
            const std::string v = node.data();
            const std::string name = section + "." + key;
            if (section == "cluster_files") {
                c.cluster_files[key] = resolve(v);
            } else if (name == "data.metadata") {
                c.metadata = resolve(v);
            } else if (name == "data.prices") {
                c.prices = v.empty() ? fs::path() : resolve(v);
            } else if (name == "data.synthetic_seed") {
                c.synthetic_seed = parse_number<std::uint64_t>(name, v);
            } else if (name == "data.out") {
                c.out = resolve(v);
            } else if (name == "periods.boundaries") {
                c.boundaries.clear();
                for (const auto& d : split_list(v)) {
                    const auto date = Date::parse(d);
                    if (!date)
                        throw ValidationError("config: '" + d + "' is not a YYYY-MM-DD date");
                    c.boundaries.push_back(*date);
                }
            } else if (name == "network.drop_ratio") {
                c.fit.drop_ratio = parse_number<double>(name, v);
            } else if (name == "network.drop_floor") {
                c.fit.drop_floor = parse_number<double>(name, v);
            } else if (name == "network.tolerance") {
                c.fit.solver.tolerance = parse_number<double>(name, v);
            } else if (name == "network.max_iterations") {
                c.fit.solver.max_iterations = parse_number<std::size_t>(name, v);
            } else if (name == "clusters.k") {
                c.k = parse_number<std::size_t>(name, v);
            } else if (name == "clusters.min_size") {
                c.min_size = parse_number<std::size_t>(name, v);
            } else if (name == "simulation.sizes") {
                c.sizes = parse_sizes(v);
            } else if (name == "simulation.iterations") {
                c.iterations = parse_number<std::size_t>(name, v);
            } else if (name == "simulation.seed") {
                c.seed = parse_number<std::uint64_t>(name, v);
            } else if (name == "simulation.threads") {
                c.threads = parse_number<unsigned>(name, v);
            } else if (name == "simulation.strategies") {
                c.strategies.clear();
                for (const auto& s : split_list(v))
                    c.strategies.push_back(parse_strategy(s));
            } else if (name == "simulation.levene_center") {
                c.center = parse_center(v);
            } else if (name == "simulation.cluster_sampling") {
                if (v == "exhaust_first")
                    c.sampling = ClusterSampling::ExhaustFirst;
                else if (v == "with_replacement")
                    c.sampling = ClusterSampling::WithReplacement;
                else
                    throw ValidationError("config: cluster_sampling must be exhaust_first or with_replacement");
            } else {
                throw ValidationError("config: unknown key " + name);
            }
        }
    }
    c.validate();
    return c;
}

std::vector<std::string> MarketData::tickers() const
{
    std::vector<std::string> out;
    for (const auto& s : series)
        out.push_back(s.ticker);
    return out;
}

std::vector<Industry> MarketData::industries() const
{
    std::vector<Industry> out;
    for (const auto& s : series)
        out.push_back(s.industry);
    return out;
}

std::size_t MarketData::period_index(const std::string& label) const
{
    for (std::size_t i = 0; i < periods.size(); ++i)
        if (periods[i].label == label)
            return i;
    throw ValidationError("unknown period '" + label + "'");
}

SyntheticSpec synthetic_spec(const Metadata& metadata, const std::vector<StudyPeriod>& periods, std::uint64_t seed)
{
    static constexpr std::size_t kClusterCounts[] = {8, 5, 6, 7};
    static constexpr double kDrift[] = {0.0012, 0.0020, -0.0025, 0.0006};
    const std::size_t n = metadata.size();
    SyntheticSpec spec;
    for (const auto& e : metadata.entries())
        spec.tickers.push_back(e.ticker);
    spec.start = periods.front().start;
    for (std::size_t r = 0; r < periods.size(); ++r) {
        std::size_t weekdays = 0;
        for (Date d = periods[r].start; d < periods[r].end; d = d + 1)
            weekdays += d.is_weekday();
        Regime regime;
        regime.weeks = std::max<std::size_t>(2, (weekdays + kTradingDaysPerWindow - 1) / kTradingDaysPerWindow);
        regime.market_loading = 1.0;
        regime.drift = kDrift[r % 4];
        const std::size_t k = std::min(n, kClusterCounts[r % 4]);
        Rng rng(seed, {0x5eed, r});
        const auto order = sample_without_replacement(n, n, rng);
        regime.loadings.resize(n);
        for (std::size_t pos = 0; pos < n; ++pos) {
            auto& l = regime.loadings[order[pos]];
            l.industry = metadata.entries()[order[pos]].industry;
            l.industry_loading = 0.7;
            l.cluster = pos * k / n;
            l.cluster_loading = 1.2;
        }
        spec.regimes.push_back(std::move(regime));
    }
    return spec;
}

MarketData load_market_data(const PipelineConfig& config)
{
    MarketData data;
    std::ifstream meta_in(config.metadata);
    if (!meta_in)
        throw IoError("cannot open metadata " + config.metadata.string());
    data.metadata = load_metadata(meta_in);
    data.periods = config.periods();
    if (config.prices.empty()) {
        data.series = generate_synthetic(synthetic_spec(data.metadata, data.periods, config.synthetic_seed),
                                         config.synthetic_seed);
        for (std::size_t i = 0; i < data.series.size(); ++i)
            data.series[i].industry = data.metadata.entries()[i].industry;
    } else {
        std::ifstream prices_in(config.prices);
        if (!prices_in)
            throw IoError("cannot open prices " + config.prices.string());
        data.series = load_prices(prices_in, data.metadata);
    }
    return data;
}

PeriodNetwork build_network(const MarketData& data, std::size_t period, const FitOptions& fit)
{
    if (period >= data.periods.size())
        throw ValidationError("period index out of range");
    PeriodNetwork net;
    net.period = data.periods[period];
    const auto returns = weekly_returns(data.series, net.period);
    net.windows = returns.windows.size();
    const auto rho = correlations(returns);
    net.summary = summarize(rho);
    net.distances = to_distance(rho);
    const auto ordering = circular_ordering(net.distances).ordering;
    net.system = fit_weights(net.distances, ordering, fit);
    return net;
}

ClusterAssignment choose_clusters(const PipelineConfig& config, const MarketData& data, const PeriodNetwork& network)
{
    const auto it = config.cluster_files.find(network.period.label);
    if (it == config.cluster_files.end())
        return delineate_auto(network.system, config.k, config.min_size);
    std::ifstream in(it->second);
    if (!in)
        throw IoError("cannot open cluster file " + it->second.string());
    return read_cluster_csv(in, network.system.ordering, data.tickers());
}

SelectionUniverse evaluation_universe(const MarketData& data, std::size_t evaluation, const ClusterAssignment& clusters)
{
    if (evaluation >= data.periods.size())
        throw ValidationError("period index out of range");
    std::vector<double> returns;
    for (const auto& s : data.series)
        returns.push_back(period_total_return(s, data.periods[evaluation]));
    return make_universe(data.tickers(), data.industries(), std::move(returns), clusters);
}

SimulationTable simulate_pair(const PipelineConfig& config, const MarketData& data, std::size_t estimation,
                              const ClusterAssignment& clusters)
{
    if (estimation + 1 >= data.periods.size())
        throw ValidationError("period " + data.periods.at(estimation).label + " has no following period");
    const auto universe = evaluation_universe(data, estimation + 1, clusters);
    auto table = simulate_table(universe, config.strategies, config.sizes, config.simulation_options(), config.center);
    table.estimation_period = data.periods[estimation].label;
    table.evaluation_period = data.periods[estimation + 1].label;
    return table;
}

void write_summary_csv(std::ostream& out, const std::vector<PeriodNetwork>& networks)
{
    out << "period,mean,std_dev,min,max,negative\n";
    for (const auto& n : networks) {
        const auto& s = n.summary;
        out << n.period.label << ',' << csv::format(s.mean) << ',' << csv::format(s.std_dev) << ','
            << csv::format(s.min) << ',' << csv::format(s.max) << ',' << s.negative_count << '/' << s.total_pairs
            << '\n';
    }
}

namespace {

template <typename F>
auto stage(const std::string& name, F&& body)
{
    try {
        return body();
    } catch (const Error& e) {
        rethrow_with_context(e, "stage " + name);
    }
}

void write_file(const fs::path& path, const std::string& text, std::vector<fs::path>& written)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << text;
    if (!out)
        throw IoError("failed writing " + path.string());
    written.push_back(path);
}

} // namespace

std::vector<fs::path> cmd_run(const PipelineConfig& config, std::ostream& log)
{
    std::vector<fs::path> written;
    stage("config", [&] {
        config.validate();
        return 0;
    });
    const auto data = stage("ingest", [&] { return load_market_data(config); });
    if (data.periods.size() < 2)
        throw ValidationError("stage ingest: need at least two periods");
    std::error_code ec;
    fs::create_directories(config.out, ec);
    if (ec)
        throw IoError("cannot create output directory " + config.out.string() + ": " + ec.message());
    const auto tickers = data.tickers();

    std::vector<PeriodNetwork> networks;
    for (std::size_t p = 0; p < data.periods.size(); ++p) {
        const auto& label = data.periods[p].label;
        networks.push_back(stage("network " + label, [&] { return build_network(data, p, config.fit); }));
        log << label << ": " << networks.back().windows << " weekly windows, "
            << networks.back().system.splits.size() << " of " << candidate_split_count(tickers.size())
            << " splits retained\n";
        stage("nexus " + label, [&] {
            write_file(config.out / (label + "_network.nex"), export_nexus(networks.back().system, tickers), written);
            return 0;
        });
    }
    std::ostringstream summary;
    write_summary_csv(summary, networks);
    write_file(config.out / "correlation_summary.csv", summary.str(), written);

    for (std::size_t p = 0; p + 1 < data.periods.size(); ++p) {
        const auto& est = data.periods[p].label;
        const auto& eval = data.periods[p + 1].label;
        const auto clusters = stage("clusters " + est, [&] { return choose_clusters(config, data, networks[p]); });
        std::ostringstream cluster_csv;
        write_cluster_csv(cluster_csv, clusters, tickers);
        write_file(config.out / (est + "_clusters.csv"), cluster_csv.str(), written);

        const auto table =
            stage("simulate " + est + "->" + eval, [&] { return simulate_pair(config, data, p, clusters); });
        std::ostringstream report;
        write_table_csv(report, table);
        const std::string stem = "report_" + est + "_" + eval;
        write_file(config.out / (stem + ".csv"), report.str(), written);
        write_file(config.out / (stem + ".json"), to_json(table).dump(2) + "\n", written);
        log << est << " -> " << eval << ": " << clusters.k() << " clusters, report " << stem << ".csv\n";
    }
    return written;
}

} // namespace corrnet
