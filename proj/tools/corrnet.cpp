// corrnet command line: ingest, net, clusters, simulate, run, serve, synth.

#include "corrnet/error.hpp"
#include "corrnet/json.hpp"
#include "corrnet/neighbornet.hpp"
#include "corrnet/nexus.hpp"
#include "corrnet/pipeline.hpp"
#include "corrnet/service.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace corrnet;

namespace {

struct Overrides {
    std::string config;
    std::string metadata;
    std::string prices;
    std::optional<std::uint64_t> seed;
    std::string period;
    std::optional<std::size_t> k;
    std::optional<std::size_t> min_size;
    std::string sizes;
    std::optional<std::size_t> iterations;
    std::optional<unsigned> threads;
    std::string out;
    std::string center;
};

fs::path default_data_dir()
{
    if (fs::exists("data/shanghai_a_metadata.csv"))
        return "data";
    return CORRNET_DATA_DIR;
}

PipelineConfig make_config(const Overrides& o)
{
    PipelineConfig c = o.config.empty() ? default_config(default_data_dir()) : load_config(o.config);
    if (!o.metadata.empty())
        c.metadata = o.metadata;
    if (!o.prices.empty())
        c.prices = o.prices;
    if (o.seed)
        c.seed = *o.seed;
    if (o.k)
        c.k = *o.k;
    if (o.min_size)
        c.min_size = *o.min_size;
    if (!o.sizes.empty())
        c.sizes = parse_sizes(o.sizes);
    if (o.iterations)
        c.iterations = *o.iterations;
    if (o.threads)
        c.threads = *o.threads;
    if (!o.out.empty())
        c.out = o.out;
    if (!o.center.empty())
        c.center = parse_center(o.center);
    c.validate();
    return c;
}

/// All periods, or the one named by --period.
std::vector<std::size_t> selected_periods(const MarketData& data, const std::string& period)
{
    if (!period.empty())
        return {data.period_index(period)};
    std::vector<std::size_t> all(data.periods.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    return all;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << text;
    std::cout << "wrote " << path.string() << '\n';
}

void cmd_ingest(const PipelineConfig& c, const Overrides& o)
{
    const auto data = load_market_data(c);
    std::cout << data.series.size() << " tickers, " << data.periods.size() << " periods\n";
    for (auto p : selected_periods(data, o.period)) {
        const auto& period = data.periods[p];
        const auto rm = weekly_returns(data.series, period);
        const auto rho = correlations(rm);
        const auto s = summarize(rho);
        std::cout << period.label << " " << period.start.iso() << ".." << period.end.iso() << ": "
                  << rm.windows.size() << " windows, mean correlation " << s.mean << ", " << s.negative_count << '/'
                  << s.total_pairs << " negative\n";
        std::ostringstream csv, nex;
        const auto d = to_distance(rho);
        write_matrix_csv(csv, d.tickers, d.d);
        write_nexus_distances(nex, d);
        write_text(c.out / (period.label + "_distances.csv"), csv.str());
        write_text(c.out / (period.label + "_distances.nex"), nex.str());
    }
}

void cmd_net(const PipelineConfig& c, const Overrides& o)
{
    const auto data = load_market_data(c);
    for (auto p : selected_periods(data, o.period)) {
        const auto net = build_network(data, p, c.fit);
        std::cout << net.period.label << ": " << net.system.splits.size() << " of "
                  << candidate_split_count(data.series.size()) << " candidate splits retained, residual "
                  << net.system.fit_residual << '\n'
                  << "ordering: " << format_ordering(net.system.ordering, data.tickers()) << '\n';
        write_text(c.out / (net.period.label + "_network.nex"), export_nexus(net.system, data.tickers()));
    }
}

void cmd_clusters(const PipelineConfig& c, const Overrides& o)
{
    const auto data = load_market_data(c);
    for (auto p : selected_periods(data, o.period)) {
        const auto net = build_network(data, p, c.fit);
        const auto a = choose_clusters(c, data, net);
        const auto pairing = pair_clusters(a);
        std::cout << net.period.label << ": " << a.k() << " clusters\n";
        for (std::size_t cl = 1; cl <= a.k(); ++cl)
            std::cout << "  cluster " << cl << ": " << a.members(cl).size() << " stocks, paired with "
                      << pairing(cl) << '\n';
        std::ostringstream csv;
        write_cluster_csv(csv, a, data.tickers());
        write_text(c.out / (net.period.label + "_clusters.csv"), csv.str());
    }
}

void cmd_simulate(const PipelineConfig& c, const Overrides& o)
{
    const auto data = load_market_data(c);
    std::vector<std::size_t> estimation;
    if (!o.period.empty())
        estimation.push_back(data.period_index(o.period));
    else
        for (std::size_t p = 0; p + 1 < data.periods.size(); ++p)
            estimation.push_back(p);
    for (auto p : estimation) {
        const auto net = build_network(data, p, c.fit);
        const auto table = simulate_pair(c, data, p, choose_clusters(c, data, net));
        std::ostringstream csv;
        write_table_csv(csv, table);
        std::cout << table.estimation_period << " -> " << table.evaluation_period << '\n' << csv.str();
        const std::string stem = "report_" + table.estimation_period + "_" + table.evaluation_period;
        write_text(c.out / (stem + ".csv"), csv.str());
        write_text(c.out / (stem + ".json"), to_json(table).dump(2) + "\n");
    }
}

void cmd_synth(const PipelineConfig& c, const std::string& path)
{
    PipelineConfig synthetic = c;
    synthetic.prices.clear();
    const auto data = load_market_data(synthetic);
    std::ostringstream csv;
    write_prices(csv, data.series);
    write_text(path.empty() ? c.out / "synthetic_prices.csv" : fs::path(path), csv.str());
}

int exit_code(const Error& e)
{
    switch (e.kind()) {
    case Error::Kind::Validation:
        return 1;
    case Error::Kind::Io:
        return 2;
    case Error::Kind::Numerical:
        return 3;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Correlation networks and cluster-based portfolio selection"};
    app.require_subcommand(1);
    Overrides o;
    app.add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--metadata", o.metadata, "ticker,code,industry CSV");
    app.add_option("--prices", o.prices, "date,ticker,close,dividend CSV (default: synthetic)");
    app.add_option("--seed", o.seed, "simulation seed");
    app.add_option("--period", o.period, "period label, e.g. P1");
    app.add_option("--k", o.k, "number of clusters for automatic delineation");
    app.add_option("--min-size", o.min_size, "smallest automatic cluster");
    app.add_option("--sizes", o.sizes, "portfolio sizes, e.g. 2,4,8,16");
    app.add_option("--iterations", o.iterations, "portfolios per cell");
    app.add_option("--threads", o.threads, "worker threads for simulation");
    app.add_option("--levene-center", o.center, "mean or median");
    app.add_option("--out", o.out, "output directory");

    auto* ingest = app.add_subcommand("ingest", "weekly returns, correlations and distance matrices");
    auto* net = app.add_subcommand("net", "circular ordering and split weights (NEXUS)");
    auto* clusters = app.add_subcommand("clusters", "cluster delineation and pairing");
    auto* simulate = app.add_subcommand("simulate", "portfolio simulations for estimation/evaluation pairs");
    auto* run = app.add_subcommand("run", "full pipeline");
    auto* serve = app.add_subcommand("serve", "JSON service for the analyst UI");
    std::string host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "port");
    auto* synth = app.add_subcommand("synth", "write the synthetic price history as CSV");
    std::string synth_path;
    synth->add_option("--file", synth_path, "destination (default <out>/synthetic_prices.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const auto config = make_config(o);
        if (ingest->parsed())
            cmd_ingest(config, o);
        else if (net->parsed())
            cmd_net(config, o);
        else if (clusters->parsed())
            cmd_clusters(config, o);
        else if (simulate->parsed())
            cmd_simulate(config, o);
        else if (run->parsed()) {
            for (const auto& f : cmd_run(config, std::cout))
                std::cout << "wrote " << f.string() << '\n';
        } else if (serve->parsed()) {
            Service service(config);
            std::cout << "serving on http://" << host << ':' << port << std::endl;
            if (!service.listen(host, port))
                throw IoError("cannot bind " + host + ":" + std::to_string(port));
        } else if (synth->parsed()) {
            cmd_synth(config, synth_path);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
