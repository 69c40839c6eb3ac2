#include "fixture.hpp"

#include "corrnet/error.hpp"

#include <fstream>

namespace fixture {

namespace {

std::ifstream open(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw corrnet::IoError("cannot open " + path);
    return in;
}

} // namespace

PeriodOne load_period_one(const std::string& root)
{
    PeriodOne f;
    auto meta_in = open(root + "/data/shanghai_a_metadata.csv");
    f.metadata = corrnet::load_metadata(meta_in);
    for (const auto& e : f.metadata.entries()) {
        f.tickers.push_back(e.ticker);
        f.industry.push_back(e.industry);
    }
    auto order_in = open(root + "/tests/fixtures/period1_ordering.txt");
    std::string joined, t;
    while (order_in >> t)
        joined += t + " ";
    f.ordering = corrnet::parse_ordering(joined, f.tickers);
    auto clusters_in = open(root + "/tests/fixtures/period1_clusters.csv");
    f.clusters = corrnet::read_cluster_csv(clusters_in, f.ordering, f.tickers);
    return f;
}

std::vector<GoldenFile> golden_files()
{
    using corrnet::make_split;
    std::vector<GoldenFile> out;
    out.push_back({"quartet.nex",
                   {{{0, 1, 2, 3}},
                    {{make_split(0, 0, 4), 1.0},
                     {make_split(1, 1, 4), 1.0},
                     {make_split(2, 3, 4), 1.0},
                     {make_split(2, 2, 4), 1.0},
                     {make_split(3, 3, 4), 1.0}},
                    0.0},
                   {"a", "b", "c", "d"}});
    out.push_back({"empty.nex", {{{0, 2, 1}}, {}, 0.125}, {"x", "y", "z"}});
    // Quoted labels, a non-identity cycle and weights that need all 17 digits.
    out.push_back({"stocks.nex",
                   {{{0, 3, 1, 5, 2, 4}},
                    {{make_split(0, 0, 6), 0.1},
                     {make_split(1, 2, 6), 0.30000000000000004},
                     {make_split(3, 5, 6), 2.5},
                     {make_split(2, 2, 6), 1e-7},
                     {make_split(1, 4, 6), 0.3333333333333333},
                     {make_split(5, 5, 6), 12.0}},
                    0.0125},
                   {"CHPC_E", "BANK_F", "O'Neil", "FCNM_M", "ZJYY_H", "SH GY_I"}});
    return out;
}

} // namespace fixture
