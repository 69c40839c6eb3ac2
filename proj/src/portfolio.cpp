#include "corrnet/portfolio.hpp"

#include "corrnet/error.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace corrnet {

std::string to_string(Strategy strategy)
{
    switch (strategy) {
    case Strategy::Random:
        return "Random";
    case Strategy::Industry:
        return "Industry";
    case Strategy::Cluster:
        return "Cluster";
    case Strategy::IndustryCluster:
        return "IndustryCluster";
    }
    return "Random";
}

Strategy parse_strategy(const std::string& text)
{
    std::string lower;
    for (char c : text)
        if (c != '_' && c != '-' && c != ' ')
            lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (auto s : all_strategies()) {
        std::string name = to_string(s);
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (name == lower)
            return s;
    }
    throw ValidationError("unknown strategy '" + text + "'");
}

const std::vector<Strategy>& all_strategies()
{
    static const std::vector<Strategy> all{Strategy::Random, Strategy::Industry, Strategy::Cluster,
                                           Strategy::IndustryCluster};
    return all;
}

void SelectionUniverse::validate() const
{
    const std::size_t n = tickers.size();
    if (industry.size() != n || period_returns.size() != n)
        throw ValidationError("universe needs one industry and one return per ticker");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(period_returns[i]))
            throw ValidationError(tickers[i] + ": period return is not finite");
    if (clusters) {
        if (clusters->ordering.size() != n || clusters->labels.size() != n)
            throw ValidationError("cluster assignment does not cover every ticker");
        if (!pairing || pairing->pair_of.size() != clusters->k())
            throw ValidationError("cluster pairing does not match the assignment");
    }
}

SelectionUniverse make_universe(std::vector<std::string> tickers, std::vector<Industry> industry,
                                std::vector<double> period_returns, std::optional<ClusterAssignment> clusters)
{
    SelectionUniverse u;
    u.tickers = std::move(tickers);
    u.industry = std::move(industry);
    u.period_returns = std::move(period_returns);
    if (clusters) {
        u.pairing = pair_clusters(*clusters);
        u.clusters = std::move(clusters);
    }
    u.validate();
    return u;
}

std::vector<std::size_t> allocate_counts(std::size_t total, std::size_t groups, Rng& rng)
{
    if (groups == 0)
        throw ValidationError("allocation needs at least one group");
    std::vector<std::size_t> counts(groups, total / groups);
    for (auto g : sample_without_replacement(groups, total % groups, rng))
        ++counts[g];
    return counts;
}

namespace {

/// allocate_counts, then moves any excess over a group's capacity to random
/// groups with room.
std::vector<std::size_t> allocate_with_capacity(std::size_t total, const std::vector<std::size_t>& capacity,
                                                Rng& rng)
{
    auto counts = allocate_counts(total, capacity.size(), rng);
    std::size_t excess = 0;
    for (std::size_t g = 0; g < counts.size(); ++g)
        if (counts[g] > capacity[g]) {
            excess += counts[g] - capacity[g];
            counts[g] = capacity[g];
        }
    while (excess > 0) {
        std::vector<std::size_t> open;
        for (std::size_t g = 0; g < counts.size(); ++g)
            if (counts[g] < capacity[g])
                open.push_back(g);
        if (open.empty())
            throw ValidationError("not enough stocks to fill the allocation");
        ++counts[open[rng.below(open.size())]];
        --excess;
    }
    return counts;
}

double equal_weight_return(const SelectionUniverse& u, const std::vector<std::size_t>& members)
{
    double s = 0.0;
    for (auto m : members)
        s += u.period_returns[m];
    return s / static_cast<double>(members.size());
}

void check_size(const SelectionUniverse& u, std::size_t k)
{
    if (k == 0)
        throw ValidationError("portfolio size must be positive");
    if (k > u.size())
        throw ValidationError("portfolio size " + std::to_string(k) + " exceeds the universe of " +
                              std::to_string(u.size()));
}

/// Samples counts[g] distinct members from each group.
Portfolio fill_groups(const SelectionUniverse& u, const std::vector<std::vector<std::size_t>>& groups,
                      std::size_t k, Rng& rng)
{
    std::vector<std::size_t> capacity;
    for (const auto& g : groups)
        capacity.push_back(g.size());
    const auto counts = allocate_with_capacity(k, capacity, rng);
    Portfolio p;
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (auto i : sample_without_replacement(groups[g].size(), counts[g], rng))
            p.members.push_back(groups[g][i]);
    p.period_return = equal_weight_return(u, p.members);
    return p;
}

std::vector<std::vector<std::size_t>> industry_groups(const SelectionUniverse& u)
{
    std::vector<std::vector<std::size_t>> by_industry(static_cast<std::size_t>(Industry::Other) + 1);
    for (std::size_t i = 0; i < u.size(); ++i)
        by_industry[static_cast<std::size_t>(u.industry[i])].push_back(i);
    std::vector<std::vector<std::size_t>> groups;
    for (auto& g : by_industry)
        if (!g.empty())
            groups.push_back(std::move(g));
    return groups;
}

std::vector<std::vector<std::size_t>> cluster_groups(const SelectionUniverse& u)
{
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t c = 1; c <= u.clusters->k(); ++c)
        groups.push_back(u.clusters->members(c));
    return groups;
}

Portfolio select_pairs(const SelectionUniverse& u, std::size_t k, Rng& rng, ClusterSampling sampling,
                       bool cross_industry)
{
    if (!u.clusters || !u.pairing)
        throw ValidationError("cluster strategies need a cluster assignment");
    if (k < 2)
        throw ValidationError("cluster strategies need a portfolio size of at least 2");
    check_size(u, k);
    const auto groups = cluster_groups(u);
    const std::size_t clusters = groups.size();
    if (k > clusters)
        return fill_groups(u, groups, k, rng);

    std::vector<bool> chosen(u.size(), false);
    std::vector<std::size_t> unused(clusters);
    for (std::size_t c = 0; c < clusters; ++c)
        unused[c] = c;
    auto available = [&](std::size_t c) {
        std::vector<std::size_t> out;
        for (auto m : groups[c])
            if (!chosen[m])
                out.push_back(m);
        return out;
    };
    auto draw_cluster = [&]() {
        if (sampling == ClusterSampling::ExhaustFirst && !unused.empty())
            return unused[rng.below(unused.size())];
        return rng.below(clusters);
    };
    auto mark_used = [&](std::size_t c) { unused.erase(std::remove(unused.begin(), unused.end(), c), unused.end()); };

    Portfolio p;
    for (std::size_t pair = 0; pair < k / 2; ++pair) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxRetries && !placed; ++attempt) {
            const std::size_t c = draw_cluster();
            const std::size_t partner = (*u.pairing)(c + 1) - 1;
            const auto first = available(c);
            if (first.empty())
                continue;
            const std::size_t a = first[rng.below(first.size())];
            std::vector<std::size_t> second;
            for (auto m : available(partner))
                if (m != a && (!cross_industry || u.industry[m] != u.industry[a]))
                    second.push_back(m);
            if (second.empty())
                continue;
            const std::size_t b = second[rng.below(second.size())];
            chosen[a] = chosen[b] = true;
            p.members.push_back(a);
            p.members.push_back(b);
            p.pairs.emplace_back(a, b);
            mark_used(c);
            mark_used(partner);
            placed = true;
        }
        if (!placed)
            throw ValidationError(std::string("no feasible ") + (cross_industry ? "cross-industry " : "") +
                                  "cluster pair after " + std::to_string(kMaxRetries) + " draws");
    }
    if (k % 2 == 1) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxRetries && !placed; ++attempt) {
            const auto pool = available(rng.below(clusters));
            if (pool.empty())
                continue;
            const std::size_t m = pool[rng.below(pool.size())];
            chosen[m] = true;
            p.members.push_back(m);
            placed = true;
        }
        if (!placed)
            throw ValidationError("no cluster with an unused stock after " + std::to_string(kMaxRetries) + " draws");
    }
    p.period_return = equal_weight_return(u, p.members);
    return p;
}

} // namespace

Portfolio select_random(const SelectionUniverse& u, std::size_t k, Rng& rng)
{
    check_size(u, k);
    Portfolio p;
    p.members = sample_without_replacement(u.size(), k, rng);
    p.period_return = equal_weight_return(u, p.members);
    return p;
}

Portfolio select_by_industry(const SelectionUniverse& u, std::size_t k, Rng& rng)
{
    check_size(u, k);
    return fill_groups(u, industry_groups(u), k, rng);
}

Portfolio select_by_cluster(const SelectionUniverse& u, std::size_t k, Rng& rng, ClusterSampling sampling)
{
    return select_pairs(u, k, rng, sampling, false);
}

Portfolio select_by_industry_cluster(const SelectionUniverse& u, std::size_t k, Rng& rng,
                                     ClusterSampling sampling)
{
    return select_pairs(u, k, rng, sampling, true);
}

Portfolio select(const SelectionUniverse& u, Strategy strategy, std::size_t k, Rng& rng, ClusterSampling sampling)
{
    switch (strategy) {
    case Strategy::Random:
        return select_random(u, k, rng);
    case Strategy::Industry:
        return select_by_industry(u, k, rng);
    case Strategy::Cluster:
        return select_by_cluster(u, k, rng, sampling);
    case Strategy::IndustryCluster:
        return select_by_industry_cluster(u, k, rng, sampling);
    }
    throw ValidationError("unknown strategy");
}

SimulationResult simulate(const SelectionUniverse& u, Strategy strategy, std::size_t k,
                          const SimulationOptions& options)
{
    u.validate();
    if (options.iterations < 2)
        throw ValidationError("simulation needs at least two iterations");
    SimulationResult r;
    r.strategy = strategy;
    r.size = k;
    r.seed = options.seed;
    r.rng_algorithm = kRngAlgorithm;
    r.stream = "iteration i uses tags {strategy index " + std::to_string(static_cast<int>(strategy)) +
               ", size " + std::to_string(k) + ", i}";
    r.returns.assign(options.iterations, 0.0);

    std::mutex failure_mutex;
    std::size_t failed_at = options.iterations;
    std::exception_ptr failure;
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                Rng rng(options.seed, {static_cast<std::uint64_t>(strategy), k, i});
                r.returns[i] = select(u, strategy, k, rng, options.sampling).period_return;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
                return;
            }
        }
    };
    const unsigned threads =
        std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.iterations)));
    if (threads == 1) {
        run(0, options.iterations);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (options.iterations + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(options.iterations, begin + chunk);
            if (begin < end)
                pool.emplace_back(run, begin, end);
        }
        for (auto& th : pool)
            th.join();
    }
    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const Error& e) {
            rethrow_with_context(e, "iteration " + std::to_string(failed_at));
        }
    }

    double sum = 0.0;
    for (double x : r.returns)
        sum += x;
    r.mean = sum / static_cast<double>(r.returns.size());
    double ss = 0.0;
    for (double x : r.returns)
        ss += (x - r.mean) * (x - r.mean);
    r.std_dev = std::sqrt(ss / static_cast<double>(r.returns.size() - 1));
    return r;
}

SimulationTable simulate_table(const SelectionUniverse& u, const std::vector<Strategy>& strategies,
                               const std::vector<std::size_t>& sizes, const SimulationOptions& options,
                               LeveneCenter center)
{
    if (strategies.empty() || sizes.empty())
        throw ValidationError("need at least one strategy and one size");
    SimulationTable table;
    table.strategies = strategies;
    for (auto k : sizes) {
        SizeRow row;
        row.size = k;
        std::vector<std::vector<double>> groups;
        for (auto s : strategies) {
            row.results.push_back(simulate(u, s, k, options));
            groups.push_back(row.results.back().returns);
        }
        if (groups.size() >= 2) {
            try {
                row.anova = anova_oneway(groups);
            } catch (const ValidationError&) {
                // Every portfolio return identical: no mean difference to test.
                row.anova.statistic = std::nan("");
                row.anova.df1 = groups.size() - 1;
                row.anova.df2 = groups.size() * options.iterations - groups.size();
                row.anova.p_value = std::nan("");
            }
            row.levene = levene(groups, center);
        } else {
            row.anova.p_value = row.levene.p_value = std::nan("");
            row.anova.statistic = row.levene.statistic = std::nan("");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

std::string number(double x)
{
    if (std::isnan(x))
        return "NA";
    return csv::format(x);
}

} // namespace

void write_table_csv(std::ostream& out, const SimulationTable& table)
{
    out << "size";
    for (auto s : table.strategies)
        out << ',' << to_string(s);
    out << ",p_value\n";
    for (const auto& row : table.rows) {
        out << row.size;
        for (const auto& r : row.results)
            out << ',' << number(r.mean);
        out << ',' << number(row.anova.p_value) << '\n';
        for (const auto& r : row.results)
            out << ",(" << number(r.std_dev) << ')';
        out << ",(" << number(row.levene.p_value) << ")\n";
    }
}

} // namespace corrnet
