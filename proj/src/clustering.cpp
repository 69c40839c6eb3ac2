#include "corrnet/clustering.hpp"

#include "corrnet/error.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

namespace corrnet {

namespace {

void check_ordering(const CircularOrdering& ordering)
{
    if (ordering.size() == 0 || !is_permutation_of_n(ordering.taxa))
        throw ValidationError("cluster ordering must be a non-empty permutation of the taxa");
}

/// Relative gap below which two scores count as equal.
constexpr double kTieTolerance = 1e-12;

bool better(double a, double b)
{
    if (!std::isfinite(b))
        return std::isfinite(a);
    return a > b + kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

bool tied(double a, double b)
{
    return !better(a, b) && !better(b, a);
}

} // namespace

std::vector<std::size_t> ClusterAssignment::members(std::size_t cluster) const
{
    if (cluster == 0 || cluster > k())
        throw ValidationError("no cluster " + std::to_string(cluster));
    const std::size_t n = ordering.size();
    const std::size_t first = (boundaries[cluster - 1] + 1) % n;
    const std::size_t last = boundaries[cluster % k()];
    std::vector<std::size_t> out;
    for (std::size_t pos = first;; pos = (pos + 1) % n) {
        out.push_back(ordering.taxa[pos]);
        if (pos == last)
            break;
    }
    return out;
}

std::vector<std::size_t> ClusterAssignment::sizes() const
{
    std::vector<std::size_t> out(k(), 0);
    for (auto l : labels)
        ++out[l - 1];
    return out;
}

ClusterAssignment delineate_manual(const CircularOrdering& ordering, std::vector<std::size_t> boundaries)
{
    check_ordering(ordering);
    const std::size_t n = ordering.size();
    if (boundaries.empty())
        throw ValidationError("at least one cluster boundary is required");
    std::sort(boundaries.begin(), boundaries.end());
    if (boundaries.back() >= n)
        throw ValidationError("cluster boundary " + std::to_string(boundaries.back()) + " outside 0.." +
                              std::to_string(n - 1));
    if (std::adjacent_find(boundaries.begin(), boundaries.end()) != boundaries.end())
        throw ValidationError("repeated cluster boundary leaves an empty arc");

    ClusterAssignment a{ordering, std::move(boundaries), std::vector<std::size_t>(n, 0)};
    for (std::size_t c = 1; c <= a.k(); ++c)
        for (auto t : a.members(c))
            a.labels[t] = c;
    return a;
}

ClusterAssignment assignment_from_labels(const CircularOrdering& ordering, const std::vector<std::size_t>& labels)
{
    check_ordering(ordering);
    const std::size_t n = ordering.size();
    if (labels.size() != n)
        throw ValidationError("expected one cluster label per taxon");
    std::vector<std::size_t> cuts;
    for (std::size_t pos = 0; pos < n; ++pos)
        if (labels[ordering.taxa[pos]] != labels[ordering.taxa[(pos + 1) % n]])
            cuts.push_back(pos);
    if (cuts.empty())
        cuts.push_back(n - 1);
    const auto a = delineate_manual(ordering, cuts);
    if (a.labels != labels)
        throw ValidationError("cluster labels must be contiguous arcs numbered 1..k from the first cut");
    return a;
}

std::vector<double> boundary_gaps(const WeightedSplitSystem& system)
{
    const std::size_t n = system.taxa();
    const auto metric = split_metric(system);
    std::vector<double> gaps(n, 0.0);
    for (std::size_t b = 0; b < n; ++b)
        gaps[b] = metric(system.ordering.taxa[b], system.ordering.taxa[(b + 1) % n]);
    return gaps;
}

double boundary_score(const std::vector<double>& gaps, const std::vector<std::size_t>& boundaries)
{
    double s = 0.0;
    for (auto b : boundaries)
        s += gaps.at(b);
    return s;
}

ClusterAssignment delineate_auto(const WeightedSplitSystem& system, std::size_t k, std::size_t min_size)
{
    check_ordering(system.ordering);
    const std::size_t n = system.taxa();
    if (k < 2)
        throw ValidationError("automatic delineation needs k >= 2");
    if (min_size == 0)
        throw ValidationError("min_size must be at least 1");
    if (k > n || k * min_size > n)
        throw ValidationError("cannot fit " + std::to_string(k) + " clusters of at least " + std::to_string(min_size) +
                              " taxa into " + std::to_string(n));

    const auto gaps = boundary_gaps(system);
    const double minus_inf = -std::numeric_limits<double>::infinity();

    std::vector<std::size_t> best_cuts;
    double best_score = minus_inf;
    // value[j][b]: best gap sum of j further cuts after a cut at b.
    std::vector<std::vector<double>> value(k, std::vector<double>(n, minus_inf));
    for (std::size_t b0 = 0; b0 < n; ++b0) {
        // The last cut must leave min_size positions before wrapping back to b0.
        const std::size_t last_allowed = b0 + n - min_size;
        auto in_range = [&](std::size_t b) { return b < n && b <= last_allowed; };
        for (std::size_t b = b0; b < n; ++b)
            value[0][b] = in_range(b) ? 0.0 : minus_inf;
        for (std::size_t j = 1; j < k; ++j)
            for (std::size_t b = n; b-- > b0;) {
                double v = minus_inf;
                for (std::size_t next = b + min_size; in_range(next); ++next)
                    if (std::isfinite(value[j - 1][next]) && better(gaps[next] + value[j - 1][next], v))
                        v = gaps[next] + value[j - 1][next];
                value[j][b] = v;
            }
        if (!std::isfinite(value[k - 1][b0]))
            continue;
        const double total = gaps[b0] + value[k - 1][b0];
        if (!better(total, best_score))
            continue;
        best_score = total;
        best_cuts = {b0};
        // Walk forward taking the smallest cut that attains the optimum.
        std::size_t b = b0;
        for (std::size_t j = k - 1; j > 0; --j) {
            for (std::size_t next = b + min_size; in_range(next); ++next)
                if (std::isfinite(value[j - 1][next]) && tied(gaps[next] + value[j - 1][next], value[j][b])) {
                    b = next;
                    break;
                }
            best_cuts.push_back(b);
        }
    }
    return delineate_manual(system.ordering, best_cuts);
}

double cluster_center(const ClusterAssignment& a, std::size_t cluster)
{
    const std::size_t n = a.ordering.size();
    const std::size_t size = a.members(cluster).size();
    const double first = static_cast<double>((a.boundaries[cluster - 1] + 1) % n);
    return std::fmod(first + 0.5 * static_cast<double>(size - 1), static_cast<double>(n));
}

ClusterPairing pair_clusters(const ClusterAssignment& assignment)
{
    const std::size_t k = assignment.k();
    if (k < 2)
        throw ValidationError("pairing needs at least two clusters");
    ClusterPairing p;
    if (k % 2 == 0) {
        for (std::size_t c = 0; c < k; ++c)
            p.pair_of.push_back((c + k / 2) % k + 1);
        return p;
    }
    const double n = static_cast<double>(assignment.ordering.size());
    auto cyclic = [n](double a, double b) {
        const double d = std::fmod(std::abs(a - b), n);
        return std::min(d, n - d);
    };
    std::vector<double> center(k);
    for (std::size_t c = 1; c <= k; ++c)
        center[c - 1] = cluster_center(assignment, c);

    for (std::size_t c = 0; c < k; ++c) {
        const double antipode = std::fmod(center[c] + 0.5 * n, n);
        std::size_t pick = k;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t o = 0; o < k; ++o) {
            if (o == c)
                continue;
            const double dist = cyclic(center[o], antipode);
            if (dist < best - 1e-9) {
                best = dist;
                pick = o;
            }
        }
        p.pair_of.push_back(pick + 1);
    }
    return p;
}

std::uint64_t combination_count(std::uint64_t n, std::uint64_t choose)
{
    if (choose > n)
        throw ValidationError("cannot choose " + std::to_string(choose) + " of " + std::to_string(n));
    choose = std::min(choose, n - choose);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 0; i < choose; ++i) {
        // r * (n - i) is divisible by i + 1 at every step.
        r = r * (n - i) / (i + 1);
        if (r > std::numeric_limits<std::uint64_t>::max())
            throw NumericalError("C(" + std::to_string(n) + ", " + std::to_string(choose) + ") overflows 64 bits");
    }
    return static_cast<std::uint64_t>(r);
}

ContiguityReport track_membership(const ClusterAssignment& reference, const CircularOrdering& later,
                                  const std::vector<std::size_t>& subset)
{
    check_ordering(later);
    const std::size_t n = later.size();
    if (reference.ordering.size() != n)
        throw ValidationError("orderings cover different numbers of taxa");
    if (subset.empty())
        throw ValidationError("membership subset is empty");
    std::vector<bool> in(n, false);
    for (auto t : subset) {
        if (t >= n)
            throw ValidationError("taxon " + std::to_string(t) + " not in the ordering");
        in[t] = true;
    }

    ContiguityReport r;
    for (auto t : subset)
        r.reference_clusters.push_back(reference.labels[t]);
    std::sort(r.reference_clusters.begin(), r.reference_clusters.end());
    r.reference_clusters.erase(std::unique(r.reference_clusters.begin(), r.reference_clusters.end()),
                               r.reference_clusters.end());

    auto member = [&](std::size_t pos) { return in[later.taxa[pos % n]]; };
    if (std::all_of(in.begin(), in.end(), [](bool b) { return b; })) {
        r.arcs.push_back({0, n - 1});
    } else {
        // Start scanning just after a non-member so no run is split at the seam.
        std::size_t start = 0;
        while (member(start))
            ++start;
        for (std::size_t step = 1; step <= n; ++step) {
            const std::size_t pos = (start + step) % n;
            if (member(pos) && !member(pos + n - 1))
                r.arcs.push_back({pos, pos});
            if (member(pos))
                r.arcs.back().second = pos;
        }
        std::sort(r.arcs.begin(), r.arcs.end());
    }
    r.score = 1.0 / static_cast<double>(r.arcs.size());
    return r;
}

ContiguityReport track_cluster(const ClusterAssignment& reference, std::size_t cluster, const CircularOrdering& later)
{
    return track_membership(reference, later, reference.members(cluster));
}

void write_cluster_csv(std::ostream& out, const ClusterAssignment& a, const std::vector<std::string>& tickers)
{
    if (tickers.size() != a.ordering.size())
        throw ValidationError("expected one ticker per taxon");
    out << "ticker,cluster\n";
    for (auto t : a.ordering.taxa)
        out << tickers[t] << ',' << a.labels[t] << '\n';
}

ClusterAssignment read_cluster_csv(std::istream& in, const CircularOrdering& ordering,
                                   const std::vector<std::string>& tickers)
{
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < tickers.size(); ++i)
        index[tickers[i]] = i;
    std::vector<std::size_t> labels(tickers.size(), 0);

    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty())
            continue;
        const auto f = csv::split(line);
        if (header) {
            if (f.size() != 2 || f[0] != "ticker" || f[1] != "cluster")
                throw ParseError("cluster header must be ticker,cluster", line_no);
            header = false;
            continue;
        }
        if (f.size() != 2)
            throw ParseError("expected 2 fields", line_no);
        const auto it = index.find(std::string(f[0]));
        if (it == index.end())
            throw ValidationError("line " + std::to_string(line_no) + ": unknown ticker " + std::string(f[0]));
        std::size_t label = 0;
        const auto v = csv::to_double(f[1]);
        if (!v || *v < 1 || *v != std::floor(*v))
            throw ParseError("bad cluster id '" + std::string(f[1]) + "'", line_no);
        label = static_cast<std::size_t>(*v);
        if (labels[it->second] != 0)
            throw ValidationError("line " + std::to_string(line_no) + ": ticker " + it->first + " listed twice");
        labels[it->second] = label;
    }
    if (header)
        throw ParseError("missing header row");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 0)
            throw ValidationError("ticker " + tickers[i] + " has no cluster");
    return assignment_from_labels(ordering, labels);
}

} // namespace corrnet
