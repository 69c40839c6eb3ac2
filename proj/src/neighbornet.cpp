#include "corrnet/neighbornet.hpp"

#include "corrnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace corrnet {

std::vector<std::size_t> CircularOrdering::positions() const
{
    std::vector<std::size_t> pos(taxa.size());
    for (std::size_t i = 0; i < taxa.size(); ++i)
        pos[taxa[i]] = i;
    return pos;
}

bool is_permutation_of_n(const std::vector<std::size_t>& taxa)
{
    std::vector<bool> seen(taxa.size(), false);
    for (auto t : taxa) {
        if (t >= taxa.size() || seen[t])
            return false;
        seen[t] = true;
    }
    return true;
}

CircularOrdering canonicalize(const CircularOrdering& ordering)
{
    auto t = ordering.taxa;
    if (t.size() < 3) {
        std::sort(t.begin(), t.end());
        return {t};
    }
    std::rotate(t.begin(), std::min_element(t.begin(), t.end()), t.end());
    if (t.back() < t[1])
        std::reverse(t.begin() + 1, t.end());
    return {t};
}

bool is_contiguous(const CircularOrdering& ordering, const std::vector<std::size_t>& members)
{
    const std::size_t n = ordering.size();
    std::vector<bool> in(n, false);
    for (auto m : members)
        in[m] = true;
    // Count boundaries between member and non-member positions around the cycle.
    std::size_t changes = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (in[ordering.taxa[i]] != in[ordering.taxa[(i + 1) % n]])
            ++changes;
    return changes <= 2;
}

namespace {

/// Relative gap below which two criterion values count as tied.
constexpr double kTieTolerance = 1e-12;

class Agglomerator {
public:
    explicit Agglomerator(const DistanceMatrix& input)
        : n_(input.size()), capacity_(5 * n_ + 1), dist_(capacity_, std::vector<double>(capacity_, 0.0)),
          active_(capacity_, false)
    {
        for (std::size_t i = 0; i < n_; ++i) {
            active_[i] = true;
            clusters_.push_back({i});
            for (std::size_t j = 0; j < n_; ++j)
                dist_[i][j] = input(i, j);
        }
        next_node_ = n_;
        active_count_ = n_;
    }

    AgglomerationTrace run()
    {
        while (active_count_ > 3 && clusters_.size() > 2)
            step();
        close();
        return std::move(trace_);
    }

private:
    using Chain = std::vector<std::size_t>;

    /// Q-criterion value plus the plain distance used when Q ties. With three
    /// clusters left every pair has the same Q, so a label-free second key
    /// keeps the result independent of taxon numbering.
    struct Candidate {
        double q = std::numeric_limits<double>::infinity();
        double dist = std::numeric_limits<double>::infinity();

        bool beats(const Candidate& other) const
        {
            if (!std::isfinite(other.q))
                return true;
            const double tol = kTieTolerance * std::max({1.0, std::abs(q), std::abs(other.q)});
            if (q < other.q - tol)
                return true;
            if (q > other.q + tol)
                return false;
            return dist < other.dist - kTieTolerance * std::max({1.0, dist, other.dist});
        }
    };

    double d(std::size_t a, std::size_t b) const { return dist_[a][b]; }

    double node_to_cluster(std::size_t x, const Chain& c) const
    {
        double s = 0.0;
        for (auto y : c)
            s += d(x, y);
        return s / static_cast<double>(c.size());
    }

    double cluster_distance(const Chain& a, const Chain& b) const
    {
        double s = 0.0;
        for (auto x : a)
            for (auto y : b)
                s += d(x, y);
        return s / static_cast<double>(a.size() * b.size());
    }

    void step()
    {
        const std::size_t m = clusters_.size();
        std::vector<std::vector<double>> cd(m, std::vector<double>(m, 0.0));
        std::vector<double> r(m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                cd[i][j] = cd[j][i] = cluster_distance(clusters_[i], clusters_[j]);
            }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < m; ++k)
                r[i] += cd[i][k];

        std::size_t ci = 0, cj = 1;
        Candidate best;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const Candidate c{static_cast<double>(m - 2) * cd[i][j] - r[i] - r[j], cd[i][j]};
                if (c.beats(best)) {
                    best = c;
                    ci = i;
                    cj = j;
                }
            }

        const Chain a = clusters_[ci];
        const Chain b = clusters_[cj];

        // Node stage: the nodes of both chosen clusters become singletons
        // alongside the other m-2 clusters.
        const std::size_t m2 = m - 2 + a.size() + b.size();
        auto row_sum = [&](std::size_t x) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k)
                if (k != ci && k != cj)
                    s += node_to_cluster(x, clusters_[k]);
            for (auto y : a)
                s += d(x, y);
            for (auto y : b)
                s += d(x, y);
            return s;
        };
        std::size_t bx = a.front(), by = b.front();
        best = Candidate{};
        for (auto x : a) {
            const double rx = row_sum(x);
            for (auto y : b) {
                const Candidate c{static_cast<double>(m2 - 2) * d(x, y) - rx - row_sum(y), d(x, y)};
                if (c.beats(best)) {
                    best = c;
                    bx = x;
                    by = y;
                }
            }
        }
        trace_.events.push_back(trace::Join{a, b, bx, by});

        Chain left = a;
        if (left.back() != bx)
            std::reverse(left.begin(), left.end());
        Chain right = b;
        if (right.front() != by)
            std::reverse(right.begin(), right.end());
        Chain merged = left;
        merged.insert(merged.end(), right.begin(), right.end());

        if (merged.size() == 4) {
            // Reduce the tighter end triple first so the outcome does not
            // depend on which cluster happened to come first.
            auto spread = [&](std::size_t p, std::size_t q, std::size_t r) { return d(p, q) + d(q, r) + d(p, r); };
            const double head = spread(merged[0], merged[1], merged[2]);
            const double tail = spread(merged[1], merged[2], merged[3]);
            if (tail < head - kTieTolerance * std::max(1.0, head))
                std::reverse(merged.begin(), merged.end());
        }
        while (merged.size() >= 3) {
            const auto [u, v] = reduce(merged[0], merged[1], merged[2]);
            merged.erase(merged.begin(), merged.begin() + 3);
            merged.insert(merged.begin(), {u, v});
        }

        clusters_[ci] = merged;
        clusters_.erase(clusters_.begin() + static_cast<std::ptrdiff_t>(cj));
    }

    std::pair<std::size_t, std::size_t> reduce(std::size_t x, std::size_t y, std::size_t z)
    {
        const std::size_t u = next_node_++;
        const std::size_t v = next_node_++;
        for (std::size_t k = 0; k < u; ++k) {
            if (!active_[k] || k == x || k == y || k == z)
                continue;
            dist_[u][k] = dist_[k][u] = (2.0 / 3.0) * d(x, k) + (1.0 / 3.0) * d(y, k);
            dist_[v][k] = dist_[k][v] = (1.0 / 3.0) * d(y, k) + (2.0 / 3.0) * d(z, k);
        }
        dist_[u][v] = dist_[v][u] = (d(x, y) + d(y, z) + d(x, z)) / 3.0;
        active_[x] = active_[y] = active_[z] = false;
        active_[u] = active_[v] = true;
        --active_count_;
        trace_.events.push_back(trace::Reduce{x, y, z, u, v});
        return {u, v};
    }

    void close()
    {
        std::vector<std::size_t> cycle;
        if (clusters_.size() == 2 && clusters_[0].size() == 2 && clusters_[1].size() == 2) {
            const auto& p = clusters_[0];
            const auto& q = clusters_[1];
            // a-b then c-d closes with edges b-c, d-a; the flip closes with b-d, c-a.
            const double straight = d(p[1], q[0]) + d(q[1], p[0]);
            const double flipped = d(p[1], q[1]) + d(q[0], p[0]);
            cycle = {p[0], p[1]};
            if (flipped < straight - kTieTolerance * std::max(1.0, straight))
                cycle.insert(cycle.end(), {q[1], q[0]});
            else
                cycle.insert(cycle.end(), {q[0], q[1]});
        } else {
            auto chains = clusters_;
            std::sort(chains.begin(), chains.end(), [](const Chain& l, const Chain& r) {
                return *std::min_element(l.begin(), l.end()) < *std::min_element(r.begin(), r.end());
            });
            for (const auto& c : chains)
                cycle.insert(cycle.end(), c.begin(), c.end());
        }
        trace_.events.push_back(trace::Close{cycle});
    }

    std::size_t n_;
    std::size_t capacity_;
    std::vector<std::vector<double>> dist_;
    std::vector<bool> active_;
    std::vector<Chain> clusters_;
    std::size_t next_node_ = 0;
    std::size_t active_count_ = 0;
    AgglomerationTrace trace_;
};

} // namespace

CircularOrdering replay(const AgglomerationTrace& trace, std::size_t n)
{
    const trace::Close* close = nullptr;
    for (const auto& e : trace.events)
        if (const auto* c = std::get_if<trace::Close>(&e))
            close = c;
    if (close == nullptr)
        throw ValidationError("agglomeration trace has no closing cycle");

    std::vector<std::size_t> cycle = close->cycle;
    for (auto it = trace.events.rbegin(); it != trace.events.rend(); ++it) {
        const auto* r = std::get_if<trace::Reduce>(&*it);
        if (r == nullptr)
            continue;
        const auto pu = std::find(cycle.begin(), cycle.end(), r->u);
        const auto pv = std::find(cycle.begin(), cycle.end(), r->v);
        if (pu == cycle.end() || pv == cycle.end())
            throw ValidationError("trace reduction refers to a node missing from the cycle");
        const std::size_t len = cycle.size();
        const auto iu = static_cast<std::size_t>(pu - cycle.begin());
        const auto iv = static_cast<std::size_t>(pv - cycle.begin());
        std::vector<std::size_t> next;
        std::size_t resume;
        if ((iu + 1) % len == iv) {
            next = {r->x, r->y, r->z};
            resume = (iv + 1) % len;
        } else if ((iv + 1) % len == iu) {
            next = {r->z, r->y, r->x};
            resume = (iu + 1) % len;
        } else {
            throw ValidationError("trace reduction nodes are not adjacent in the cycle");
        }
        for (std::size_t k = 0; k + 2 < len; ++k)
            next.push_back(cycle[(resume + k) % len]);
        cycle.swap(next);
    }
    CircularOrdering out{cycle};
    if (cycle.size() != n || !is_permutation_of_n(cycle))
        throw ValidationError("trace does not expand to a permutation of the taxa");
    return canonicalize(out);
}

NeighborNetResult circular_ordering(const DistanceMatrix& d)
{
    const std::size_t n = d.size();
    if (n == 0)
        throw ValidationError("Neighbor-Net needs at least one taxon");
    if (n <= 3) {
        std::vector<std::size_t> identity(n);
        std::iota(identity.begin(), identity.end(), std::size_t{0});
        AgglomerationTrace t;
        t.events.push_back(trace::Close{identity});
        return {CircularOrdering{identity}, std::move(t)};
    }
    Agglomerator agg(d);
    auto t = agg.run();
    auto ordering = replay(t, n);
    return {std::move(ordering), std::move(t)};
}

std::string format_ordering(const CircularOrdering& ordering, const std::vector<std::string>& labels)
{
    std::string out;
    for (std::size_t i = 0; i < ordering.size(); ++i) {
        if (i)
            out += ' ';
        out += labels.at(ordering.taxa[i]);
    }
    return out;
}

CircularOrdering parse_ordering(std::string_view line, const std::vector<std::string>& labels)
{
    std::istringstream in{std::string(line)};
    std::vector<std::size_t> taxa;
    std::string token;
    while (in >> token) {
        const auto it = std::find(labels.begin(), labels.end(), token);
        if (it == labels.end())
            throw ParseError("unknown taxon '" + token + "' in ordering");
        taxa.push_back(static_cast<std::size_t>(it - labels.begin()));
    }
    if (taxa.size() != labels.size() || !is_permutation_of_n(taxa))
        throw ParseError("ordering must list every taxon exactly once");
    return {taxa};
}

} // namespace corrnet
