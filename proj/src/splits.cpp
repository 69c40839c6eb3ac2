#include "corrnet/splits.hpp"

#include <algorithm>
#include <cmath>

namespace corrnet {

namespace {

/// The side of a canonical split that avoids position 0.
std::pair<std::size_t, std::size_t> inner_arc(const CircularSplit& s, std::size_t n)
{
    if (s.p == 0)
        return {1, n - 1};
    return {s.p, s.q};
}

/// Inclusive rectangle sums over a (n+1) x (n+1) prefix table.
class Prefix2D {
public:
    explicit Prefix2D(std::size_t n) : n_(n), s_((n + 1) * (n + 1), 0.0) {}

    double& raw(std::size_t i, std::size_t j) { return s_[i * (n_ + 1) + j]; }

    /// Turns raw(i+1, j+1) = value(i, j) into cumulative sums.
    void accumulate()
    {
        for (std::size_t i = 1; i <= n_; ++i)
            for (std::size_t j = 1; j <= n_; ++j)
                raw(i, j) += raw(i - 1, j) + raw(i, j - 1) - raw(i - 1, j - 1);
    }

    /// Sum of value(i, j) for i in [i1, i2], j in [j1, j2]; 0 if empty.
    double rect(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) const
    {
        if (i1 > i2 || j1 > j2)
            return 0.0;
        return at(i2 + 1, j2 + 1) - at(i1, j2 + 1) - at(i2 + 1, j1) + at(i1, j1);
    }

private:
    double at(std::size_t i, std::size_t j) const { return s_[i * (n_ + 1) + j]; }

    std::size_t n_;
    std::vector<double> s_;
};

} // namespace

CircularSplit make_split(std::size_t p, std::size_t q, std::size_t n)
{
    if (n < 2 || p >= n || q >= n)
        throw ValidationError("split arc outside the ordering");
    const std::size_t size = (q + n - p) % n + 1;
    if (size >= n)
        throw ValidationError("split arc must leave both sides non-empty");
    std::size_t a = p, b = q;
    if (b < a || a == 0) {
        // Arc wraps through position 0; use its complement.
        a = (q + 1) % n;
        b = (p + n - 1) % n;
    }
    if (a == 1 && b == n - 1)
        return {0, 0};
    return {a, b};
}

std::size_t arc_size(const CircularSplit& s)
{
    return s.q - s.p + 1;
}

std::vector<std::size_t> split_members(const CircularSplit& s, const CircularOrdering& ordering)
{
    std::vector<std::size_t> out;
    for (std::size_t i = s.p; i <= s.q; ++i)
        out.push_back(ordering.taxa.at(i));
    return out;
}

bool separates(const CircularSplit& s, std::size_t n, std::size_t a, std::size_t b)
{
    const auto [f, l] = inner_arc(s, n);
    const bool in_a = f <= a && a <= l;
    const bool in_b = f <= b && b <= l;
    return in_a != in_b;
}

std::size_t candidate_split_count(std::size_t n)
{
    return n < 2 ? 0 : n * (n - 1) / 2;
}

std::vector<CircularSplit> enumerate_splits(std::size_t n)
{
    std::vector<CircularSplit> out;
    if (n < 2)
        return out;
    out.reserve(candidate_split_count(n));
    for (std::size_t a = 1; a < n; ++a)
        for (std::size_t b = a; b < n; ++b)
            out.push_back(a == 1 && b == n - 1 ? CircularSplit{0, 0} : CircularSplit{a, b});
    return out;
}

std::size_t split_index(const CircularSplit& s, std::size_t n)
{
    const auto [a, b] = inner_arc(s, n);
    return (a - 1) * n - (a - 1) * a / 2 + (b - a);
}

CircularSplitOperator::CircularSplitOperator(std::size_t n) : n_(n)
{
    if (n < 2)
        throw ValidationError("circular split operator needs at least two taxa");
    for (std::size_t a = 1; a < n; ++a)
        for (std::size_t b = a; b < n; ++b)
            arcs_.push_back({a, b});
}

std::size_t CircularSplitOperator::pair_index(std::size_t a, std::size_t b) const
{
    return a * (n_ - 1) - a * (a - 1) / 2 + (b - a - 1);
}

Eigen::VectorXd CircularSplitOperator::apply(const Eigen::VectorXd& w) const
{
    Prefix2D pre(n_);
    for (std::size_t k = 0; k < arcs_.size(); ++k)
        pre.raw(arcs_[k].first + 1, arcs_[k].last + 1) = w(static_cast<Eigen::Index>(k));
    pre.accumulate();
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows()));
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = a + 1; b < n_; ++b) {
            // Arcs holding a but not b, plus arcs holding b but not a.
            const double v = (a >= 1 ? pre.rect(1, a, a, b - 1) : 0.0) + pre.rect(a + 1, b, b, n_ - 1);
            y(static_cast<Eigen::Index>(pair_index(a, b))) = v;
        }
    return y;
}

Eigen::VectorXd CircularSplitOperator::apply_transpose(const Eigen::VectorXd& r) const
{
    Prefix2D block(n_);
    std::vector<double> row_prefix(n_ + 1, 0.0);
    std::vector<double> row(n_, 0.0);
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = a + 1; b < n_; ++b) {
            const double v = r(static_cast<Eigen::Index>(pair_index(a, b)));
            block.raw(a + 1, b + 1) = v;
            block.raw(b + 1, a + 1) = v;
            row[a] += v;
            row[b] += v;
        }
    block.accumulate();
    for (std::size_t a = 0; a < n_; ++a)
        row_prefix[a + 1] = row_prefix[a] + row[a];

    Eigen::VectorXd g(static_cast<Eigen::Index>(cols()));
    for (std::size_t k = 0; k < arcs_.size(); ++k) {
        const auto [f, l] = arcs_[k];
        g(static_cast<Eigen::Index>(k)) = row_prefix[l + 1] - row_prefix[f] - block.rect(f, l, f, l);
    }
    return g;
}

double CircularSplitOperator::gram(std::size_t i, std::size_t j) const
{
    const auto& s = arcs_[i];
    const auto& t = arcs_[j];
    const double ns = static_cast<double>(s.last - s.first + 1);
    const double nt = static_cast<double>(t.last - t.first + 1);
    const std::size_t lo = std::max(s.first, t.first);
    const std::size_t hi = std::min(s.last, t.last);
    const double both = hi >= lo ? static_cast<double>(hi - lo + 1) : 0.0;
    const double neither = static_cast<double>(n_) - (ns + nt - both);
    // Pairs split by both arcs: (in both, in neither) or (only in s, only in t).
    return both * neither + (ns - both) * (nt - both);
}

Eigen::VectorXd CircularSplitOperator::pair_vector(const DistanceMatrix& d, const CircularOrdering& ordering) const
{
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows()));
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t c = a + 1; c < n_; ++c)
            b(static_cast<Eigen::Index>(pair_index(a, c))) = d(ordering.taxa[a], ordering.taxa[c]);
    return b;
}

namespace {

std::vector<std::string> numbered_labels(std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(std::to_string(i));
    return out;
}

Eigen::VectorXd weight_vector(const WeightedSplitSystem& system)
{
    const std::size_t n = system.taxa();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(candidate_split_count(n)));
    for (const auto& s : system.splits)
        w(static_cast<Eigen::Index>(split_index(s.split, n))) += s.weight;
    return w;
}

void check_ordering(const DistanceMatrix& d, const CircularOrdering& ordering)
{
    if (ordering.size() != d.size() || !is_permutation_of_n(ordering.taxa))
        throw ValidationError("ordering must be a permutation of the distance matrix taxa");
}

} // namespace

DistanceMatrix split_metric(const WeightedSplitSystem& system)
{
    const std::size_t n = system.taxa();
    DistanceMatrix out{numbered_labels(n), Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    if (n < 2)
        return out;
    const CircularSplitOperator op(n);
    const Eigen::VectorXd y = op.apply(weight_vector(system));
    Eigen::Index k = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b, ++k) {
            const auto i = static_cast<Eigen::Index>(system.ordering.taxa[a]);
            const auto j = static_cast<Eigen::Index>(system.ordering.taxa[b]);
            out.d(i, j) = out.d(j, i) = y(k);
        }
    return out;
}

WeightedSplitSystem fit_weights(const DistanceMatrix& d, const CircularOrdering& ordering, const FitOptions& options)
{
    check_ordering(d, ordering);
    const std::size_t n = d.size();
    WeightedSplitSystem system{ordering, {}, 0.0};
    if (n < 2)
        return system;

    const CircularSplitOperator op(n);
    const Eigen::VectorXd b = op.pair_vector(d, ordering);
    const auto solved = nnls::solve(op, b, options.solver);

    const double top = std::max(solved.x.size() ? solved.x.maxCoeff() : 0.0, options.drop_floor);
    const double threshold = options.drop_ratio * top;
    const auto splits = enumerate_splits(n);
    Eigen::VectorXd kept = Eigen::VectorXd::Zero(solved.x.size());
    for (std::size_t k = 0; k < splits.size(); ++k) {
        const double w = solved.x(static_cast<Eigen::Index>(k));
        if (w > 0.0 && w >= threshold) {
            system.splits.push_back({splits[k], w});
            kept(static_cast<Eigen::Index>(k)) = w;
        }
    }
    const Eigen::VectorXd r = op.apply(kept) - b;
    system.fit_residual = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));

    if (!solved.converged)
        throw ConvergenceError("split weight fit did not converge within " + std::to_string(solved.iterations - 1) +
                                   " iterations (residual " + std::to_string(system.fit_residual) + ")",
                               system);
    return system;
}

double kkt_violation(const DistanceMatrix& d, const WeightedSplitSystem& system)
{
    check_ordering(d, system.ordering);
    const std::size_t n = d.size();
    if (n < 2)
        return 0.0;
    const CircularSplitOperator op(n);
    const Eigen::VectorXd w = weight_vector(system);
    const Eigen::VectorXd grad = op.apply_transpose(op.apply(w) - op.pair_vector(d, system.ordering));
    double worst = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k)
        worst = std::max(worst, w(k) > 0.0 ? std::abs(grad(k)) : std::max(0.0, -grad(k)));
    return worst;
}

} // namespace corrnet
