#pragma once

#include "corrnet/corrdist.hpp"
#include "corrnet/error.hpp"
#include "corrnet/neighbornet.hpp"
#include "corrnet/nnls.hpp"

#include <cstddef>
#include <vector>

namespace corrnet {

/// The arc of ordering positions [p, q] versus its complement. Canonical arcs
/// avoid position 0, except the trivial split of position 0 itself, which is
/// written [0, 0].
struct CircularSplit {
    std::size_t p = 0;
    std::size_t q = 0;

    friend auto operator<=>(const CircularSplit&, const CircularSplit&) = default;
};

/// Canonical form of the split cutting the cycle around the arc [p, q]
/// (either side may be given). Throws ValidationError for empty or full arcs.
CircularSplit make_split(std::size_t p, std::size_t q, std::size_t n);

/// Number of ordering positions on the canonical side.
std::size_t arc_size(const CircularSplit& s);

/// Taxa on the canonical side, in cycle order.
std::vector<std::size_t> split_members(const CircularSplit& s, const CircularOrdering& ordering);

/// True when positions a and b fall on different sides.
bool separates(const CircularSplit& s, std::size_t n, std::size_t a, std::size_t b);

struct WeightedSplit {
    CircularSplit split;
    double weight = 0.0;
};

struct WeightedSplitSystem {
    CircularOrdering ordering;
    std::vector<WeightedSplit> splits;
    double fit_residual = 0.0;

    std::size_t taxa() const { return ordering.size(); }
};

/// n(n-1)/2 for n >= 2.
std::size_t candidate_split_count(std::size_t n);

/// All circular splits of an n-cycle, each identified with its pair of cut
/// edges. Ordered by the (first, last) positions of the side avoiding
/// position 0, so the trivial split [0, 0] sits where [1, n-1] would.
std::vector<CircularSplit> enumerate_splits(std::size_t n);

/// Position of a split in `enumerate_splits(n)`.
std::size_t split_index(const CircularSplit& s, std::size_t n);

/// d(i, j) = sum of weights of splits separating taxa i and j.
DistanceMatrix split_metric(const WeightedSplitSystem& system);

struct FitOptions {
    nnls::Options solver;
    /// Splits lighter than drop_ratio * max(max weight, drop_floor) are removed.
    double drop_ratio = 1e-6;
    double drop_floor = 1e-9;
};

/// Raised when the active-set solver hits its iteration cap.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, WeightedSplitSystem best)
        : NumericalError(what), best_(std::move(best)) {}

    const WeightedSplitSystem& best() const { return best_; }

private:
    WeightedSplitSystem best_;
};

/// Ordinary least squares fit of non-negative weights on the full circular
/// split system of `ordering`, then pruning of negligible weights. The
/// residual is the RMS over taxon pairs of the pruned system.
WeightedSplitSystem fit_weights(const DistanceMatrix& d, const CircularOrdering& ordering,
                                const FitOptions& options = {});

/// Largest KKT violation of `system` as a fit of `d`: |gradient| on retained
/// splits, max(0, -gradient) on the rest, gradient = A^T (A w - d).
double kkt_violation(const DistanceMatrix& d, const WeightedSplitSystem& system);

/// Pair-by-split incidence of the full circular system of an n-cycle, seen in
/// ordering positions. Rows are position pairs (a < b) in lexicographic
/// order; columns follow `enumerate_splits`.
class CircularSplitOperator final : public nnls::LinearOperator {
public:
    explicit CircularSplitOperator(std::size_t n);

    std::size_t rows() const override { return n_ * (n_ - 1) / 2; }
    std::size_t cols() const override { return n_ * (n_ - 1) / 2; }
    Eigen::VectorXd apply(const Eigen::VectorXd& w) const override;
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const override;
    double gram(std::size_t i, std::size_t j) const override;

    /// Distance matrix (taxon coordinates) flattened to pair order.
    Eigen::VectorXd pair_vector(const DistanceMatrix& d, const CircularOrdering& ordering) const;

private:
    struct Arc {
        std::size_t first, last; // 1 <= first <= last <= n-1
    };

    std::size_t pair_index(std::size_t a, std::size_t b) const;

    std::size_t n_;
    std::vector<Arc> arcs_;
};

} // namespace corrnet
