#pragma once

#include "corrnet/neighbornet.hpp"
#include "corrnet/splits.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace corrnet {

/// Partition of the cycle into k contiguous arcs. Cut b lies between ordering
/// positions b and b+1 (mod n). Cluster 1 is the arc after the smallest cut;
/// later clusters follow in ordering direction.
struct ClusterAssignment {
    CircularOrdering ordering;
    std::vector<std::size_t> boundaries;
    /// Cluster id (1..k) of each taxon.
    std::vector<std::size_t> labels;

    std::size_t k() const { return boundaries.size(); }
    /// Taxa of cluster c (1-based) in ordering direction.
    std::vector<std::size_t> members(std::size_t cluster) const;
    std::vector<std::size_t> sizes() const;
};

/// Throws ValidationError for an empty list, a repeated cut (empty arc) or a
/// cut outside [0, n-1]. The cuts need not be sorted.
ClusterAssignment delineate_manual(const CircularOrdering& ordering, std::vector<std::size_t> boundaries);

/// Rebuilds an assignment from per-taxon labels. Throws ValidationError when a
/// cluster is not one arc or the labels do not follow the numbering rule.
ClusterAssignment assignment_from_labels(const CircularOrdering& ordering, const std::vector<std::size_t>& labels);

/// Score of the cut after position b: fitted split distance between the taxa
/// at positions b and b+1.
std::vector<double> boundary_gaps(const WeightedSplitSystem& system);

/// Chooses k cuts maximising the summed gap with every arc at least min_size
/// long. Exact (dynamic programme for each choice of smallest cut); ties go to
/// the lexicographically smallest cut list.
ClusterAssignment delineate_auto(const WeightedSplitSystem& system, std::size_t k, std::size_t min_size);

/// Summed gap score of a set of cuts.
double boundary_score(const std::vector<double>& gaps, const std::vector<std::size_t>& boundaries);

/// pair_of[c - 1] is the partner of cluster c.
struct ClusterPairing {
    std::vector<std::size_t> pair_of;

    std::size_t operator()(std::size_t cluster) const { return pair_of.at(cluster - 1); }
};

/// Angular centre of cluster c (1-based), in ordering positions [0, n).
double cluster_center(const ClusterAssignment& a, std::size_t cluster);

/// Even k pairs c with c + k/2 (mod k), whatever the arc sizes. Odd k pairs
/// each cluster with the cluster whose centre lies closest to the antipode of
/// its own centre; ties go to the lower id. Requires k >= 2.
ClusterPairing pair_clusters(const ClusterAssignment& assignment);

/// Exact binomial coefficient. Throws ValidationError if choose > n and
/// NumericalError if the value does not fit in 64 bits.
std::uint64_t combination_count(std::uint64_t n, std::uint64_t choose);

/// Runs of a taxon subset on a later ordering.
struct ContiguityReport {
    /// Maximal runs as (first, last) ordering positions; first > last wraps.
    std::vector<std::pair<std::size_t, std::size_t>> arcs;
    double score = 0.0; ///< 1 / number of arcs
    /// Distinct reference clusters the subset came from, ascending.
    std::vector<std::size_t> reference_clusters;
};

/// Minimal number of arcs of `later` covering `subset`. Throws
/// ValidationError for an empty subset, unknown taxa, or orderings of
/// different sizes.
ContiguityReport track_membership(const ClusterAssignment& reference, const CircularOrdering& later,
                                  const std::vector<std::size_t>& subset);

/// Convenience: track every member of one reference cluster.
ContiguityReport track_cluster(const ClusterAssignment& reference, std::size_t cluster, const CircularOrdering& later);

/// `ticker,cluster` rows in ordering direction.
void write_cluster_csv(std::ostream& out, const ClusterAssignment& a, const std::vector<std::string>& tickers);
/// Reads `ticker,cluster` and rebuilds the assignment on `ordering`.
/// Every ticker must appear exactly once.
ClusterAssignment read_cluster_csv(std::istream& in, const CircularOrdering& ordering,
                                   const std::vector<std::string>& tickers);

} // namespace corrnet
