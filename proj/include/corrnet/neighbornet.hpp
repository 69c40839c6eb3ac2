#pragma once

#include "corrnet/corrdist.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace corrnet {

/// Taxa read around a cycle. Rotations and the reflection describe the same
/// ordering; `canonicalize` picks one representative.
struct CircularOrdering {
    std::vector<std::size_t> taxa;

    std::size_t size() const { return taxa.size(); }
    /// Inverse permutation: position of each taxon on the cycle.
    std::vector<std::size_t> positions() const;
    friend bool operator==(const CircularOrdering&, const CircularOrdering&) = default;
};

/// Starts at the lowest taxon; the second element is the smaller of its two
/// cycle neighbours.
CircularOrdering canonicalize(const CircularOrdering& ordering);

/// True when `taxa` is a permutation of 0..n-1.
bool is_permutation_of_n(const std::vector<std::size_t>& taxa);

/// True when `members` occupies one contiguous arc of the cycle (the empty
/// set and the full set count as contiguous).
bool is_contiguous(const CircularOrdering& ordering, const std::vector<std::size_t>& members);

/// Nodes 0..n-1 are the input taxa; reductions create nodes n, n+1, ...
namespace trace {

/// Two clusters were chosen and linked through nodes `x` and `y`.
struct Join {
    std::vector<std::size_t> cluster_a;
    std::vector<std::size_t> cluster_b;
    std::size_t x = 0;
    std::size_t y = 0;
};

/// Chain x-y-z was replaced by u-v.
struct Reduce {
    std::size_t x = 0, y = 0, z = 0;
    std::size_t u = 0, v = 0;
};

/// The remaining active nodes closed into this cycle.
struct Close {
    std::vector<std::size_t> cycle;
};

} // namespace trace

using TraceEvent = std::variant<trace::Join, trace::Reduce, trace::Close>;

struct AgglomerationTrace {
    std::vector<TraceEvent> events;
};

struct NeighborNetResult {
    CircularOrdering ordering; ///< canonical
    AgglomerationTrace trace;
};

/// Neighbor-Net agglomeration: two-stage (cluster, then node) selection,
/// 2/3-1/3 reduction of three-node chains, and expansion of the final cycle.
/// Criterion values within a relative 1e-12 count as tied; ties go to the
/// smaller distance, then to the lowest index pair. n <= 3 returns the
/// identity ordering.
NeighborNetResult circular_ordering(const DistanceMatrix& d);

/// Rebuilds the canonical ordering from the Close event and the reductions.
CircularOrdering replay(const AgglomerationTrace& trace, std::size_t n);

/// One line: space separated tickers in cycle order.
std::string format_ordering(const CircularOrdering& ordering, const std::vector<std::string>& labels);
/// Inverse of `format_ordering`; throws ParseError on unknown or repeated labels.
CircularOrdering parse_ordering(std::string_view line, const std::vector<std::string>& labels);

} // namespace corrnet
