#pragma once

#include "corrnet/marketdata.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace corrnet {

struct CorrelationMatrix {
    std::vector<std::string> tickers;
    Eigen::MatrixXd rho;
};

/// Symmetric, zero diagonal, entries in [0, 2] when built from correlations.
struct DistanceMatrix {
    std::vector<std::string> tickers;
    Eigen::MatrixXd d;

    std::size_t size() const { return static_cast<std::size_t>(d.rows()); }
    double operator()(std::size_t i, std::size_t j) const
    {
        return d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

/// Moments of the strict upper triangle of a correlation matrix.
struct CorrelationSummary {
    double mean = 0.0;
    double std_dev = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t negative_count = 0;
    std::size_t total_pairs = 0;
};

/// Sample Pearson correlation of each column pair (two-pass: centre, then
/// accumulate). Needs at least 3 windows and no constant column.
CorrelationMatrix correlations(const ReturnMatrix& returns);

/// d = sqrt(2 (1 - rho)), exact zeros on the diagonal.
DistanceMatrix to_distance(const CorrelationMatrix& rho);

/// Throws ValidationError when n < 2. std_dev uses the n-1 denominator.
CorrelationSummary summarize(const CorrelationMatrix& rho);

/// Checks symmetry, diagonal and range invariants; throws ValidationError.
void validate(const CorrelationMatrix& rho);
void validate(const DistanceMatrix& d);

/// Square matrix CSV: header `ticker,<t1>,...,<tn>`, then one row per ticker.
void write_matrix_csv(std::ostream& out, const std::vector<std::string>& tickers, const Eigen::MatrixXd& m);
void read_matrix_csv(std::istream& in, std::vector<std::string>& tickers, Eigen::MatrixXd& m);

DistanceMatrix read_distance_csv(std::istream& in);

/// NEXUS TAXA + DISTANCES blocks (full square matrix) for SplitsTree.
void write_nexus_distances(std::ostream& out, const DistanceMatrix& d);

} // namespace corrnet
