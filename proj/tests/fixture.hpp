#pragma once

#include "corrnet/clustering.hpp"
#include "corrnet/marketdata.hpp"
#include "corrnet/splits.hpp"

#include <string>
#include <vector>

namespace fixture {

/// Bundled metadata plus the period-one ordering and cluster file.
struct PeriodOne {
    corrnet::Metadata metadata;
    std::vector<std::string> tickers;
    std::vector<corrnet::Industry> industry;
    corrnet::CircularOrdering ordering;
    corrnet::ClusterAssignment clusters;
};

/// `root` is the repository root. Throws corrnet::IoError if a file is missing.
PeriodOne load_period_one(const std::string& root);

/// A system whose NEXUS export is stored under tests/golden/.
struct GoldenFile {
    std::string file;
    corrnet::WeightedSplitSystem system;
    std::vector<std::string> labels;
};

std::vector<GoldenFile> golden_files();

} // namespace fixture
