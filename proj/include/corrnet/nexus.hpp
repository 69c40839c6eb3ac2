#pragma once

#include "corrnet/splits.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace corrnet {

/// NEXUS document with a TAXA block and a SplitsTree ST_SPLITS block: the
/// 1-based CYCLE of the ordering and one row per split (weight, then the
/// taxa on the canonical side). The fit residual travels in a comment.
/// Throws ValidationError when `labels` does not name every taxon.
std::string export_nexus(const WeightedSplitSystem& system, const std::vector<std::string>& labels);

struct ParsedSplits {
    std::vector<std::string> labels;
    WeightedSplitSystem system;
};

/// Reads what `export_nexus` writes (plus foreign blocks, which are skipped).
/// Throws ParseError on malformed input or non-circular splits.
ParsedSplits parse_nexus(std::string_view text);

} // namespace corrnet
