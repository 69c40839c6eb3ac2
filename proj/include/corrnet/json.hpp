#pragma once

#include "corrnet/clustering.hpp"
#include "corrnet/corrdist.hpp"
#include "corrnet/inference.hpp"
#include "corrnet/marketdata.hpp"
#include "corrnet/portfolio.hpp"
#include "corrnet/splits.hpp"

#include <json.hpp>

namespace corrnet {

using Json = nlohmann::json;

// Non-finite numbers are written as null.

/// {"ordering": [...], "splits": [[p, q], ...], "weights": [...], "fit_residual": r}
Json to_json(const WeightedSplitSystem& system);
/// Throws ValidationError on a malformed document or non-canonical splits.
WeightedSplitSystem system_from_json(const Json& j);

/// {"ordering": [...], "boundaries": [...], "labels": [...]}
Json to_json(const ClusterAssignment& assignment);
/// Labels, when present, must agree with the boundaries.
ClusterAssignment assignment_from_json(const Json& j);

Json to_json(const ClusterPairing& pairing);
Json to_json(const ContiguityReport& report);
Json to_json(const TestReport& report);
Json to_json(const SimulationResult& result, bool with_returns = true);
Json to_json(const SimulationTable& table, bool with_returns = false);
Json to_json(const CorrelationSummary& summary);
Json to_json(const StudyPeriod& period);

} // namespace corrnet
