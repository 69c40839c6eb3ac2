#include "corrnet/json.hpp"

#include "corrnet/error.hpp"

#include <cmath>

namespace corrnet {

namespace {

Json number(double x)
{
    return std::isfinite(x) ? Json(x) : Json(nullptr);
}

const Json& field(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw ValidationError(std::string("missing field '") + key + "'");
    return j.at(key);
}

template <typename T>
std::vector<T> list_of(const Json& j, const char* key)
{
    const auto& v = field(j, key);
    if (!v.is_array())
        throw ValidationError(std::string("field '") + key + "' must be an array");
    try {
        return v.get<std::vector<T>>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("field '") + key + "' has elements of the wrong type");
    }
}

CircularOrdering ordering_from(const Json& j)
{
    CircularOrdering o;
    o.taxa = list_of<std::size_t>(j, "ordering");
    if (!is_permutation_of_n(o.taxa))
        throw ValidationError("ordering is not a permutation of 0..n-1");
    return o;
}

} // namespace

Json to_json(const WeightedSplitSystem& system)
{
    Json splits = Json::array(), weights = Json::array();
    for (const auto& ws : system.splits) {
        splits.push_back({ws.split.p, ws.split.q});
        weights.push_back(number(ws.weight));
    }
    return {{"ordering", system.ordering.taxa},
            {"splits", splits},
            {"weights", weights},
            {"fit_residual", number(system.fit_residual)}};
}

WeightedSplitSystem system_from_json(const Json& j)
{
    WeightedSplitSystem s;
    s.ordering = ordering_from(j);
    const auto splits = list_of<std::vector<std::size_t>>(j, "splits");
    const auto weights = list_of<double>(j, "weights");
    if (splits.size() != weights.size())
        throw ValidationError("splits and weights differ in length");
    const std::size_t n = s.ordering.size();
    for (std::size_t i = 0; i < splits.size(); ++i) {
        if (splits[i].size() != 2)
            throw ValidationError("a split is written as [p, q]");
        const CircularSplit cs{splits[i][0], splits[i][1]};
        if (cs.p >= n || cs.q >= n || make_split(cs.p, cs.q, n) != cs)
            throw ValidationError("split [" + std::to_string(cs.p) + ", " + std::to_string(cs.q) +
                                  "] is not in canonical form");
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
            throw ValidationError("split weights must be finite and non-negative");
        s.splits.push_back({cs, weights[i]});
    }
    const auto& r = field(j, "fit_residual");
    s.fit_residual = r.is_null() ? 0.0 : r.get<double>();
    return s;
}

Json to_json(const ClusterAssignment& a)
{
    return {{"ordering", a.ordering.taxa}, {"boundaries", a.boundaries}, {"labels", a.labels}};
}

ClusterAssignment assignment_from_json(const Json& j)
{
    auto a = delineate_manual(ordering_from(j), list_of<std::size_t>(j, "boundaries"));
    if (j.contains("labels") && list_of<std::size_t>(j, "labels") != a.labels)
        throw ValidationError("labels do not match the boundaries");
    return a;
}

Json to_json(const ClusterPairing& pairing)
{
    return pairing.pair_of;
}

Json to_json(const ContiguityReport& r)
{
    Json arcs = Json::array();
    for (auto [first, last] : r.arcs)
        arcs.push_back({first, last});
    return {{"arcs", arcs}, {"score", r.score}, {"reference_clusters", r.reference_clusters}};
}

Json to_json(const TestReport& r)
{
    Json j{{"statistic", number(r.statistic)}, {"df1", r.df1}, {"df2", r.df2}, {"p_value", number(r.p_value)}};
    if (r.center)
        j["center"] = to_string(*r.center);
    return j;
}

Json to_json(const SimulationResult& r, bool with_returns)
{
    Json j{{"strategy", to_string(r.strategy)},
           {"size", r.size},
           {"iterations", r.returns.size()},
           {"mean", number(r.mean)},
           {"std_dev", number(r.std_dev)},
           {"seed", r.seed},
           {"rng_algorithm", r.rng_algorithm},
           {"stream", r.stream}};
    if (with_returns)
        j["returns"] = r.returns;
    return j;
}

Json to_json(const SimulationTable& t, bool with_returns)
{
    Json strategies = Json::array();
    for (auto s : t.strategies)
        strategies.push_back(to_string(s));
    Json rows = Json::array();
    for (const auto& row : t.rows) {
        Json results = Json::array();
        for (const auto& r : row.results)
            results.push_back(to_json(r, with_returns));
        rows.push_back({{"size", row.size},
                        {"results", results},
                        {"anova", to_json(row.anova)},
                        {"levene", to_json(row.levene)}});
    }
    return {{"estimation_period", t.estimation_period},
            {"evaluation_period", t.evaluation_period},
            {"strategies", strategies},
            {"rows", rows}};
}

Json to_json(const CorrelationSummary& s)
{
    return {{"mean", number(s.mean)},         {"std_dev", number(s.std_dev)},
            {"min", number(s.min)},           {"max", number(s.max)},
            {"negative_count", s.negative_count}, {"total_pairs", s.total_pairs}};
}

Json to_json(const StudyPeriod& p)
{
    return {{"label", p.label}, {"start", p.start.iso()}, {"end", p.end.iso()}};
}

} // namespace corrnet
