#include "corrnet/service.hpp"

#include "corrnet/error.hpp"
#include "corrnet/json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace corrnet {

namespace fs = std::filesystem;

namespace {

/// A request failure with its HTTP status and machine-readable code.
struct HttpError {
    int status;
    std::string code;
    std::string message;
};

HttpResponse ok(const Json& j)
{
    return {200, j.dump()};
}

HttpResponse error_response(int status, const std::string& code, const std::string& message)
{
    return {status, Json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

const std::string& query(const HttpRequest& r, const std::string& key)
{
    const auto it = r.query.find(key);
    if (it == r.query.end() || it->second.empty())
        throw HttpError{400, "missing_parameter", "query parameter '" + key + "' is required"};
    return it->second;
}

Json parse_body(const HttpRequest& r)
{
    try {
        auto j = Json::parse(r.body.empty() ? std::string("{}") : r.body);
        if (!j.is_object())
            throw HttpError{400, "malformed_json", "request body must be a JSON object"};
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw HttpError{400, "malformed_json", e.what()};
    }
}

template <typename T>
T body_value(const Json& j, const char* key, T fallback)
{
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw HttpError{422, "invalid_request", std::string("field '") + key + "' has the wrong type"};
    }
}

std::vector<std::string> split_commas(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

} // namespace

Service::Service(PipelineConfig config) : config_(std::move(config))
{
    config_.validate();
    data_ = load_market_data(config_);
    for (std::size_t i = 0; i < data_.periods.size(); ++i)
        states_.push_back(std::make_unique<PeriodState>());
}

Service::PeriodState& Service::period(const std::string& label)
{
    for (std::size_t i = 0; i < data_.periods.size(); ++i)
        if (data_.periods[i].label == label)
            return ready(i);
    throw HttpError{404, "unknown_period", "unknown period '" + label + "'"};
}

Service::PeriodState& Service::ready(std::size_t index)
{
    auto& s = *states_[index];
    std::call_once(s.built, [&] {
        s.network = build_network(data_, index, config_.fit);
        const auto saved = config_.out / (data_.periods[index].label + "_clusters.csv");
        if (fs::exists(saved)) {
            std::ifstream in(saved);
            s.clusters = read_cluster_csv(in, s.network.system.ordering, data_.tickers());
            s.clusters_source = "saved";
        } else {
            s.clusters = choose_clusters(config_, data_, s.network);
            s.clusters_source = config_.cluster_files.count(data_.periods[index].label) ? "file" : "auto";
        }
    });
    return s;
}

HttpResponse Service::handle(const HttpRequest& r)
{
    try {
        if (r.path == "/periods" && r.method == "GET")
            return periods();
        if (r.path == "/network" && r.method == "GET")
            return network(r);
        if (r.path == "/clusters" && r.method == "GET")
            return get_clusters(r);
        if (r.path == "/clusters" && r.method == "PUT")
            return put_clusters(r);
        if (r.path == "/simulate" && r.method == "POST")
            return simulate(r);
        if (r.path == "/track" && r.method == "GET")
            return track(r);
        for (const char* known : {"/periods", "/network", "/clusters", "/simulate", "/track"})
            if (r.path == known)
                return error_response(405, "method_not_allowed", r.method + " is not supported on " + r.path);
        return error_response(404, "not_found", "no endpoint " + r.path);
    } catch (const HttpError& e) {
        return error_response(e.status, e.code, e.message);
    } catch (const Error& e) {
        switch (e.kind()) {
        case Error::Kind::Validation:
            return error_response(422, "invalid_request", e.what());
        case Error::Kind::Io:
            return error_response(500, "io_error", e.what());
        case Error::Kind::Numerical:
            return error_response(500, "numerical_failure", e.what());
        }
        return error_response(500, "internal_error", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal_error", e.what());
    }
}

HttpResponse Service::periods()
{
    Json list = Json::array(), pairs = Json::array();
    for (std::size_t i = 0; i < data_.periods.size(); ++i) {
        auto p = to_json(data_.periods[i]);
        p["index"] = i;
        list.push_back(p);
        if (i + 1 < data_.periods.size())
            pairs.push_back({{"estimation", data_.periods[i].label}, {"evaluation", data_.periods[i + 1].label}});
    }
    return ok({{"periods", list}, {"pairs", pairs}});
}

HttpResponse Service::network(const HttpRequest& r)
{
    const auto& label = query(r, "period");
    auto& s = period(label);
    std::shared_lock lock(s.mutex);
    const std::size_t n = data_.series.size();
    Json industries = Json::array();
    for (auto ind : data_.industries())
        industries.push_back(to_string(ind));
    Json j = to_json(s.network.system);
    j["period"] = label;
    j["tickers"] = data_.tickers();
    j["industries"] = industries;
    j["taxa"] = n;
    j["pairs"] = n * (n - 1) / 2;
    j["candidate_splits"] = candidate_split_count(n);
    j["retained_splits"] = s.network.system.splits.size();
    j["windows"] = s.network.windows;
    j["summary"] = to_json(s.network.summary);
    return ok(j);
}

std::string Service::clusters_body(const std::string& label, const PeriodState& s) const
{
    Json j = to_json(s.clusters);
    j["period"] = label;
    j["k"] = s.clusters.k();
    j["sizes"] = s.clusters.sizes();
    j["pairing"] = to_json(pair_clusters(s.clusters));
    j["source"] = s.clusters_source;
    return j.dump();
}

HttpResponse Service::get_clusters(const HttpRequest& r)
{
    const auto& label = query(r, "period");
    auto& s = period(label);
    std::shared_lock lock(s.mutex);
    return {200, clusters_body(label, s)};
}

HttpResponse Service::put_clusters(const HttpRequest& r)
{
    const auto& label = query(r, "period");
    auto& s = period(label);
    const auto body = parse_body(r);
    if (!body.contains("boundaries"))
        throw HttpError{422, "invalid_boundaries", "body needs a 'boundaries' array"};
    std::unique_lock lock(s.mutex);
    ClusterAssignment next;
    try {
        Json doc = body;
        if (!doc.contains("ordering"))
            doc["ordering"] = s.network.system.ordering.taxa;
        else if (doc["ordering"] != Json(s.network.system.ordering.taxa))
            throw ValidationError("ordering differs from the period's network");
        next = assignment_from_json(doc);
        if (next.k() < 2)
            throw ValidationError("at least two clusters are required");
    } catch (const ValidationError& e) {
        throw HttpError{422, "invalid_boundaries", e.what()};
    }
    std::error_code ec;
    fs::create_directories(config_.out, ec);
    const auto path = config_.out / (label + "_clusters.csv");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    write_cluster_csv(out, next, data_.tickers());
    s.clusters = std::move(next);
    s.clusters_source = "saved";
    return {200, clusters_body(label, s)};
}

HttpResponse Service::simulate(const HttpRequest& r)
{
    const auto body = parse_body(r);
    if (!body.contains("estimation"))
        throw HttpError{422, "invalid_request", "body needs an 'estimation' period"};
    const auto est_label = body_value<std::string>(body, "estimation", "");
    auto& s = period(est_label);
    const std::size_t est = data_.period_index(est_label);
    if (est + 1 >= data_.periods.size())
        throw HttpError{422, "invalid_request", "period " + est_label + " has no following evaluation period"};
    const auto eval_label = body_value<std::string>(body, "evaluation", data_.periods[est + 1].label);
    if (eval_label != data_.periods[est + 1].label) {
        period(eval_label);
        throw HttpError{422, "invalid_request", "evaluation must be the period after " + est_label};
    }

    PipelineConfig cfg = config_;
    if (body.contains("strategies")) {
        cfg.strategies.clear();
        for (const auto& name : body_value<std::vector<std::string>>(body, "strategies", {}))
            cfg.strategies.push_back(parse_strategy(name));
    }
    cfg.sizes = body_value<std::vector<std::size_t>>(body, "sizes", cfg.sizes);
    cfg.iterations = body_value<std::size_t>(body, "iterations", cfg.iterations);
    cfg.seed = body_value<std::uint64_t>(body, "seed", cfg.seed);
    if (body.contains("levene_center"))
        cfg.center = parse_center(body_value<std::string>(body, "levene_center", ""));
    cfg.validate();
    const bool with_returns = body_value<bool>(body, "include_returns", false);

    std::unique_lock lock(s.mutex);
    const auto table = simulate_pair(cfg, data_, est, s.clusters);
    std::ostringstream csv;
    write_table_csv(csv, table);
    Json j = to_json(table, with_returns);
    j["csv"] = csv.str();
    return ok(j);
}

HttpResponse Service::track(const HttpRequest& r)
{
    const auto& label = query(r, "period");
    auto& later = period(label);
    const std::size_t idx = data_.period_index(label);
    std::string ref_label;
    if (auto it = r.query.find("reference"); it != r.query.end() && !it->second.empty())
        ref_label = it->second;
    else if (idx > 0)
        ref_label = data_.periods[idx - 1].label;
    else
        throw HttpError{422, "invalid_request", "the first period needs an explicit reference period"};
    auto& reference = period(ref_label);

    const auto tickers = data_.tickers();
    std::vector<std::size_t> subset;
    std::shared_lock ref_lock(reference.mutex, std::defer_lock), later_lock(later.mutex, std::defer_lock);
    if (&reference == &later) {
        ref_lock.lock();
    } else {
        std::lock(ref_lock, later_lock);
    }
    if (auto it = r.query.find("cluster"); it != r.query.end() && !it->second.empty()) {
        std::size_t c = 0;
        try {
            c = std::stoul(it->second);
        } catch (const std::exception&) {
            throw HttpError{400, "bad_parameter", "cluster must be a number"};
        }
        if (c < 1 || c > reference.clusters.k())
            throw HttpError{422, "invalid_request", "no cluster " + it->second + " in " + ref_label};
        subset = reference.clusters.members(c);
    } else {
        for (const auto& t : split_commas(query(r, "subset"))) {
            const auto pos = std::find(tickers.begin(), tickers.end(), t);
            if (pos == tickers.end())
                throw HttpError{422, "invalid_request", "unknown ticker '" + t + "'"};
            subset.push_back(static_cast<std::size_t>(pos - tickers.begin()));
        }
    }
    const auto report = track_membership(reference.clusters, later.network.system.ordering, subset);
    Json j = to_json(report);
    Json names = Json::array();
    for (auto t : subset)
        names.push_back(tickers[t]);
    j["period"] = label;
    j["reference"] = ref_label;
    j["subset"] = names;
    return ok(j);
}

} // namespace corrnet
