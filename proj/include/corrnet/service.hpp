#pragma once

#include "corrnet/pipeline.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace corrnet {

struct HttpRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

/// JSON body. Errors carry {"error": {"code": ..., "message": ...}}.
struct HttpResponse {
    int status = 200;
    std::string body;
};

/// JSON API over the pipeline.
///
///   GET  /periods
///   GET  /network?period=P
///   GET  /clusters?period=P
///   PUT  /clusters?period=P            {"boundaries": [...]}
///   POST /simulate                     {"estimation": P, "evaluation"?, "strategies"?, "sizes"?,
///                                       "iterations"?, "seed"?, "levene_center"?, "include_returns"?}
///   GET  /track?period=Q&subset=T1,T2  (or cluster=c; reference=P defaults to the previous period)
///
/// Networks are estimated on first use. Cluster edits are written to
/// <out>/<P>_clusters.csv and picked up again on restart. Reads share a
/// per-period lock; PUT /clusters and POST /simulate hold it exclusively.
class Service {
public:
    explicit Service(PipelineConfig config);
    ~Service();

    HttpResponse handle(const HttpRequest& request);

    /// Blocks serving HTTP until `stop` is called. Returns false if the
    /// address cannot be bound.
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it (or -1); serve with `listen_bound`.
    int bind_any_port(const std::string& host);
    bool listen_bound();
    void stop();

private:
    struct PeriodState {
        std::once_flag built;
        PeriodNetwork network;
        std::shared_mutex mutex;
        ClusterAssignment clusters;
        std::string clusters_source;
    };

    PeriodState& period(const std::string& label);
    PeriodState& ready(std::size_t index);
    HttpResponse periods();
    HttpResponse network(const HttpRequest& r);
    HttpResponse get_clusters(const HttpRequest& r);
    HttpResponse put_clusters(const HttpRequest& r);
    HttpResponse simulate(const HttpRequest& r);
    HttpResponse track(const HttpRequest& r);
    std::string clusters_body(const std::string& label, const PeriodState& s) const;

    PipelineConfig config_;
    MarketData data_;
    std::vector<std::unique_ptr<PeriodState>> states_;
    struct Http;
    std::shared_ptr<Http> http_;
};

} // namespace corrnet
