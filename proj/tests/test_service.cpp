#include "corrnet/json.hpp"
#include "corrnet/service.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <set>
#include <thread>

using namespace corrnet;
namespace fs = std::filesystem;

namespace {

PipelineConfig service_config(const std::string& name)
{
    const auto out = fs::temp_directory_path() / ("corrnet_service_" + name);
    fs::remove_all(out);
    auto c = default_config(fs::path(CORRNET_TEST_DATA) / ".." / "data");
    c.out = out;
    c.iterations = 60;
    c.sizes = {2, 4};
    return c;
}

Service& shared()
{
    static Service service(service_config("shared"));
    return service;
}

HttpResponse call(Service& s, const std::string& method, const std::string& path,
                  std::map<std::string, std::string> query = {}, const std::string& body = "")
{
    return s.handle({method, path, std::move(query), body});
}

std::string error_code(const HttpResponse& r)
{
    return Json::parse(r.body)["error"]["code"];
}

} // namespace

TEST_CASE("GET /periods", "[service]")
{
    const auto r = call(shared(), "GET", "/periods");
    REQUIRE(r.status == 200);
    const auto j = Json::parse(r.body);
    REQUIRE(j["periods"].size() == 4);
    CHECK(j["periods"][0]["label"] == "P1");
    CHECK(j["periods"][0]["start"] == "2005-05-13");
    CHECK(j["pairs"].size() == 3);
    CHECK(j["pairs"][2]["evaluation"] == "P4");
}

TEST_CASE("GET /network", "[service]")
{
    const auto r = call(shared(), "GET", "/network", {{"period", "P1"}});
    REQUIRE(r.status == 200);
    const auto j = Json::parse(r.body);
    CHECK(j["taxa"] == 126);
    CHECK(j["pairs"] == 7875);
    CHECK(j["candidate_splits"] == 7875);
    CHECK(j["retained_splits"] == j["splits"].size());
    CHECK(j["weights"].size() == j["splits"].size());
    CHECK(j["ordering"].size() == 126);
    CHECK(j["tickers"].size() == 126);
    std::set<std::string> industries(j["industries"].begin(), j["industries"].end());
    CHECK(industries.size() == 5);
    CHECK(j["summary"]["total_pairs"] == 7875);
    CHECK(system_from_json(j).splits.size() == j["splits"].size());
}

TEST_CASE("errors are machine readable", "[service]")
{
    auto r = call(shared(), "GET", "/network", {{"period", "P7"}});
    CHECK(r.status == 404);
    CHECK(error_code(r) == "unknown_period");
    r = call(shared(), "GET", "/network");
    CHECK(r.status == 400);
    CHECK(error_code(r) == "missing_parameter");
    r = call(shared(), "GET", "/nowhere");
    CHECK(r.status == 404);
    CHECK(error_code(r) == "not_found");
    r = call(shared(), "DELETE", "/clusters", {{"period", "P1"}});
    CHECK(r.status == 405);
    r = call(shared(), "PUT", "/clusters", {{"period", "P1"}}, "{not json");
    CHECK(r.status == 400);
    CHECK(error_code(r) == "malformed_json");
}

TEST_CASE("cluster edits validate, persist and round-trip", "[service]")
{
    auto config = service_config("clusters");
    Service service(config);
    const auto initial = Json::parse(call(service, "GET", "/clusters", {{"period", "P1"}}).body);
    CHECK(initial["source"] == "auto");
    CHECK(initial["k"] == 8);
    CHECK(initial["pairing"] == Json({5, 6, 7, 8, 1, 2, 3, 4}));

    // A repeated cut leaves an empty arc.
    auto r = call(service, "PUT", "/clusters", {{"period", "P1"}}, R"({"boundaries": [5, 5, 70]})");
    CHECK(r.status == 422);
    CHECK(error_code(r) == "invalid_boundaries");
    r = call(service, "PUT", "/clusters", {{"period", "P1"}}, R"({"boundaries": [5, 300]})");
    CHECK(r.status == 422);
    r = call(service, "PUT", "/clusters", {{"period", "P1"}}, R"({"boundaries": [5]})");
    CHECK(r.status == 422);
    r = call(service, "PUT", "/clusters", {{"period", "P1"}}, R"({"cuts": [5, 9]})");
    CHECK(r.status == 422);
    r = call(service, "PUT", "/clusters", {{"period", "P1"}}, R"({"boundaries": [5, 30], "ordering": [0]})");
    CHECK(r.status == 422);
    CHECK(Json::parse(call(service, "GET", "/clusters", {{"period", "P1"}}).body) == initial);

    r = call(service, "PUT", "/clusters", {{"period", "P1"}}, R"({"boundaries": [100, 10, 40, 70, 90]})");
    REQUIRE(r.status == 200);
    const auto put = Json::parse(r.body);
    CHECK(put["boundaries"] == Json({10, 40, 70, 90, 100}));
    CHECK(put["k"] == 5);
    const auto got = Json::parse(call(service, "GET", "/clusters", {{"period", "P1"}}).body);
    CHECK(got == put);
    REQUIRE(fs::exists(config.out / "P1_clusters.csv"));

    Service restarted(config);
    const auto again = Json::parse(call(restarted, "GET", "/clusters", {{"period", "P1"}}).body);
    CHECK(again["boundaries"] == put["boundaries"]);
    CHECK(again["labels"] == put["labels"]);
    CHECK(again["source"] == "saved");
}

TEST_CASE("POST /simulate", "[service]")
{
    auto config = service_config("simulate");
    Service service(config);
    const std::string body =
        R"({"estimation": "P1", "sizes": [2, 4], "iterations": 50, "seed": 7, "include_returns": true})";
    const auto a = call(service, "POST", "/simulate", {}, body);
    REQUIRE(a.status == 200);
    CHECK(call(service, "POST", "/simulate", {}, body).body == a.body);
    const auto j = Json::parse(a.body);
    CHECK(j["evaluation_period"] == "P2");
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][0]["results"].size() == 4);
    CHECK(j["rows"][0]["results"][0]["returns"].size() == 50);
    CHECK(j["rows"][0]["levene"]["center"] == "median");
    CHECK(j["csv"].get<std::string>().rfind("size,Random,Industry,Cluster,IndustryCluster,p_value\n", 0) == 0);

    // New boundaries move the cluster strategies only.
    REQUIRE(call(service, "PUT", "/clusters", {{"period", "P1"}}, R"({"boundaries": [0, 30, 60, 95]})").status == 200);
    const auto b = Json::parse(call(service, "POST", "/simulate", {}, body).body);
    for (std::size_t row = 0; row < 2; ++row) {
        const auto& before = j["rows"][row]["results"];
        const auto& after = b["rows"][row]["results"];
        CHECK(before[0]["returns"] == after[0]["returns"]);
        CHECK(before[1]["returns"] == after[1]["returns"]);
        CHECK(before[2]["returns"] != after[2]["returns"]);
    }

    auto r = call(service, "POST", "/simulate", {}, R"({"estimation": "P9"})");
    CHECK(r.status == 404);
    r = call(service, "POST", "/simulate", {}, R"({"estimation": "P1", "evaluation": "P3"})");
    CHECK(r.status == 422);
    r = call(service, "POST", "/simulate", {}, R"({"estimation": "P4"})");
    CHECK(r.status == 422);
    r = call(service, "POST", "/simulate", {}, R"({"estimation": "P1", "strategies": ["Momentum"]})");
    CHECK(r.status == 422);
    r = call(service, "POST", "/simulate", {}, R"({"estimation": "P1", "sizes": "four"})");
    CHECK(r.status == 422);
    r = call(service, "POST", "/simulate", {}, R"({})");
    CHECK(r.status == 422);
}

TEST_CASE("GET /track", "[service]")
{
    auto r = call(shared(), "GET", "/track", {{"period", "P2"}, {"cluster", "1"}});
    REQUIRE(r.status == 200);
    auto j = Json::parse(r.body);
    CHECK(j["reference"] == "P1");
    CHECK(j["reference_clusters"] == Json({1}));
    CHECK(j["arcs"].size() >= 1);
    CHECK(j["score"] == Catch::Approx(1.0 / static_cast<double>(j["arcs"].size())));

    const auto net = Json::parse(call(shared(), "GET", "/network", {{"period", "P2"}}).body);
    const auto& tickers = net["tickers"];
    const auto& ordering = net["ordering"];
    const std::string run = tickers[ordering[10].get<std::size_t>()].get<std::string>() + "," +
                            tickers[ordering[11].get<std::size_t>()].get<std::string>() + "," +
                            tickers[ordering[12].get<std::size_t>()].get<std::string>();
    j = Json::parse(call(shared(), "GET", "/track", {{"period", "P2"}, {"subset", run}}).body);
    CHECK(j["score"] == 1.0);
    CHECK(j["subset"].size() == 3);

    CHECK(call(shared(), "GET", "/track", {{"period", "P2"}, {"subset", "NOPE"}}).status == 422);
    CHECK(call(shared(), "GET", "/track", {{"period", "P1"}, {"cluster", "1"}}).status == 422);
    CHECK(call(shared(), "GET", "/track", {{"period", "P3"}, {"reference", "P1"}, {"cluster", "2"}}).status == 200);
    CHECK(call(shared(), "GET", "/track", {{"period", "P2"}, {"cluster", "99"}}).status == 422);
}

TEST_CASE("concurrent requests", "[service]")
{
    auto config = service_config("concurrent");
    Service service(config);
    std::vector<std::thread> threads;
    std::atomic<int> failures{0};
    for (int t = 0; t < 6; ++t)
        threads.emplace_back([&, t] {
            for (int i = 0; i < 5; ++i) {
                HttpResponse r;
                if (t == 0)
                    r = call(service, "PUT", "/clusters", {{"period", "P1"}},
                             Json{{"boundaries", {0, 20 + i, 70}}}.dump());
                else
                    r = call(service, "GET", t % 2 ? "/network" : "/clusters", {{"period", "P1"}});
                failures += r.status != 200;
            }
        });
    for (auto& th : threads)
        th.join();
    CHECK(failures == 0);
    CHECK(Json::parse(call(service, "GET", "/clusters", {{"period", "P1"}}).body)["boundaries"] ==
          Json({0, 24, 70}));
}

TEST_CASE("HTTP loopback", "[service][http]")
{
    auto config = service_config("http");
    Service service(config);
    const int port = service.bind_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server([&] { service.listen_bound(); });

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(60, 0);
    auto res = client.Get("/periods");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "application/json");
    CHECK(Json::parse(res->body)["periods"].size() == 4);

    res = client.Put("/clusters?period=P2", R"({"boundaries": [3, 3]})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);
    res = client.Put("/clusters?period=P2", R"({"boundaries": [3, 50]})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = client.Get("/clusters?period=P2");
    REQUIRE(res);
    CHECK(Json::parse(res->body)["boundaries"] == Json({3, 50}));
    res = client.Get("/network?period=P0");
    REQUIRE(res);
    CHECK(res->status == 404);

    service.stop();
    server.join();
}
