#include "corrnet/service.hpp"

#include <httplib.h>

namespace corrnet {

struct Service::Http {
    httplib::Server server;
};

Service::~Service() = default;

namespace {

void install(httplib::Server& server, Service& service)
{
    auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
        HttpRequest r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params)
            r.query[k] = v;
        r.body = req.body;
        const auto out = service.handle(r);
        res.status = out.status;
        res.set_content(out.body, "application/json");
    };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    const std::string any = R"(/.*)";
    server.Get(any, dispatch);
    server.Put(any, dispatch);
    server.Post(any, dispatch);
    server.Options(any, [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

} // namespace

bool Service::listen(const std::string& host, int port)
{
    http_ = std::make_shared<Http>();
    install(http_->server, *this);
    return http_->server.listen(host, port);
}

int Service::bind_any_port(const std::string& host)
{
    http_ = std::make_shared<Http>();
    install(http_->server, *this);
    return http_->server.bind_to_any_port(host);
}

bool Service::listen_bound()
{
    return http_ && http_->server.listen_after_bind();
}

void Service::stop()
{
    if (http_)
        http_->server.stop();
}

} // namespace corrnet
