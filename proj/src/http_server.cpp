#include "prokno/http_server.hpp"

#include <httplib.h>

namespace prokno {

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;

    explicit Impl(Service& s) : service(s) {
        auto route = [this](const httplib::Request& req, httplib::Response& res) {
            Response out = service.handle(req.method, req.path, req.body);
            res.status = out.status;
            res.set_content(out.body.dump(), "application/json; charset=utf-8");
        };
        server.Get(R"(/.*)", route);
        server.Post(R"(/.*)", route);
    }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace prokno
