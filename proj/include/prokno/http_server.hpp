#pragma once

#include "prokno/service.hpp"

#include <memory>
#include <string>

namespace prokno {

/// Binds a Service to a cpp-httplib server. All requests are routed through
/// Service::handle, so the HTTP layer adds only transport.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Returns the bound port, or -1. Port 0 picks a free port.
    int bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    bool listen();
    void stop();
    void wait_until_ready() const;
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace prokno
