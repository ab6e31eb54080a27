#pragma once

#include <memory>
#include <string>

#include "mindtrail/service.hpp"

namespace mindtrail {

struct HttpOptions {
    std::string host{"127.0.0.1"};
    int port{8080};  // 0 picks a free port
    // When non-empty every request must carry "Authorization: Bearer <token>".
    std::string bearer_token;
    int threads{16};
};

/// REST front end over SessionService. Bodies are canonical JSON; errors are
/// {http_status, code, message, request_id}.
class HttpServer {
public:
    HttpServer(SessionService& service, HttpOptions options);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and starts serving on a background thread; returns the bound
    /// port. Throws PortInUse when the address cannot be bound.
    int start();
    /// Blocks until stop() is called from another thread or a signal handler.
    void wait();
    void stop();
    int port() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mindtrail
