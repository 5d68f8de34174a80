// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "attnviz/error.hpp"
#include "attnviz/workbench.hpp"

namespace httplib {
class Server;
}

namespace attnviz {

struct HttpResponse {
    int status = 200;
    std::string body;
};

int http_status(ErrorKind kind);
// {"error": code, "detail": message} plus "field" for bounds errors.
HttpResponse error_response(int status, std::string_view code, std::string_view detail,
                            std::string_view field = {});

/// Routes /api/* requests to a Workbench. Transport-free so it can be driven
/// directly by tests; HttpServer adapts it to cpp-httplib.
class ApiService {
public:
    ApiService() = default;
    explicit ApiService(std::shared_ptr<const Workbench> workbench) : workbench_(std::move(workbench)) {}

    // Until a workbench is installed, /api/health answers 503.
    void set_workbench(std::shared_ptr<const Workbench> workbench);
    bool ready() const;

    HttpResponse handle(std::string_view method, std::string_view path, std::string_view body) const;

private:
    std::shared_ptr<const Workbench> current() const;

    mutable std::mutex mutex_;
    std::shared_ptr<const Workbench> workbench_;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::filesystem::path model_path;
    std::size_t max_request_len = 0;  // 0: model max_seq
    std::optional<std::filesystem::path> static_dir;
};

class HttpServer {
public:
    HttpServer(const ApiService& service, const std::optional<std::filesystem::path>& static_dir = std::nullopt);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Returns the bound port; throws ErrorKind::Io if the port is unavailable.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();
    void wait_until_ready() const;

private:
    const ApiService& service_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace attnviz
