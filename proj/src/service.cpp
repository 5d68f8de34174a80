// SPDX-License-Identifier: Apache-2.0
#include "attnviz/service.hpp"

#include <httplib.h>

#include <limits>

#include "attnviz/error.hpp"
#include "attnviz/serialize.hpp"

namespace attnviz {

namespace {

struct BadRequest {
    std::string detail;
};

std::optional<std::string> optional_string(const Json& body, const char* key) {
    if (!body.contains(key) || body[key].is_null()) return std::nullopt;
    if (!body[key].is_string()) throw BadRequest{std::string("'") + key + "' must be a string"};
    return body[key].get<std::string>();
}

TextInput text_input(const Json& body) {
    auto text = optional_string(body, "text");
    if (!text) throw BadRequest{"'text' is required"};
    return {*text, optional_string(body, "text_b")};
}

// Negative or huge indices are out of range rather than malformed.
std::size_t index_field(const Json& body, const char* key) {
    if (!body.contains(key)) throw BadRequest{std::string("'") + key + "' is required"};
    const Json& v = body[key];
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer()) return std::numeric_limits<std::size_t>::max();
    throw BadRequest{std::string("'") + key + "' must be an integer"};
}

HttpResponse ok(std::string body) { return {200, std::move(body)}; }

}  // namespace

int http_status(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Length: return 413;
        case ErrorKind::Bounds: return 404;
        case ErrorKind::Input:
        case ErrorKind::Mode:
        case ErrorKind::Vocab:
        case ErrorKind::InsufficientLength:
        case ErrorKind::Domain: return 400;
        default: return 500;
    }
}

HttpResponse error_response(int status, std::string_view code, std::string_view detail, std::string_view field) {
    Json j{{"error", std::string(code)}, {"detail", std::string(detail)}};
    if (!field.empty()) j["field"] = std::string(field);
    return {status, canonical_dump(j)};
}

void ApiService::set_workbench(std::shared_ptr<const Workbench> workbench) {
    std::lock_guard lock(mutex_);
    workbench_ = std::move(workbench);
}

bool ApiService::ready() const { return current() != nullptr; }

std::shared_ptr<const Workbench> ApiService::current() const {
    std::lock_guard lock(mutex_);
    return workbench_;
}

HttpResponse ApiService::handle(std::string_view method, std::string_view path, std::string_view body) const {
    const auto wb = current();
    if (path == "/api/health") {
        if (method != "GET") return error_response(405, "method_not_allowed", "use GET");
        if (!wb) return error_response(503, "not_ready", "model is still loading");
        return ok(R"({"status":"ok"})");
    }

    const bool is_get = path == "/api/model";
    const bool is_post = path == "/api/trace" || path == "/api/neuron" || path == "/api/heads";
    if (!is_get && !is_post) return error_response(404, "not_found", "no endpoint " + std::string(path));
    if (is_get && method != "GET") return error_response(405, "method_not_allowed", "use GET");
    if (is_post && method != "POST") return error_response(405, "method_not_allowed", "use POST");
    if (!wb) return error_response(503, "not_ready", "model is still loading");

    if (path == "/api/model") return ok(wb->model_body());

    const Json req = Json::parse(body, nullptr, false);
    if (req.is_discarded()) return error_response(422, "malformed_json", "request body is not valid JSON");
    if (!req.is_object()) return error_response(422, "malformed_json", "request body must be a JSON object");

    try {
        const TextInput in = text_input(req);
        if (in.text.find_first_not_of(" \t\r\n") == std::string::npos) {
            return error_response(400, "empty_text", "'text' is empty");
        }
        if (path == "/api/trace") {
            bool include_qk = false;
            if (req.contains("include_qk")) {
                if (!req["include_qk"].is_boolean()) throw BadRequest{"'include_qk' must be a boolean"};
                include_qk = req["include_qk"].get<bool>();
            }
            return ok(wb->trace_body(in, include_qk));
        }
        if (path == "/api/heads") return ok(wb->heads_body(in));
        return ok(wb->neuron_body(in, index_field(req, "layer"), index_field(req, "head"),
                                  index_field(req, "token_index")));
    } catch (const BadRequest& e) {
        return error_response(400, "invalid_request", e.detail);
    } catch (const Error& e) {
        return error_response(http_status(e.kind()), to_string(e.kind()), e.what(), e.field());
    }
}

HttpServer::HttpServer(const ApiService& service, const std::optional<std::filesystem::path>& static_dir)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
    auto& srv = *server_;
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    // httplib's default adds SO_REUSEPORT, which would let a second server share a busy port.
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    if (static_dir) {
        if (!srv.set_mount_point("/", static_dir->string())) {
            throw Error(ErrorKind::Io, "static directory " + static_dir->string() + " does not exist");
        }
    }
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
        HttpResponse r = service_.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(std::move(r.body), "application/json");
    };
    srv.Get(R"(/api/.*)", dispatch);
    srv.Post(R"(/api/.*)", dispatch);
    srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = server_->bind_to_any_port(host);
    } else if (!server_->bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw Error(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_) server_->stop();
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace attnviz
