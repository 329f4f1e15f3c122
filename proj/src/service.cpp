// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <sys/socket.h>

#include <thread>
#include <unistd.h>

namespace toposearch {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kJson = "application/json; charset=utf-8";

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const std::string& field = {}) {
    ordered_json e;
    e["status"] = status;
    e["code"] = code;
    e["message"] = message;
    if (!field.empty()) e["field"] = field;
    res.status = status;
    res.set_content(ordered_json{{"error", e}}.dump(), kJson);
}

// Runs fn and maps engine exceptions to structured errors.
template <typename Fn>
void respond(httplib::Response& res, Fn&& fn) {
    try {
        res.status = 200;
        res.set_content(fn(), kJson);
    } catch (const ParamError& e) {
        send_error(res, 400, "invalid_argument", e.what(), e.field());
    } catch (const InvalidArgument& e) {
        send_error(res, 400, "invalid_argument", e.what());
    } catch (const NotFound& e) {
        send_error(res, 404, "not_found", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
    }
}

} // namespace

struct Service::Impl {
    const Engine& engine;
    httplib::Server server;
    int port = 0;
    socket_t listen_fd = INVALID_SOCKET; // last socket handed to the options hook, i.e. the bound one
    bool started = false;
    std::thread thread;

    explicit Impl(const Engine& e) : engine(e) {}
};

Service::Service(const Engine& engine, const std::string& host, int port) : impl_(std::make_unique<Impl>(engine)) {
    auto& srv = impl_->server;
    // No SO_REUSEPORT, so a busy port is reported instead of shared.
    srv.set_socket_options([this](socket_t sock) {
        impl_->listen_fd = sock;
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });

    srv.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
        respond(res, [&] {
            auto stats = json::parse(impl_->engine.stats_json());
            ordered_json j;
            j["status"] = "ok";
            j["stats"] = stats;
            return j.dump();
        });
    });
    srv.Get("/api/search", [this](const httplib::Request& req, httplib::Response& res) {
        respond(res, [&] {
            json params = json::object();
            for (const auto& [key, value] : req.params) {
                if (key != "q" && key != "lat" && key != "lon" && key != "radius_m" && key != "alpha" && key != "k" &&
                    key != "method") {
                    throw ParamError(key, "unknown parameter");
                }
                params[key] = value;
            }
            return impl_->engine.search_json(params.dump());
        });
    });
    srv.Post("/api/ask", [this](const httplib::Request& req, httplib::Response& res) {
        respond(res, [&] { return impl_->engine.ask_json(req.body); });
    });
    srv.Get(R"(/api/doc/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
        respond(res, [&] { return impl_->engine.doc_json(req.matches[1].str()); });
    });
    srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        if (res.status == 404) {
            send_error(res, 404, "not_found", "no route for " + req.method + " " + req.path);
        } else {
            send_error(res, res.status, "http_error", httplib::status_message(res.status));
        }
        return httplib::Server::HandlerResponse::Handled;
    });

    if (port == 0) {
        impl_->port = srv.bind_to_any_port(host);
        if (impl_->port < 0) throw IoError("cannot bind any port on " + host);
    } else {
        if (!srv.bind_to_port(host, port)) {
            throw IoError("cannot listen on " + host + ":" + std::to_string(port) + " (port busy or unavailable)");
        }
        impl_->port = port;
    }
}

Service::~Service() {
    if (!impl_->started) {
        // httplib only closes the socket of a running server.
        if (impl_->listen_fd != INVALID_SOCKET) ::close(impl_->listen_fd);
        return;
    }
    stop();
    wait();
}

int Service::port() const noexcept { return impl_->port; }

void Service::start() {
    if (impl_->started) return;
    impl_->started = true;
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void Service::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

void Service::stop() { impl_->server.stop(); }

} // namespace toposearch
