#include "forge/service/server.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "forge/error.hpp"
#include "httplib.h"

namespace forge::service {

struct ApiServer::Impl {
    explicit Impl(CurationService& s) : service(s) {}
    CurationService& service;
    httplib::Server server;
};

ApiServer::ApiServer(CurationService& service) : impl_(std::make_unique<Impl>(service)) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
        const auto r = impl_->service.handle(req.method, req.path, query, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    impl_->server.Get(R"(/api/.*)", handler);
    impl_->server.Post(R"(/api/.*)", handler);
    impl_->server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
    });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos) throw UsageError(fmt::format("bind address '{}' must be host:port", address));
    const auto host = address.substr(0, colon);
    const int port = std::stoi(address.substr(colon + 1));
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw UsageError(fmt::format("cannot bind {}", address));
    return bound;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace forge::service
