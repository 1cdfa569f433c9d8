#pragma once

#include <memory>
#include <string>

#include "forge/service/curation.hpp"

namespace forge::service {

/// HTTP front end for a CurationService. /api/* routes map onto
/// CurationService::handle; anything else is 404.
class ApiServer {
public:
    explicit ApiServer(CurationService& service);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds "host:port" (port 0 picks a free one) and returns the port.
    int bind(const std::string& address);
    /// Serves until stop() is called.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace forge::service
