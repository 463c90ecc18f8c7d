// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include <cstdlib>
#include <regex>

#include "vicl/model_gateway.hpp"

namespace vicl {

namespace {

struct Endpoint {
    std::string base;  ///< scheme://host[:port]
    std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re))
        throw std::invalid_argument("malformed endpoint URL '" + url + "'");
    return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

class HttpTransport final : public Transport {
public:
    TransportResponse post(const nlohmann::json& request, const BackendConfig& config) override {
        const Endpoint ep = parse_endpoint(config.endpoint);
        httplib::Client client(ep.base);
        const auto seconds = static_cast<time_t>(config.timeout_s);
        const auto micros = static_cast<time_t>((config.timeout_s - static_cast<double>(seconds)) * 1e6);
        client.set_connection_timeout(seconds, micros);
        client.set_read_timeout(seconds, micros);
        client.set_write_timeout(seconds, micros);

        httplib::Headers headers;
        if (!config.auth_env.empty()) {
            const char* key = std::getenv(config.auth_env.c_str());
            if (!key)
                throw GatewayError(GatewayError::Kind::Auth,
                                   "environment variable " + config.auth_env + " is not set");
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        auto res = client.Post(ep.path, headers, request.dump(), "application/json");
        if (!res)
            throw TransportTimeout("request to " + config.endpoint + " failed: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttpTransport>(); }

}  // namespace vicl
