/*
Copyright 2026 The kernsched Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <cstdlib>
#include <regex>

#include <fmt/format.h>
#include <httplib.h>

#include "kernsched/synthesis.hpp"

namespace kernsched {

namespace {

struct Endpoint {
    std::string origin; ///< scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string &url) {
    static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, pattern))
        throw UsageError(fmt::format("provider endpoint '{}' is not an http(s) URL", url));
    return {m[1].str(), m[2].matched ? m[2].str() : std::string("/v1/chat/completions")};
}

} // namespace

HttpProvider::HttpProvider(ProviderDescriptor descriptor) : descriptor_(std::move(descriptor)) {
    split_endpoint(descriptor_.endpoint);
}

nlohmann::json HttpProvider::request_body(const std::string &prompt_text) const {
    return {{"model", descriptor_.model},
            {"temperature", 0},
            {"messages",
             {{{"role", "system"},
               {"content", "You write priority expressions for a list scheduler. Follow the output contract."}},
              {{"role", "user"}, {"content", prompt_text}}}}};
}

std::string HttpProvider::propose(const SynthesisRequest &request) {
    const Endpoint ep = split_endpoint(descriptor_.endpoint);
    httplib::Client client(ep.origin);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);

    httplib::Headers headers;
    if (!descriptor_.auth_env.empty()) {
        if (const char *token = std::getenv(descriptor_.auth_env.c_str()); token && *token)
            headers.emplace("Authorization", fmt::format("Bearer {}", token));
    }

    const auto res = client.Post(ep.path, headers, request_body(request.rendered).dump(), "application/json");
    if (!res)
        throw ProviderError(fmt::format("provider request to {} failed: {}", ep.origin, httplib::to_string(res.error())));
    if (res->status != 200)
        throw ProviderError(fmt::format("provider returned HTTP {}", res->status));

    try {
        const auto doc = nlohmann::json::parse(res->body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception &e) {
        throw ProviderError(fmt::format("provider reply is not a chat completion: {}", e.what()));
    }
}

} // namespace kernsched
