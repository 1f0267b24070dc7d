#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "batchprompt/provider.hpp"

namespace batchprompt {

namespace detail {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

inline SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint_url has no scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

/// Chat-completions client: one user message per request, bearer auth from the
/// environment variable named in the config, usage record honored when present.
class HttpBackend : public Backend {
  public:
    Completion complete(const ProviderConfig& cfg, const std::string& prompt) override {
        auto url = detail::split_url(cfg.endpoint_url);
        httplib::Client client(url.base);
        client.set_connection_timeout(cfg.timeout);
        client.set_read_timeout(cfg.timeout);
        client.set_write_timeout(cfg.timeout);

        httplib::Headers headers;
        if (!cfg.api_key_source.empty()) {
            if (const char* key = std::getenv(cfg.api_key_source.c_str()); key && *key)
                headers.emplace("Authorization", std::string("Bearer ") + key);
        }

        nlohmann::json body{
            {"model", cfg.model_name},
            {"temperature", cfg.temperature},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        };

        auto res = client.Post(url.path, headers, body.dump(), "application/json");
        if (!res) {
            auto err = res.error();
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                err == httplib::Error::Write)
                throw TransportError(TransportError::Kind::Timeout,
                                     "request timed out: " + httplib::to_string(err));
            throw TransportError(TransportError::Kind::HttpStatus,
                                 "transport failure: " + httplib::to_string(err));
        }
        if (res->status != 200)
            throw TransportError(TransportError::Kind::HttpStatus,
                                 "endpoint returned HTTP " + std::to_string(res->status), res->status);

        nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
        if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty() ||
            !doc["choices"][0].contains("message") || !doc["choices"][0]["message"].contains("content"))
            throw TransportError(TransportError::Kind::MalformedResponse,
                                 "response body is not a chat completion");

        Completion out;
        out.text = doc["choices"][0]["message"]["content"].get<std::string>();
        if (doc.contains("usage")) {
            const auto& u = doc["usage"];
            if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number())
                out.prompt_tokens = u["prompt_tokens"].get<long>();
            if (u.contains("completion_tokens") && u["completion_tokens"].is_number())
                out.completion_tokens = u["completion_tokens"].get<long>();
        }
        return out;
    }
};

}  // namespace batchprompt
