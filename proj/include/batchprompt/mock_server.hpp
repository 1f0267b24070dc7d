#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "batchprompt/mock.hpp"
#include "batchprompt/strings.hpp"

namespace batchprompt {

/// The mock backend exposed over the chat-completions wire surface, for
/// integration tests that exercise the real HTTP client.
class MockHttpServer {
  public:
    explicit MockHttpServer(MockBackend backend) : backend_(std::move(backend)) {
        server_.Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockHttpServer() { stop(); }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    int port() const { return port_; }
    std::string endpoint_url() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    }
    long requests_served() const { return served_.load(); }

  private:
    void handle(const httplib::Request& req, httplib::Response& res) {
        ++served_;
        nlohmann::json doc = nlohmann::json::parse(req.body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("messages") || doc["messages"].empty()) {
            res.status = 400;
            res.set_content("{\"error\":\"bad request\"}", "application/json");
            return;
        }
        const std::string prompt = doc["messages"].back().value("content", "");
        ProviderConfig unused;
        Completion c = backend_.complete(unused, prompt);
        nlohmann::json out{
            {"choices", nlohmann::json::array({{{"message",
                                                 {{"role", "assistant"}, {"content", c.text}}}}})},
            {"usage",
             {{"prompt_tokens", whitespace_token_count(prompt)},
              {"completion_tokens", whitespace_token_count(c.text)}}},
        };
        res.set_content(out.dump(), "application/json");
    }

    MockBackend backend_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<long> served_{0};
};

}  // namespace batchprompt
