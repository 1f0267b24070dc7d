#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "batchprompt/errors.hpp"
#include "batchprompt/render.hpp"
#include "batchprompt/strings.hpp"

namespace batchprompt {

struct ProviderConfig {
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    std::string model_name = "gpt-3.5-turbo";
    double temperature = 0.0;
    std::string api_key_source = "OPENAI_API_KEY";  // environment variable name, never the key
    int max_in_flight = 4;
    std::chrono::milliseconds timeout{30000};
    int retry_limit = 3;
    std::chrono::milliseconds backoff_base{200};    // doubled per attempt
};

inline void validate_provider_config(const ProviderConfig& cfg) {
    if (cfg.temperature < 0.0 || cfg.temperature > 2.0)
        throw ConfigError("temperature must be in [0, 2]");
    if (cfg.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (cfg.retry_limit < 0) throw ConfigError("retry_limit must be >= 0");
}

enum class TokenSource { ProviderReported, Estimated, Mixed };

inline std::string to_string(TokenSource s) {
    switch (s) {
        case TokenSource::ProviderReported: return "provider-reported";
        case TokenSource::Estimated: return "estimated";
        case TokenSource::Mixed: return "mixed";
    }
    return "estimated";
}

/// One request/response round trip, including every retry attempt's cost.
struct Exchange {
    int batch_id = 0;
    std::string request_text;
    std::string response_text;
    double wall_time_s = 0.0;                // total across attempts
    std::vector<double> attempt_times_s;     // per-attempt round-trip times
    long prompt_tokens = 0;
    long completion_tokens = 0;
    TokenSource token_source = TokenSource::Estimated;
    int attempt = 1;                         // attempts used; 1 means first try succeeded
};

/// Raw completion from a backend. Token counts are present only when the
/// provider reported a usage record. A backend that simulates latency reports
/// it here so runs stay deterministic.
struct Completion {
    std::string text;
    std::optional<long> prompt_tokens;
    std::optional<long> completion_tokens;
    std::optional<double> simulated_wall_s;
};

class Backend {
  public:
    virtual ~Backend() = default;
    virtual Completion complete(const ProviderConfig& cfg, const std::string& prompt) = 0;
};

using Tokenizer = std::function<long(std::string_view)>;

inline Tokenizer whitespace_tokenizer() {
    return [](std::string_view s) { return whitespace_token_count(s); };
}

/// One chat completion with retry/backoff. Throws TransportError only after
/// retry_limit retries are exhausted. Failed attempts still pay their prompt
/// tokens; wall time covers the whole dispatch including backoff.
inline Exchange dispatch(const ProviderConfig& cfg, const RenderedPrompt& prompt, Backend& backend,
                         const Tokenizer& estimate = whitespace_tokenizer()) {
    Exchange ex;
    ex.batch_id = prompt.batch_id;
    ex.request_text = prompt.text;

    bool any_estimated = false;
    bool any_reported = false;
    bool all_simulated = true;
    const auto dispatch_start = std::chrono::steady_clock::now();

    for (int attempt = 1;; ++attempt) {
        ex.attempt = attempt;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            Completion c = backend.complete(cfg, prompt.text);
            double wall = c.simulated_wall_s
                              ? *c.simulated_wall_s
                              : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            all_simulated = all_simulated && c.simulated_wall_s.has_value();
            ex.attempt_times_s.push_back(wall);
            ex.response_text = c.text;
            if (c.prompt_tokens) {
                ex.prompt_tokens += *c.prompt_tokens;
                any_reported = true;
            } else {
                ex.prompt_tokens += estimate(prompt.text);
                any_estimated = true;
            }
            if (c.completion_tokens) {
                ex.completion_tokens += *c.completion_tokens;
                any_reported = true;
            } else {
                ex.completion_tokens += estimate(c.text);
                any_estimated = true;
            }
            break;
        } catch (const TransportError&) {
            double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            ex.attempt_times_s.push_back(wall);
            ex.prompt_tokens += estimate(prompt.text);  // a failed attempt still transmitted the prompt
            any_estimated = true;
            if (attempt > cfg.retry_limit) throw;
            auto delay = cfg.backoff_base * (1LL << (attempt - 1));
            if (delay > std::chrono::milliseconds(10000)) delay = std::chrono::milliseconds(10000);
            std::this_thread::sleep_for(delay);
        }
    }

    if (all_simulated) {
        double sum = 0;
        for (double t : ex.attempt_times_s) sum += t;
        ex.wall_time_s = sum;
    } else {
        ex.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - dispatch_start).count();
    }
    ex.token_source = any_reported ? (any_estimated ? TokenSource::Mixed : TokenSource::ProviderReported)
                                   : TokenSource::Estimated;
    return ex;
}

/// Dispatches a prompt list with at most max_in_flight requests outstanding.
/// Results come back slotted by input position, so downstream assembly is
/// ordered by batch_id no matter how completions interleave.
inline std::vector<Exchange> dispatch_all(const ProviderConfig& cfg,
                                          const std::vector<RenderedPrompt>& prompts, Backend& backend,
                                          const Tokenizer& estimate = whitespace_tokenizer()) {
    std::vector<Exchange> results(prompts.size());
    std::vector<std::exception_ptr> failures(prompts.size());
    std::size_t next = 0;
    std::mutex take;

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.max_in_flight), prompts.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(take);
                    if (next >= prompts.size()) return;
                    i = next++;
                }
                try {
                    results[i] = dispatch(cfg, prompts[i], backend, estimate);
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    return results;
}

}  // namespace batchprompt
