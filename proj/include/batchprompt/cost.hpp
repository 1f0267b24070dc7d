#pragma once

#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "batchprompt/errors.hpp"
#include "batchprompt/provider.hpp"

namespace batchprompt {

/// What counts toward c_token. Prompt-only is the default: batching shrinks
/// the input side, and the reference tables never state their scope.
enum class TokenScope { PromptOnly, PromptPlusCompletion };

inline std::string to_string(TokenScope s) {
    return s == TokenScope::PromptOnly ? "prompt" : "prompt+completion";
}

struct ExchangeSummary {
    int batch_id = 0;
    double wall_time_s = 0.0;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    int attempt = 1;
};

/// Per-instance efficiency: c_time = t / N and c_token = #tokens / N, where t
/// sums every exchange's wall time (retries included) over the whole run.
struct CostReport {
    long n_instances = 0;
    double total_time_s = 0.0;
    long total_prompt_tokens = 0;
    long total_completion_tokens = 0;
    double c_time = 0.0;
    double c_token = 0.0;
    TokenScope scope = TokenScope::PromptOnly;
    TokenSource token_source = TokenSource::Estimated;
    std::vector<ExchangeSummary> per_batch;
};

inline CostReport accumulate(const std::vector<Exchange>& exchanges, long n_instances,
                             TokenScope scope = TokenScope::PromptOnly) {
    if (n_instances <= 0) throw ZeroInstances();
    CostReport r;
    r.n_instances = n_instances;
    r.scope = scope;
    bool any_reported = false, any_estimated = false;
    for (const auto& ex : exchanges) {
        r.total_time_s += ex.wall_time_s;
        r.total_prompt_tokens += ex.prompt_tokens;
        r.total_completion_tokens += ex.completion_tokens;
        r.per_batch.push_back({ex.batch_id, ex.wall_time_s, ex.prompt_tokens, ex.completion_tokens, ex.attempt});
        if (ex.token_source == TokenSource::ProviderReported) any_reported = true;
        else if (ex.token_source == TokenSource::Estimated) any_estimated = true;
        else any_reported = any_estimated = true;
    }
    r.c_time = r.total_time_s / static_cast<double>(n_instances);
    long counted = r.total_prompt_tokens +
                   (scope == TokenScope::PromptPlusCompletion ? r.total_completion_tokens : 0);
    r.c_token = static_cast<double>(counted) / static_cast<double>(n_instances);
    r.token_source = any_reported ? (any_estimated ? TokenSource::Mixed : TokenSource::ProviderReported)
                                  : TokenSource::Estimated;
    return r;
}

/// Side-by-side averages across batch-size settings: one row per dataset
/// label, a time column and a token column per n.
struct CostComparison {
    std::string dataset;
    std::vector<long> settings;   // ascending n
    std::vector<double> c_time;
    std::vector<double> c_token;
};

inline CostComparison compare_settings(const std::map<long, CostReport>& reports,
                                       const std::string& dataset_label = "dataset") {
    CostComparison out;
    out.dataset = dataset_label;
    for (const auto& [n, r] : reports) {
        out.settings.push_back(n);
        out.c_time.push_back(r.c_time);
        out.c_token.push_back(r.c_token);
    }
    return out;
}

inline std::string to_text(const CostComparison& cmp) {
    std::ostringstream os;
    os << std::left << std::setw(16) << "" << "| ";
    for (auto n : cmp.settings) os << std::setw(11) << ("time n=" + std::to_string(n));
    os << "| ";
    for (auto n : cmp.settings) os << std::setw(11) << ("token n=" + std::to_string(n));
    os << "\n" << std::setw(16) << cmp.dataset << "| " << std::fixed << std::setprecision(4);
    for (auto t : cmp.c_time) os << std::setw(11) << t;
    os << "| " << std::setprecision(2);
    for (auto t : cmp.c_token) os << std::setw(11) << t;
    os << "\n";
    return os.str();
}

}  // namespace batchprompt
