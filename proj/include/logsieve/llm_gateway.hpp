#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "logsieve/candidate_store.hpp"
#include "logsieve/core.hpp"

namespace logsieve {

enum class PromptKind { Parse, MatchCorrection, AbstractionCorrection };

std::string_view to_string(PromptKind kind);

/// Instruction + demonstrations + query. `extra` carries correction context in insertion order.
struct Prompt {
    PromptKind kind = PromptKind::Parse;
    std::string instruction;
    std::vector<std::pair<std::string, std::string>> demonstrations;  // (content, rendered template)
    std::string query;
    std::vector<std::pair<std::string, std::string>> extra;

    /// The user-turn text sent to the model; the instruction travels as the system turn.
    [[nodiscard]] std::string user_message() const;
};

struct CompletionSettings {
    double temperature = 0.0;
    std::int64_t seed = 0;
    std::string model = "gpt-3.5-turbo-0125";
    std::size_t max_output_tokens = 256;
};

/// Version tag of the instruction and framing text below; bump when any wording changes.
inline constexpr std::string_view kPromptAssetsVersion = "v1";

Prompt build_parse_prompt(std::string_view query_content, const std::vector<Candidate>& demonstrations);
Prompt build_match_correction_prompt(std::string_view content, const Template& failed);
Prompt build_abstraction_correction_prompt(std::string_view content, const Template& tmpl,
                                           const std::vector<std::string>& flagged);

/// Template from free-form model output: the last non-empty backtick span, else the last
/// non-empty line, with surrounding quotes removed. Throws EmptyExtraction.
Template extract_template(std::string_view raw_text);

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string complete(const Prompt& prompt, const CompletionSettings& settings) = 0;
};

/**
 * Deterministic backend for tests and offline runs. Resolution order for each request:
 * a scripted response queued for (kind, query), then one queued for (any kind, query),
 * then the fixture template for the query content, else MockMissingFixture.
 */
class MockBackend : public LlmBackend {
public:
    struct Call {
        Prompt prompt;
        CompletionSettings settings;
    };

    void add_fixture(std::string content, std::string rendered_template);
    /// Queue a response for (kind, query). `kind == nullopt` matches any prompt kind.
    void script(std::optional<PromptKind> kind, std::string query, std::string response);

    /// Delimiter-separated file with Content and EventTemplate columns.
    void load_fixtures(const std::filesystem::path& path);
    /// One response per line: "<kind>\t<query>\t<response>", kind in {parse, match, abstract, *};
    /// "\n", "\t" and "\\" are escapes inside query and response.
    void load_script(const std::filesystem::path& path);

    std::string complete(const Prompt& prompt, const CompletionSettings& settings) override;

    [[nodiscard]] const std::vector<Call>& calls() const { return calls_; }
    [[nodiscard]] std::size_t fixture_count() const { return fixtures_.size(); }

private:
    using ScriptKey = std::pair<int, std::string>;  // kind index, -1 for any
    std::unordered_map<std::string, std::string> fixtures_;
    std::map<ScriptKey, std::deque<std::string>> scripts_;
    std::vector<Call> calls_;
};

struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "OPENAI_API_KEY";
    std::size_t max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::seconds timeout{60};
};

/// Chat-completion request body for one prompt (system = instruction, user = user_message()).
std::string build_chat_request(const Prompt& prompt, const CompletionSettings& settings);

/// Chat-completion client: POST {base_url}/chat/completions. Transport failures, 429 and 5xx
/// are retried with doubling backoff; other failures raise BackendUnavailable immediately.
class HttpBackend : public LlmBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ~HttpBackend() override;

    std::string complete(const Prompt& prompt, const CompletionSettings& settings) override;

    [[nodiscard]] const HttpBackendConfig& config() const { return config_; }

private:
    HttpBackendConfig config_;
    std::string origin_;
    std::string path_prefix_;
};

}  // namespace logsieve
