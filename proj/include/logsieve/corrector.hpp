#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "logsieve/core.hpp"
#include "logsieve/errors.hpp"
#include "logsieve/llm_gateway.hpp"

namespace logsieve {

struct CorrectorConfig {
    double alpha = 0.25;  // temperature of the i-th correction query is i * alpha
    std::size_t max_iterations = 3;
    std::vector<std::string> keywords{"Exception", "failed", "interrupted"};
    bool keyword_case_insensitive = true;
    CompletionSettings settings{};  // model, seed and output budget for correction queries

    /// Throws std::invalid_argument when alpha * max_iterations exceeds 2 or max_iterations is 0.
    void validate() const;
};

/// One keyword per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> load_keywords(const std::filesystem::path& path);

struct CorrectionOutcome {
    Template tmpl;
    std::size_t iterations_used = 0;  // gateway calls issued
    bool accepted = false;            // passed match verification without the fallback
    bool fallback_used = false;
    std::vector<std::string> flags_remaining;
};

/// Raised when the backend fails mid-correction; carries the best template seen so far.
class CorrectionAborted : public Error {
public:
    CorrectionAborted(const std::string& what, Template best, std::size_t iterations_used)
        : Error(what), best_(std::move(best)), iterations_used_(iterations_used) {}

    [[nodiscard]] const Template& best() const { return best_; }
    [[nodiscard]] std::size_t iterations_used() const { return iterations_used_; }

private:
    Template best_;
    std::size_t iterations_used_;
};

bool verify_match(std::string_view content, const Template& tmpl);

/// Wildcard captures that contain a keyword or whose nearest preceding constant does.
/// Precondition: verify_match(content, tmpl).
std::vector<std::string> flag_wildcards(std::string_view content, const Template& tmpl, const CorrectorConfig& config);

/// Coarse tokens of `content` with every digit-bearing token replaced by the wildcard.
Template fallback_template(std::string_view content);

CorrectionOutcome correct(std::string_view content, const Template& initial, LlmBackend& backend,
                          const CorrectorConfig& config);

}  // namespace logsieve
