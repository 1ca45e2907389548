#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "logsieve/candidate_store.hpp"
#include "logsieve/core.hpp"
#include "logsieve/corrector.hpp"
#include "logsieve/llm_gateway.hpp"
#include "logsieve/parse_tree.hpp"

namespace logsieve {

enum class ResultSource { Cache, Llm, LlmCorrected, Fallback };

std::string_view to_string(ResultSource source);

struct ParseResult {
    LogRecord record;
    Template tmpl;
    std::vector<VariableBinding> bindings;
    ResultSource source = ResultSource::Cache;
    std::size_t llm_calls = 0;
};

struct RunStats {
    std::size_t records_total = 0;
    std::size_t cache_hits = 0;
    std::size_t llm_parse_calls = 0;
    std::size_t correction_calls = 0;
    std::size_t fallbacks = 0;
    std::size_t backend_failures = 0;
    std::size_t tree_leaves_final = 0;
    std::size_t candidates_final = 0;
    double wall_time_seconds = 0.0;
    std::vector<std::size_t> fallback_line_ids;
};

struct PipelineConfig {
    std::size_t demonstrations = 3;
    CompletionSettings parse_settings{};  // temperature 0, seed 0
    CorrectorConfig corrector{};
};

/**
 * Cache lookup, then demonstration selection, LLM parse and correction on a miss, followed
 * by candidate-set and tree updates. Records must be fed in stream order; each miss changes
 * the state later records see.
 */
class Pipeline {
public:
    Pipeline(ParseTree tree, CandidateStore candidates, LlmBackend& backend, PipelineConfig config = {});

    ParseResult process_record(const LogRecord& record);

    [[nodiscard]] const ParseTree& tree() const { return tree_; }
    [[nodiscard]] const CandidateStore& candidates() const { return candidates_; }
    /// Running totals; tree_leaves_final, candidates_final and wall time are filled by run_stream.
    [[nodiscard]] const RunStats& stats() const { return stats_; }

private:
    ParseResult miss_path(const LogRecord& record, std::vector<Template> relevant);

    ParseTree tree_;
    CandidateStore candidates_;
    LlmBackend& backend_;
    PipelineConfig config_;
    RunStats stats_;
};

/// Processes `records` in order. `sink`, when set, receives each result as it is produced
/// instead of it being collected into the returned vector.
std::pair<std::vector<ParseResult>, RunStats> run_stream(Pipeline& pipeline, const std::vector<LogRecord>& records,
                                                        const std::function<void(const ParseResult&)>& sink = {});

}  // namespace logsieve
