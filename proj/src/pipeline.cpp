#include "logsieve/pipeline.hpp"

#include <chrono>

namespace logsieve {

std::string_view to_string(ResultSource source) {
    switch (source) {
    case ResultSource::Cache: return "cache";
    case ResultSource::Llm: return "llm";
    case ResultSource::LlmCorrected: return "llm-corrected";
    case ResultSource::Fallback: return "fallback";
    }
    return "unknown";
}

Pipeline::Pipeline(ParseTree tree, CandidateStore candidates, LlmBackend& backend, PipelineConfig config)
    : tree_(std::move(tree)), candidates_(std::move(candidates)), backend_(backend), config_(std::move(config)) {
    config_.corrector.validate();
}

ParseResult Pipeline::process_record(const LogRecord& record) {
    ++stats_.records_total;
    const auto tokens = tokenize_coarse(record.content);
    auto outcome = tree_.match(tokens);
    if (auto* hit = std::get_if<TreeHit>(&outcome)) {
        ++stats_.cache_hits;
        tree_.record_hit(hit->tmpl);
        return ParseResult{record, std::move(hit->tmpl), std::move(hit->bindings), ResultSource::Cache, 0};
    }
    return miss_path(record, std::move(std::get<TreeMiss>(outcome).relevant));
}

ParseResult Pipeline::miss_path(const LogRecord& record, std::vector<Template> relevant) {
    ParseResult result;
    result.record = record;

    CorrectionOutcome outcome;
    try {
        const auto demos = candidates_.select_demonstrations(record.content, config_.demonstrations);
        const auto prompt = build_parse_prompt(record.content, demos);
        ++stats_.llm_parse_calls;
        ++result.llm_calls;
        const std::string raw = backend_.complete(prompt, config_.parse_settings);
        Template initial;
        try {
            initial = extract_template(raw);
        } catch (const EmptyExtraction&) {
            // An empty template never verifies, so the corrector takes over.
        }
        outcome = correct(record.content, initial, backend_, config_.corrector);
    } catch (const CorrectionAborted& e) {
        ++stats_.backend_failures;
        outcome.iterations_used = e.iterations_used();
        outcome.tmpl = fallback_template(record.content);
        outcome.fallback_used = true;
    } catch (const Error&) {
        ++stats_.backend_failures;
        outcome.tmpl = fallback_template(record.content);
        outcome.fallback_used = true;
    }

    result.llm_calls += outcome.iterations_used;
    stats_.correction_calls += outcome.iterations_used;

    if (outcome.fallback_used) {
        result.source = ResultSource::Fallback;
        ++stats_.fallbacks;
        stats_.fallback_line_ids.push_back(record.line_id);
    } else {
        result.source = outcome.iterations_used > 0 ? ResultSource::LlmCorrected : ResultSource::Llm;
    }

    result.tmpl = std::move(outcome.tmpl);
    candidates_.add(record.content, result.tmpl);
    tree_.absorb(result.tmpl, relevant);
    result.bindings = *extract_variables(record.content, result.tmpl);
    return result;
}

std::pair<std::vector<ParseResult>, RunStats> run_stream(Pipeline& pipeline, const std::vector<LogRecord>& records,
                                                        const std::function<void(const ParseResult&)>& sink) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<ParseResult> results;
    if (!sink) results.reserve(records.size());
    for (const auto& record : records) {
        auto result = pipeline.process_record(record);
        if (sink)
            sink(result);
        else
            results.push_back(std::move(result));
    }
    RunStats stats = pipeline.stats();
    stats.tree_leaves_final = pipeline.tree().leaf_count();
    stats.candidates_final = pipeline.candidates().size();
    stats.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(results), stats};
}

}  // namespace logsieve
