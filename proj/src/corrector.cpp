#include "logsieve/corrector.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <stdexcept>

namespace logsieve {

namespace {

std::string lower(std::string_view s) {
    std::string out{s};
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool has_keyword(std::string_view text, const CorrectorConfig& config) {
    const std::string haystack = config.keyword_case_insensitive ? lower(text) : std::string{text};
    for (const auto& kw : config.keywords) {
        if (kw.empty()) continue;
        const std::string needle = config.keyword_case_insensitive ? lower(kw) : kw;
        if (haystack.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

void CorrectorConfig::validate() const {
    if (max_iterations == 0) throw std::invalid_argument("max_iterations must be positive");
    if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
    if (alpha * static_cast<double>(max_iterations) > 2.0)
        throw std::invalid_argument("alpha * max_iterations must not exceed 2");
}

std::vector<std::string> load_keywords(const std::filesystem::path& path) {
    std::ifstream in{path};
    if (!in) throw IoError("cannot open keyword file " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        out.push_back(line);
    }
    return out;
}

bool verify_match(std::string_view content, const Template& tmpl) { return extract_variables(content, tmpl).has_value(); }

std::vector<std::string> flag_wildcards(std::string_view content, const Template& tmpl, const CorrectorConfig& config) {
    auto bindings = extract_variables(content, tmpl);
    if (!bindings) throw std::logic_error("flag_wildcards requires a matching template");
    std::vector<std::string> flagged;
    const std::string* preceding = nullptr;  // nearest constant to the left
    std::size_t w = 0;
    for (const auto& tok : tmpl.tokens()) {
        if (!tok.is_wildcard()) {
            preceding = &tok.text();
            continue;
        }
        const std::string& capture = (*bindings)[w++].value;
        if (has_keyword(capture, config) || (preceding != nullptr && has_keyword(*preceding, config)))
            flagged.push_back(capture);
    }
    return flagged;
}

Template fallback_template(std::string_view content) {
    std::vector<TemplateToken> tokens;
    for (auto& tok : tokenize_coarse(content)) {
        if (contains_digit(tok) || tok == kWildcard)
            tokens.push_back(TemplateToken::wildcard());
        else
            tokens.push_back(TemplateToken::constant(std::move(tok)));
    }
    return Template{std::move(tokens)};
}

CorrectionOutcome correct(std::string_view content, const Template& initial, LlmBackend& backend,
                          const CorrectorConfig& config) {
    CorrectionOutcome out;
    Template current = initial;
    std::set<std::vector<std::string>> attempted_flags;

    auto query = [&](const Prompt& prompt, std::size_t iteration) {
        CompletionSettings settings = config.settings;
        settings.temperature = static_cast<double>(iteration) * config.alpha;
        ++out.iterations_used;
        try {
            return backend.complete(prompt, settings);
        } catch (const Error& e) {
            throw CorrectionAborted(e.what(), current, out.iterations_used);
        }
    };

    for (std::size_t i = 1; i <= config.max_iterations; ++i) {
        if (!verify_match(content, current)) {
            const std::string raw = query(build_match_correction_prompt(content, current), i);
            try {
                current = extract_template(raw);
            } catch (const EmptyExtraction&) {
            }
            continue;
        }
        auto flags = flag_wildcards(content, current, config);
        if (!flags.empty() && !attempted_flags.contains(flags)) {
            attempted_flags.insert(flags);
            const std::string raw = query(build_abstraction_correction_prompt(content, current, flags), i);
            try {
                Template revised = extract_template(raw);
                if (verify_match(content, revised)) current = std::move(revised);
            } catch (const EmptyExtraction&) {
            }
            continue;
        }
        break;
    }

    if (verify_match(content, current)) {
        out.tmpl = std::move(current);
        out.accepted = true;
        out.flags_remaining = flag_wildcards(content, out.tmpl, config);
    } else {
        out.tmpl = fallback_template(content);
        out.fallback_used = true;
        out.flags_remaining = flag_wildcards(content, out.tmpl, config);
    }
    return out;
}

}  // namespace logsieve
