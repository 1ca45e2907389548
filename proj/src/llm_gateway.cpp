#include "logsieve/llm_gateway.hpp"

#include <fstream>

#include "logsieve/csv.hpp"
#include "logsieve/errors.hpp"

namespace logsieve {

namespace {

constexpr std::string_view kParseInstruction =
    "You are a log parser. Given a log message, output its log template: replace every dynamic "
    "variable (such as identifiers, numbers, paths, addresses, user names and durations) with the "
    "wildcard <*> and keep every constant token exactly as written. A token that mixes a variable "
    "with other characters is abstracted as a whole. Do not abstract exception messages or status "
    "descriptions. Reply with the template only, enclosed in backticks.";

constexpr std::string_view kCorrectionInstruction =
    "You are a log parser reviewing a log template that was generated for a log message. A correct "
    "template keeps every constant token of the message exactly as written and replaces only dynamic "
    "variables with the wildcard <*>. Reply with the corrected template only, enclosed in backticks.";

constexpr std::string_view kMismatchNotice =
    "The generated template does not match the log message. Replacing each <*> with the text it "
    "stands for must reproduce the log message exactly, so every constant token must appear in the "
    "template exactly as in the message. Rewrite the template so that it matches the log message.";

constexpr std::string_view kAbstractionNotice =
    "The generated template replaced the following phrases with <*>, but they may not be variables. "
    "They appear to describe the system state (for example an exception or a failure) and may need "
    "to stay in the template as constant text:";

constexpr std::string_view kAbstractionRequest =
    "Reconsider each phrase and keep it as constant text unless it is a runtime value.";

Prompt base_prompt(PromptKind kind, std::string_view instruction, std::string_view query) {
    Prompt p;
    p.kind = kind;
    p.instruction = std::string{instruction};
    p.query = std::string{query};
    return p;
}

std::string unescape_script_field(std::string_view field) {
    std::string out;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field[i] == '\\' && i + 1 < field.size()) {
            const char n = field[++i];
            out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
        } else {
            out.push_back(field[i]);
        }
    }
    return out;
}

std::string strip_quotes(std::string text) {
    while (text.size() >= 2) {
        const char f = text.front(), b = text.back();
        if ((f == '"' && b == '"') || (f == '\'' && b == '\'')) {
            text = trim(std::string_view{text}.substr(1, text.size() - 2));
        } else {
            break;
        }
    }
    return text;
}

}  // namespace

std::string_view to_string(PromptKind kind) {
    switch (kind) {
    case PromptKind::Parse: return "parse";
    case PromptKind::MatchCorrection: return "match";
    case PromptKind::AbstractionCorrection: return "abstract";
    }
    return "unknown";
}

std::string Prompt::user_message() const {
    std::string out;
    for (const auto& [content, tmpl] : demonstrations) {
        out += "Log message: `" + content + "`\n";
        out += "Log template: `" + tmpl + "`\n\n";
    }
    out += "Log message: `" + query + "`\n";
    switch (kind) {
    case PromptKind::Parse:
        out += "Log template:";
        break;
    case PromptKind::MatchCorrection:
        for (const auto& [key, value] : extra)
            if (key == "template") out += "Generated template: `" + value + "`\n";
        out += kMismatchNotice;
        out += "\nCorrected template:";
        break;
    case PromptKind::AbstractionCorrection:
        for (const auto& [key, value] : extra)
            if (key == "template") out += "Generated template: `" + value + "`\n";
        out += kAbstractionNotice;
        out += "\n";
        for (const auto& [key, value] : extra)
            if (key == "flagged") out += "- \"" + value + "\"\n";
        out += kAbstractionRequest;
        out += "\nCorrected template:";
        break;
    }
    return out;
}

Prompt build_parse_prompt(std::string_view query_content, const std::vector<Candidate>& demonstrations) {
    Prompt p = base_prompt(PromptKind::Parse, kParseInstruction, query_content);
    for (const auto& d : demonstrations) p.demonstrations.emplace_back(d.content, render_template(d.tmpl));
    return p;
}

Prompt build_match_correction_prompt(std::string_view content, const Template& failed) {
    Prompt p = base_prompt(PromptKind::MatchCorrection, kCorrectionInstruction, content);
    p.extra.emplace_back("template", render_template(failed));
    return p;
}

Prompt build_abstraction_correction_prompt(std::string_view content, const Template& tmpl,
                                           const std::vector<std::string>& flagged) {
    if (flagged.empty()) throw std::invalid_argument("abstraction correction needs at least one flagged phrase");
    Prompt p = base_prompt(PromptKind::AbstractionCorrection, kCorrectionInstruction, content);
    p.extra.emplace_back("template", render_template(tmpl));
    for (const auto& f : flagged) p.extra.emplace_back("flagged", f);
    return p;
}

Template extract_template(std::string_view raw_text) {
    // Backtick runs (`, ``, ```) act as single delimiters; spans sit between alternate delimiters.
    std::vector<std::pair<std::size_t, std::size_t>> delims;
    for (std::size_t i = 0; i < raw_text.size();) {
        if (raw_text[i] != '`') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < raw_text.size() && raw_text[j] == '`') ++j;
        delims.emplace_back(i, j);
        i = j;
    }

    std::string picked;
    for (std::size_t d = 0; d + 1 < delims.size(); d += 2) {
        std::string span = trim(raw_text.substr(delims[d].second, delims[d + 1].first - delims[d].second));
        if (!span.empty()) picked = std::move(span);
    }
    if (picked.empty()) {
        std::size_t end = raw_text.size();
        while (end > 0) {
            const std::size_t nl = raw_text.rfind('\n', end - 1);
            const std::size_t begin = nl == std::string_view::npos ? 0 : nl + 1;
            std::string line = trim(raw_text.substr(begin, end - begin));
            std::erase(line, '`');
            line = trim(line);
            if (!line.empty()) {
                picked = std::move(line);
                break;
            }
            if (nl == std::string_view::npos) break;
            end = nl;
        }
        constexpr std::string_view kLabel = "Log template:";
        if (std::string_view{picked}.starts_with(kLabel)) picked = trim(std::string_view{picked}.substr(kLabel.size()));
    }
    picked = strip_quotes(std::move(picked));
    if (trim(picked).empty()) throw EmptyExtraction("model output contains no template");
    return parse_template_string(picked);
}

void MockBackend::add_fixture(std::string content, std::string rendered_template) {
    fixtures_.insert_or_assign(std::move(content), std::move(rendered_template));
}

void MockBackend::script(std::optional<PromptKind> kind, std::string query, std::string response) {
    scripts_[{kind ? static_cast<int>(*kind) : -1, std::move(query)}].push_back(std::move(response));
}

void MockBackend::load_fixtures(const std::filesystem::path& path) {
    const auto table = csv::read_file(path);
    const auto content = table.require("Content");
    const auto tmpl = table.require("EventTemplate");
    for (const auto& row : table.rows) add_fixture(row[content], row[tmpl]);
}

void MockBackend::load_script(const std::filesystem::path& path) {
    std::ifstream in{path};
    if (!in) throw IoError("cannot open script " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected <kind>\\t<query>\\t<response>");
        const std::string kind = line.substr(0, t1);
        std::optional<PromptKind> k;
        if (kind == "parse") k = PromptKind::Parse;
        else if (kind == "match") k = PromptKind::MatchCorrection;
        else if (kind == "abstract") k = PromptKind::AbstractionCorrection;
        else if (kind != "*") throw IoError(path.string() + ":" + std::to_string(lineno) + ": unknown prompt kind '" + kind + "'");
        script(k, unescape_script_field(line.substr(t1 + 1, t2 - t1 - 1)), unescape_script_field(line.substr(t2 + 1)));
    }
}

std::string MockBackend::complete(const Prompt& prompt, const CompletionSettings& settings) {
    calls_.push_back({prompt, settings});
    for (int kind : {static_cast<int>(prompt.kind), -1}) {
        auto it = scripts_.find({kind, prompt.query});
        if (it != scripts_.end() && !it->second.empty()) {
            std::string response = std::move(it->second.front());
            it->second.pop_front();
            return response;
        }
    }
    if (auto it = fixtures_.find(prompt.query); it != fixtures_.end()) return "`" + it->second + "`";
    throw MockMissingFixture("mock backend has no fixture for: " + prompt.query);
}

}  // namespace logsieve
