#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logsieve {

inline constexpr std::string_view kWildcard = "<*>";

/// One log message after header stripping.
struct LogRecord {
    std::size_t line_id = 0;  // 1-based
    std::string content;
    std::map<std::string, std::string> header;
};

/**
 * A single template position: either a literal constant (non-empty, no whitespace,
 * never the literal "<*>") or the wildcard.
 */
class TemplateToken {
public:
    static TemplateToken wildcard() { return TemplateToken{}; }
    static TemplateToken constant(std::string text);

    [[nodiscard]] bool is_wildcard() const { return wildcard_; }
    [[nodiscard]] const std::string& text() const { return text_; }

    /// Constant text, or "<*>" for the wildcard.
    [[nodiscard]] std::string_view spelling() const { return wildcard_ ? kWildcard : std::string_view{text_}; }

    friend bool operator==(const TemplateToken&, const TemplateToken&) = default;

private:
    TemplateToken() = default;
    bool wildcard_ = true;
    std::string text_;
};

class Template {
public:
    Template() = default;
    explicit Template(std::vector<TemplateToken> tokens) : tokens_(std::move(tokens)) {}

    [[nodiscard]] const std::vector<TemplateToken>& tokens() const { return tokens_; }
    [[nodiscard]] std::size_t size() const { return tokens_.size(); }
    [[nodiscard]] bool empty() const { return tokens_.empty(); }
    [[nodiscard]] std::size_t wildcard_count() const;
    [[nodiscard]] std::size_t constant_count() const { return size() - wildcard_count(); }

    /// Token spellings, with wildcards as the literal "<*>" (the view used for template similarity).
    [[nodiscard]] std::vector<std::string> spellings() const;

    friend bool operator==(const Template&, const Template&) = default;

private:
    std::vector<TemplateToken> tokens_;
};

struct VariableBinding {
    std::size_t wildcard_index = 0;
    std::string value;

    friend bool operator==(const VariableBinding&, const VariableBinding&) = default;
};

/// Splits on whitespace runs; never yields empty tokens.
std::vector<std::string> tokenize_coarse(std::string_view text);

/// Splits on whitespace and on every non-alphanumeric byte; delimiters are dropped.
std::vector<std::string> tokenize_fine(std::string_view text);

Template parse_template_string(std::string_view text);
std::string render_template(const Template& tmpl);

/// Anchored ECMAScript pattern: escaped constants joined by `\s+`, wildcards as `(.*?)`.
std::string template_to_regex(const Template& tmpl);

/// Character-level match. Returns the wildcard captures in order, or nullopt when the
/// template does not fully match `content`.
std::optional<std::vector<VariableBinding>> extract_variables(std::string_view content, const Template& tmpl);

std::string trim(std::string_view text);
bool contains_digit(std::string_view text);

}  // namespace logsieve
