#include "logsieve/core.hpp"

#include <cctype>
#include <stdexcept>
#include <unordered_set>

namespace logsieve {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Elements of the compiled pattern `^c1\s+(.*?)\s+c2$`.
enum class ElemKind { Literal, Spaces, Capture };

struct Elem {
    ElemKind kind;
    std::string_view text;  // Literal only
};

std::vector<Elem> compile(const Template& tmpl) {
    std::vector<Elem> elems;
    elems.reserve(tmpl.size() * 2);
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (i > 0) elems.push_back({ElemKind::Spaces, {}});
        const auto& tok = tmpl.tokens()[i];
        if (tok.is_wildcard())
            elems.push_back({ElemKind::Capture, {}});
        else
            elems.push_back({ElemKind::Literal, tok.text()});
    }
    return elems;
}

// Backtracking matcher with the same priority order as an ECMAScript engine running the
// pattern from template_to_regex: `\s+` is greedy, captures are lazy, `.` excludes line
// terminators. Failed (element, position) states are memoized; without backreferences a
// state's outcome does not depend on the path that reached it.
class CharMatcher {
public:
    CharMatcher(std::string_view text, const std::vector<Elem>& elems) : text_(text), elems_(elems) {}

    bool run(std::vector<std::pair<std::size_t, std::size_t>>& spans) {
        spans.clear();
        return step(0, 0, spans);
    }

private:
    static bool is_line_terminator(char c) { return c == '\n' || c == '\r'; }

    std::size_t key(std::size_t e, std::size_t pos) const { return e * (text_.size() + 1) + pos; }

    bool step(std::size_t e, std::size_t pos, std::vector<std::pair<std::size_t, std::size_t>>& spans) {
        if (e == elems_.size()) return pos == text_.size();
        if (failed_.count(key(e, pos))) return false;
        const Elem& el = elems_[e];
        bool ok = false;
        switch (el.kind) {
        case ElemKind::Literal:
            ok = text_.substr(pos, el.text.size()) == el.text && step(e + 1, pos + el.text.size(), spans);
            break;
        case ElemKind::Spaces: {
            std::size_t end = pos;
            while (end < text_.size() && is_space(text_[end])) ++end;
            for (std::size_t stop = end; stop > pos && !ok; --stop) ok = step(e + 1, stop, spans);
            break;
        }
        case ElemKind::Capture: {
            spans.emplace_back(pos, pos);
            for (std::size_t end = pos;; ++end) {
                spans.back().second = end;
                if (step(e + 1, end, spans)) {
                    ok = true;
                    break;
                }
                if (end == text_.size() || is_line_terminator(text_[end])) break;
            }
            if (!ok) spans.pop_back();
            break;
        }
        }
        if (!ok) failed_.insert(key(e, pos));
        return ok;
    }

    std::string_view text_;
    const std::vector<Elem>& elems_;
    std::unordered_set<std::size_t> failed_;
};

}  // namespace

TemplateToken TemplateToken::constant(std::string text) {
    if (text.empty()) throw std::invalid_argument("template constant must be non-empty");
    if (text == kWildcard) throw std::invalid_argument("\"<*>\" is reserved for the wildcard");
    for (char c : text)
        if (is_space(c)) throw std::invalid_argument("template constant contains whitespace: " + text);
    TemplateToken tok;
    tok.wildcard_ = false;
    tok.text_ = std::move(text);
    return tok;
}

std::size_t Template::wildcard_count() const {
    std::size_t n = 0;
    for (const auto& t : tokens_) n += t.is_wildcard() ? 1 : 0;
    return n;
}

std::vector<std::string> Template::spellings() const {
    std::vector<std::string> out;
    out.reserve(tokens_.size());
    for (const auto& t : tokens_) out.emplace_back(t.spelling());
    return out;
}

std::vector<std::string> tokenize_coarse(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

std::vector<std::string> tokenize_fine(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_alnum(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && is_alnum(text[i])) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

Template parse_template_string(std::string_view text) {
    std::vector<TemplateToken> tokens;
    for (auto& tok : tokenize_coarse(text)) {
        if (tok == kWildcard)
            tokens.push_back(TemplateToken::wildcard());
        else
            tokens.push_back(TemplateToken::constant(std::move(tok)));
    }
    return Template{std::move(tokens)};
}

std::string render_template(const Template& tmpl) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out.append(tmpl.tokens()[i].spelling());
    }
    return out;
}

std::string template_to_regex(const Template& tmpl) {
    static constexpr std::string_view kMeta = R"(\^$.|?*+()[]{})";
    std::string out = "^";
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (i > 0) out += R"(\s+)";
        const auto& tok = tmpl.tokens()[i];
        if (tok.is_wildcard()) {
            out += "(.*?)";
            continue;
        }
        for (char c : tok.text()) {
            if (kMeta.find(c) != std::string_view::npos) out.push_back('\\');
            out.push_back(c);
        }
    }
    out += "$";
    return out;
}

std::optional<std::vector<VariableBinding>> extract_variables(std::string_view content, const Template& tmpl) {
    const auto elems = compile(tmpl);
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    CharMatcher matcher{content, elems};
    if (!matcher.run(spans)) return std::nullopt;
    std::vector<VariableBinding> out;
    out.reserve(spans.size());
    for (std::size_t i = 0; i < spans.size(); ++i)
        out.push_back({i, std::string{content.substr(spans[i].first, spans[i].second - spans[i].first)}});
    return out;
}

std::string trim(std::string_view text) {
    std::size_t b = 0, e = text.size();
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    return std::string{text.substr(b, e - b)};
}

bool contains_digit(std::string_view text) {
    for (char c : text)
        if (std::isdigit(static_cast<unsigned char>(c))) return true;
    return false;
}

}  // namespace logsieve
