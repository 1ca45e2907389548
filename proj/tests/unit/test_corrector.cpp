#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "logsieve/corrector.hpp"
#include "oracles.hpp"

using namespace logsieve;

namespace {

Template T(std::string_view s) { return parse_template_string(s); }

std::vector<double> temperatures(const MockBackend& mock) {
    std::vector<double> out;
    for (const auto& c : mock.calls()) out.push_back(c.settings.temperature);
    return out;
}

/// Backend that always fails, to exercise the abort path.
class DownBackend : public LlmBackend {
public:
    std::string complete(const Prompt&, const CompletionSettings&) override { throw BackendUnavailable("down"); }
};

}  // namespace

TEST_CASE("verify_match") {
    CHECK_FALSE(verify_match("Transfer 0x300sent to port 8", T("Transfer <*> sent to port <*>")));
    CHECK(verify_match("Transfer 0x300 sent to port 8", T("Transfer <*> sent to port <*>")));
    CHECK(verify_match("Writing block rdd_1_3 to disk", T("Writing block rdd_1_3 to disk")));
    CHECK_FALSE(verify_match("x", Template{}));
}

TEST_CASE("verify_match on random instantiations and perturbations") {
    oracle::Gen gen{41};
    int checked = 0;
    while (checked < 500) {
        const auto t = gen.tmpl(1, 8, 0.4, 6);
        if (t.constant_count() == 0) continue;
        std::vector<std::string> values;
        for (std::size_t w = 0; w < t.wildcard_count(); ++w) values.push_back(gen.value());
        const auto content = oracle::instantiate(t, values);
        REQUIRE(verify_match(content, t));

        // change one constant to a word no value or constant can produce
        std::vector<TemplateToken> toks = t.tokens();
        std::vector<std::size_t> constants;
        for (std::size_t i = 0; i < toks.size(); ++i)
            if (!toks[i].is_wildcard()) constants.push_back(i);
        const std::size_t victim = constants[gen.uniform(0, constants.size() - 1)];
        toks[victim] = TemplateToken::constant(toks[victim].text() + "Q");
        CHECK_FALSE(verify_match(content, Template{toks}));
        ++checked;
    }
}

TEST_CASE("flag_wildcards") {
    const CorrectorConfig cfg;
    // keyword in the preceding constant
    CHECK(flag_wildcards("java.io.IOException: Could not read from stream", T("java.io.IOException: <*>"), cfg) ==
          std::vector<std::string>{"Could not read from stream"});
    // keyword inside the capture
    CHECK(flag_wildcards("link eth0 connection failed abruptly", T("link <*> <*>"), cfg) ==
          std::vector<std::string>{"connection failed abruptly"});
    CHECK(flag_wildcards("a b", T("a b"), cfg).empty());
    CHECK(flag_wildcards("user root logged in", T("user <*> logged in"), cfg).empty());
    // nearest preceding constant only
    CHECK(flag_wildcards("Exception x at 12", T("Exception <*> at <*>"), cfg) == std::vector<std::string>{"x"});

    CorrectorConfig strict;
    strict.keyword_case_insensitive = false;
    CHECK(flag_wildcards("job FAILED now", T("job <*> now"), cfg) == std::vector<std::string>{"FAILED"});
    CHECK(flag_wildcards("job FAILED now", T("job <*> now"), strict).empty());

    CHECK_THROWS_AS(flag_wildcards("a c", T("a b"), cfg), std::logic_error);
}

TEST_CASE("fallback template") {
    CHECK(render_template(fallback_template("Writing block rdd_1_3 to disk")) == "Writing block <*> to disk");
    CHECK(render_template(fallback_template("a <*> b")) == "a <*> b");
    CHECK(render_template(fallback_template("no digits here")) == "no digits here");

    oracle::Gen gen{42};
    for (int i = 0; i < 300; ++i) {
        std::string content;
        for (const auto& w : gen.tokens(1, 8, 6)) content += (gen.chance(0.3) ? "  " : " ") + w + (gen.chance(0.3) ? gen.value(1) : "");
        content = trim(content);
        CHECK(verify_match(content, fallback_template(content)));
    }
}

TEST_CASE("config validation and keyword files") {
    CHECK_NOTHROW(CorrectorConfig{}.validate());
    CorrectorConfig c;
    c.max_iterations = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.max_iterations = 3;
    c.alpha = 0.7;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.alpha = -0.1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);

    const auto path = std::filesystem::temp_directory_path() / "logsieve_keywords.txt";
    std::ofstream{path} << "# diagnostic words\nException\n\n  timeout  \n";
    CHECK(load_keywords(path) == std::vector<std::string>{"Exception", "timeout"});
    CHECK_THROWS_AS(load_keywords("/nonexistent/keywords"), IoError);
}

TEST_CASE("a verifying template without flags is accepted without calls") {
    MockBackend mock;
    const auto out = correct("Writing block rdd_1_3 to disk", T("Writing block <*> to disk"), mock, {});
    CHECK(out.accepted);
    CHECK_FALSE(out.fallback_used);
    CHECK(out.iterations_used == 0);
    CHECK(render_template(out.tmpl) == "Writing block <*> to disk");
    CHECK(mock.calls().empty());
}

TEST_CASE("match correction trace with rising temperature") {
    const std::string log = "Transfer 0x300sent to port 8";
    MockBackend mock;
    mock.script(PromptKind::MatchCorrection, log, "`Transfer <*>sent to port <*>`");  // still glued: no match
    mock.script(PromptKind::MatchCorrection, log, "`Transfer <*> to port <*>`");
    const auto out = correct(log, T("Transfer <*> sent to port <*>"), mock, {});
    CHECK(out.accepted);
    CHECK(out.iterations_used == 2);
    CHECK(render_template(out.tmpl) == "Transfer <*> to port <*>");
    CHECK(temperatures(mock) == std::vector<double>{0.25, 0.5});
    CHECK(mock.calls()[0].prompt.kind == PromptKind::MatchCorrection);
}

TEST_CASE("exhausted corrections fall back to the digit heuristic") {
    const std::string log = "Writing block rdd_1_3 to disk";
    MockBackend mock;
    for (int i = 0; i < 3; ++i) mock.script(std::nullopt, log, "`Writing blocks <*> to disk`");
    const auto out = correct(log, T("Writing blocks <*> to disk"), mock, {});
    CHECK(out.fallback_used);
    CHECK_FALSE(out.accepted);
    CHECK(out.iterations_used == 3);
    CHECK(render_template(out.tmpl) == "Writing block <*> to disk");
    CHECK(verify_match(log, out.tmpl));
    CHECK(temperatures(mock) == std::vector<double>{0.25, 0.5, 0.75});
}

TEST_CASE("abstraction correction restores a broad template") {
    const std::string log = "java.io.IOException: Could not read from stream";
    MockBackend mock;
    mock.script(PromptKind::AbstractionCorrection, log, "`java.io.IOException: Could not read from stream`");
    const auto out = correct(log, T("java.io.IOException: <*>"), mock, {});
    CHECK(out.accepted);
    CHECK(out.iterations_used == 1);
    CHECK(render_template(out.tmpl) == "java.io.IOException: Could not read from stream");
    CHECK(out.flags_remaining.empty());
    REQUIRE(mock.calls().size() == 1);
    CHECK(mock.calls()[0].prompt.kind == PromptKind::AbstractionCorrection);
    CHECK(mock.calls()[0].settings.temperature == 0.25);
}

TEST_CASE("each flag set is raised only once") {
    const std::string log = "java.io.IOException: Could not read from stream";
    MockBackend mock;
    mock.script(PromptKind::AbstractionCorrection, log, "`java.io.IOException: <*>`");
    const auto out = correct(log, T("java.io.IOException: <*>"), mock, {});
    CHECK(out.accepted);
    CHECK(out.iterations_used == 1);
    CHECK(out.flags_remaining == std::vector<std::string>{"Could not read from stream"});
}

TEST_CASE("a non-verifying abstraction answer is ignored") {
    const std::string log = "java.io.IOException: Could not read from stream";
    MockBackend mock;
    mock.script(PromptKind::AbstractionCorrection, log, "`java.io.IOException: Could not write`");
    const auto out = correct(log, T("java.io.IOException: <*>"), mock, {});
    CHECK(out.accepted);
    CHECK(render_template(out.tmpl) == "java.io.IOException: <*>");
}

TEST_CASE("a match correction can lead into an abstraction correction") {
    const std::string log = "read failed: disk gone";
    MockBackend mock;
    mock.script(PromptKind::MatchCorrection, log, "`read failed: <*>`");
    mock.script(PromptKind::AbstractionCorrection, log, "`read failed: disk gone`");
    const auto out = correct(log, T("read <*>: disk"), mock, {});
    CHECK(out.accepted);
    CHECK(out.iterations_used == 2);
    CHECK(render_template(out.tmpl) == "read failed: disk gone");
    CHECK(temperatures(mock) == std::vector<double>{0.25, 0.5});
}

TEST_CASE("unusable model output counts as a failed attempt") {
    const std::string log = "x 1";
    MockBackend mock;
    for (int i = 0; i < 3; ++i) mock.script(std::nullopt, log, "   ");
    const auto out = correct(log, T("y <*>"), mock, {});
    CHECK(out.fallback_used);
    CHECK(out.iterations_used == 3);
    CHECK(render_template(out.tmpl) == "x <*>");
}

TEST_CASE("backend failure aborts with the best template so far") {
    DownBackend down;
    try {
        correct("x 1", T("y <*>"), down, {});
        FAIL("expected CorrectionAborted");
    } catch (const CorrectionAborted& e) {
        CHECK(render_template(e.best()) == "y <*>");
        CHECK(e.iterations_used() == 1);
    }
}

TEST_CASE("correct always returns a matching template within the call budget") {
    oracle::Gen gen{43};
    for (int i = 0; i < 200; ++i) {
        const auto t = gen.tmpl(1, 6, 0.4, 6);
        std::vector<std::string> values;
        for (std::size_t w = 0; w < t.wildcard_count(); ++w) values.push_back(gen.value());
        const auto content = oracle::instantiate(t, values);
        MockBackend mock;
        for (int r = 0; r < 3; ++r) mock.script(std::nullopt, content, "`" + render_template(gen.tmpl(1, 6, 0.4, 6)) + "`");
        CorrectorConfig cfg;
        cfg.max_iterations = gen.uniform(1, 3);
        const auto out = correct(content, gen.tmpl(1, 6, 0.4, 6), mock, cfg);
        CHECK(verify_match(content, out.tmpl));
        CHECK(out.iterations_used <= cfg.max_iterations);
        CHECK(mock.calls().size() == out.iterations_used);
        for (std::size_t c = 0; c < mock.calls().size(); ++c)
            CHECK(mock.calls()[c].settings.temperature == static_cast<double>(c + 1) * cfg.alpha);
    }
}
