#include "logsieve/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <memory>
#include <regex>

#include "logsieve/csv.hpp"
#include "logsieve/errors.hpp"
#include "logsieve/llm_gateway.hpp"
#include "logsieve/pipeline.hpp"

namespace fs = std::filesystem;

namespace logsieve::cli {

namespace {

struct ParseOptions {
    std::string input;
    std::string output_dir = ".";
    std::string name;
    std::string input_format = "auto";
    std::string history;
    std::string truth;
    std::size_t candidates = 32;
    std::size_t demonstrations = 3;
    std::size_t candidate_cap = 256;
    double sim_threshold = 0.8;
    std::size_t div_threshold = 5;
    std::size_t relevant_cap = 64;
    bool relevant_from_root = true;
    double alpha = 0.25;
    std::size_t max_iterations = 3;
    std::string keywords;
    std::string backend = "mock";
    std::string mock_fixture;
    std::string mock_script;
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-3.5-turbo-0125";
    std::string api_key_env = "OPENAI_API_KEY";
    std::size_t max_output_tokens = 256;
    std::string header_regex;
    std::string header_preset;
    std::string warm_tree;
};

InputFormat to_format(const std::string& s) {
    if (s == "raw") return InputFormat::Raw;
    if (s == "csv") return InputFormat::Csv;
    return InputFormat::Auto;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out{path, std::ios::binary};
    out << text;
    if (!out.flush()) throw IoError("cannot write " + path.string());
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out{path, std::ios::binary};
    if (!out) throw IoError("cannot create " + path.string());
    return out;
}

std::unique_ptr<LlmBackend> make_backend(const ParseOptions& o, std::ostream& err) {
    if (o.backend == "mock") {
        auto mock = std::make_unique<MockBackend>();
        if (!o.mock_fixture.empty()) mock->load_fixtures(o.mock_fixture);
        if (!o.mock_script.empty()) mock->load_script(o.mock_script);
        if (o.mock_fixture.empty() && o.mock_script.empty())
            err << "warning: mock backend has neither fixtures nor a script; every miss will fall back\n";
        return mock;
    }
    HttpBackendConfig cfg;
    cfg.base_url = o.base_url;
    cfg.api_key_env = o.api_key_env;
    try {
        return std::make_unique<HttpBackend>(cfg);
    } catch (const std::invalid_argument& e) {
        throw Error(std::string{"backend misconfigured: "} + e.what());
    }
}

nlohmann::ordered_json stats_json(const RunStats& s, const ParseOptions& o, const fs::path& input) {
    nlohmann::ordered_json j;
    j["input"] = input.string();
    j["records_total"] = s.records_total;
    j["cache_hits"] = s.cache_hits;
    j["llm_parse_calls"] = s.llm_parse_calls;
    j["correction_calls"] = s.correction_calls;
    j["fallbacks"] = s.fallbacks;
    j["backend_failures"] = s.backend_failures;
    j["tree_leaves_final"] = s.tree_leaves_final;
    j["candidates_final"] = s.candidates_final;
    j["wall_time_seconds"] = s.wall_time_seconds;
    j["fallback_line_ids"] = s.fallback_line_ids;
    j["config"] = {
        {"candidates", o.candidates},        {"demonstrations", o.demonstrations}, {"sim_threshold", o.sim_threshold},
        {"div_threshold", o.div_threshold},  {"alpha", o.alpha},                   {"max_iterations", o.max_iterations},
        {"backend", o.backend},              {"model", o.model},                   {"warm_tree", o.warm_tree},
        {"history", o.history},
    };
    return j;
}

int parse_command(const ParseOptions& o, std::ostream& out, std::ostream& err) {
    if (!(o.sim_threshold > 0.0 && o.sim_threshold <= 1.0)) throw Error("--sim-threshold must be in (0, 1]");
    if (o.candidates > 0 && o.demonstrations > o.candidates)
        throw Error("--demonstrations must not exceed --candidates");

    std::optional<std::string> header;
    if (!o.header_regex.empty()) {
        header = o.header_regex;
    } else if (!o.header_preset.empty()) {
        header = header_preset(o.header_preset);
        if (!header) throw Error("unknown header preset '" + o.header_preset + "'");
    }

    const fs::path input{o.input};
    const auto records = read_records(input, to_format(o.input_format), header);
    const std::string name = o.name.empty() ? input.stem().string() : o.name;
    const fs::path dir{o.output_dir};
    fs::create_directories(dir);

    CorrectorConfig corrector;
    corrector.alpha = o.alpha;
    corrector.max_iterations = o.max_iterations;
    corrector.settings.model = o.model;
    corrector.settings.max_output_tokens = o.max_output_tokens;
    if (!o.keywords.empty()) corrector.keywords = load_keywords(o.keywords);
    corrector.validate();

    PipelineConfig pipeline_config;
    pipeline_config.demonstrations = o.demonstrations;
    pipeline_config.parse_settings.model = o.model;
    pipeline_config.parse_settings.max_output_tokens = o.max_output_tokens;
    pipeline_config.corrector = corrector;

    ParseTreeConfig tree_config;
    tree_config.similarity_threshold = o.sim_threshold;
    tree_config.divergence_threshold = o.div_threshold;
    tree_config.relevant_cap = o.relevant_cap;
    tree_config.relevant_from_root = o.relevant_from_root;

    ParseTree tree{tree_config};
    if (!o.warm_tree.empty()) {
        std::ifstream in{o.warm_tree};
        if (!in) throw IoError("cannot open warm tree " + o.warm_tree);
        tree = ParseTree::load(in, tree_config);
    }

    CandidateStoreConfig store_config{o.candidate_cap};
    CandidateStore store{store_config};
    if (!o.history.empty()) {
        store = CandidateStore::from_history(read_history(o.history), o.candidates, store_config);
    } else if (o.candidates > 0) {
        err << "warning: no --history given; starting with an empty candidate set (zero-shot)\n";
    }

    auto backend = make_backend(o, err);
    Pipeline pipeline{std::move(tree), std::move(store), *backend, pipeline_config};

    auto structured = open_output(dir / (name + "_structured.csv"));
    csv::write_row(structured, {"LineId", "Content", "EventTemplate"});
    std::vector<std::string> template_order;
    std::map<std::string, std::size_t> occurrences;
    TemplateAssignment parsed;
    auto sink = [&](const ParseResult& r) {
        const std::string rendered = render_template(r.tmpl);
        csv::write_row(structured, {std::to_string(r.record.line_id), r.record.content, rendered});
        if (!structured) throw IoError("write failed for " + (dir / (name + "_structured.csv")).string());
        if (occurrences[rendered]++ == 0) template_order.push_back(rendered);
        parsed.emplace(r.record.line_id, rendered);
    };
    RunStats stats;
    try {
        stats = run_stream(pipeline, records, sink).second;
    } catch (...) {
        structured.flush();
        throw;
    }
    if (!structured.flush()) throw IoError("cannot write structured output");

    auto templates = open_output(dir / (name + "_templates.csv"));
    csv::write_row(templates, {"EventTemplate", "Occurrences"});
    for (const auto& t : template_order) csv::write_row(templates, {t, std::to_string(occurrences[t])});
    if (!templates.flush()) throw IoError("cannot write templates output");

    {
        auto tree_out = open_output(dir / (name + "_tree.tsv"));
        pipeline.tree().save(tree_out);
        auto cand_out = open_output(dir / (name + "_candidates.csv"));
        csv::write_row(cand_out, {"Content", "EventTemplate"});
        for (const auto& c : pipeline.candidates().candidates()) csv::write_row(cand_out, {c.content, render_template(c.tmpl)});
    }
    write_file(dir / (name + "_stats.json"), stats_json(stats, o, input).dump(2) + "\n");

    out << "parsed " << stats.records_total << " records: " << stats.cache_hits << " cache hits, " << stats.llm_parse_calls
        << " LLM parse calls, " << stats.correction_calls << " correction calls, " << stats.fallbacks << " fallbacks, "
        << template_order.size() << " templates\n";

    if (!o.truth.empty()) {
        const auto report = evaluate(parsed, read_assignment(o.truth));
        write_file(dir / (name + "_report.json"), report_to_json(report));
        out << report_to_json(report);
    }
    return 0;
}

int evaluate_command(const std::string& parsed_path, const std::string& truth_path, const std::string& output,
                     const std::string& breakdown, std::ostream& out, std::ostream& err) {
    EvaluationReport report;
    try {
        report = evaluate(read_assignment(parsed_path), read_assignment(truth_path));
    } catch (const LineIdMismatch& e) {
        err << "error: parsed and ground-truth LineId sets differ\n";
        std::size_t shown = 0;
        for (std::size_t id : e.missing())
            if (shown++ < 10) err << "  LineId " << id << " missing from " << parsed_path << "\n";
        for (std::size_t id : e.extra())
            if (shown++ < 10) err << "  LineId " << id << " missing from " << truth_path << "\n";
        return 1;
    }
    const std::string json = report_to_json(report);
    out << json;
    if (!output.empty()) write_file(output, json);
    if (!breakdown.empty()) {
        auto b = open_output(breakdown);
        write_breakdown_csv(b, report);
    }
    return 0;
}

int sample_command(const std::string& history, std::size_t budget, const std::string& output, std::ostream& out) {
    const auto entries = read_history(history);
    const auto picked = hierarchical_sample(entries, budget);
    std::ofstream file;
    std::ostream* sink = &out;
    if (!output.empty()) {
        file = open_output(output);
        sink = &file;
    }
    csv::write_row(*sink, {"Content", "EventTemplate"});
    for (std::size_t idx : picked) csv::write_row(*sink, {entries[idx].content, render_template(entries[idx].tmpl)});
    if (!output.empty()) out << "sampled " << picked.size() << " of " << entries.size() << " history entries\n";
    return 0;
}

int stats_command(const std::string& path, std::ostream& out) {
    std::ifstream in{path};
    if (!in) throw IoError("cannot open " + path);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw IoError(path + ": not a stats document");
    const auto total = j.value("records_total", std::size_t{0});
    const auto hits = j.value("cache_hits", std::size_t{0});
    out << "records:          " << total << "\n";
    out << "cache hits:       " << hits;
    if (total > 0) out << " (" << (100.0 * static_cast<double>(hits) / static_cast<double>(total)) << "%)";
    out << "\n";
    out << "llm parse calls:  " << j.value("llm_parse_calls", std::size_t{0}) << "\n";
    out << "correction calls: " << j.value("correction_calls", std::size_t{0}) << "\n";
    out << "fallbacks:        " << j.value("fallbacks", std::size_t{0}) << "\n";
    out << "templates (tree): " << j.value("tree_leaves_final", std::size_t{0}) << "\n";
    out << "candidates:       " << j.value("candidates_final", std::size_t{0}) << "\n";
    const double secs = j.value("wall_time_seconds", 0.0);
    out << "wall time:        " << secs << " s";
    if (secs > 0) out << " (" << static_cast<double>(total) / secs << " lines/s)";
    out << "\n";
    return 0;
}

}  // namespace

std::optional<std::string> header_preset(std::string_view name) {
    static const std::map<std::string, std::string, std::less<>> presets{
        // Jun 14 15:16:01 combo sshd(pam_unix)[19939]: <content>
        {"linux", R"(^[A-Z][a-z]{2}\s+\d{1,2}\s+\d{2}:\d{2}:\d{2}\s+\S+\s+[^:]+?:\s+)"},
        // 081109 203615 148 INFO dfs.DataNode$PacketResponder: <content>
        {"hdfs", R"(^\d{6}\s+\d{6}\s+\d+\s+[A-Z]+\s+\S+:\s+)"},
        // [Sun Dec 04 04:47:44 2005] [notice] <content>
        {"apache", R"(^\[[^\]]+\]\s+\[[a-z]+\]\s+)"},
    };
    auto it = presets.find(name);
    if (it == presets.end()) return std::nullopt;
    return it->second;
}

std::vector<LogRecord> read_records(const fs::path& path, InputFormat format,
                                    const std::optional<std::string>& header_pattern) {
    std::optional<std::regex> header;
    if (header_pattern) {
        try {
            header.emplace(*header_pattern);
        } catch (const std::regex_error& e) {
            throw Error("invalid header pattern: " + std::string{e.what()});
        }
    }

    auto make = [&](std::size_t id, std::string_view raw, std::vector<LogRecord>& out) {
        LogRecord rec;
        rec.line_id = id;
        std::string_view content = raw;
        std::match_results<std::string_view::const_iterator> m;
        if (header && std::regex_search(content.begin(), content.end(), m, *header, std::regex_constants::match_continuous)) {
            rec.header["Header"] = trim(std::string_view{content}.substr(0, static_cast<std::size_t>(m.length(0))));
            content.remove_prefix(static_cast<std::size_t>(m.length(0)));
        }
        rec.content = trim(content);
        if (!rec.content.empty()) out.push_back(std::move(rec));
    };

    if (format == InputFormat::Auto) format = path.extension() == ".csv" ? InputFormat::Csv : InputFormat::Raw;
    std::vector<LogRecord> records;
    if (format == InputFormat::Csv) {
        const auto table = csv::read_file(path);
        const auto content = table.require("Content");
        const auto line_id = table.column("LineId");
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            std::size_t id = r + 1;
            if (line_id) {
                try {
                    id = std::stoull(table.rows[r][*line_id]);
                } catch (const std::exception&) {
                    throw IoError(path.string() + ": bad LineId on row " + std::to_string(r + 1));
                }
            }
            make(id, table.rows[r][content], records);
        }
        return records;
    }

    std::ifstream in{path, std::ios::binary};
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        make(lineno, line, records);
    }
    if (in.bad()) throw IoError("read error on " + path.string());
    return records;
}

std::vector<LabeledLog> read_history(const fs::path& path) {
    const auto table = csv::read_file(path);
    const auto content = table.require("Content");
    const auto tmpl = table.require("EventTemplate");
    std::vector<LabeledLog> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::string c = trim(table.rows[r][content]);
        Template t = parse_template_string(table.rows[r][tmpl]);
        if (c.empty() || t.empty()) throw IoError(path.string() + ": empty Content or EventTemplate on row " + std::to_string(r + 1));
        if (!extract_variables(c, t))
            throw IoError(path.string() + ": row " + std::to_string(r + 1) + " template does not match its content");
        out.push_back({std::move(c), std::move(t)});
    }
    return out;
}

TemplateAssignment read_assignment(const fs::path& path) {
    const auto table = csv::read_file(path);
    const auto line_id = table.require("LineId");
    const auto tmpl = table.require("EventTemplate");
    TemplateAssignment out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::size_t id = 0;
        try {
            id = std::stoull(table.rows[r][line_id]);
        } catch (const std::exception&) {
            throw IoError(path.string() + ": bad LineId on row " + std::to_string(r + 1));
        }
        if (!out.emplace(id, table.rows[r][tmpl]).second)
            throw IoError(path.string() + ": duplicate LineId " + std::to_string(id));
    }
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"LLM-assisted log template extraction with a template cache and self-correction", "logsieve"};
    app.set_config("--config", "", "TOML/INI file with option defaults (flags take precedence)");
    app.require_subcommand(1);

    ParseOptions po;
    auto* parse = app.add_subcommand("parse", "Parse a log file into templates");
    parse->add_option("--input", po.input, "Raw log file or CSV with a Content column")->required();
    parse->add_option("--output-dir", po.output_dir, "Directory for output files")->capture_default_str();
    parse->add_option("--name", po.name, "Output file prefix (default: input file stem)");
    parse->add_option("--input-format", po.input_format, "auto, raw or csv")
        ->check(CLI::IsMember({"auto", "raw", "csv"}))
        ->capture_default_str();
    parse->add_option("--history", po.history, "Labeled history CSV (Content, EventTemplate) for the candidate set");
    parse->add_option("--truth", po.truth, "Ground truth CSV (LineId, EventTemplate); evaluates after parsing");
    parse->add_option("--candidates", po.candidates, "Candidate budget K drawn from history")->capture_default_str();
    parse->add_option("--demonstrations", po.demonstrations, "Demonstrations k per prompt")->capture_default_str();
    parse->add_option("--candidate-cap", po.candidate_cap, "Soft cap on the candidate set")->capture_default_str();
    parse->add_option("--sim-threshold", po.sim_threshold, "Similarity threshold for template merging")->capture_default_str();
    parse->add_option("--div-threshold", po.div_threshold, "Distinct-token threshold for group merging")->capture_default_str();
    parse->add_option("--relevant-cap", po.relevant_cap, "Max relevant templates considered per miss")->capture_default_str();
    parse->add_option("--relevant-from-root", po.relevant_from_root,
                      "Treat all stored templates as relevant when no tree edge matches")
        ->capture_default_str();
    parse->add_option("--alpha", po.alpha, "Temperature step for correction queries")->capture_default_str();
    parse->add_option("--max-iterations", po.max_iterations, "Correction iterations")->capture_default_str();
    parse->add_option("--keywords", po.keywords, "File with one status keyword per line");
    parse->add_option("--backend", po.backend, "mock or http")->check(CLI::IsMember({"mock", "http"}))->capture_default_str();
    parse->add_option("--mock-fixture", po.mock_fixture, "Mock backend: CSV mapping Content to EventTemplate");
    parse->add_option("--mock-script", po.mock_script, "Mock backend: scripted responses file");
    parse->add_option("--base-url", po.base_url, "Chat-completion endpoint base URL")->capture_default_str();
    parse->add_option("--model", po.model, "Model name")->capture_default_str();
    parse->add_option("--api-key-env", po.api_key_env, "Environment variable holding the API key")->capture_default_str();
    parse->add_option("--max-output-tokens", po.max_output_tokens, "Completion token budget")->capture_default_str();
    parse->add_option("--header-regex", po.header_regex, "Regex matching the header prefix to strip");
    parse->add_option("--header-preset", po.header_preset, "Bundled header pattern: linux, hdfs or apache");
    parse->add_option("--warm-tree", po.warm_tree, "Tree file from a previous run to start from");

    std::string parsed_path, truth_path, report_path, breakdown_path;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Compute GA, FGA, PA and FTA against ground truth");
    evaluate_cmd->add_option("--parsed", parsed_path, "Structured output (LineId, EventTemplate)")->required();
    evaluate_cmd->add_option("--truth", truth_path, "Ground truth (LineId, EventTemplate)")->required();
    evaluate_cmd->add_option("--output", report_path, "Write the report JSON here");
    evaluate_cmd->add_option("--breakdown", breakdown_path, "Write a per-template breakdown CSV here");

    std::string sample_history, sample_output;
    std::size_t sample_budget = 32;
    auto* sample = app.add_subcommand("sample", "Run hierarchical sampling over labeled history");
    sample->add_option("--history", sample_history, "Labeled history CSV (Content, EventTemplate)")->required();
    sample->add_option("--candidates", sample_budget, "Number of candidates to select")->capture_default_str();
    sample->add_option("--output", sample_output, "Write the selection here instead of stdout");

    std::string stats_path;
    auto* stats = app.add_subcommand("stats", "Summarize a run's stats document");
    stats->add_option("stats_file", stats_path, "<name>_stats.json from a parse run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*parse) return parse_command(po, out, err);
        if (*evaluate_cmd) return evaluate_command(parsed_path, truth_path, report_path, breakdown_path, out, err);
        if (*sample) return sample_command(sample_history, sample_budget, sample_output, out);
        if (*stats) return stats_command(stats_path, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace logsieve::cli
