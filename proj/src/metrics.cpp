#include "logsieve/metrics.hpp"

#include <json.hpp>
#include <ostream>

#include "logsieve/core.hpp"
#include "logsieve/csv.hpp"

namespace logsieve {

namespace {

double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

std::string describe(const std::vector<std::size_t>& missing, const std::vector<std::size_t>& extra) {
    std::string msg = "line id sets differ (" + std::to_string(missing.size()) + " missing from parsed, " +
                      std::to_string(extra.size()) + " not in ground truth)";
    std::size_t shown = 0;
    for (auto [label, ids] : {std::pair{"missing", &missing}, std::pair{"extra", &extra}}) {
        for (std::size_t id : *ids) {
            if (shown++ == 10) return msg + "; ...";
            msg += "; " + std::string{label} + " LineId " + std::to_string(id);
        }
    }
    return msg;
}

}  // namespace

LineIdMismatch::LineIdMismatch(std::vector<std::size_t> missing, std::vector<std::size_t> extra)
    : DomainError(describe(missing, extra)), missing_(std::move(missing)), extra_(std::move(extra)) {}

std::string normalize_template(std::string_view text) {
    std::string out;
    for (const auto& tok : tokenize_coarse(text)) {
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

EvaluationReport evaluate(const TemplateAssignment& parsed, const TemplateAssignment& truth) {
    std::vector<std::size_t> missing, extra;
    for (const auto& [id, _] : truth)
        if (!parsed.count(id)) missing.push_back(id);
    for (const auto& [id, _] : parsed)
        if (!truth.count(id)) extra.push_back(id);
    if (!missing.empty() || !extra.empty()) throw LineIdMismatch(std::move(missing), std::move(extra));
    if (truth.empty()) throw DomainError("cannot evaluate an empty set of messages");

    std::map<std::string, std::vector<std::size_t>> parsed_groups, truth_groups;
    std::map<std::size_t, std::string> truth_norm;
    for (const auto& [id, t] : parsed) parsed_groups[normalize_template(t)].push_back(id);
    for (const auto& [id, t] : truth) {
        auto norm = normalize_template(t);
        truth_groups[norm].push_back(id);
        truth_norm.emplace(id, std::move(norm));
    }

    EvaluationReport r;
    r.messages = truth.size();
    r.n_g = truth_groups.size();
    r.n_p = parsed_groups.size();

    std::map<std::string, TemplateBreakdown> breakdown;
    for (const auto& [t, ids] : truth_groups) breakdown[t] = {t, ids.size(), 0, false, false};

    std::size_t grouped = 0, parsed_ok = 0;
    for (const auto& [ptmpl, ids] : parsed_groups) {
        const std::string& first_truth = truth_norm.at(ids.front());
        // Id lists are ascending, so equal sets compare equal as vectors.
        const bool group_ok = truth_groups.at(first_truth) == ids;
        if (group_ok) {
            ++r.n_c_group;
            grouped += ids.size();
            breakdown[first_truth].grouped_correctly = true;
            if (ptmpl == first_truth) {
                ++r.n_c_template;
                breakdown[first_truth].identified_correctly = true;
            }
        }
        for (std::size_t id : ids) {
            if (truth_norm.at(id) == ptmpl) {
                ++parsed_ok;
                ++breakdown[ptmpl].parsed_correctly;
            }
        }
    }

    r.ga = ratio(grouped, r.messages);
    r.pa = ratio(parsed_ok, r.messages);
    r.pga = ratio(r.n_c_group, r.n_p);
    r.rga = ratio(r.n_c_group, r.n_g);
    r.fga = harmonic(r.pga, r.rga);
    r.pta = ratio(r.n_c_template, r.n_p);
    r.rta = ratio(r.n_c_template, r.n_g);
    r.fta = harmonic(r.pta, r.rta);
    for (auto& [_, b] : breakdown) r.breakdown.push_back(std::move(b));
    return r;
}

std::string report_to_json(const EvaluationReport& r) {
    nlohmann::ordered_json j;
    j["GA"] = r.ga;
    j["FGA"] = r.fga;
    j["PA"] = r.pa;
    j["FTA"] = r.fta;
    j["PGA"] = r.pga;
    j["RGA"] = r.rga;
    j["PTA"] = r.pta;
    j["RTA"] = r.rta;
    j["messages"] = r.messages;
    j["N_g"] = r.n_g;
    j["N_p"] = r.n_p;
    j["N_c_group"] = r.n_c_group;
    j["N_c_template"] = r.n_c_template;
    return j.dump(2) + "\n";
}

void write_breakdown_csv(std::ostream& out, const EvaluationReport& report) {
    csv::write_row(out, {"EventTemplate", "Messages", "ParsedCorrectly", "GroupedCorrectly", "IdentifiedCorrectly"});
    for (const auto& b : report.breakdown)
        csv::write_row(out, {b.truth_template, std::to_string(b.messages), std::to_string(b.parsed_correctly),
                             b.grouped_correctly ? "1" : "0", b.identified_correctly ? "1" : "0"});
}

}  // namespace logsieve
