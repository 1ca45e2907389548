#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "logsieve/errors.hpp"

namespace logsieve {

/// line_id -> template string
using TemplateAssignment = std::map<std::size_t, std::string>;

/// Trims both ends and collapses internal whitespace runs to one space.
std::string normalize_template(std::string_view text);

struct TemplateBreakdown {
    std::string truth_template;
    std::size_t messages = 0;
    std::size_t parsed_correctly = 0;
    bool grouped_correctly = false;     // some parsed group has exactly this template's messages
    bool identified_correctly = false;  // ... and carries the same template string
};

struct EvaluationReport {
    double ga = 0, fga = 0, pa = 0, fta = 0;
    double pga = 0, rga = 0;
    double pta = 0, rta = 0;
    std::size_t messages = 0;
    std::size_t n_g = 0;  // ground-truth templates
    std::size_t n_p = 0;  // parsed templates
    std::size_t n_c_group = 0;
    std::size_t n_c_template = 0;
    std::vector<TemplateBreakdown> breakdown;  // ordered by truth template
};

/// Raised when parsed and ground-truth line ids differ.
class LineIdMismatch : public DomainError {
public:
    LineIdMismatch(std::vector<std::size_t> missing, std::vector<std::size_t> extra);

    /// Ids present in the ground truth but not in the parsed output.
    [[nodiscard]] const std::vector<std::size_t>& missing() const { return missing_; }
    /// Ids present in the parsed output only.
    [[nodiscard]] const std::vector<std::size_t>& extra() const { return extra_; }

private:
    std::vector<std::size_t> missing_;
    std::vector<std::size_t> extra_;
};

/**
 * Grouping accuracy (message level), its template-level F1, parsing accuracy (message level)
 * and template accuracy F1. Template strings are compared after normalize_template.
 */
EvaluationReport evaluate(const TemplateAssignment& parsed, const TemplateAssignment& truth);

/// JSON document with the metrics and counts (breakdown excluded).
std::string report_to_json(const EvaluationReport& report);
void write_breakdown_csv(std::ostream& out, const EvaluationReport& report);

}  // namespace logsieve
