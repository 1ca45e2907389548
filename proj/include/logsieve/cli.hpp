#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "logsieve/candidate_store.hpp"
#include "logsieve/core.hpp"
#include "logsieve/metrics.hpp"

namespace logsieve::cli {

enum class InputFormat { Auto, Raw, Csv };

/// Prefix patterns for the bundled sample datasets; the matched prefix is stripped.
std::optional<std::string> header_preset(std::string_view name);

/**
 * Raw files yield one record per non-blank line (line_id = physical line number). Csv files
 * need a Content column and use LineId when present. A header pattern, when given, is matched
 * at the start of each content and the matched prefix moves into header["Header"].
 */
std::vector<LogRecord> read_records(const std::filesystem::path& path, InputFormat format,
                                    const std::optional<std::string>& header_pattern);

/// Content/EventTemplate table.
std::vector<LabeledLog> read_history(const std::filesystem::path& path);

/// LineId/EventTemplate table.
TemplateAssignment read_assignment(const std::filesystem::path& path);

/// Entry point shared by the `logsieve` binary and the tests. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace logsieve::cli
