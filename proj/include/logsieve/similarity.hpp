#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace logsieve {

/// Length of the longest common subsequence under exact token equality. O(|a|*|b|) time,
/// O(min(|a|,|b|)) memory.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/**
 * 2 * LCS(a, b) / (|a| + |b|), in [0, 1]; equals 1 exactly when the sequences are identical.
 * Throws DomainError when both sequences are empty.
 */
double similarity(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace logsieve
