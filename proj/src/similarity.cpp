#include "logsieve/similarity.hpp"

#include <algorithm>
#include <vector>

#include "logsieve/errors.hpp"

namespace logsieve {

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.size() < b.size()) std::swap(a, b);
    if (b.empty()) return 0;
    // Rolling row over the shorter sequence.
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (const auto& x : a) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = (x == b[j - 1]) ? diag + 1 : std::max(up, row[j - 1]);
            diag = up;
        }
    }
    return row[b.size()];
}

double similarity(std::span<const std::string> a, std::span<const std::string> b) {
    const std::size_t total = a.size() + b.size();
    if (total == 0) throw DomainError("similarity is undefined for two empty sequences");
    return 2.0 * static_cast<double>(lcs_length(a, b)) / static_cast<double>(total);
}

}  // namespace logsieve
