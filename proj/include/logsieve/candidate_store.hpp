#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "logsieve/core.hpp"

namespace logsieve {

enum class CandidateOrigin { History, SelfGenerated };

struct Candidate {
    std::string content;
    std::vector<std::string> fine_tokens;
    Template tmpl;
    CandidateOrigin origin = CandidateOrigin::History;
    std::uint64_t inserted_at = 0;
};

struct LabeledLog {
    std::string content;
    Template tmpl;
};

struct CandidateStoreConfig {
    std::size_t capacity = 256;  // soft cap; only self-generated entries are evicted
};

/// Picks up to `budget` entries from labeled history. Swappable so an alternative sampler can be used.
using HistorySampler = std::function<std::vector<std::size_t>(const std::vector<LabeledLog>&, std::size_t budget)>;

/**
 * Hierarchical sampling: bucket by (coarse token count, first coarse token), visit buckets
 * largest first in round-robin passes, and from each bucket take the entry whose highest
 * fine-token similarity to the already selected entries is lowest (earliest entry on ties).
 * Returns indices into `history` in selection order.
 */
std::vector<std::size_t> hierarchical_sample(const std::vector<LabeledLog>& history, std::size_t budget);

/// Pool of (log, template) demonstrations, seeded from history and grown with self-generated results.
class CandidateStore {
public:
    explicit CandidateStore(CandidateStoreConfig config = {}) : config_(config) {}

    static CandidateStore from_history(const std::vector<LabeledLog>& history, std::size_t budget,
                                       CandidateStoreConfig config = {}, const HistorySampler& sampler = hierarchical_sample);

    /// Top-k candidates by similarity to the query, most similar last. Ties keep older entries first.
    [[nodiscard]] std::vector<Candidate> select_demonstrations(std::string_view query_content, std::size_t k) const;

    /// Appends a self-generated candidate unless one with the same rendered template exists.
    /// Returns true when the candidate was added. Throws std::logic_error if `tmpl` does not
    /// match `content`.
    bool add(std::string content, Template tmpl);

    [[nodiscard]] const std::vector<Candidate>& candidates() const { return candidates_; }
    [[nodiscard]] std::size_t size() const { return candidates_.size(); }
    [[nodiscard]] bool empty() const { return candidates_.empty(); }

private:
    void append(std::string content, Template tmpl, CandidateOrigin origin);

    CandidateStoreConfig config_;
    std::vector<Candidate> candidates_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace logsieve
