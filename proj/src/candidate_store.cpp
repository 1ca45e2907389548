#include "logsieve/candidate_store.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "logsieve/similarity.hpp"

namespace logsieve {

namespace {

// Similarity that tolerates logs with no alphanumeric tokens.
double safe_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    return similarity(a, b);
}

}  // namespace

std::vector<std::size_t> hierarchical_sample(const std::vector<LabeledLog>& history, std::size_t budget) {
    if (budget == 0 || history.empty()) return {};

    struct Bucket {
        std::size_t first_seen;
        std::vector<std::size_t> entries;
    };
    std::map<std::pair<std::size_t, std::string>, Bucket> by_shape;
    std::vector<std::vector<std::string>> fine(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto coarse = tokenize_coarse(history[i].content);
        auto key = std::make_pair(coarse.size(), coarse.empty() ? std::string{} : coarse.front());
        auto [it, fresh] = by_shape.try_emplace(std::move(key), Bucket{i, {}});
        it->second.entries.push_back(i);
        fine[i] = tokenize_fine(history[i].content);
    }

    std::vector<Bucket> buckets;
    for (auto& [_, b] : by_shape) buckets.push_back(std::move(b));
    std::stable_sort(buckets.begin(), buckets.end(), [](const Bucket& a, const Bucket& b) {
        if (a.entries.size() != b.entries.size()) return a.entries.size() > b.entries.size();
        return a.first_seen < b.first_seen;
    });

    std::vector<std::size_t> selected;
    // Highest similarity of each history entry to anything selected so far.
    std::vector<double> max_sim(history.size(), 0.0);
    std::vector<bool> taken(history.size(), false);
    const std::size_t target = std::min(budget, history.size());
    while (selected.size() < target) {
        for (const auto& bucket : buckets) {
            if (selected.size() == target) break;
            std::optional<std::size_t> pick;
            for (std::size_t idx : bucket.entries) {
                if (taken[idx]) continue;
                if (!pick || max_sim[idx] < max_sim[*pick]) pick = idx;
            }
            if (!pick) continue;
            taken[*pick] = true;
            selected.push_back(*pick);
            for (std::size_t i = 0; i < history.size(); ++i)
                if (!taken[i]) max_sim[i] = std::max(max_sim[i], safe_similarity(fine[i], fine[*pick]));
        }
    }
    return selected;
}

CandidateStore CandidateStore::from_history(const std::vector<LabeledLog>& history, std::size_t budget,
                                            CandidateStoreConfig config, const HistorySampler& sampler) {
    CandidateStore store{config};
    for (std::size_t idx : sampler(history, budget)) {
        const auto& entry = history.at(idx);
        if (!extract_variables(entry.content, entry.tmpl))
            throw std::invalid_argument("history template does not match its log: " + render_template(entry.tmpl));
        store.append(entry.content, entry.tmpl, CandidateOrigin::History);
    }
    return store;
}

std::vector<Candidate> CandidateStore::select_demonstrations(std::string_view query_content, std::size_t k) const {
    const auto query = tokenize_fine(query_content);
    std::vector<std::pair<double, const Candidate*>> scored;
    scored.reserve(candidates_.size());
    for (const auto& c : candidates_) scored.emplace_back(safe_similarity(query, c.fine_tokens), &c);

    auto higher_first = [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->inserted_at < b.second->inserted_at;
    };
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), higher_first);
    scored.resize(take);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second->inserted_at < b.second->inserted_at;
    });

    std::vector<Candidate> out;
    out.reserve(take);
    for (const auto& [_, c] : scored) out.push_back(*c);
    return out;
}

bool CandidateStore::add(std::string content, Template tmpl) {
    if (!extract_variables(content, tmpl))
        throw std::logic_error("candidate template does not match its log: " + render_template(tmpl));
    const std::string rendered = render_template(tmpl);
    for (const auto& c : candidates_)
        if (render_template(c.tmpl) == rendered) return false;
    append(std::move(content), std::move(tmpl), CandidateOrigin::SelfGenerated);
    if (candidates_.size() > config_.capacity) {
        auto oldest = std::find_if(candidates_.begin(), candidates_.end(),
                                   [](const Candidate& c) { return c.origin == CandidateOrigin::SelfGenerated; });
        if (oldest != candidates_.end()) candidates_.erase(oldest);
    }
    return true;
}

void CandidateStore::append(std::string content, Template tmpl, CandidateOrigin origin) {
    auto fine = tokenize_fine(content);
    candidates_.push_back({std::move(content), std::move(fine), std::move(tmpl), origin, next_seq_++});
}

}  // namespace logsieve
