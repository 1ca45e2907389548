#include <doctest.h>

#include <algorithm>

#include "logsieve/candidate_store.hpp"
#include "oracles.hpp"

using namespace logsieve;

namespace {

LabeledLog labeled(const std::string& content) { return {content, parse_template_string(content)}; }

std::vector<std::string> contents(const std::vector<Candidate>& cs) {
    std::vector<std::string> out;
    for (const auto& c : cs) out.push_back(c.content);
    return out;
}

/// Reference sampler: recomputes every bucket and every max-similarity from scratch at each step.
std::vector<std::size_t> reference_sample(const std::vector<LabeledLog>& history, std::size_t budget) {
    std::vector<std::pair<std::size_t, std::string>> shapes;
    std::vector<std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto coarse = tokenize_coarse(history[i].content);
        const auto shape = std::make_pair(coarse.size(), coarse.at(0));
        auto it = std::find(shapes.begin(), shapes.end(), shape);
        if (it == shapes.end()) {
            shapes.push_back(shape);
            buckets.push_back({i});
        } else {
            buckets[static_cast<std::size_t>(it - shapes.begin())].push_back(i);
        }
    }
    // first-seen order is already the insertion order; stable sort by size keeps it for ties
    std::stable_sort(buckets.begin(), buckets.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });

    std::vector<std::size_t> selected;
    auto max_sim_to_selected = [&](std::size_t idx) {
        double best = 0.0;
        for (std::size_t s : selected)
            best = std::max(best, oracle::similarity_table(tokenize_fine(history[idx].content), tokenize_fine(history[s].content)));
        return best;
    };
    while (selected.size() < std::min(budget, history.size())) {
        for (const auto& bucket : buckets) {
            if (selected.size() == std::min(budget, history.size())) break;
            std::vector<std::size_t> open;
            for (std::size_t idx : bucket)
                if (std::find(selected.begin(), selected.end(), idx) == selected.end()) open.push_back(idx);
            if (open.empty()) continue;
            std::size_t pick = open.front();
            for (std::size_t idx : open)
                if (max_sim_to_selected(idx) < max_sim_to_selected(pick)) pick = idx;
            selected.push_back(pick);
        }
    }
    return selected;
}

}  // namespace

TEST_CASE("empty history or zero budget gives an empty store") {
    CHECK(CandidateStore::from_history({}, 32).empty());
    CHECK(CandidateStore::from_history({labeled("a b")}, 0).empty());
    CandidateStore store;
    CHECK(store.select_demonstrations("anything", 3).empty());
}

TEST_CASE("budget of one picks the first entry of the largest bucket") {
    const std::vector<LabeledLog> history{labeled("ping host1"), labeled("open file f1 now"), labeled("open file f2 now"),
                                          labeled("ping host2 twice"), labeled("open file f3 now")};
    const auto picked = hierarchical_sample(history, 1);
    CHECK(picked == std::vector<std::size_t>{1});
}

TEST_CASE("hierarchical sampling visits buckets largest first, round-robin") {
    // bucket sizes: open/3 -> 5, close/4 -> 3, ping/2 -> 1, reboot/5 -> 1
    const std::vector<LabeledLog> history{
        labeled("ping gateway"),
        labeled("open file alpha"),
        labeled("close socket 10 now"),
        labeled("open file beta"),
        labeled("open pipe gamma"),
        labeled("close socket 11 now"),
        labeled("reboot scheduled by admin tonight"),
        labeled("open file alpha2"),
        labeled("close pipe 12 later"),
        labeled("open dir delta"),
    };
    const auto picked = hierarchical_sample(history, 6);
    REQUIRE(picked.size() == 6);
    CHECK(picked == reference_sample(history, 6));

    auto bucket_of = [&](std::size_t idx) {
        const auto c = tokenize_coarse(history[idx].content);
        return c.front() + "/" + std::to_string(c.size());
    };
    std::vector<std::string> order;
    for (auto idx : picked) order.push_back(bucket_of(idx));
    CHECK(order == std::vector<std::string>{"open/3", "close/4", "ping/2", "reboot/5", "open/3", "close/4"});
    // first open pick is the earliest; second is the one least similar to everything picked
    CHECK(picked[0] == 1);
    CHECK(picked[4] == 4);
    CHECK(picked[5] == 8);

    const auto store = CandidateStore::from_history(history, 6);
    CHECK(store.size() == 6);
    for (const auto& c : store.candidates()) CHECK(c.origin == CandidateOrigin::History);
}

TEST_CASE("hierarchical sampling agrees with the reference on random histories") {
    oracle::Gen gen{31};
    for (int round = 0; round < 100; ++round) {
        std::vector<LabeledLog> history;
        const std::size_t n = gen.uniform(1, 20);
        for (std::size_t i = 0; i < n; ++i) {
            auto toks = gen.tokens(1, 4, 4);
            std::string content;
            for (const auto& t : toks) content += (content.empty() ? "" : " ") + t + std::to_string(gen.uniform(0, 2));
            history.push_back(labeled(content));
        }
        const std::size_t budget = gen.uniform(0, 25);
        REQUIRE(hierarchical_sample(history, budget) == reference_sample(history, budget));
    }
}

TEST_CASE("a custom sampler can replace hierarchical sampling") {
    const std::vector<LabeledLog> history{labeled("a b"), labeled("c d"), labeled("e f")};
    auto last_first = [](const std::vector<LabeledLog>& h, std::size_t budget) {
        std::vector<std::size_t> out;
        for (std::size_t i = h.size(); i-- > 0 && out.size() < budget;) out.push_back(i);
        return out;
    };
    const auto store = CandidateStore::from_history(history, 2, {}, last_first);
    CHECK(contents(store.candidates()) == std::vector<std::string>{"e f", "c d"});
}

TEST_CASE("history entries whose template does not match are rejected") {
    const std::vector<LabeledLog> history{{"a b", parse_template_string("a c")}};
    CHECK_THROWS_AS(CandidateStore::from_history(history, 1), std::invalid_argument);
}

TEST_CASE("demonstrations come back in ascending similarity, top-k only") {
    // query has 10 fine tokens; candidates share 9, 5 and 7 of them: 0.9, 0.5, 0.7
    const std::string query = "q0 q1 q2 q3 q4 q5 q6 q7 q8 q9";
    CandidateStore store;
    store.add("q0 q1 q2 q3 q4 q5 q6 q7 q8 z9", parse_template_string("q0 q1 q2 q3 q4 q5 q6 q7 q8 <*>"));
    store.add("q0 q1 q2 q3 q4 z5 z6 z7 z8 z9", parse_template_string("q0 q1 q2 q3 q4 <*>"));
    store.add("q0 q1 q2 q3 q4 q5 q6 z7 z8 z9", parse_template_string("q0 q1 q2 q3 q4 q5 q6 <*>"));
    auto picked = store.select_demonstrations(query, 2);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].content == "q0 q1 q2 q3 q4 q5 q6 z7 z8 z9");
    CHECK(picked[1].content == "q0 q1 q2 q3 q4 q5 q6 q7 q8 z9");

    picked = store.select_demonstrations(query, 3);
    CHECK(contents(picked) == std::vector<std::string>{"q0 q1 q2 q3 q4 z5 z6 z7 z8 z9", "q0 q1 q2 q3 q4 q5 q6 z7 z8 z9",
                                                        "q0 q1 q2 q3 q4 q5 q6 q7 q8 z9"});
    CHECK(store.select_demonstrations(query, 10).size() == 3);
    CHECK(store.select_demonstrations(query, 0).empty());
}

TEST_CASE("ties keep older candidates first") {
    CandidateStore store;
    store.add("x 1", parse_template_string("x <*>"));
    store.add("x 2", parse_template_string("x 2"));
    const auto picked = store.select_demonstrations("y 3", 2);
    CHECK(contents(picked) == std::vector<std::string>{"x 1", "x 2"});
}

TEST_CASE("add deduplicates by rendered template") {
    CandidateStore store;
    CHECK(store.add("session closed for user root", parse_template_string("session closed for user <*>")));
    CHECK(store.size() == 1);
    CHECK_FALSE(store.add("session closed for user root", parse_template_string("session closed for user <*>")));
    CHECK_FALSE(store.add("session closed for user news", parse_template_string("session closed for user <*>")));
    CHECK(store.size() == 1);
    CHECK(store.candidates()[0].origin == CandidateOrigin::SelfGenerated);
    CHECK(store.candidates()[0].fine_tokens == tokenize_fine("session closed for user root"));
    CHECK_THROWS_AS(store.add("a b", parse_template_string("a c")), std::logic_error);
}

TEST_CASE("the soft cap evicts the oldest self-generated entries") {
    CandidateStore store;
    for (int i = 0; i < 300; ++i) {
        const std::string c = "event" + std::to_string(i) + " done";
        store.add(c, parse_template_string(c));
    }
    CHECK(store.size() == 256);
    CHECK(store.candidates().front().content == "event44 done");
    CHECK(store.candidates().front().inserted_at == 44);
    CHECK(store.candidates().back().content == "event299 done");

    auto seeded = CandidateStore::from_history({labeled("boot ok"), labeled("halt ok now")}, 2, {.capacity = 4});
    for (int i = 0; i < 10; ++i) {
        const std::string c = "job" + std::to_string(i) + " done";
        seeded.add(c, parse_template_string(c));
    }
    CHECK(seeded.size() == 4);
    CHECK(seeded.candidates()[0].origin == CandidateOrigin::History);
    CHECK(seeded.candidates()[1].origin == CandidateOrigin::History);
    CHECK(contents(seeded.candidates()) == std::vector<std::string>{"boot ok", "halt ok now", "job8 done", "job9 done"});
}

TEST_CASE("a newly added log is the last demonstration for itself") {
    oracle::Gen gen{32};
    CandidateStore store;
    for (int i = 0; i < 200; ++i) {
        const auto t = gen.tmpl(1, 6, 0.3, 8);
        std::vector<std::string> values;
        for (std::size_t w = 0; w < t.wildcard_count(); ++w) values.push_back(gen.value(2));
        const auto content = oracle::instantiate(t, values);
        const bool added = store.add(content, t);
        const auto picked = store.select_demonstrations(content, 3);
        REQUIRE_FALSE(picked.empty());
        if (added) CHECK(picked.back().content == content);
        // scores are non-decreasing
        const auto q = tokenize_fine(content);
        auto score = [&](const Candidate& c) {
            return q.empty() && c.fine_tokens.empty() ? 1.0 : oracle::similarity_table(q, c.fine_tokens);
        };
        for (std::size_t j = 1; j < picked.size(); ++j) CHECK(score(picked[j - 1]) <= score(picked[j]));
        if (added) CHECK(score(picked.back()) == 1.0);
    }
    for (const auto& c : store.candidates()) CHECK(extract_variables(c.content, c.tmpl));
}
