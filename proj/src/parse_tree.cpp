#include "logsieve/parse_tree.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_set>

#include "logsieve/errors.hpp"
#include "logsieve/similarity.hpp"

namespace logsieve {

struct ParseTree::Leaf {
    Template tmpl;
    std::string rendered;
    std::size_t match_count = 0;
};

struct ParseTree::Node {
    std::size_t id = 0;
    std::size_t depth = 0;
    std::map<std::string, std::unique_ptr<Node>, std::less<>> constants;
    std::unique_ptr<Node> wildcard;
    std::optional<Leaf> leaf;

    [[nodiscard]] bool prunable() const { return constants.empty() && !wildcard && !leaf; }
};

namespace {

using SpecificityKey = std::tuple<std::size_t, std::size_t, const std::string*>;

bool key_less(const SpecificityKey& a, const SpecificityKey& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return *std::get<2>(a) < *std::get<2>(b);
}

bool match_tokens_from(const Template& tmpl, std::span<const std::string> tokens, std::size_t ti, std::size_t qi,
                       std::vector<std::pair<std::size_t, std::size_t>>& spans, std::set<std::pair<std::size_t, std::size_t>>& failed) {
    if (ti == tmpl.size()) return qi == tokens.size();
    if (qi == tokens.size()) return false;
    if (failed.count({ti, qi})) return false;
    const auto& tok = tmpl.tokens()[ti];
    bool ok = false;
    if (!tok.is_wildcard()) {
        ok = tokens[qi] == tok.text() && match_tokens_from(tmpl, tokens, ti + 1, qi + 1, spans, failed);
    } else {
        spans.emplace_back(qi, qi);
        for (std::size_t end = qi + 1; end <= tokens.size() && !ok; ++end) {
            spans.back().second = end;
            ok = match_tokens_from(tmpl, tokens, ti + 1, end, spans, failed);
        }
        if (!ok) spans.pop_back();
    }
    if (!ok) failed.insert({ti, qi});
    return ok;
}

}  // namespace

std::optional<std::vector<VariableBinding>> match_tokens(const Template& tmpl, std::span<const std::string> tokens) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::set<std::pair<std::size_t, std::size_t>> failed;
    if (!match_tokens_from(tmpl, tokens, 0, 0, spans, failed)) return std::nullopt;
    std::vector<VariableBinding> out;
    out.reserve(spans.size());
    for (std::size_t i = 0; i < spans.size(); ++i) {
        std::string value;
        for (std::size_t q = spans[i].first; q < spans[i].second; ++q) {
            if (q > spans[i].first) value.push_back(' ');
            value += tokens[q];
        }
        out.push_back({i, std::move(value)});
    }
    return out;
}

Template positional_merge(const Template& a, const Template& b) {
    if (a.size() != b.size()) throw std::invalid_argument("positional merge requires equal-length templates");
    std::vector<TemplateToken> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.push_back(a.tokens()[i] == b.tokens()[i] ? a.tokens()[i] : TemplateToken::wildcard());
    return Template{std::move(out)};
}

ParseTree::ParseTree(ParseTreeConfig config) : config_(config), root_(std::make_unique<Node>()) {
    root_->id = next_node_id_++;
}

ParseTree::~ParseTree() = default;
ParseTree::ParseTree(ParseTree&&) noexcept = default;
ParseTree& ParseTree::operator=(ParseTree&&) noexcept = default;

MatchOutcome ParseTree::match(std::span<const std::string> tokens) const {
    const std::size_t n = tokens.size();
    std::unordered_set<std::size_t> visited;
    const Leaf* best = nullptr;
    SpecificityKey best_key{};
    const Node* deepest = root_.get();

    // Depth-first over (node, consumed) states; each state is expanded once.
    auto visit = [&](auto&& self, const Node& node, std::size_t pos) -> void {
        if (!visited.insert(node.id * (n + 1) + pos).second) return;
        if (node.depth > deepest->depth) deepest = &node;
        if (pos == n) {
            if (node.leaf) {
                SpecificityKey key{n - node.leaf->tmpl.constant_count(), node.leaf->tmpl.wildcard_count(), &node.leaf->rendered};
                if (best == nullptr || key_less(key, best_key)) {
                    best = &*node.leaf;
                    best_key = key;
                }
            }
            return;
        }
        if (auto it = node.constants.find(tokens[pos]); it != node.constants.end()) self(self, *it->second, pos + 1);
        if (node.wildcard)
            for (std::size_t end = pos + 1; end <= n; ++end) self(self, *node.wildcard, end);
    };
    visit(visit, *root_, 0);

    if (best != nullptr) {
        auto bindings = match_tokens(best->tmpl, tokens);
        return TreeHit{best->tmpl, std::move(*bindings)};
    }

    TreeMiss miss;
    if (deepest == root_.get() && !config_.relevant_from_root) return miss;
    std::vector<const Leaf*> leaves;
    collect(*deepest, leaves);
    // Closest in length first: only equal-length templates are eligible for positional merging.
    auto distance = [n](const Leaf* l) { return l->tmpl.size() > n ? l->tmpl.size() - n : n - l->tmpl.size(); };
    std::stable_sort(leaves.begin(), leaves.end(), [&](const Leaf* a, const Leaf* b) {
        if (distance(a) != distance(b)) return distance(a) < distance(b);
        return a->rendered < b->rendered;
    });
    if (leaves.size() > config_.relevant_cap) leaves.resize(config_.relevant_cap);
    miss.relevant.reserve(leaves.size());
    for (const Leaf* l : leaves) miss.relevant.push_back(l->tmpl);
    return miss;
}

void ParseTree::collect(const Node& node, std::vector<const Leaf*>& out) const {
    if (node.leaf) out.push_back(&*node.leaf);
    for (const auto& [_, child] : node.constants) collect(*child, out);
    if (node.wildcard) collect(*node.wildcard, out);
}

ParseTree::Node* ParseTree::find_node(const Template& tmpl) const {
    Node* node = root_.get();
    for (const auto& tok : tmpl.tokens()) {
        if (tok.is_wildcard()) {
            node = node->wildcard.get();
        } else {
            auto it = node->constants.find(tok.text());
            node = it == node->constants.end() ? nullptr : it->second.get();
        }
        if (node == nullptr) return nullptr;
    }
    return node->leaf ? node : nullptr;
}

bool ParseTree::insert(const Template& tmpl, std::size_t match_count) {
    if (tmpl.empty()) throw std::invalid_argument("cannot insert an empty template");
    Node* node = root_.get();
    for (const auto& tok : tmpl.tokens()) {
        std::unique_ptr<Node>* slot = nullptr;
        if (tok.is_wildcard()) {
            slot = &node->wildcard;
        } else {
            auto it = node->constants.find(tok.text());
            if (it == node->constants.end()) it = node->constants.emplace(tok.text(), nullptr).first;
            slot = &it->second;
        }
        if (!*slot) {
            *slot = std::make_unique<Node>();
            (*slot)->id = next_node_id_++;
            (*slot)->depth = node->depth + 1;
        }
        node = slot->get();
    }
    if (node->leaf) {
        node->leaf->match_count += match_count;
        return false;
    }
    node->leaf = Leaf{tmpl, render_template(tmpl), match_count};
    ++leaf_count_;
    return true;
}

bool ParseTree::remove(const Template& tmpl) {
    // Path of (parent, child) pairs so empty nodes can be pruned bottom-up.
    std::vector<std::pair<Node*, const TemplateToken*>> path;
    Node* node = root_.get();
    for (const auto& tok : tmpl.tokens()) {
        path.emplace_back(node, &tok);
        if (tok.is_wildcard()) {
            node = node->wildcard.get();
        } else {
            auto it = node->constants.find(tok.text());
            node = it == node->constants.end() ? nullptr : it->second.get();
        }
        if (node == nullptr) return false;
    }
    if (!node->leaf) return false;
    node->leaf.reset();
    --leaf_count_;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        auto [parent, tok] = *it;
        Node* child = tok->is_wildcard() ? parent->wildcard.get() : parent->constants.find(tok->text())->second.get();
        if (!child->prunable()) break;
        if (tok->is_wildcard())
            parent->wildcard.reset();
        else
            parent->constants.erase(parent->constants.find(tok->text()));
    }
    return true;
}

bool ParseTree::contains(const Template& tmpl) const { return find_node(tmpl) != nullptr; }

bool ParseTree::record_hit(const Template& tmpl) {
    Node* node = find_node(tmpl);
    if (node == nullptr) return false;
    ++node->leaf->match_count;
    return true;
}

std::optional<std::size_t> ParseTree::match_count(const Template& tmpl) const {
    const Node* node = find_node(tmpl);
    if (node == nullptr) return std::nullopt;
    return node->leaf->match_count;
}

AbsorbResult ParseTree::merge_into(const Template& merged, const Template& partner, std::span<const Template> members) {
    AbsorbResult result{partner, merged, {}};
    std::size_t count = 0;
    for (const auto& m : members) {
        if (auto c = match_count(m)) {
            count += *c;
            remove(m);
            result.replaced.push_back(m);
        }
    }
    insert(merged, count);
    return result;
}

AbsorbResult ParseTree::absorb(const Template& corrected, std::span<const Template> relevant) {
    if (corrected.empty()) throw std::invalid_argument("cannot absorb an empty template");
    const auto spelled = corrected.spellings();

    // Highest-similarity relevant template; ties prefer an equal-length partner, then input order.
    std::optional<std::size_t> best;
    double best_sim = -1.0;
    std::vector<double> sims(relevant.size());
    for (std::size_t i = 0; i < relevant.size(); ++i) {
        sims[i] = similarity(spelled, relevant[i].spellings());
        const bool better = sims[i] > best_sim ||
                            (sims[i] == best_sim && relevant[i].size() == corrected.size() && relevant[*best].size() != corrected.size());
        if (better) {
            best = i;
            best_sim = sims[i];
        }
    }

    if (best && best_sim >= config_.similarity_threshold && relevant[*best].size() == corrected.size()) {
        const Template& partner = relevant[*best];
        const Template merged = positional_merge(corrected, partner);
        const Template members[] = {partner};
        return merge_into(merged, partner, members);
    }

    // Equal-length templates grouped by (score, divergent position set).
    struct Group {
        double score;
        std::vector<std::size_t> positions;
        std::vector<std::size_t> members;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < relevant.size(); ++i) {
        if (relevant[i].size() != corrected.size()) continue;
        std::vector<std::size_t> positions;
        for (std::size_t p = 0; p < corrected.size(); ++p)
            if (!(corrected.tokens()[p] == relevant[i].tokens()[p])) positions.push_back(p);
        if (positions.empty()) continue;
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const Group& g) { return g.score == sims[i] && g.positions == positions; });
        if (it == groups.end())
            groups.push_back({sims[i], std::move(positions), {i}});
        else
            it->members.push_back(i);
    }
    std::stable_sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.positions < b.positions;
    });

    for (const auto& g : groups) {
        bool diverse = false;
        for (std::size_t p : g.positions) {
            std::set<std::string_view> distinct{corrected.tokens()[p].spelling()};
            for (std::size_t m : g.members) distinct.insert(relevant[m].tokens()[p].spelling());
            if (distinct.size() > config_.divergence_threshold) {
                diverse = true;
                break;
            }
        }
        if (!diverse) continue;
        std::vector<TemplateToken> tokens = corrected.tokens();
        for (std::size_t p : g.positions) tokens[p] = TemplateToken::wildcard();
        std::vector<Template> members;
        for (std::size_t m : g.members) members.push_back(relevant[m]);
        return merge_into(Template{std::move(tokens)}, relevant[g.members.front()], members);
    }

    insert(corrected);
    return AbsorbResult{std::nullopt, corrected, {}};
}

std::vector<StoredTemplate> ParseTree::templates() const {
    std::vector<const Leaf*> leaves;
    collect(*root_, leaves);
    std::vector<StoredTemplate> out;
    out.reserve(leaves.size());
    for (const Leaf* l : leaves) out.push_back({l->tmpl, l->match_count});
    return out;
}

void ParseTree::save(std::ostream& out) const {
    for (const auto& st : templates()) out << render_template(st.tmpl) << '\t' << st.match_count << '\n';
}

ParseTree ParseTree::load(std::istream& in, ParseTreeConfig config) {
    ParseTree tree{config};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos) throw IoError("tree file line " + std::to_string(lineno) + ": missing tab separator");
        std::size_t count = 0;
        try {
            count = std::stoull(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw IoError("tree file line " + std::to_string(lineno) + ": bad match count");
        }
        Template tmpl = parse_template_string(line.substr(0, tab));
        if (tmpl.empty()) throw IoError("tree file line " + std::to_string(lineno) + ": empty template");
        tree.insert(tmpl, count);
    }
    return tree;
}

}  // namespace logsieve
