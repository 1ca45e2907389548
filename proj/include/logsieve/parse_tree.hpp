#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "logsieve/core.hpp"

namespace logsieve {

struct ParseTreeConfig {
    double similarity_threshold = 0.8;
    std::size_t divergence_threshold = 5;
    std::size_t relevant_cap = 64;
    /// A miss that matches no edge out of the root treats the root as the stopping node and
    /// reports every stored template as relevant. When false such a miss reports nothing.
    bool relevant_from_root = true;
};

struct TreeHit {
    Template tmpl;
    std::vector<VariableBinding> bindings;
};

struct TreeMiss {
    std::vector<Template> relevant;
};

using MatchOutcome = std::variant<TreeHit, TreeMiss>;

struct AbsorbResult {
    std::optional<Template> merged_with;
    Template stored;
    /// Leaves removed by the merge (empty when `corrected` was inserted as-is).
    std::vector<Template> replaced;
};

struct StoredTemplate {
    Template tmpl;
    std::size_t match_count = 0;
};

/**
 * Trie over coarse template tokens. A constant edge consumes exactly one equal token, a
 * wildcard edge one or more tokens. Leaves hold complete templates.
 *
 * When several leaves match a query, the winner is the one whose wildcards consume the
 * fewest tokens, then the one with fewest wildcards, then the lexicographically smallest
 * rendering. All three depend only on the leaf, so the search only needs the reachable set.
 */
class ParseTree {
public:
    explicit ParseTree(ParseTreeConfig config = {});
    ~ParseTree();
    ParseTree(ParseTree&&) noexcept;
    ParseTree& operator=(ParseTree&&) noexcept;

    [[nodiscard]] MatchOutcome match(std::span<const std::string> tokens) const;

    /// Returns true when a new leaf was created.
    bool insert(const Template& tmpl, std::size_t match_count = 0);
    bool remove(const Template& tmpl);
    [[nodiscard]] bool contains(const Template& tmpl) const;

    AbsorbResult absorb(const Template& corrected, std::span<const Template> relevant);

    /// Bumps the match counter of a stored leaf. Returns false when `tmpl` is not stored.
    bool record_hit(const Template& tmpl);
    [[nodiscard]] std::optional<std::size_t> match_count(const Template& tmpl) const;

    [[nodiscard]] std::size_t leaf_count() const { return leaf_count_; }
    /// Stored templates in depth-first order (constant children by token, then the wildcard child).
    [[nodiscard]] std::vector<StoredTemplate> templates() const;

    [[nodiscard]] const ParseTreeConfig& config() const { return config_; }

    /// Line format: "<rendered template>\t<match count>".
    void save(std::ostream& out) const;
    static ParseTree load(std::istream& in, ParseTreeConfig config = {});

private:
    struct Node;
    struct Leaf;

    Node* find_node(const Template& tmpl) const;
    void collect(const Node& node, std::vector<const Leaf*>& out) const;
    AbsorbResult merge_into(const Template& merged, const Template& partner, std::span<const Template> members);

    ParseTreeConfig config_;
    std::unique_ptr<Node> root_;
    std::size_t leaf_count_ = 0;
    std::size_t next_node_id_ = 0;
};

/// Token-level acceptance test: constants consume one equal token, wildcards one or more.
/// Returns the leftmost-shortest wildcard bindings (tokens joined by one space) on success.
std::optional<std::vector<VariableBinding>> match_tokens(const Template& tmpl, std::span<const std::string> tokens);

/// Replaces every position where the two equal-length templates disagree with the wildcard.
Template positional_merge(const Template& a, const Template& b);

}  // namespace logsieve
