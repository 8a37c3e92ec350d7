#pragma once

#include "prokno/pk_model.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prokno {

struct KgEdge {
    std::string child;
    std::string relation;
    std::string parent;

    bool operator==(const KgEdge&) const = default;
};

class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    /// Throws Error{ValidationError} on dangling edges or is-a cycles.
    KnowledgeGraph(std::map<std::string, std::string> nodes, std::vector<KgEdge> edges);

    static KnowledgeGraph from_json(const Json& j);
    static KnowledgeGraph load(std::string_view bytes);
    static KnowledgeGraph load_file(const std::string& path);

    const std::map<std::string, std::string>& nodes() const noexcept { return nodes_; }
    const std::vector<KgEdge>& edges() const noexcept { return edges_; }
    const std::string& label(const std::string& id) const { return nodes_.at(id); }
    bool contains(const std::string& id) const { return nodes_.contains(id); }

    /// Direct is-a parents, sorted by id.
    const std::vector<std::string>& parents(const std::string& id) const;
    bool has_is_a_edge(const std::string& child, const std::string& parent) const;

    Json to_json() const;

private:
    std::map<std::string, std::string> nodes_;
    std::vector<KgEdge> edges_;
    std::map<std::string, std::vector<std::string>> parents_;
};

bool is_is_a(std::string_view relation);

using LabelSimilarity = std::function<double(std::string_view, std::string_view)>;

struct Anchor {
    std::string node_id;
    double similarity = 0.0;
    bool operator==(const Anchor&) const = default;
};

/// Best-matching node label at or above `threshold`; ties go to the smaller id.
/// Throws Error{EmptyPhrase}.
std::optional<Anchor> anchor_phrase(std::string_view phrase, const KnowledgeGraph& kg,
                                    const LabelSimilarity& similarity, double threshold);

struct ExplainConfig {
    double anchor_threshold = 0.6;
    double stop_threshold = 0.8;
    int max_depth = 6;

    static ExplainConfig from_json(const Json& j);
    Json to_json() const;
};

struct TreeNode {
    std::string node_id;
    std::string label;
    int depth = 0;
    std::vector<std::string> anchor_phrases;
    /// Anchor similarity for roots; for expanded nodes, the highest similarity
    /// to the stop targets when the node was reached.
    double similarity = 0.0;
    std::string stop_reason;  // "", "similarity", "max_depth" or "no_parents"
    std::string stop_match;   // node whose label triggered a similarity stop

    bool operator==(const TreeNode&) const = default;
};

struct TreeRoot {
    std::string phrase;
    std::string node_id;
    double similarity = 0.0;
    bool operator==(const TreeRoot&) const = default;
};

struct ContextTree {
    std::vector<TreeNode> nodes;
    std::vector<std::pair<std::string, std::string>> edges;  // (child, parent)
    std::vector<TreeRoot> roots;
    std::vector<std::string> unanchored;

    const TreeNode* find(std::string_view node_id) const;
    bool operator==(const ContextTree&) const = default;
};

Json to_json(const ContextTree& tree);

/// Anchors every phrase, then expands is-a parents breadth-first (roots in
/// node-id order). A newly reached node stops its branch when its label is at
/// least `stop_threshold` similar to another branch's anchor or to that
/// anchor's one-hop parent already in the tree; `max_depth` bounds every
/// branch. Throws Error{NoAnchorsFound}.
ContextTree build_context_tree(const std::vector<std::string>& phrases, const KnowledgeGraph& kg,
                               const LabelSimilarity& similarity, const ExplainConfig& config = {});

}  // namespace prokno
