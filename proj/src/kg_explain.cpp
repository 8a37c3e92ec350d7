#include "prokno/kg_explain.hpp"
#include "prokno/text.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace prokno {

bool is_is_a(std::string_view relation) { return relation == "is-a" || relation == "is_a"; }

KnowledgeGraph::KnowledgeGraph(std::map<std::string, std::string> nodes, std::vector<KgEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (const auto& [id, _] : nodes_) {
        if (id.empty()) throw Error(ErrorCode::ValidationError, "empty node id", "/nodes");
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto& e = edges_[i];
        const std::string path = "/edges/" + std::to_string(i);
        if (!nodes_.contains(e.child) || !nodes_.contains(e.parent)) {
            throw Error(ErrorCode::ValidationError,
                        path + ": dangling edge to '" + (nodes_.contains(e.child) ? e.parent : e.child) + "'", path);
        }
        if (e.relation.empty()) throw Error(ErrorCode::ValidationError, path + ": empty relation", path);
        if (is_is_a(e.relation)) parents_[e.child].push_back(e.parent);
    }
    for (auto& [_, ps] : parents_) {
        std::sort(ps.begin(), ps.end());
        ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    }

    enum class Mark { White, Grey, Black };
    std::unordered_map<std::string, Mark> mark;
    std::function<void(const std::string&)> visit = [&](const std::string& id) {
        mark[id] = Mark::Grey;
        for (const auto& p : parents(id)) {
            if (mark[p] == Mark::Grey) {
                throw Error(ErrorCode::ValidationError, "is-a cycle through '" + id + "' -> '" + p + "'", "/edges");
            }
            if (mark[p] == Mark::White) visit(p);
        }
        mark[id] = Mark::Black;
    };
    for (const auto& [id, _] : nodes_) {
        if (mark[id] == Mark::White) visit(id);
    }
}

KnowledgeGraph KnowledgeGraph::from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "knowledge graph must be a JSON object");
    auto n = j.find("nodes");
    if (n == j.end() || !n->is_object()) throw Error(ErrorCode::SchemaError, "/nodes: expected object", "/nodes");
    std::map<std::string, std::string> nodes;
    for (const auto& [id, label] : n->items()) {
        if (!label.is_string()) throw Error(ErrorCode::SchemaError, "/nodes/" + id + ": expected label string", "/nodes/" + id);
        nodes.emplace(id, label.get<std::string>());
    }
    std::vector<KgEdge> edges;
    if (auto e = j.find("edges"); e != j.end()) {
        if (!e->is_array()) throw Error(ErrorCode::SchemaError, "/edges: expected array", "/edges");
        for (std::size_t i = 0; i < e->size(); ++i) {
            const Json& triple = (*e)[i];
            const std::string path = "/edges/" + std::to_string(i);
            if (!triple.is_array() || triple.size() != 3 || !triple[0].is_string() || !triple[1].is_string() ||
                !triple[2].is_string()) {
                throw Error(ErrorCode::SchemaError, path + ": expected [child, relation, parent]", path);
            }
            edges.push_back({triple[0].get<std::string>(), triple[1].get<std::string>(), triple[2].get<std::string>()});
        }
    }
    return KnowledgeGraph(std::move(nodes), std::move(edges));
}

KnowledgeGraph KnowledgeGraph::load(std::string_view bytes) {
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed knowledge graph JSON: ") + e.what());
    }
    return from_json(j);
}

KnowledgeGraph KnowledgeGraph::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load(buf.str());
}

const std::vector<std::string>& KnowledgeGraph::parents(const std::string& id) const {
    static const std::vector<std::string> none;
    auto it = parents_.find(id);
    return it == parents_.end() ? none : it->second;
}

bool KnowledgeGraph::has_is_a_edge(const std::string& child, const std::string& parent) const {
    const auto& ps = parents(child);
    return std::binary_search(ps.begin(), ps.end(), parent);
}

Json KnowledgeGraph::to_json() const {
    Json edges = Json::array();
    for (const auto& e : edges_) edges.push_back({e.child, e.relation, e.parent});
    return Json{{"nodes", nodes_}, {"edges", edges}};
}

std::optional<Anchor> anchor_phrase(std::string_view phrase, const KnowledgeGraph& kg,
                                    const LabelSimilarity& similarity, double threshold) {
    if (normalize(phrase).empty()) throw Error(ErrorCode::EmptyPhrase, "phrase has no tokens");
    std::optional<Anchor> best;
    for (const auto& [id, label] : kg.nodes()) {
        const double s = similarity(phrase, label);
        if (!best || s > best->similarity) best = Anchor{id, s};
    }
    if (!best || best->similarity < threshold) return std::nullopt;
    return best;
}

ExplainConfig ExplainConfig::from_json(const Json& j) {
    ExplainConfig c;
    if (!j.is_object()) return c;
    c.anchor_threshold = j.value("theta_anchor", c.anchor_threshold);
    c.stop_threshold = j.value("theta_stop", c.stop_threshold);
    c.max_depth = j.value("max_depth", c.max_depth);
    return c;
}

Json ExplainConfig::to_json() const {
    return Json{{"theta_anchor", anchor_threshold}, {"theta_stop", stop_threshold}, {"max_depth", max_depth}};
}

const TreeNode* ContextTree::find(std::string_view node_id) const {
    for (const auto& n : nodes) {
        if (n.node_id == node_id) return &n;
    }
    return nullptr;
}

Json to_json(const ContextTree& tree) {
    Json nodes = Json::array();
    for (const auto& n : tree.nodes) {
        nodes.push_back({{"id", n.node_id},
                         {"label", n.label},
                         {"depth", n.depth},
                         {"anchor_phrases", n.anchor_phrases},
                         {"similarity", n.similarity},
                         {"stop_reason", n.stop_reason.empty() ? Json(nullptr) : Json(n.stop_reason)},
                         {"stop_match", n.stop_match.empty() ? Json(nullptr) : Json(n.stop_match)}});
    }
    Json edges = Json::array();
    for (const auto& [child, parent] : tree.edges) edges.push_back({child, parent});
    Json roots = Json::array();
    for (const auto& r : tree.roots) {
        roots.push_back({{"phrase", r.phrase}, {"node_id", r.node_id}, {"similarity", r.similarity}});
    }
    return Json{{"nodes", nodes}, {"edges", edges}, {"roots", roots}, {"unanchored", tree.unanchored}};
}

ContextTree build_context_tree(const std::vector<std::string>& phrases, const KnowledgeGraph& kg,
                               const LabelSimilarity& similarity, const ExplainConfig& config) {
    ContextTree tree;
    std::map<std::string, std::vector<std::string>> anchored;  // node id -> phrases
    std::map<std::string, double> anchor_similarity;
    for (const auto& phrase : phrases) {
        if (auto a = anchor_phrase(phrase, kg, similarity, config.anchor_threshold)) {
            anchored[a->node_id].push_back(phrase);
            anchor_similarity[a->node_id] = a->similarity;
            tree.roots.push_back({phrase, a->node_id, a->similarity});
        } else {
            tree.unanchored.push_back(phrase);
        }
    }
    if (anchored.empty()) throw Error(ErrorCode::NoAnchorsFound, "no phrase anchored in the knowledge graph");

    std::sort(tree.roots.begin(), tree.roots.end(), [](const TreeRoot& a, const TreeRoot& b) {
        return std::tie(a.node_id, a.phrase) < std::tie(b.node_id, b.phrase);
    });
    std::sort(tree.unanchored.begin(), tree.unanchored.end());

    // Full is-a ancestry per anchor: a node never stops against anchors beneath it.
    std::map<std::string, std::set<std::string>> ancestry;
    for (const auto& [anchor, _] : anchored) {
        auto& seen = ancestry[anchor];
        std::vector<std::string> stack{anchor};
        while (!stack.empty()) {
            const std::string id = stack.back();
            stack.pop_back();
            for (const auto& p : kg.parents(id)) {
                if (seen.insert(p).second) stack.push_back(p);
            }
        }
    }

    std::map<std::string, std::size_t> index;
    std::set<std::pair<std::string, std::string>> edge_set;
    std::deque<std::string> queue;
    for (auto& [anchor, ps] : anchored) {
        std::sort(ps.begin(), ps.end());
        index.emplace(anchor, tree.nodes.size());
        tree.nodes.push_back({anchor, kg.label(anchor), 0, ps, anchor_similarity[anchor], {}, {}});
        queue.push_back(anchor);
    }

    auto stop_similarity = [&](const std::string& reached) {
        double best = -1.0;
        std::string match;
        auto consider = [&](const std::string& target) {
            const double s = similarity(kg.label(reached), kg.label(target));
            if (s > best) {
                best = s;
                match = target;
            }
        };
        for (const auto& [anchor, ancestors] : ancestry) {
            if (anchor == reached || ancestors.contains(reached)) continue;
            consider(anchor);
            for (const auto& p : kg.parents(anchor)) {
                if (p != reached && index.contains(p)) consider(p);
            }
        }
        return std::pair{std::max(best, 0.0), match};
    };

    while (!queue.empty()) {
        const std::string current = queue.front();
        queue.pop_front();
        const int depth = tree.nodes[index.at(current)].depth;
        const auto& parents = kg.parents(current);
        if (parents.empty()) {
            tree.nodes[index.at(current)].stop_reason = "no_parents";
            continue;
        }
        if (depth >= config.max_depth) {
            tree.nodes[index.at(current)].stop_reason = "max_depth";
            continue;
        }
        for (const auto& parent : parents) {
            if (edge_set.emplace(current, parent).second) tree.edges.emplace_back(current, parent);
            if (index.contains(parent)) continue;
            auto [s, match] = stop_similarity(parent);
            TreeNode node{parent, kg.label(parent), depth + 1, {}, s, {}, {}};
            const bool stop = s >= config.stop_threshold;
            if (stop) {
                node.stop_reason = "similarity";
                node.stop_match = match;
            }
            index.emplace(parent, tree.nodes.size());
            tree.nodes.push_back(std::move(node));
            if (!stop) queue.push_back(parent);
        }
    }
    return tree;
}

}  // namespace prokno
