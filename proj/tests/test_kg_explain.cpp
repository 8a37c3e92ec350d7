#include "prokno/kg_explain.hpp"
#include "prokno/text.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace prokno;

namespace {

KnowledgeGraph chain() {
    return KnowledgeGraph({{"N1", "panic attack"}, {"N2", "anxiety disorder"}, {"N3", "mental disorder"}},
                          {{"N1", "is-a", "N2"}, {"N2", "is-a", "N3"}});
}

// N4's parent N5 carries the same label as N2.
KnowledgeGraph duplicate_label() {
    return KnowledgeGraph({{"N1", "panic attack"},
                           {"N2", "anxiety disorder"},
                           {"N3", "mental disorder"},
                           {"N4", "social phobia"},
                           {"N5", "anxiety disorder"},
                           {"N6", "clinical finding"}},
                          {{"N1", "is-a", "N2"}, {"N2", "is-a", "N3"}, {"N4", "is-a", "N5"}, {"N5", "is-a", "N6"}});
}

KnowledgeGraph forest50(std::uint32_t seed) {
    static const std::vector<std::string> words{"sleep", "mood", "pain", "disorder", "finding", "symptom", "anxiety", "loss"};
    std::mt19937 rng(seed);
    std::map<std::string, std::string> nodes;
    std::vector<KgEdge> edges;
    auto id = [](int i) { return std::string("n") + (i < 10 ? "0" : "") + std::to_string(i); };
    for (int i = 0; i < 50; ++i) {
        std::string label;
        const int n = 1 + static_cast<int>(rng() % 3);
        for (int k = 0; k < n; ++k) label += (k ? " " : "") + words[rng() % words.size()];
        nodes[id(i)] = label;
        if (i >= 4) edges.push_back({id(i), "is-a", id(static_cast<int>(rng() % i))});
    }
    return KnowledgeGraph(nodes, edges);
}

std::set<std::string> node_ids(const ContextTree& t) {
    std::set<std::string> out;
    for (const auto& n : t.nodes) out.insert(n.node_id);
    return out;
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST(KnowledgeGraph, ChainHasTwoEdges) {
    EXPECT_EQ(chain().edges().size(), 2u);
    EXPECT_EQ(chain().parents("N1"), std::vector<std::string>{"N2"});
}

TEST(KnowledgeGraph, DanglingEdge) {
    try {
        KnowledgeGraph({{"N1", "a"}}, {{"N1", "is-a", "N9"}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ValidationError);
    }
}

TEST(KnowledgeGraph, IsACycle) {
    EXPECT_THROW(KnowledgeGraph({{"N1", "a"}, {"N2", "b"}}, {{"N1", "is-a", "N2"}, {"N2", "is_a", "N1"}}), Error);
    // Cycles through other relations are fine.
    EXPECT_NO_THROW(KnowledgeGraph({{"N1", "a"}, {"N2", "b"}}, {{"N1", "is-a", "N2"}, {"N2", "related-to", "N1"}}));
}

TEST(KnowledgeGraph, LoadAndParseErrors) {
    const auto kg = KnowledgeGraph::load_file(prokno::testing::data_path("kg/demo.kg.json"));
    EXPECT_EQ(kg.label("1001"), "insomnia");
    try {
        KnowledgeGraph::load("{\"nodes\":");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
    EXPECT_EQ(KnowledgeGraph::from_json(kg.to_json()).to_json().dump(), kg.to_json().dump());
}

TEST(AnchorPhrase, ExactLabel) {
    const auto a = anchor_phrase("Anxiety disorder", chain(), token_set_similarity, 0.6);
    ASSERT_TRUE(a.has_value());
    EXPECT_EQ(a->node_id, "N2");
    EXPECT_DOUBLE_EQ(a->similarity, 1.0);
}

TEST(AnchorPhrase, BelowThreshold) {
    EXPECT_FALSE(anchor_phrase("broken leg", chain(), token_set_similarity, 0.6).has_value());
    EXPECT_THROW(anchor_phrase("  ", chain(), token_set_similarity, 0.6), Error);
}

TEST(AnchorPhrase, TieGoesToSmallerId) {
    const auto a = anchor_phrase("anxiety disorder", duplicate_label(), token_set_similarity, 0.6);
    ASSERT_TRUE(a.has_value());
    EXPECT_EQ(a->node_id, "N2");
}

TEST(ContextTree, ChainExpansion) {
    const auto t = build_context_tree({"panic attack"}, chain(), token_set_similarity, {0.6, 1.1, 5});
    ASSERT_EQ(t.nodes.size(), 3u);
    EXPECT_EQ(t.nodes[0].node_id, "N1");
    EXPECT_EQ(t.nodes[1].node_id, "N2");
    EXPECT_EQ(t.nodes[2].node_id, "N3");
    EXPECT_EQ(t.nodes[2].depth, 2);
    EXPECT_EQ(t.nodes[2].stop_reason, "no_parents");
    EXPECT_EQ(t.edges, (std::vector<std::pair<std::string, std::string>>{{"N1", "N2"}, {"N2", "N3"}}));
}

TEST(ContextTree, DuplicateLabelStopsSecondBranch) {
    const auto t = build_context_tree({"panic attack", "social phobia"}, duplicate_label(), token_set_similarity);
    const TreeNode* n5 = t.find("N5");
    ASSERT_NE(n5, nullptr);
    EXPECT_EQ(n5->depth, 1);
    EXPECT_EQ(n5->stop_reason, "similarity");
    EXPECT_EQ(n5->stop_match, "N2");
    EXPECT_DOUBLE_EQ(n5->similarity, 1.0);
    EXPECT_EQ(t.find("N6"), nullptr);
    ASSERT_NE(t.find("N3"), nullptr);
    EXPECT_EQ(t.find("N3")->stop_reason, "no_parents");
}

TEST(ContextTree, MaxDepthBoundsBranches) {
    const auto t = build_context_tree({"panic attack"}, chain(), token_set_similarity, {0.6, 1.1, 1});
    EXPECT_EQ(node_ids(t), (std::set<std::string>{"N1", "N2"}));
    EXPECT_EQ(t.find("N2")->stop_reason, "max_depth");
}

TEST(ContextTree, NoAnchors) {
    try {
        build_context_tree({"broken leg", "fever"}, chain(), token_set_similarity);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoAnchorsFound);
    }
}

TEST(ContextTree, UnanchoredPhrasesAreReported) {
    const auto t = build_context_tree({"panic attack", "fever"}, chain(), token_set_similarity);
    EXPECT_EQ(t.unanchored, std::vector<std::string>{"fever"});
}

TEST(ContextTree, ForestProperties) {
    for (std::uint32_t seed = 1; seed <= 20; ++seed) {
        const auto kg = forest50(seed);
        std::mt19937 rng(seed * 31);
        std::vector<std::string> phrases;
        for (int i = 0; i < 4; ++i) {
            auto it = kg.nodes().begin();
            std::advance(it, rng() % kg.nodes().size());
            phrases.push_back(it->second);
        }
        const ExplainConfig base{0.6, 0.8, 6};
        const auto tree = build_context_tree(phrases, kg, token_set_similarity, base);

        std::set<std::string> anchors;
        for (const auto& r : tree.roots) anchors.insert(r.node_id);
        EXPECT_LE(tree.nodes.size(), anchors.size() * (base.max_depth + 1));
        EXPECT_LE(tree.nodes.size(), kg.nodes().size());
        for (const auto& [child, parent] : tree.edges) EXPECT_TRUE(kg.has_is_a_edge(child, parent));
        for (const auto& n : tree.nodes) {
            if (n.depth == 0) EXPECT_FALSE(n.anchor_phrases.empty());
        }

        auto shuffled = phrases;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_EQ(to_json(build_context_tree(shuffled, kg, token_set_similarity, base)).dump(), to_json(tree).dump());

        std::set<std::string> previous;
        for (double stop = 0.0; stop <= 1.2; stop += 0.1) {
            const auto ids = node_ids(build_context_tree(phrases, kg, token_set_similarity, {0.6, stop, 6}));
            EXPECT_TRUE(subset(previous, ids)) << "seed " << seed << " theta_stop " << stop;
            previous = ids;
        }
        previous.clear();
        for (int depth = 0; depth <= 8; ++depth) {
            const auto ids = node_ids(build_context_tree(phrases, kg, token_set_similarity, {0.6, 0.8, depth}));
            EXPECT_TRUE(subset(previous, ids)) << "seed " << seed << " max_depth " << depth;
            previous = ids;
        }
    }
}
