#include "prokno/qgen.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace prokno;
using K = Tag::Kind;

namespace {

CandidateQuestion cq(std::string id, std::string text, Tag tag, std::int64_t rank = 1) {
    return {std::move(id), std::move(text), tag, rank, "batch"};
}

// Fixed confidence per hypothesis text; never contradicts.
class TableScorer final : public EntailmentScorer {
public:
    explicit TableScorer(std::map<std::string, double> table) : table_(std::move(table)) {}
    EntailmentVerdict score(std::string_view p, std::string_view h) const override {
        if (p == h) return {Relation::Entail, 1.0};
        auto it = table_.find(std::string(h));
        return {Relation::Neutral, it == table_.end() ? 0.0 : it->second};
    }

private:
    std::map<std::string, double> table_;
};

std::string random_sentence(std::mt19937& rng) {
    static const std::vector<std::string> words{"do", "you", "feel", "anxious", "not", "sleep", "often", "why",
                                                "pain", "help", "Worry", "never", "mood", "low", "take", "it"};
    std::string s;
    const int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + words[rng() % words.size()];
    return s + "?";
}

}  // namespace

TEST(DefaultTagRules, FourRulesVerbatim) {
    const auto rules = default_tag_rules();
    const std::vector<K> all{K::YesNo, K::DegreeFrequency, K::Causes, K::TreatmentRemedies, K::SideEffectsInfo};
    const std::map<K, K> expected{{K::YesNo, K::DegreeFrequency},
                                  {K::DegreeFrequency, K::Causes},
                                  {K::Causes, K::TreatmentRemedies},
                                  {K::TreatmentRemedies, K::SideEffectsInfo}};
    for (K from : all) {
        for (K to : all) {
            const auto it = expected.find(from);
            EXPECT_EQ(rules.allows(Tag(from), Tag(to)), it != expected.end() && it->second == to);
        }
    }
    EXPECT_EQ(rules.to_json().size(), 4u);
    EXPECT_FALSE(rules.to_json().contains("SideEffectsInfo"));
}

TEST(TagRuleSet, LoadsSlashForms) {
    const auto rules = TagRuleSet::from_json(Json::parse(R"({"Yes/No": ["Degree/Frequency"]})"));
    EXPECT_TRUE(rules.allows(Tag(K::YesNo), Tag(K::DegreeFrequency)));
    EXPECT_THROW(TagRuleSet::from_json(Json::object()), Error);
}

TEST(BaselineEntailment, Identity) {
    const auto v = baseline_entailment("do you feel anxious", "do you feel anxious");
    EXPECT_EQ(v.relation, Relation::Entail);
    EXPECT_DOUBLE_EQ(v.confidence, 1.0);
}

TEST(BaselineEntailment, NegatedHypothesisContradicts) {
    EXPECT_EQ(baseline_entailment("you want to end your life", "you do not want to end your life").relation,
              Relation::Contradict);
    EXPECT_EQ(baseline_entailment("you do not want to end your life", "you want to end your life").relation,
              Relation::Contradict);
}

TEST(BaselineEntailment, UnrelatedQuestionsAreNeutralWithZeroConfidence) {
    const auto v = baseline_entailment("how often do you feel down", "what causes your low mood");
    EXPECT_EQ(v.relation, Relation::Neutral);
    EXPECT_DOUBLE_EQ(v.confidence, 0.0);
}

TEST(BaselineEntailment, ContainmentEntails) {
    // h tokens {do, you, feel, anxious} all appear in p.
    const auto v = baseline_entailment("do you feel anxious at night", "do you feel anxious");
    EXPECT_EQ(v.relation, Relation::Entail);
    EXPECT_DOUBLE_EQ(v.confidence, 1.0);
    // Reverse direction: 4 of 6 hypothesis tokens covered, 0.667 >= 0.6.
    EXPECT_EQ(baseline_entailment("do you feel anxious", "do you feel anxious at night").relation, Relation::Entail);
    LexicalEntailmentConfig strict;
    strict.entail_threshold = 0.7;
    EXPECT_NE(baseline_entailment("do you feel anxious", "do you feel anxious at night", strict).relation,
              Relation::Entail);
}

TEST(BaselineEntailment, EmptyText) {
    EXPECT_THROW(baseline_entailment("", "hello"), Error);
    EXPECT_THROW(baseline_entailment("hello", "?!"), Error);
}

TEST(BaselineEntailment, ScorerAxiomOnRandomStrings) {
    std::mt19937 rng(11);
    const LexicalEntailmentScorer scorer;
    for (int i = 0; i < 100; ++i) {
        const std::string s = random_sentence(rng);
        const auto v = scorer.score(s, s);
        EXPECT_EQ(v.relation, Relation::Entail) << s;
        EXPECT_DOUBLE_EQ(v.confidence, 1.0) << s;
    }
}

TEST(BaselineEntailment, RaisingThetaEntailNeverCreatesEntail) {
    std::mt19937 rng(5);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < 300; ++i) pairs.emplace_back(random_sentence(rng), random_sentence(rng));
    for (double lo = 0.0; lo < 1.0; lo += 0.1) {
        LexicalEntailmentConfig a, b;
        a.entail_threshold = lo;
        b.entail_threshold = lo + 0.1;
        for (const auto& [p, h] : pairs) {
            if (baseline_entailment(p, h, a).relation == Relation::Neutral) {
                EXPECT_NE(baseline_entailment(p, h, b).relation, Relation::Entail) << p << " | " << h;
            }
        }
    }
}

TEST(ValidateNext, AllowedTransitionAccepted) {
    const std::vector<CandidateQuestion> history{cq("h1", "Do you feel anxious?", Tag(K::YesNo))};
    const auto d = validate_next(history, cq("c1", "How often does it happen?", Tag(K::DegreeFrequency)),
                                 default_tag_rules(), LexicalEntailmentScorer());
    EXPECT_TRUE(d.accepted);
}

TEST(ValidateNext, DisallowedTransitionRejected) {
    const std::vector<CandidateQuestion> history{cq("h1", "Do you feel anxious?", Tag(K::YesNo))};
    const auto d = validate_next(history, cq("c1", "Have you tried therapy?", Tag(K::TreatmentRemedies)),
                                 default_tag_rules(), LexicalEntailmentScorer());
    EXPECT_FALSE(d.accepted);
    EXPECT_EQ(d.reason, "tag");
}

TEST(ValidateNext, ContradictionNamesTheHistoryItem) {
    const std::vector<CandidateQuestion> history{
        cq("h1", "Do you feel anxious most days?", Tag(K::YesNo)),
        cq("h2", "How often do you sleep well at night?", Tag(K::DegreeFrequency)),
        cq("h3", "What causes your worry?", Tag(K::Causes))};
    const auto d = validate_next(history, cq("c1", "How often do you not sleep well at night?", Tag(K::TreatmentRemedies)),
                                 default_tag_rules(), LexicalEntailmentScorer());
    EXPECT_FALSE(d.accepted);
    EXPECT_EQ(d.reason, "contradiction");
    EXPECT_EQ(d.history_index, std::optional<std::size_t>(1));
    EXPECT_EQ(d.history_id, "h2");
}

TEST(ValidateNext, EmptyHistoryAcceptsAnyTag) {
    EXPECT_TRUE(validate_next({}, cq("c", "Anything?", Tag::other("Greeting")), default_tag_rules(),
                              LexicalEntailmentScorer())
                    .accepted);
}

TEST(FilterAndRank, OrdersByRank) {
    const std::vector<CandidateQuestion> history{cq("h", "Do you worry?", Tag(K::YesNo))};
    const std::vector<CandidateQuestion> cands{cq("a", "How often a?", Tag(K::DegreeFrequency), 2),
                                               cq("b", "How often b?", Tag(K::DegreeFrequency), 1),
                                               cq("c", "How often c?", Tag(K::DegreeFrequency), 3)};
    const auto r = filter_and_rank(cands, history, default_tag_rules(), TableScorer({}));
    ASSERT_EQ(r.ranked.size(), 3u);
    EXPECT_EQ(r.ranked[0].candidate.id, "b");
    EXPECT_EQ(r.ranked[1].candidate.id, "a");
    EXPECT_EQ(r.ranked[2].candidate.id, "c");
}

TEST(FilterAndRank, ConfidenceBreaksRankTies) {
    const std::vector<CandidateQuestion> history{cq("h", "Do you worry?", Tag(K::YesNo))};
    const std::vector<CandidateQuestion> cands{cq("a", "low", Tag(K::DegreeFrequency), 1),
                                               cq("b", "high", Tag(K::DegreeFrequency), 1)};
    const auto r = filter_and_rank(cands, history, default_tag_rules(), TableScorer({{"low", 0.4}, {"high", 0.9}}));
    ASSERT_EQ(r.ranked.size(), 2u);
    EXPECT_EQ(r.ranked[0].candidate.id, "b");
    EXPECT_DOUBLE_EQ(r.ranked[0].against_last.confidence, 0.9);
}

TEST(FilterAndRank, AllRejected) {
    const std::vector<CandidateQuestion> history{cq("h", "Do you worry?", Tag(K::YesNo))};
    const std::vector<CandidateQuestion> cands{cq("a", "x?", Tag(K::Causes)), cq("b", "y?", Tag(K::Causes)),
                                               cq("c", "z?", Tag(K::SideEffectsInfo))};
    const auto r = filter_and_rank(cands, history, default_tag_rules(), LexicalEntailmentScorer());
    EXPECT_TRUE(r.ranked.empty());
    ASSERT_EQ(r.rejected.size(), 3u);
    for (const auto& rj : r.rejected) EXPECT_EQ(rj.decision.reason, "tag");
}

TEST(FilterAndRank, PermutationInvariant) {
    std::mt19937 rng(3);
    const std::vector<Tag> tags{Tag(K::YesNo), Tag(K::DegreeFrequency), Tag(K::Causes)};
    const std::vector<CandidateQuestion> history{cq("h", "Do you feel anxious?", Tag(K::YesNo))};
    for (int round = 0; round < 50; ++round) {
        std::vector<CandidateQuestion> cands;
        for (int i = 0; i < 8; ++i) {
            cands.push_back(cq("c" + std::to_string(rng() % 5), random_sentence(rng), tags[rng() % tags.size()],
                               1 + static_cast<std::int64_t>(rng() % 3)));
        }
        const std::string want = to_json(filter_and_rank(cands, history, default_tag_rules(), LexicalEntailmentScorer())).dump();
        for (int k = 0; k < 5; ++k) {
            std::shuffle(cands.begin(), cands.end(), rng);
            EXPECT_EQ(to_json(filter_and_rank(cands, history, default_tag_rules(), LexicalEntailmentScorer())).dump(), want);
        }
    }
}

TEST(FilterAndRank, SequencesFromYesNoFollowTheCycle) {
    std::mt19937 rng(17);
    const std::vector<Tag> tags{Tag(K::YesNo), Tag(K::DegreeFrequency), Tag(K::Causes), Tag(K::TreatmentRemedies),
                                Tag(K::SideEffectsInfo), Tag::other("Chitchat")};
    const std::vector<K> cycle{K::YesNo, K::DegreeFrequency, K::Causes, K::TreatmentRemedies, K::SideEffectsInfo};
    const auto rules = default_tag_rules();
    const LexicalEntailmentScorer scorer;
    for (int stream = 0; stream < 200; ++stream) {
        std::vector<CandidateQuestion> history{cq("start", "Do you feel anxious?", Tag(K::YesNo))};
        for (int step = 0; step < 6; ++step) {
            std::vector<CandidateQuestion> cands;
            for (int i = 0; i < 6; ++i) {
                cands.push_back(cq("s" + std::to_string(step) + "c" + std::to_string(i), random_sentence(rng),
                                   tags[rng() % tags.size()], 1 + static_cast<std::int64_t>(rng() % 4)));
            }
            const auto r = filter_and_rank(cands, history, rules, scorer);
            if (r.ranked.empty()) continue;
            history.push_back(r.ranked.front().candidate);
        }
        ASSERT_LE(history.size(), cycle.size());
        for (std::size_t i = 0; i < history.size(); ++i) EXPECT_EQ(history[i].tag, Tag(cycle[i]));
    }
}

TEST(Candidates, JsonLines) {
    const auto c = parse_candidates_jsonl(
        "{\"id\":\"q1\",\"text\":\"How often?\",\"tag\":\"Degree/Frequency\",\"rank\":2,\"source\":\"api\"}\n\n");
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].tag, Tag(K::DegreeFrequency));
    EXPECT_THROW(parse_candidates_jsonl("{\"id\":\"q\",\"text\":\"\",\"tag\":\"Causes\",\"rank\":1}"), Error);
    EXPECT_THROW(parse_candidates_jsonl("{\"id\":\"q\",\"text\":\"x\",\"tag\":\"Causes\",\"rank\":0}"), Error);
}
