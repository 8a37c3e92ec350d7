#pragma once

#include "prokno/pk_model.hpp"
#include "prokno/tag.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace prokno {

struct CandidateQuestion {
    std::string id;
    std::string text;
    Tag tag;
    std::int64_t rank = 1;
    std::string source;

    static CandidateQuestion from_json(const Json& j, const std::string& path = {});
    Json to_json() const;
    bool operator==(const CandidateQuestion&) const = default;
};

/// One candidate per non-blank line.
std::vector<CandidateQuestion> parse_candidates_jsonl(std::string_view text);

class TagRuleSet {
public:
    TagRuleSet() = default;
    explicit TagRuleSet(std::map<Tag, std::set<Tag>> transitions);

    static TagRuleSet from_json(const Json& j);

    bool allows(const Tag& from, const Tag& to) const;
    const std::map<Tag, std::set<Tag>>& transitions() const noexcept { return transitions_; }
    Json to_json() const;

    bool operator==(const TagRuleSet&) const = default;

private:
    std::map<Tag, std::set<Tag>> transitions_;
};

/// YesNo -> DegreeFrequency -> Causes -> TreatmentRemedies -> SideEffectsInfo.
TagRuleSet default_tag_rules();

enum class Relation { Entail, Neutral, Contradict };
std::string to_string(Relation r);

struct EntailmentVerdict {
    Relation relation = Relation::Neutral;
    double confidence = 0.0;

    bool operator==(const EntailmentVerdict&) const = default;
};

Json to_json(const EntailmentVerdict& v);

/// Directional (premise, hypothesis) scorer. Implementations must be
/// deterministic and must score any text against itself as entail with
/// confidence 1.0.
class EntailmentScorer {
public:
    virtual ~EntailmentScorer() = default;
    virtual EntailmentVerdict score(std::string_view premise, std::string_view hypothesis) const = 0;
    virtual Json config() const { return Json::object(); }
};

struct LexicalEntailmentConfig {
    double entail_threshold = 0.6;         // directional containment for entail
    double neutral_threshold = 0.3;        // token Jaccard for a scored neutral
    double contradiction_threshold = 0.5;  // content-token Jaccard required with a polarity flip

    static LexicalEntailmentConfig from_json(const Json& j);
    Json to_json() const;
};

/// Deterministic token-overlap baseline. Throws Error{EmptyText} when either
/// side has no tokens.
EntailmentVerdict baseline_entailment(std::string_view premise, std::string_view hypothesis,
                                      const LexicalEntailmentConfig& config = {});

class LexicalEntailmentScorer final : public EntailmentScorer {
public:
    explicit LexicalEntailmentScorer(LexicalEntailmentConfig config = {}) : config_(config) {}
    EntailmentVerdict score(std::string_view premise, std::string_view hypothesis) const override {
        return baseline_entailment(premise, hypothesis, config_);
    }
    Json config() const override { return config_.to_json(); }

private:
    LexicalEntailmentConfig config_;
};

struct CandidateDecision {
    bool accepted = true;
    std::string reason;  // "tag" or "contradiction" when rejected
    std::optional<std::size_t> history_index;
    std::string history_id;
    std::string detail;

    bool operator==(const CandidateDecision&) const = default;
};

Json to_json(const CandidateDecision& d);

CandidateDecision validate_next(const std::vector<CandidateQuestion>& history, const CandidateQuestion& candidate,
                                const TagRuleSet& rules, const EntailmentScorer& scorer);

struct RankedCandidate {
    CandidateQuestion candidate;
    EntailmentVerdict against_last;
};

struct RejectedCandidate {
    CandidateQuestion candidate;
    CandidateDecision decision;
};

struct RankingResult {
    std::vector<RankedCandidate> ranked;
    std::vector<RejectedCandidate> rejected;
};

Json to_json(const RankingResult& r);

/// Keeps accepted candidates ordered by (rank asc, confidence against the last
/// history item desc, id asc). Rejections are listed sorted by id.
RankingResult filter_and_rank(const std::vector<CandidateQuestion>& candidates,
                              const std::vector<CandidateQuestion>& history, const TagRuleSet& rules,
                              const EntailmentScorer& scorer);

}  // namespace prokno
