#include "prokno/qgen.hpp"
#include "prokno/text.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace prokno {

namespace {

constexpr std::string_view kNegators[] = {"not",  "no",      "never",   "nor",    "neither", "none",
                                          "nobody", "nothing", "nowhere", "cannot", "without", "dont",
                                          "doesnt", "didnt",   "cant",    "wont",   "isnt",    "arent"};

// Stems left behind when "n't" is split off: "don't" -> [don, t].
constexpr std::string_view kContractionStems[] = {"don",   "doesn", "didn", "isn",    "aren",  "wasn",
                                                  "weren", "won",   "wouldn", "can",  "couldn", "shouldn",
                                                  "haven", "hasn",  "hadn",  "ain",   "mustn", "needn"};

template <std::size_t N>
bool contains(const std::string_view (&list)[N], std::string_view token) {
    return std::find(std::begin(list), std::end(list), token) != std::end(list);
}

bool is_negator_at(const std::vector<std::string>& tokens, std::size_t i) {
    if (contains(kNegators, tokens[i])) return true;
    return tokens[i] == "t" && i > 0 && contains(kContractionStems, tokens[i - 1]);
}

std::set<std::string> content_set(const std::vector<std::string>& tokens) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (is_negator_at(tokens, i) || is_stopword(tokens[i])) continue;
        if (i + 1 < tokens.size() && tokens[i + 1] == "t" && contains(kContractionStems, tokens[i])) continue;
        out.insert(tokens[i]);
    }
    return out;
}

// A negator counts only if a later token is content shared with the other side.
bool negated_over_shared(const std::vector<std::string>& tokens, const std::set<std::string>& own_content,
                         const std::set<std::string>& other_content) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!is_negator_at(tokens, i)) continue;
        for (std::size_t j = i + 1; j < tokens.size(); ++j) {
            if (own_content.contains(tokens[j]) && other_content.contains(tokens[j])) return true;
        }
    }
    return false;
}

}  // namespace

CandidateQuestion CandidateQuestion::from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, path + ": candidate must be an object", path);
    auto str = [&](const char* key, bool required) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required) throw Error(ErrorCode::SchemaError, path + "/" + key + ": missing field", path + "/" + key);
            return {};
        }
        if (!it->is_string()) throw Error(ErrorCode::SchemaError, path + "/" + key + ": expected string", path + "/" + key);
        return it->get<std::string>();
    };
    CandidateQuestion c;
    c.id = str("id", true);
    c.text = str("text", true);
    c.tag = Tag::parse(str("tag", true));
    c.source = str("source", false);
    auto rank = j.find("rank");
    if (rank == j.end() || !rank->is_number_integer()) {
        throw Error(ErrorCode::SchemaError, path + "/rank: expected integer", path + "/rank");
    }
    c.rank = rank->get<std::int64_t>();
    if (c.text.empty()) throw Error(ErrorCode::ValidationError, path + "/text: empty question text", path + "/text");
    if (c.rank < 1) throw Error(ErrorCode::ValidationError, path + "/rank: rank must be >= 1", path + "/rank");
    return c;
}

Json CandidateQuestion::to_json() const {
    return Json{{"id", id}, {"text", text}, {"tag", tag.str()}, {"rank", rank}, {"source", source}};
}

std::vector<CandidateQuestion> parse_candidates_jsonl(std::string_view text) {
    std::vector<CandidateQuestion> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(CandidateQuestion::from_json(j, "/" + std::to_string(line_no - 1)));
    }
    return out;
}

TagRuleSet::TagRuleSet(std::map<Tag, std::set<Tag>> transitions) : transitions_(std::move(transitions)) {
    if (transitions_.empty()) throw Error(ErrorCode::SchemaError, "tag rule set is empty");
}

TagRuleSet TagRuleSet::from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "tag rules must be a JSON object");
    std::map<Tag, std::set<Tag>> transitions;
    for (const auto& [from, targets] : j.items()) {
        if (!targets.is_array()) throw Error(ErrorCode::SchemaError, "expected tag array", "/" + from);
        auto& slot = transitions[Tag::parse(from)];
        for (const auto& t : targets) {
            if (!t.is_string()) throw Error(ErrorCode::SchemaError, "tags must be strings", "/" + from);
            slot.insert(Tag::parse(t.get<std::string>()));
        }
    }
    return TagRuleSet(std::move(transitions));
}

bool TagRuleSet::allows(const Tag& from, const Tag& to) const {
    auto it = transitions_.find(from);
    return it != transitions_.end() && it->second.contains(to);
}

Json TagRuleSet::to_json() const {
    Json out = Json::object();
    for (const auto& [from, targets] : transitions_) {
        Json list = Json::array();
        for (const auto& t : targets) list.push_back(t.str());
        out[from.str()] = list;
    }
    return out;
}

TagRuleSet default_tag_rules() {
    using K = Tag::Kind;
    return TagRuleSet({
        {Tag(K::YesNo), {Tag(K::DegreeFrequency)}},
        {Tag(K::DegreeFrequency), {Tag(K::Causes)}},
        {Tag(K::Causes), {Tag(K::TreatmentRemedies)}},
        {Tag(K::TreatmentRemedies), {Tag(K::SideEffectsInfo)}},
    });
}

std::string to_string(Relation r) {
    switch (r) {
        case Relation::Entail: return "entail";
        case Relation::Neutral: return "neutral";
        case Relation::Contradict: return "contradict";
    }
    return "neutral";
}

Json to_json(const EntailmentVerdict& v) { return Json{{"relation", to_string(v.relation)}, {"confidence", v.confidence}}; }

LexicalEntailmentConfig LexicalEntailmentConfig::from_json(const Json& j) {
    LexicalEntailmentConfig c;
    if (!j.is_object()) return c;
    c.entail_threshold = j.value("theta_e", c.entail_threshold);
    c.neutral_threshold = j.value("theta_n", c.neutral_threshold);
    c.contradiction_threshold = j.value("theta_c", c.contradiction_threshold);
    return c;
}

Json LexicalEntailmentConfig::to_json() const {
    return Json{{"theta_e", entail_threshold}, {"theta_n", neutral_threshold}, {"theta_c", contradiction_threshold}};
}

EntailmentVerdict baseline_entailment(std::string_view premise, std::string_view hypothesis,
                                      const LexicalEntailmentConfig& config) {
    const auto p_tokens = token_texts(premise);
    const auto h_tokens = token_texts(hypothesis);
    if (p_tokens.empty() || h_tokens.empty()) {
        throw Error(ErrorCode::EmptyText, p_tokens.empty() ? "premise has no tokens" : "hypothesis has no tokens");
    }

    const auto p_content = content_set(p_tokens);
    const auto h_content = content_set(h_tokens);
    const bool h_negated = negated_over_shared(h_tokens, h_content, p_content);
    const bool p_negated = negated_over_shared(p_tokens, p_content, h_content);
    if (h_negated != p_negated) {
        const double overlap = (p_content.empty() && h_content.empty()) ? 0.0 : jaccard(p_content, h_content);
        if (overlap >= config.contradiction_threshold) return {Relation::Contradict, overlap};
    }

    const std::set<std::string> p_set(p_tokens.begin(), p_tokens.end());
    const std::set<std::string> h_set(h_tokens.begin(), h_tokens.end());
    std::size_t shared = 0;
    for (const auto& t : h_set) shared += p_set.count(t);
    const double containment = static_cast<double>(shared) / static_cast<double>(h_set.size());
    if (containment >= config.entail_threshold) return {Relation::Entail, containment};

    const double overlap = jaccard(p_set, h_set);
    if (overlap >= config.neutral_threshold) return {Relation::Neutral, overlap};
    return {Relation::Neutral, 0.0};
}

Json to_json(const CandidateDecision& d) {
    Json out{{"accepted", d.accepted}, {"reason", d.accepted ? Json(nullptr) : Json(d.reason)}, {"detail", d.detail}};
    if (d.history_index) {
        out["history_index"] = *d.history_index;
        out["history_id"] = d.history_id;
    } else {
        out["history_index"] = nullptr;
        out["history_id"] = nullptr;
    }
    return out;
}

CandidateDecision validate_next(const std::vector<CandidateQuestion>& history, const CandidateQuestion& candidate,
                                const TagRuleSet& rules, const EntailmentScorer& scorer) {
    if (!history.empty() && !rules.allows(history.back().tag, candidate.tag)) {
        return {false, "tag", history.size() - 1, history.back().id,
                "tag " + candidate.tag.str() + " may not follow " + history.back().tag.str()};
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
        const EntailmentVerdict v = scorer.score(history[i].text, candidate.text);
        if (v.relation == Relation::Contradict) {
            return {false, "contradiction", i, history[i].id, "contradicts '" + history[i].text + "'"};
        }
    }
    return {};
}

Json to_json(const RankingResult& r) {
    Json ranked = Json::array();
    for (const auto& rc : r.ranked) {
        ranked.push_back({{"candidate", rc.candidate.to_json()}, {"against_last", to_json(rc.against_last)}});
    }
    Json rejected = Json::array();
    for (const auto& rj : r.rejected) {
        rejected.push_back({{"candidate", rj.candidate.to_json()}, {"decision", to_json(rj.decision)}});
    }
    return Json{{"ranked", ranked}, {"rejected", rejected}};
}

RankingResult filter_and_rank(const std::vector<CandidateQuestion>& candidates,
                              const std::vector<CandidateQuestion>& history, const TagRuleSet& rules,
                              const EntailmentScorer& scorer) {
    RankingResult out;
    for (const auto& c : candidates) {
        CandidateDecision d = validate_next(history, c, rules, scorer);
        if (!d.accepted) {
            out.rejected.push_back({c, std::move(d)});
            continue;
        }
        EntailmentVerdict against_last{Relation::Neutral, 0.0};
        if (!history.empty()) against_last = scorer.score(history.back().text, c.text);
        out.ranked.push_back({c, against_last});
    }
    std::sort(out.ranked.begin(), out.ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        return std::forward_as_tuple(a.candidate.rank, b.against_last.confidence, a.candidate.id, a.candidate.text,
                                     a.candidate.source, a.candidate.tag) <
               std::forward_as_tuple(b.candidate.rank, a.against_last.confidence, b.candidate.id, b.candidate.text,
                                     b.candidate.source, b.candidate.tag);
    });
    std::sort(out.rejected.begin(), out.rejected.end(), [](const RejectedCandidate& a, const RejectedCandidate& b) {
        return std::tie(a.candidate.id, a.candidate.rank, a.candidate.text, a.candidate.source, a.candidate.tag) <
               std::tie(b.candidate.id, b.candidate.rank, b.candidate.text, b.candidate.source, b.candidate.tag);
    });
    return out;
}

}  // namespace prokno
