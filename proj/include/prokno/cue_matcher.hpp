#pragma once

#include "prokno/pk_model.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace prokno {

/// Concept -> phrase dictionary. Phrases are stored in normalized form and a
/// normalized phrase belongs to exactly one concept.
class CueLexicon {
public:
    CueLexicon() = default;

    /// Throws Error{SchemaError} on empty concept ids, empty phrase lists,
    /// phrases with no tokens, or one phrase claimed by two concepts.
    CueLexicon(std::string id, const std::map<std::string, std::vector<std::string>>& entries);

    static CueLexicon from_json(const Json& j, std::string id);
    static CueLexicon load(std::string_view bytes, std::string id);
    static CueLexicon load_file(const std::string& path);

    const std::string& id() const noexcept { return id_; }
    const std::map<std::string, std::vector<std::string>>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    /// Concept owning a normalized phrase, or nullptr.
    const std::string* concept_of(const std::string& normalized_phrase) const;
    std::size_t longest_phrase_tokens() const noexcept { return longest_; }

    Json to_json() const;

private:
    std::string id_;
    std::map<std::string, std::vector<std::string>> entries_;
    std::map<std::string, std::string> phrase_to_concept_;
    std::size_t longest_ = 0;
};

struct Span {
    std::size_t start = 0;
    std::size_t end = 0;
    bool operator==(const Span&) const = default;
};

struct CueMatch {
    std::string concept_id;
    std::string phrase;
    Span span;

    bool operator==(const CueMatch&) const = default;
};

Json to_json(const CueMatch& m);

/// Leftmost-longest, non-overlapping phrase matches ordered by start offset.
std::vector<CueMatch> match_text(std::string_view text, const CueLexicon& lexicon);

struct AnswerConflict {
    std::string node_id;
    std::vector<AnswerValue> values;
    std::vector<CueMatch> evidence;

    bool operator==(const AnswerConflict&) const = default;
};

struct AnswerMap {
    std::map<std::string, AnswerValue> answers;
    std::map<std::string, std::vector<CueMatch>> provenance;
    std::vector<AnswerConflict> conflicts;

    bool has_conflict(std::string_view node_id) const;
};

Json to_json(const AnswerMap& answers);

/// Answers every node whose evidence map is supported by exactly one answer
/// value. Nodes without evidence stay unanswered; nodes with evidence for two
/// or more values stay unanswered and are reported as conflicts.
AnswerMap derive_answers(const std::vector<CueMatch>& matches, const ProcessKnowledgeDoc& doc);

}  // namespace prokno
