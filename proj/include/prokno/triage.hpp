#pragma once

#include "prokno/cue_matcher.hpp"
#include "prokno/pk_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace prokno {

enum class AnswerSource { Cue, User };
std::string to_string(AnswerSource source);

struct AnsweredStep {
    std::string node_id;
    AnswerValue value;
    AnswerSource source = AnswerSource::User;
    std::vector<CueMatch> provenance;

    bool operator==(const AnsweredStep&) const = default;
};

/// A live traversal. `position` names the current question while the session
/// is open; once an outcome is reached it is empty and `outcome` is set.
struct SessionState {
    std::string session_id;
    std::string doc_id;
    std::vector<AnsweredStep> answered;
    std::string position;
    std::optional<std::string> outcome;
    std::int64_t flat_running_total = 0;

    bool done() const noexcept { return outcome.has_value(); }
    bool operator==(const SessionState&) const = default;
};

Json to_json(const SessionState& state);

struct TraceStep {
    std::string question;
    AnswerValue answer;
    AnswerSource source = AnswerSource::User;
    std::vector<CueMatch> evidence;

    bool operator==(const TraceStep&) const = default;
};

struct ExplanationTrace {
    std::string doc_id;
    std::vector<TraceStep> steps;
    std::optional<std::string> outcome;

    bool operator==(const ExplanationTrace&) const = default;
};

Json to_json(const ExplanationTrace& trace);

/// Where an answer would lead: the next question, or an outcome.
struct Preview {
    std::string next_node;
    std::optional<std::string> outcome;
    std::int64_t flat_running_total = 0;

    bool done() const noexcept { return outcome.has_value(); }
    bool operator==(const Preview&) const = default;
};

Json to_json(const Preview& preview, const ProcessKnowledgeDoc& doc);

/// Question payload for clients: id, text, tag, rank and the answer domain.
Json question_json(const QuestionNode& node);

SessionState start_session(const ProcessKnowledgeDoc& doc, std::string session_id = {});

/// Throws Error{SessionDone} once an outcome is reached and Error{DomainError}
/// for values outside the current question's domain.
SessionState submit_answer(const ProcessKnowledgeDoc& doc, SessionState session, const AnswerValue& value,
                           AnswerSource source = AnswerSource::User, std::vector<CueMatch> provenance = {});

Preview what_if(const ProcessKnowledgeDoc& doc, const SessionState& session, const AnswerValue& value);

ExplanationTrace explanation_trace(const ProcessKnowledgeDoc& doc, const SessionState& session);

struct ClassifyResult {
    enum class Status { Outcome, NeedsInput };
    Status status = Status::NeedsInput;
    SessionState session;
    ExplanationTrace trace;
    std::vector<AnswerConflict> conflicts;

    const std::optional<std::string>& outcome() const noexcept { return session.outcome; }
    /// First unanswered question reached, when status is NeedsInput.
    const std::string& next_question() const noexcept { return session.position; }
};

Json to_json(const ClassifyResult& result, const ProcessKnowledgeDoc& doc);

/// Matches cues, derives answers and replays the traversal with them,
/// stopping at the first reached question the text does not answer.
ClassifyResult classify_text(const ProcessKnowledgeDoc& doc, const CueLexicon& lexicon, std::string_view text,
                             std::string session_id = {});

/// Parses a user-typed answer against a node's domain ("3" on a scale node
/// becomes the integer 3). Used by interactive front ends.
AnswerValue parse_answer(const QuestionNode& node, std::string_view text);

}  // namespace prokno
