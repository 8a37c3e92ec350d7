#include "prokno/triage.hpp"

#include <charconv>

namespace prokno {

namespace {

Json evidence_json(const std::vector<CueMatch>& matches) {
    Json list = Json::array();
    for (const auto& m : matches) list.push_back(to_json(m));
    return list;
}

struct Step {
    std::string next_node;
    std::optional<std::string> outcome;
    std::int64_t total = 0;
};

Step advance(const ProcessKnowledgeDoc& doc, const SessionState& session, const AnswerValue& value) {
    if (session.done()) {
        throw Error(ErrorCode::SessionDone, "session already reached outcome '" + *session.outcome + "'");
    }
    const QuestionNode& node = doc.node(session.position);
    if (!in_domain(node, value)) {
        throw Error(ErrorCode::DomainError,
                    "answer '" + value.str() + "' is not in the domain of question '" + node.id + "'", "/value");
    }

    Step step;
    step.total = session.flat_running_total;
    if (doc.mode == PkMode::Flow) {
        if (const Edge* e = doc.find_edge(node.id, value)) {
            step.next_node = e->to;
        } else if (const Outcome* o = doc.find_flow_outcome(node.id, value)) {
            step.outcome = o->label;
        } else {
            throw Error(ErrorCode::ValidationError, "no binding for answer '" + value.str() + "' of '" + node.id + "'");
        }
        return step;
    }

    step.total += doc.scoring.points.at(node.id).at(value);
    std::size_t index = 0;
    while (index < doc.nodes.size() && doc.nodes[index].id != node.id) ++index;
    if (index + 1 < doc.nodes.size()) {
        step.next_node = doc.nodes[index + 1].id;
    } else if (const Threshold* t = doc.find_threshold(step.total)) {
        step.outcome = t->label;
    } else {
        throw Error(ErrorCode::ValidationError, "score " + std::to_string(step.total) + " matches no threshold");
    }
    return step;
}

}  // namespace

std::string to_string(AnswerSource source) { return source == AnswerSource::Cue ? "cue" : "user"; }

Json to_json(const SessionState& state) {
    Json answered = Json::array();
    for (const auto& a : state.answered) {
        answered.push_back({{"node_id", a.node_id},
                            {"value", a.value.to_json()},
                            {"source", to_string(a.source)},
                            {"provenance", evidence_json(a.provenance)}});
    }
    return Json{{"session_id", state.session_id},
                {"doc_id", state.doc_id},
                {"answered", answered},
                {"position", state.done() ? Json(nullptr) : Json(state.position)},
                {"outcome", state.outcome ? Json(*state.outcome) : Json(nullptr)},
                {"flat_running_total", state.flat_running_total}};
}

Json to_json(const ExplanationTrace& trace) {
    Json steps = Json::array();
    for (const auto& s : trace.steps) {
        steps.push_back({{"question", s.question},
                         {"answer", s.answer.to_json()},
                         {"source", to_string(s.source)},
                         {"evidence", evidence_json(s.evidence)}});
    }
    return Json{{"doc_id", trace.doc_id},
                {"steps", steps},
                {"outcome", trace.outcome ? Json(*trace.outcome) : Json(nullptr)}};
}

Json question_json(const QuestionNode& node) {
    Json domain = Json::array();
    for (const auto& v : answer_domain(node)) domain.push_back(v.to_json());
    return Json{{"id", node.id}, {"text", node.text}, {"tag", node.tag.str()}, {"rank", node.rank},
                {"answer_domain", domain}};
}

Json to_json(const Preview& preview, const ProcessKnowledgeDoc& doc) {
    if (preview.done()) {
        return Json{{"status", "done"}, {"outcome", *preview.outcome}, {"question", nullptr}};
    }
    return Json{{"status", "active"}, {"outcome", nullptr}, {"question", question_json(doc.node(preview.next_node))}};
}

SessionState start_session(const ProcessKnowledgeDoc& doc, std::string session_id) {
    SessionState state;
    state.session_id = std::move(session_id);
    state.doc_id = doc.id;
    state.position = doc.root_id();
    return state;
}

SessionState submit_answer(const ProcessKnowledgeDoc& doc, SessionState session, const AnswerValue& value,
                           AnswerSource source, std::vector<CueMatch> provenance) {
    Step step = advance(doc, session, value);
    session.answered.push_back({session.position, value, source, std::move(provenance)});
    session.flat_running_total = step.total;
    if (step.outcome) {
        session.position.clear();
        session.outcome = std::move(step.outcome);
    } else {
        session.position = std::move(step.next_node);
    }
    return session;
}

Preview what_if(const ProcessKnowledgeDoc& doc, const SessionState& session, const AnswerValue& value) {
    Step step = advance(doc, session, value);
    return Preview{std::move(step.next_node), std::move(step.outcome), step.total};
}

ExplanationTrace explanation_trace(const ProcessKnowledgeDoc& doc, const SessionState& session) {
    ExplanationTrace trace;
    trace.doc_id = session.doc_id;
    for (const auto& a : session.answered) {
        const QuestionNode* node = doc.find_node(a.node_id);
        trace.steps.push_back({node != nullptr ? node->text : a.node_id, a.value, a.source, a.provenance});
    }
    trace.outcome = session.outcome;
    return trace;
}

Json to_json(const ClassifyResult& result, const ProcessKnowledgeDoc& doc) {
    Json conflicts = to_json(AnswerMap{{}, {}, result.conflicts})["conflicts"];
    const bool done = result.status == ClassifyResult::Status::Outcome;
    return Json{{"status", done ? "outcome" : "needs_input"},
                {"outcome", done ? Json(*result.session.outcome) : Json(nullptr)},
                {"question", done ? Json(nullptr) : question_json(doc.node(result.session.position))},
                {"trace", to_json(result.trace)},
                {"conflicts", conflicts}};
}

ClassifyResult classify_text(const ProcessKnowledgeDoc& doc, const CueLexicon& lexicon, std::string_view text,
                             std::string session_id) {
    const AnswerMap answers = derive_answers(match_text(text, lexicon), doc);
    SessionState session = start_session(doc, std::move(session_id));
    while (!session.done()) {
        auto it = answers.answers.find(session.position);
        if (it == answers.answers.end()) break;
        auto provenance = answers.provenance.at(session.position);
        session = submit_answer(doc, std::move(session), it->second, AnswerSource::Cue, std::move(provenance));
    }
    ClassifyResult result;
    result.status = session.done() ? ClassifyResult::Status::Outcome : ClassifyResult::Status::NeedsInput;
    result.trace = explanation_trace(doc, session);
    result.session = std::move(session);
    result.conflicts = answers.conflicts;
    return result;
}

AnswerValue parse_answer(const QuestionNode& node, std::string_view text) {
    const bool integers = node.answer_type.kind == AnswerType::Kind::Scale ||
                          (node.answer_type.kind == AnswerType::Kind::Choice && !node.answer_type.choices.empty() &&
                           node.answer_type.choices.front().is_integer());
    if (integers) {
        std::int64_t n = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
        if (ec == std::errc() && ptr == text.data() + text.size() && !text.empty()) return AnswerValue(n);
    }
    return AnswerValue(std::string(text));
}

}  // namespace prokno
