#pragma once

#include "prokno/errors.hpp"
#include "prokno/tag.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace prokno {

using Json = nlohmann::json;

/// An answer is either a label ("yes", "breakfast") or an integer scale point.
class AnswerValue {
public:
    AnswerValue() = default;
    AnswerValue(std::string label) : value_(std::move(label)) {}
    AnswerValue(const char* label) : value_(std::string(label)) {}
    AnswerValue(std::int64_t point) : value_(point) {}
    AnswerValue(int point) : value_(static_cast<std::int64_t>(point)) {}

    bool is_integer() const noexcept { return std::holds_alternative<std::int64_t>(value_); }
    std::int64_t integer() const { return std::get<std::int64_t>(value_); }
    const std::string& label() const { return std::get<std::string>(value_); }

    /// Display / map-key form: labels verbatim, integers in decimal.
    std::string str() const;

    Json to_json() const;
    static AnswerValue from_json(const Json& j, const std::string& path);

    auto operator<=>(const AnswerValue&) const = default;
    bool operator==(const AnswerValue&) const = default;

private:
    std::variant<std::int64_t, std::string> value_{std::string{}};
};

struct AnswerType {
    enum class Kind { YesNo, Scale, Choice };
    Kind kind = Kind::YesNo;
    std::int64_t min = 0;
    std::int64_t max = 0;
    std::vector<AnswerValue> choices;

    static AnswerType yes_no() { return {}; }
    static AnswerType scale(std::int64_t lo, std::int64_t hi) { return {Kind::Scale, lo, hi, {}}; }
    static AnswerType choice(std::vector<AnswerValue> values) { return {Kind::Choice, 0, 0, std::move(values)}; }

    bool operator==(const AnswerType&) const = default;
};

struct QuestionNode {
    std::string id;
    std::string text;
    Tag tag;
    std::int64_t rank = 1;
    AnswerType answer_type;
    std::map<AnswerValue, std::vector<std::string>> evidence;

    bool operator==(const QuestionNode&) const = default;
};

struct Edge {
    std::string from;
    AnswerValue answer_value;
    std::string to;

    bool operator==(const Edge&) const = default;
};

struct FlowBinding {
    std::string node;
    AnswerValue answer_value;
    bool operator==(const FlowBinding&) const = default;
};

struct ScoreInterval {
    std::int64_t min_total = 0;
    std::int64_t max_total = 0;
    bool contains(std::int64_t total) const noexcept { return total >= min_total && total <= max_total; }
    bool operator==(const ScoreInterval&) const = default;
};

struct Outcome {
    std::string label;
    std::string description;
    std::variant<FlowBinding, ScoreInterval> binding;

    bool operator==(const Outcome&) const = default;
};

struct Threshold {
    ScoreInterval interval;
    std::string label;
    bool operator==(const Threshold&) const = default;
};

struct FlatScoring {
    std::map<std::string, std::map<AnswerValue, std::int64_t>> points;
    std::vector<Threshold> thresholds;

    bool operator==(const FlatScoring&) const = default;
};

enum class PkMode { Flow, Flat };

struct ProcessKnowledgeDoc {
    std::string id;
    std::string title;
    PkMode mode = PkMode::Flow;
    std::vector<QuestionNode> nodes;
    std::vector<Edge> edges;
    FlatScoring scoring;
    std::vector<Outcome> outcomes;

    const QuestionNode* find_node(std::string_view node_id) const;
    const QuestionNode& node(std::string_view node_id) const;

    /// Outgoing edge for (node, answer), if any.
    const Edge* find_edge(std::string_view from, const AnswerValue& answer) const;
    /// Terminal flow outcome bound to (node, answer), if any.
    const Outcome* find_flow_outcome(std::string_view node_id, const AnswerValue& answer) const;
    /// Flat-mode threshold label for a total, if any interval contains it.
    const Threshold* find_threshold(std::int64_t total) const;

    /// Flow root: the lowest-rank node without incoming edges. Flat: first declared node.
    std::string root_id() const;

    bool operator==(const ProcessKnowledgeDoc&) const = default;
};

struct Violation {
    std::string path;
    std::string code;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    Json to_json() const;
};

std::vector<AnswerValue> answer_domain(const QuestionNode& node);
bool in_domain(const QuestionNode& node, const AnswerValue& value);

/// Every invariant of the document model, checked exhaustively.
ValidationReport validate_pk(const ProcessKnowledgeDoc& doc);

/// Parse, schema-check and validate a serialized document.
/// Throws Error{ParseError | SchemaError | ValidationError}.
ProcessKnowledgeDoc load_pk(std::string_view document_bytes);
ProcessKnowledgeDoc load_pk_file(const std::string& path);

/// Schema-checked decode without invariant validation.
ProcessKnowledgeDoc decode_pk(const Json& j);

Json to_json(const ProcessKnowledgeDoc& doc);
Json to_json(const QuestionNode& node);
std::string to_string(PkMode mode);

}  // namespace prokno
