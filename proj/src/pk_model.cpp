#include "prokno/pk_model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace prokno {

namespace {

constexpr std::int64_t kMaxScaleSpan = 10000;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::SchemaError, path + ": " + what, path);
}

const Json& require(const Json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(path + "/" + key, "missing field");
    return *it;
}

std::string require_string(const Json& obj, const char* key, const std::string& path) {
    const Json& v = require(obj, key, path);
    if (!v.is_string()) schema_error(path + "/" + key, "expected string");
    return v.get<std::string>();
}

std::int64_t require_int(const Json& obj, const char* key, const std::string& path) {
    const Json& v = require(obj, key, path);
    if (!v.is_number_integer()) schema_error(path + "/" + key, "expected integer");
    return v.get<std::int64_t>();
}

const Json& require_array(const Json& obj, const char* key, const std::string& path) {
    const Json& v = require(obj, key, path);
    if (!v.is_array()) schema_error(path + "/" + key, "expected array");
    return v;
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return out;
}

bool integer_keyed(const AnswerType& type) {
    if (type.kind == AnswerType::Kind::Scale) return true;
    if (type.kind == AnswerType::Kind::Choice) {
        return std::any_of(type.choices.begin(), type.choices.end(),
                           [](const AnswerValue& v) { return v.is_integer(); });
    }
    return false;
}

// JSON object keys are always strings; recover integer answers for scale nodes.
AnswerValue key_to_answer(const std::string& key, bool integers) {
    if (integers) {
        if (auto n = parse_integer(key)) return AnswerValue(*n);
    }
    return AnswerValue(key);
}

AnswerType decode_answer_type(const Json& j, const std::string& path) {
    if (!j.is_object()) schema_error(path, "expected object");
    const std::string kind = require_string(j, "kind", path);
    if (kind == "yes_no") return AnswerType::yes_no();
    if (kind == "scale") return AnswerType::scale(require_int(j, "min", path), require_int(j, "max", path));
    if (kind == "choice") {
        const Json& values = require_array(j, "values", path);
        std::vector<AnswerValue> choices;
        for (std::size_t i = 0; i < values.size(); ++i) {
            choices.push_back(AnswerValue::from_json(values[i], path + "/values/" + std::to_string(i)));
        }
        return AnswerType::choice(std::move(choices));
    }
    schema_error(path + "/kind", "unknown answer kind '" + kind + "'");
}

Json encode_answer_type(const AnswerType& t) {
    switch (t.kind) {
        case AnswerType::Kind::YesNo: return Json{{"kind", "yes_no"}};
        case AnswerType::Kind::Scale: return Json{{"kind", "scale"}, {"min", t.min}, {"max", t.max}};
        case AnswerType::Kind::Choice: {
            Json values = Json::array();
            for (const auto& v : t.choices) values.push_back(v.to_json());
            return Json{{"kind", "choice"}, {"values", values}};
        }
    }
    return {};
}

QuestionNode decode_node(const Json& j, const std::string& path) {
    if (!j.is_object()) schema_error(path, "expected object");
    QuestionNode node;
    node.id = require_string(j, "id", path);
    node.text = require_string(j, "text", path);
    node.tag = Tag::parse(require_string(j, "tag", path));
    node.rank = require_int(j, "rank", path);
    node.answer_type = decode_answer_type(require(j, "answer_type", path), path + "/answer_type");
    if (auto it = j.find("evidence"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) schema_error(path + "/evidence", "expected object");
        const bool ints = integer_keyed(node.answer_type);
        for (const auto& [key, concepts] : it->items()) {
            if (!concepts.is_array()) schema_error(path + "/evidence/" + key, "expected array");
            auto& slot = node.evidence[key_to_answer(key, ints)];
            for (const auto& c : concepts) {
                if (!c.is_string()) schema_error(path + "/evidence/" + key, "expected concept id strings");
                slot.push_back(c.get<std::string>());
            }
        }
    }
    return node;
}

Outcome decode_outcome(const Json& j, const std::string& path) {
    if (!j.is_object()) schema_error(path, "expected object");
    Outcome out;
    out.label = require_string(j, "label", path);
    if (auto it = j.find("description"); it != j.end() && it->is_string()) out.description = it->get<std::string>();
    const Json& b = require(j, "binding", path);
    const std::string bpath = path + "/binding";
    if (!b.is_object()) schema_error(bpath, "expected object");
    if (b.contains("node")) {
        out.binding = FlowBinding{require_string(b, "node", bpath),
                                  AnswerValue::from_json(require(b, "answer_value", bpath), bpath + "/answer_value")};
    } else if (b.contains("min_total") || b.contains("max_total")) {
        out.binding = ScoreInterval{require_int(b, "min_total", bpath), require_int(b, "max_total", bpath)};
    } else {
        schema_error(bpath, "binding needs either node/answer_value or min_total/max_total");
    }
    return out;
}

FlatScoring decode_scoring(const Json& j, const std::vector<QuestionNode>& nodes, const std::string& path) {
    if (!j.is_object()) schema_error(path, "expected object");
    FlatScoring scoring;
    const Json& points = require(j, "points", path);
    if (!points.is_object()) schema_error(path + "/points", "expected object");
    for (const auto& [node_id, mapping] : points.items()) {
        const std::string ppath = path + "/points/" + node_id;
        if (!mapping.is_object()) schema_error(ppath, "expected object");
        bool ints = true;
        for (const auto& n : nodes) {
            if (n.id == node_id) ints = integer_keyed(n.answer_type);
        }
        auto& slot = scoring.points[node_id];
        for (const auto& [key, value] : mapping.items()) {
            if (!value.is_number_integer()) schema_error(ppath + "/" + key, "expected integer points");
            slot[key_to_answer(key, ints)] = value.get<std::int64_t>();
        }
    }
    const Json& thresholds = require_array(j, "thresholds", path);
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        const std::string tpath = path + "/thresholds/" + std::to_string(i);
        const Json& t = thresholds[i];
        if (!t.is_object()) schema_error(tpath, "expected object");
        scoring.thresholds.push_back(
            {ScoreInterval{require_int(t, "min_total", tpath), require_int(t, "max_total", tpath)},
             require_string(t, "label", tpath)});
    }
    return scoring;
}

std::string node_path(const QuestionNode& n, std::size_t index) {
    return "/nodes/" + (n.id.empty() ? std::to_string(index) : n.id);
}

class Validator {
public:
    explicit Validator(const ProcessKnowledgeDoc& doc) : doc_(doc) {}

    ValidationReport run() {
        check_nodes();
        if (doc_.mode == PkMode::Flow) {
            check_flow();
        } else {
            check_flat();
        }
        return std::move(report_);
    }

private:
    void add(std::string path, std::string code, std::string message) {
        report_.violations.push_back({std::move(path), std::move(code), std::move(message)});
    }

    void check_nodes() {
        if (doc_.id.empty()) add("/id", "empty_id", "document id is empty");
        if (doc_.nodes.empty()) add("/nodes", "no_nodes", "document has no question nodes");
        std::unordered_set<std::string> seen;
        for (std::size_t i = 0; i < doc_.nodes.size(); ++i) {
            const auto& n = doc_.nodes[i];
            const std::string path = node_path(n, i);
            if (n.id.empty()) add(path, "empty_id", "node id is empty");
            if (!seen.insert(n.id).second) add(path, "duplicate_id", "duplicate node id '" + n.id + "'");
            by_id_.emplace(n.id, &n);
            if (n.text.empty()) add(path + "/text", "empty_text", "question text is empty");
            if (n.rank < 1) add(path + "/rank", "rank_invalid", "rank must be >= 1");

            const auto& t = n.answer_type;
            if (t.kind == AnswerType::Kind::Scale) {
                if (t.min > t.max) {
                    add(path + "/answer_type", "invalid_answer_type", "scale min exceeds max");
                } else if (t.max - t.min >= kMaxScaleSpan) {
                    add(path + "/answer_type", "invalid_answer_type", "scale range too large");
                }
            } else if (t.kind == AnswerType::Kind::Choice) {
                std::set<AnswerValue> uniq(t.choices.begin(), t.choices.end());
                if (t.choices.empty()) add(path + "/answer_type", "invalid_answer_type", "choice list is empty");
                if (uniq.size() != t.choices.size()) {
                    add(path + "/answer_type", "invalid_answer_type", "duplicate choice values");
                }
            }
            for (const auto& [value, concepts] : n.evidence) {
                if (!in_domain(n, value)) {
                    add(path + "/evidence/" + value.str(), "evidence_domain",
                        "evidence key '" + value.str() + "' is not in the answer domain");
                }
                for (const auto& c : concepts) {
                    if (c.empty()) add(path + "/evidence/" + value.str(), "evidence_concept", "empty concept id");
                }
            }
        }
    }

    bool valid_domain(const QuestionNode& n) const {
        const auto& t = n.answer_type;
        if (t.kind == AnswerType::Kind::Scale) return t.min <= t.max && t.max - t.min < kMaxScaleSpan;
        return true;
    }

    void check_flow() {
        if (doc_.scoring.thresholds.size() + doc_.scoring.points.size() > 0) {
            add("/scoring", "mode_mismatch", "flow documents cannot carry flat scoring");
        }

        // Outgoing structure keyed by (node, answer).
        std::map<std::pair<std::string, AnswerValue>, int> bindings;
        std::unordered_map<std::string, std::vector<std::string>> adjacency;
        std::unordered_set<std::string> has_incoming;

        for (std::size_t i = 0; i < doc_.edges.size(); ++i) {
            const auto& e = doc_.edges[i];
            const std::string path = "/edges/" + std::to_string(i);
            auto from = by_id_.find(e.from);
            auto to = by_id_.find(e.to);
            if (from == by_id_.end() || to == by_id_.end()) {
                add(path, "dangling_edge",
                    "edge references missing node '" + (from == by_id_.end() ? e.from : e.to) + "'");
                if (from != by_id_.end() && in_domain(*from->second, e.answer_value)) ++bindings[{e.from, e.answer_value}];
                continue;
            }
            if (e.from == e.to) {
                add(path, "edge_self_loop", "edge from '" + e.from + "' to itself");
                continue;
            }
            if (!in_domain(*from->second, e.answer_value)) {
                add(path + "/answer_value", "edge_domain",
                    "answer '" + e.answer_value.str() + "' is not in the domain of '" + e.from + "'");
                continue;
            }
            ++bindings[{e.from, e.answer_value}];
            adjacency[e.from].push_back(e.to);
            has_incoming.insert(e.to);
        }

        for (std::size_t i = 0; i < doc_.outcomes.size(); ++i) {
            const auto& o = doc_.outcomes[i];
            const std::string path = "/outcomes/" + std::to_string(i);
            if (o.label.empty()) add(path + "/label", "empty_label", "outcome label is empty");
            const auto* fb = std::get_if<FlowBinding>(&o.binding);
            if (fb == nullptr) {
                add(path + "/binding", "binding_kind", "flow outcomes must bind to a node and answer");
                continue;
            }
            auto node = by_id_.find(fb->node);
            if (node == by_id_.end()) {
                add(path + "/binding", "binding_node", "outcome binds missing node '" + fb->node + "'");
                continue;
            }
            if (!in_domain(*node->second, fb->answer_value)) {
                add(path + "/binding", "binding_domain",
                    "answer '" + fb->answer_value.str() + "' is not in the domain of '" + fb->node + "'");
                continue;
            }
            ++bindings[{fb->node, fb->answer_value}];
        }

        for (std::size_t i = 0; i < doc_.nodes.size(); ++i) {
            const auto& n = doc_.nodes[i];
            if (!valid_domain(n)) continue;
            for (const auto& v : answer_domain(n)) {
                auto it = bindings.find({n.id, v});
                const int count = it == bindings.end() ? 0 : it->second;
                if (count == 0) {
                    add(node_path(n, i), "uncovered_answer",
                        "answer '" + v.str() + "' of '" + n.id + "' has no edge or outcome");
                } else if (count > 1) {
                    add(node_path(n, i), "ambiguous_answer",
                        "answer '" + v.str() + "' of '" + n.id + "' has " + std::to_string(count) + " bindings");
                }
            }
        }

        check_cycles(adjacency);
        check_roots(adjacency, has_incoming);
    }

    void check_cycles(const std::unordered_map<std::string, std::vector<std::string>>& adjacency) {
        enum class Mark { White, Grey, Black };
        std::unordered_map<std::string, Mark> mark;
        std::function<void(const std::string&)> visit = [&](const std::string& id) {
            mark[id] = Mark::Grey;
            if (auto it = adjacency.find(id); it != adjacency.end()) {
                for (const auto& next : it->second) {
                    const Mark m = mark[next];
                    if (m == Mark::Grey) {
                        add("/nodes/" + id, "cycle", "cycle through edge '" + id + "' -> '" + next + "'");
                    } else if (m == Mark::White) {
                        visit(next);
                    }
                }
            }
            mark[id] = Mark::Black;
        };
        for (const auto& n : doc_.nodes) {
            if (mark[n.id] == Mark::White) visit(n.id);
        }
    }

    void check_roots(const std::unordered_map<std::string, std::vector<std::string>>& adjacency,
                     const std::unordered_set<std::string>& has_incoming) {
        std::vector<const QuestionNode*> roots;
        for (const auto& n : doc_.nodes) {
            if (!has_incoming.contains(n.id)) roots.push_back(&n);
        }
        if (doc_.nodes.empty()) return;
        if (roots.empty()) {
            add("/nodes", "no_root", "every node has an incoming edge");
            return;
        }
        std::int64_t best = roots.front()->rank;
        for (const auto* r : roots) best = std::min(best, r->rank);
        std::vector<const QuestionNode*> tied;
        for (const auto* r : roots) {
            if (r->rank == best) tied.push_back(r);
        }
        if (tied.size() > 1) {
            add("/nodes/" + tied[1]->id + "/rank", "rank_tie",
                "root questions '" + tied[0]->id + "' and '" + tied[1]->id + "' share rank " + std::to_string(best));
            return;
        }
        // Any further roots surface below as unreachable nodes.
        std::unordered_set<std::string> reached{tied.front()->id};
        std::vector<std::string> stack{tied.front()->id};
        while (!stack.empty()) {
            const std::string id = stack.back();
            stack.pop_back();
            if (auto it = adjacency.find(id); it != adjacency.end()) {
                for (const auto& next : it->second) {
                    if (reached.insert(next).second) stack.push_back(next);
                }
            }
        }
        for (std::size_t i = 0; i < doc_.nodes.size(); ++i) {
            const auto& n = doc_.nodes[i];
            if (!reached.contains(n.id)) {
                add(node_path(n, i), "unreachable", "node '" + n.id + "' is unreachable from root '" +
                                                         tied.front()->id + "'");
            }
        }
    }

    void check_flat() {
        if (!doc_.edges.empty()) add("/edges", "mode_mismatch", "flat documents cannot carry edges");

        std::map<std::int64_t, std::string> ranks;
        for (std::size_t i = 0; i < doc_.nodes.size(); ++i) {
            const auto& n = doc_.nodes[i];
            auto [it, inserted] = ranks.emplace(n.rank, n.id);
            if (!inserted && n.rank >= 1) {
                add(node_path(n, i) + "/rank", "rank_tie",
                    "items '" + it->second + "' and '" + n.id + "' share rank " + std::to_string(n.rank));
            }
        }

        std::int64_t lowest = 0;
        std::int64_t highest = 0;
        bool range_known = true;
        for (std::size_t i = 0; i < doc_.nodes.size(); ++i) {
            const auto& n = doc_.nodes[i];
            const std::string path = "/scoring/points/" + n.id;
            auto it = doc_.scoring.points.find(n.id);
            if (it == doc_.scoring.points.end()) {
                add(path, "missing_points", "item '" + n.id + "' has no point mapping");
                range_known = false;
                continue;
            }
            if (!valid_domain(n)) {
                range_known = false;
                continue;
            }
            std::optional<std::int64_t> lo;
            std::optional<std::int64_t> hi;
            for (const auto& v : answer_domain(n)) {
                auto p = it->second.find(v);
                if (p == it->second.end()) {
                    add(path, "missing_points", "answer '" + v.str() + "' of '" + n.id + "' has no points");
                    range_known = false;
                    continue;
                }
                lo = lo ? std::min(*lo, p->second) : p->second;
                hi = hi ? std::max(*hi, p->second) : p->second;
            }
            for (const auto& [v, _] : it->second) {
                if (!in_domain(n, v)) {
                    add(path + "/" + v.str(), "points_domain",
                        "answer '" + v.str() + "' is not in the domain of '" + n.id + "'");
                }
            }
            if (lo) {
                lowest += *lo;
                highest += *hi;
            }
        }
        for (const auto& [node_id, _] : doc_.scoring.points) {
            if (!by_id_.contains(node_id)) {
                add("/scoring/points/" + node_id, "dangling_points", "points for missing node '" + node_id + "'");
            }
        }

        std::unordered_map<std::string, std::vector<ScoreInterval>> outcome_intervals;
        for (std::size_t i = 0; i < doc_.outcomes.size(); ++i) {
            const auto& o = doc_.outcomes[i];
            const std::string path = "/outcomes/" + std::to_string(i);
            if (o.label.empty()) add(path + "/label", "empty_label", "outcome label is empty");
            const auto* si = std::get_if<ScoreInterval>(&o.binding);
            if (si == nullptr) {
                add(path + "/binding", "binding_kind", "flat outcomes must bind to a score interval");
                continue;
            }
            if (si->min_total > si->max_total) {
                add(path + "/binding", "threshold_interval", "outcome interval has min_total > max_total");
            }
            outcome_intervals[o.label].push_back(*si);
        }

        const auto& ts = doc_.scoring.thresholds;
        if (ts.empty()) add("/scoring/thresholds", "no_thresholds", "flat scoring has no thresholds");
        bool ordered = true;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const std::string path = "/scoring/thresholds/" + std::to_string(i);
            if (ts[i].interval.min_total > ts[i].interval.max_total) {
                add(path, "threshold_interval", "threshold has min_total > max_total");
                ordered = false;
            }
            if (i > 0) {
                if (ts[i].interval.min_total < ts[i - 1].interval.min_total) {
                    add(path, "threshold_order", "thresholds are not sorted ascending");
                    ordered = false;
                } else if (ts[i].interval.min_total <= ts[i - 1].interval.max_total) {
                    add(path, "threshold_overlap",
                        "threshold overlaps the previous one at score " + std::to_string(ts[i].interval.min_total));
                }
            }
            auto oi = outcome_intervals.find(ts[i].label);
            if (oi == outcome_intervals.end()) {
                add(path + "/label", "unknown_outcome", "threshold names unknown outcome '" + ts[i].label + "'");
            } else if (std::find(oi->second.begin(), oi->second.end(), ts[i].interval) == oi->second.end()) {
                add(path, "outcome_interval_mismatch",
                    "outcome '" + ts[i].label + "' is bound to a different interval");
            }
        }

        if (range_known && ordered && !ts.empty()) {
            std::int64_t next = lowest;  // first score not yet covered
            auto report_gap = [&](std::int64_t a, std::int64_t b) {
                add("/scoring/thresholds", "score_uncovered",
                    a == b ? "score " + std::to_string(a) + " uncovered"
                           : "scores " + std::to_string(a) + ".." + std::to_string(b) + " uncovered");
            };
            for (const auto& t : ts) {
                if (next > highest) break;
                if (t.interval.max_total < next) continue;
                if (t.interval.min_total > next) report_gap(next, std::min(t.interval.min_total - 1, highest));
                next = std::max(next, t.interval.max_total + 1);
            }
            if (next <= highest) report_gap(next, highest);
        }
    }

    const ProcessKnowledgeDoc& doc_;
    std::unordered_map<std::string, const QuestionNode*> by_id_;
    ValidationReport report_;
};

}  // namespace

std::string AnswerValue::str() const {
    if (is_integer()) return std::to_string(integer());
    return label();
}

Json AnswerValue::to_json() const {
    if (is_integer()) return integer();
    return label();
}

AnswerValue AnswerValue::from_json(const Json& j, const std::string& path) {
    if (j.is_number_integer()) return AnswerValue(j.get<std::int64_t>());
    if (j.is_string()) return AnswerValue(j.get<std::string>());
    throw Error(ErrorCode::SchemaError, path + ": answer values must be strings or integers", path);
}

std::string to_string(PkMode mode) { return mode == PkMode::Flow ? "flow" : "flat"; }

std::vector<AnswerValue> answer_domain(const QuestionNode& node) {
    const auto& t = node.answer_type;
    switch (t.kind) {
        case AnswerType::Kind::YesNo: return {AnswerValue("yes"), AnswerValue("no")};
        case AnswerType::Kind::Scale: {
            std::vector<AnswerValue> out;
            if (t.min <= t.max && t.max - t.min < kMaxScaleSpan) {
                for (std::int64_t v = t.min; v <= t.max; ++v) out.emplace_back(v);
            }
            return out;
        }
        case AnswerType::Kind::Choice: return t.choices;
    }
    return {};
}

bool in_domain(const QuestionNode& node, const AnswerValue& value) {
    const auto& t = node.answer_type;
    switch (t.kind) {
        case AnswerType::Kind::YesNo:
            return !value.is_integer() && (value.label() == "yes" || value.label() == "no");
        case AnswerType::Kind::Scale:
            return value.is_integer() && value.integer() >= t.min && value.integer() <= t.max;
        case AnswerType::Kind::Choice:
            return std::find(t.choices.begin(), t.choices.end(), value) != t.choices.end();
    }
    return false;
}

const QuestionNode* ProcessKnowledgeDoc::find_node(std::string_view node_id) const {
    for (const auto& n : nodes) {
        if (n.id == node_id) return &n;
    }
    return nullptr;
}

const QuestionNode& ProcessKnowledgeDoc::node(std::string_view node_id) const {
    if (const auto* n = find_node(node_id)) return *n;
    throw Error(ErrorCode::NotFound, "unknown node '" + std::string(node_id) + "'");
}

const Edge* ProcessKnowledgeDoc::find_edge(std::string_view from, const AnswerValue& answer) const {
    for (const auto& e : edges) {
        if (e.from == from && e.answer_value == answer) return &e;
    }
    return nullptr;
}

const Outcome* ProcessKnowledgeDoc::find_flow_outcome(std::string_view node_id, const AnswerValue& answer) const {
    for (const auto& o : outcomes) {
        const auto* b = std::get_if<FlowBinding>(&o.binding);
        if (b != nullptr && b->node == node_id && b->answer_value == answer) return &o;
    }
    return nullptr;
}

const Threshold* ProcessKnowledgeDoc::find_threshold(std::int64_t total) const {
    for (const auto& t : scoring.thresholds) {
        if (t.interval.contains(total)) return &t;
    }
    return nullptr;
}

std::string ProcessKnowledgeDoc::root_id() const {
    if (nodes.empty()) return {};
    if (mode == PkMode::Flat) return nodes.front().id;
    std::unordered_set<std::string> targets;
    for (const auto& e : edges) targets.insert(e.to);
    const QuestionNode* best = nullptr;
    for (const auto& n : nodes) {
        if (targets.contains(n.id)) continue;
        if (best == nullptr || n.rank < best->rank) best = &n;
    }
    return best != nullptr ? best->id : std::string{};
}

Json ValidationReport::to_json() const {
    Json list = Json::array();
    for (const auto& v : violations) {
        list.push_back({{"path", v.path}, {"code", v.code}, {"message", v.message}});
    }
    return Json{{"ok", ok()}, {"violations", list}};
}

ValidationReport validate_pk(const ProcessKnowledgeDoc& doc) { return Validator(doc).run(); }

ProcessKnowledgeDoc decode_pk(const Json& j) {
    if (!j.is_object()) schema_error("", "document must be a JSON object");
    const Json& schema = require(j, "schema", "");
    if (!schema.is_number_integer() || schema.get<int>() != 1) schema_error("/schema", "unsupported schema version");

    ProcessKnowledgeDoc doc;
    doc.id = require_string(j, "id", "");
    doc.title = require_string(j, "title", "");
    const std::string mode = require_string(j, "mode", "");
    if (mode == "flow") {
        doc.mode = PkMode::Flow;
    } else if (mode == "flat") {
        doc.mode = PkMode::Flat;
    } else {
        schema_error("/mode", "mode must be 'flow' or 'flat'");
    }

    const Json& nodes = require_array(j, "nodes", "");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        doc.nodes.push_back(decode_node(nodes[i], "/nodes/" + std::to_string(i)));
    }
    if (auto it = j.find("edges"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) schema_error("/edges", "expected array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string path = "/edges/" + std::to_string(i);
            const Json& e = (*it)[i];
            if (!e.is_object()) schema_error(path, "expected object");
            doc.edges.push_back({require_string(e, "from", path),
                                 AnswerValue::from_json(require(e, "answer_value", path), path + "/answer_value"),
                                 require_string(e, "to", path)});
        }
    }
    if (auto it = j.find("scoring"); it != j.end() && !it->is_null()) {
        doc.scoring = decode_scoring(*it, doc.nodes, "/scoring");
    }
    const Json& outcomes = require_array(j, "outcomes", "");
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        doc.outcomes.push_back(decode_outcome(outcomes[i], "/outcomes/" + std::to_string(i)));
    }
    return doc;
}

ProcessKnowledgeDoc load_pk(std::string_view document_bytes) {
    Json j;
    try {
        j = Json::parse(document_bytes);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
    }
    ProcessKnowledgeDoc doc = decode_pk(j);
    ValidationReport report = validate_pk(doc);
    if (!report.ok()) {
        const auto& first = report.violations.front();
        std::string message = first.path + ": " + first.code + ": " + first.message;
        if (report.violations.size() > 1) {
            message += " (+" + std::to_string(report.violations.size() - 1) + " more)";
        }
        throw Error(ErrorCode::ValidationError, message, first.path);
    }
    return doc;
}

ProcessKnowledgeDoc load_pk_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_pk(buf.str());
}

Json to_json(const QuestionNode& n) {
    Json evidence = Json::object();
    for (const auto& [value, concepts] : n.evidence) evidence[value.str()] = concepts;
    return Json{{"id", n.id},
                {"text", n.text},
                {"tag", n.tag.str()},
                {"rank", n.rank},
                {"answer_type", encode_answer_type(n.answer_type)},
                {"evidence", evidence}};
}

Json to_json(const ProcessKnowledgeDoc& doc) {
    Json nodes = Json::array();
    for (const auto& n : doc.nodes) nodes.push_back(to_json(n));

    Json edges = Json::array();
    for (const auto& e : doc.edges) {
        edges.push_back({{"from", e.from}, {"answer_value", e.answer_value.to_json()}, {"to", e.to}});
    }

    Json scoring = nullptr;
    if (doc.mode == PkMode::Flat) {
        Json points = Json::object();
        for (const auto& [node_id, mapping] : doc.scoring.points) {
            Json m = Json::object();
            for (const auto& [value, pts] : mapping) m[value.str()] = pts;
            points[node_id] = m;
        }
        Json thresholds = Json::array();
        for (const auto& t : doc.scoring.thresholds) {
            thresholds.push_back(
                {{"min_total", t.interval.min_total}, {"max_total", t.interval.max_total}, {"label", t.label}});
        }
        scoring = Json{{"points", points}, {"thresholds", thresholds}};
    }

    Json outcomes = Json::array();
    for (const auto& o : doc.outcomes) {
        Json binding;
        if (const auto* fb = std::get_if<FlowBinding>(&o.binding)) {
            binding = {{"node", fb->node}, {"answer_value", fb->answer_value.to_json()}};
        } else {
            const auto& si = std::get<ScoreInterval>(o.binding);
            binding = {{"min_total", si.min_total}, {"max_total", si.max_total}};
        }
        outcomes.push_back({{"label", o.label}, {"description", o.description}, {"binding", binding}});
    }

    return Json{{"schema", 1},          {"id", doc.id},   {"title", doc.title},
                {"mode", to_string(doc.mode)}, {"nodes", nodes}, {"edges", edges},
                {"scoring", scoring},   {"outcomes", outcomes}};
}

}  // namespace prokno
