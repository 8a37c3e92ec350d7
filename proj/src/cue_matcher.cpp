#include "prokno/cue_matcher.hpp"
#include "prokno/text.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace prokno {

namespace {

std::string stem_without(const std::string& path, std::string_view suffix) {
    std::string name = std::filesystem::path(path).filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix)) name.resize(name.size() - suffix.size());
    return name;
}

}  // namespace

CueLexicon::CueLexicon(std::string id, const std::map<std::string, std::vector<std::string>>& entries)
    : id_(std::move(id)) {
    for (const auto& [concept_id, phrases] : entries) {
        const std::string path = "/" + concept_id;
        if (concept_id.empty()) throw Error(ErrorCode::SchemaError, "lexicon concept id is empty", path);
        if (phrases.empty()) throw Error(ErrorCode::SchemaError, "concept '" + concept_id + "' has no phrases", path);
        auto& stored = entries_[concept_id];
        for (const auto& phrase : phrases) {
            std::string norm = normalize_phrase(phrase);
            if (norm.empty()) {
                throw Error(ErrorCode::SchemaError, "phrase '" + phrase + "' has no tokens", path);
            }
            auto [it, inserted] = phrase_to_concept_.emplace(norm, concept_id);
            if (!inserted && it->second != concept_id) {
                throw Error(ErrorCode::SchemaError,
                            "phrase '" + norm + "' claimed by concepts '" + it->second + "' and '" + concept_id + "'",
                            path);
            }
            if (inserted) {
                longest_ = std::max(longest_, static_cast<std::size_t>(std::count(norm.begin(), norm.end(), ' ') + 1));
                stored.push_back(std::move(norm));
            }
        }
    }
}

CueLexicon CueLexicon::from_json(const Json& j, std::string id) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "lexicon must be a JSON object");
    std::map<std::string, std::vector<std::string>> entries;
    for (const auto& [concept_id, phrases] : j.items()) {
        if (!phrases.is_array()) throw Error(ErrorCode::SchemaError, "expected phrase array", "/" + concept_id);
        auto& slot = entries[concept_id];
        for (const auto& p : phrases) {
            if (!p.is_string()) throw Error(ErrorCode::SchemaError, "phrases must be strings", "/" + concept_id);
            slot.push_back(p.get<std::string>());
        }
    }
    return CueLexicon(std::move(id), entries);
}

CueLexicon CueLexicon::load(std::string_view bytes, std::string id) {
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed lexicon JSON: ") + e.what());
    }
    return from_json(j, std::move(id));
}

CueLexicon CueLexicon::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load(buf.str(), stem_without(path, ".lex.json"));
}

const std::string* CueLexicon::concept_of(const std::string& normalized_phrase) const {
    auto it = phrase_to_concept_.find(normalized_phrase);
    return it == phrase_to_concept_.end() ? nullptr : &it->second;
}

Json CueLexicon::to_json() const { return Json(entries_); }

Json to_json(const CueMatch& m) {
    return Json{{"concept_id", m.concept_id}, {"phrase", m.phrase}, {"start", m.span.start}, {"end", m.span.end}};
}

std::vector<CueMatch> match_text(std::string_view text, const CueLexicon& lexicon) {
    std::vector<CueMatch> out;
    if (lexicon.empty()) return out;
    const auto tokens = normalize(text);
    std::size_t i = 0;
    while (i < tokens.size()) {
        const std::size_t max_len = std::min(lexicon.longest_phrase_tokens(), tokens.size() - i);
        std::size_t matched = 0;
        for (std::size_t len = max_len; len >= 1 && matched == 0; --len) {
            std::string phrase = tokens[i].text;
            for (std::size_t k = 1; k < len; ++k) {
                phrase += ' ';
                phrase += tokens[i + k].text;
            }
            if (const auto* concept_id = lexicon.concept_of(phrase)) {
                out.push_back({*concept_id, std::move(phrase), {tokens[i].start, tokens[i + len - 1].end}});
                matched = len;
            }
        }
        i += matched == 0 ? 1 : matched;
    }
    return out;
}

bool AnswerMap::has_conflict(std::string_view node_id) const {
    return std::any_of(conflicts.begin(), conflicts.end(),
                       [&](const AnswerConflict& c) { return c.node_id == node_id; });
}

Json to_json(const AnswerMap& answers) {
    Json a = Json::object();
    for (const auto& [node_id, value] : answers.answers) a[node_id] = value.to_json();
    Json p = Json::object();
    for (const auto& [node_id, matches] : answers.provenance) {
        Json list = Json::array();
        for (const auto& m : matches) list.push_back(to_json(m));
        p[node_id] = list;
    }
    Json c = Json::array();
    for (const auto& conflict : answers.conflicts) {
        Json values = Json::array();
        for (const auto& v : conflict.values) values.push_back(v.to_json());
        Json evidence = Json::array();
        for (const auto& m : conflict.evidence) evidence.push_back(to_json(m));
        c.push_back({{"node_id", conflict.node_id}, {"values", values}, {"evidence", evidence}});
    }
    return Json{{"answers", a}, {"provenance", p}, {"conflicts", c}};
}

AnswerMap derive_answers(const std::vector<CueMatch>& matches, const ProcessKnowledgeDoc& doc) {
    AnswerMap out;
    for (const auto& node : doc.nodes) {
        std::map<AnswerValue, std::vector<CueMatch>> by_value;
        for (const auto& [value, concepts] : node.evidence) {
            for (const auto& m : matches) {
                if (std::find(concepts.begin(), concepts.end(), m.concept_id) != concepts.end()) {
                    by_value[value].push_back(m);
                }
            }
        }
        if (by_value.empty()) continue;
        if (by_value.size() == 1) {
            out.answers.emplace(node.id, by_value.begin()->first);
            out.provenance.emplace(node.id, by_value.begin()->second);
            continue;
        }
        AnswerConflict conflict{node.id, {}, {}};
        for (auto& [value, ms] : by_value) {
            conflict.values.push_back(value);
            conflict.evidence.insert(conflict.evidence.end(), ms.begin(), ms.end());
        }
        std::sort(conflict.evidence.begin(), conflict.evidence.end(),
                  [](const CueMatch& a, const CueMatch& b) { return a.span.start < b.span.start; });
        out.conflicts.push_back(std::move(conflict));
    }
    return out;
}

}  // namespace prokno
