#include "prokno/service.hpp"
#include "prokno/text.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace prokno {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> files_with_suffix(const std::string& dir, std::string_view suffix) {
    std::vector<fs::path> out;
    if (dir.empty()) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.ends_with(suffix)) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string resolve(const std::string& dir, const std::string& base) {
    if (dir.empty() || base.empty() || fs::path(dir).is_absolute()) return dir;
    return (fs::path(base) / dir).lexically_normal().string();
}

const Json& field(const Json& req, const char* key) {
    auto it = req.find(key);
    if (it == req.end()) throw Error(ErrorCode::SchemaError, std::string("missing field '") + key + "'", std::string("/") + key);
    return *it;
}

std::string string_field(const Json& req, const char* key) {
    const Json& v = field(req, key);
    if (!v.is_string()) throw Error(ErrorCode::SchemaError, std::string("field '") + key + "' must be a string", std::string("/") + key);
    return v.get<std::string>();
}

std::vector<CandidateQuestion> candidate_list(const Json& j, const std::string& path) {
    if (!j.is_array()) throw Error(ErrorCode::SchemaError, path + ": expected array", path);
    std::vector<CandidateQuestion> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(CandidateQuestion::from_json(j[i], path + "/" + std::to_string(i)));
    return out;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : path) {
        if (c == '/') {
            if (!current.empty()) parts.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) parts.push_back(std::move(current));
    return parts;
}

AnswerValue answer_from(const Json& req, const QuestionNode& node) {
    const Json& v = field(req, "value");
    if (v.is_string()) return parse_answer(node, v.get<std::string>());
    return AnswerValue::from_json(v, "/value");
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const Json& j, const std::string& base_dir) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "service config must be a JSON object");
    ServiceConfig c;
    if (auto bind = j.value("bind", std::string{}); !bind.empty()) {
        const auto colon = bind.rfind(':');
        if (colon == std::string::npos) throw Error(ErrorCode::ConfigError, "bind must be host:port", "/bind");
        c.host = bind.substr(0, colon);
        try {
            c.port = std::stoi(bind.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigError, "bind port is not a number", "/bind");
        }
    }
    c.pk_dir = resolve(j.value("pk_dir", std::string{}), base_dir);
    c.lexicon_dir = resolve(j.value("lexicon_dir", std::string{}), base_dir);
    c.kg_dir = resolve(j.value("kg_dir", std::string{}), base_dir);
    c.rules_dir = resolve(j.value("rules_dir", std::string{}), base_dir);
    if (auto m = j.find("metrics"); m != j.end()) {
        c.entailment = LexicalEntailmentConfig::from_json(*m);
        c.risk = RiskConfig::from_json(*m);
        c.semantic_threshold = m->value("semantic_threshold", c.semantic_threshold);
    }
    if (auto e = j.find("explain"); e != j.end()) c.explain = ExplainConfig::from_json(*e);
    c.session_idle_timeout_s = j.value("session_idle_timeout_s", c.session_idle_timeout_s);
    return c;
}

ServiceConfig ServiceConfig::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    Json j;
    try {
        j = Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    return from_json(j, fs::path(path).parent_path().string());
}

void ServiceConfig::validate() const {
    for (const auto& [name, dir] : {std::pair{"pk_dir", pk_dir}, std::pair{"lexicon_dir", lexicon_dir},
                                    std::pair{"kg_dir", kg_dir}, std::pair{"rules_dir", rules_dir}}) {
        if (dir.empty()) continue;
        std::error_code ec;
        if (!fs::is_directory(dir, ec)) {
            throw Error(ErrorCode::ConfigError, std::string(name) + " '" + dir + "' is not a readable directory",
                        std::string("/") + name);
        }
    }
    if (session_idle_timeout_s <= 0) {
        throw Error(ErrorCode::ConfigError, "session_idle_timeout_s must be positive", "/session_idle_timeout_s");
    }
}

Catalog Catalog::load(const ServiceConfig& config) {
    config.validate();
    Catalog c;
    for (const auto& path : files_with_suffix(config.pk_dir, ".pk.json")) {
        auto doc = std::make_shared<const ProcessKnowledgeDoc>(load_pk_file(path.string()));
        c.docs.emplace(doc->id, std::move(doc));
    }
    for (const auto& path : files_with_suffix(config.lexicon_dir, ".lex.json")) {
        auto lex = CueLexicon::load_file(path.string());
        c.lexicons.emplace(lex.id(), std::move(lex));
    }
    for (const auto& path : files_with_suffix(config.kg_dir, ".kg.json")) {
        std::string id = path.filename().string();
        id.resize(id.size() - std::string_view(".kg.json").size());
        c.graphs.emplace(id, KnowledgeGraph::load_file(path.string()));
    }
    for (const auto& path : files_with_suffix(config.rules_dir, ".actions.json")) {
        auto rules = food::load_action_rules_file(path.string());
        c.action_rules.insert(c.action_rules.end(), rules.begin(), rules.end());
    }
    for (const auto& path : files_with_suffix(config.rules_dir, ".diet.json")) {
        auto rules = food::load_dietary_rules_file(path.string());
        c.dietary_rules.insert(c.dietary_rules.end(), rules.begin(), rules.end());
    }
    return c;
}

Json error_json(const Error& e) {
    return Json{{"error_code", to_string(e.code())}, {"message", e.what()}, {"path", e.path()}};
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return 404;
        case ErrorCode::SessionDone: return 409;
        case ErrorCode::DomainError: return 422;
        default: return 400;
    }
}

Service::Service(ServiceConfig config, Catalog catalog, Clock clock)
    : config_(std::move(config)), catalog_(std::move(catalog)), clock_(std::move(clock)) {}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
        Json req = Json::object();
        if (method == "POST") {
            if (body.find_first_not_of(" \t\r\n") != std::string::npos) {
                try {
                    req = Json::parse(body);
                } catch (const Json::parse_error& e) {
                    throw Error(ErrorCode::ParseError, std::string("malformed request body: ") + e.what());
                }
            }
            if (!req.is_object()) throw Error(ErrorCode::SchemaError, "request body must be a JSON object");
        }

        const auto parts = split_path(path);
        const auto route = [&](std::initializer_list<const char*> pattern) {
            if (parts.size() != pattern.size()) return false;
            std::size_t i = 0;
            for (const char* p : pattern) {
                if (std::string_view(p) != "*" && parts[i] != p) return false;
                ++i;
            }
            return true;
        };

        if (method == "GET") {
            if (route({"pk"})) return {200, list_instruments()};
            if (route({"pk", "*"})) return {200, to_json(*doc(parts[1]))};
            if (route({"sessions", "*", "trace"})) return {200, trace(parts[1])};
        } else if (method == "POST") {
            if (route({"sessions"})) return {200, create_session(req)};
            if (route({"sessions", "*", "answer"})) return {200, answer(parts[1], req)};
            if (route({"sessions", "*", "whatif"})) return {200, preview(parts[1], req)};
            if (route({"classify"})) return {200, classify(req)};
            if (route({"candidates", "validate"})) return {200, candidates(req)};
            if (route({"metrics", "*"})) return {200, metric(parts[1], req)};
            if (route({"recipes", "*"})) return {200, recipes(parts[1], req)};
            if (route({"explain", "tree"})) return {200, explain(req)};
        }
        throw Error(ErrorCode::NotFound, "no route for " + method + " " + path);
    } catch (const Error& e) {
        return {http_status(e.code()), error_json(e)};
    } catch (const std::exception& e) {
        return {500, Json{{"error_code", "InternalError"}, {"message", e.what()}, {"path", ""}}};
    }
}

std::size_t Service::session_count() const {
    std::lock_guard lock(sessions_mutex_);
    return sessions_.size();
}

std::size_t Service::evict_idle() {
    const auto now = clock_();
    const auto limit = std::chrono::seconds(config_.session_idle_timeout_s);
    std::lock_guard lock(sessions_mutex_);
    std::size_t evicted = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        std::unique_lock slot_lock(it->second->mutex, std::try_to_lock);
        if (slot_lock.owns_lock() && now - it->second->last_used > limit) {
            slot_lock.unlock();
            it = sessions_.erase(it);
            ++evicted;
        } else {
            ++it;
        }
    }
    return evicted;
}

std::shared_ptr<const ProcessKnowledgeDoc> Service::doc(const std::string& id) const {
    auto it = catalog_.docs.find(id);
    if (it == catalog_.docs.end()) throw Error(ErrorCode::NotFound, "unknown instrument '" + id + "'", "/doc_id");
    return it->second;
}

std::shared_ptr<Service::SessionSlot> Service::slot(const std::string& id) {
    evict_idle();
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "unknown session '" + id + "'");
    return it->second;
}

std::string Service::store(std::shared_ptr<const ProcessKnowledgeDoc> d, SessionState state) {
    evict_idle();
    auto s = std::make_shared<SessionSlot>();
    s->doc = std::move(d);
    s->state = std::move(state);
    s->last_used = clock_();
    std::lock_guard lock(sessions_mutex_);
    const std::string id = s->state.session_id;
    sessions_.emplace(id, std::move(s));
    return id;
}

Json Service::list_instruments() const {
    Json list = Json::array();
    for (const auto& [id, d] : catalog_.docs) {
        list.push_back({{"id", id}, {"title", d->title}, {"mode", to_string(d->mode)}, {"nodes", d->nodes.size()}});
    }
    return Json{{"instruments", list}};
}

namespace {

Json session_view(const ProcessKnowledgeDoc& d, const SessionState& s) {
    return Json{{"session_id", s.session_id},
                {"status", s.done() ? "done" : "active"},
                {"question", s.done() ? Json(nullptr) : question_json(d.node(s.position))},
                {"outcome", s.outcome ? Json(*s.outcome) : Json(nullptr)},
                {"trace", to_json(explanation_trace(d, s))}};
}

}  // namespace

Json Service::create_session(const Json& req) {
    auto d = doc(string_field(req, "doc_id"));
    const std::string id = "session-" + std::to_string(next_session_++);
    SessionState state = start_session(*d, id);
    Json view = session_view(*d, state);
    store(std::move(d), std::move(state));
    return view;
}

Json Service::answer(const std::string& id, const Json& req) {
    auto s = slot(id);
    std::lock_guard lock(s->mutex);
    if (s->state.done()) {
        throw Error(ErrorCode::SessionDone, "session already reached outcome '" + *s->state.outcome + "'");
    }
    const AnswerValue value = answer_from(req, s->doc->node(s->state.position));
    s->state = submit_answer(*s->doc, s->state, value);
    s->last_used = clock_();
    return session_view(*s->doc, s->state);
}

Json Service::trace(const std::string& id) {
    auto s = slot(id);
    std::lock_guard lock(s->mutex);
    s->last_used = clock_();
    return to_json(explanation_trace(*s->doc, s->state));
}

Json Service::preview(const std::string& id, const Json& req) {
    auto s = slot(id);
    std::lock_guard lock(s->mutex);
    if (s->state.done()) {
        throw Error(ErrorCode::SessionDone, "session already reached outcome '" + *s->state.outcome + "'");
    }
    const AnswerValue value = answer_from(req, s->doc->node(s->state.position));
    s->last_used = clock_();
    return to_json(what_if(*s->doc, s->state, value), *s->doc);
}

Json Service::classify(const Json& req) {
    auto d = doc(string_field(req, "doc_id"));
    const std::string lexicon_id = req.contains("lexicon") ? string_field(req, "lexicon") : d->id;
    auto lex = catalog_.lexicons.find(lexicon_id);
    if (lex == catalog_.lexicons.end()) {
        throw Error(ErrorCode::NotFound, "unknown lexicon '" + lexicon_id + "'", "/lexicon");
    }
    ClassifyResult result = classify_text(*d, lex->second, string_field(req, "text"));
    Json out = to_json(result, *d);
    if (req.value("open_session", false) && !result.session.done()) {
        result.session.session_id = "session-" + std::to_string(next_session_++);
        out["session_id"] = store(d, std::move(result.session));
    }
    return out;
}

Json Service::candidates(const Json& req) const {
    const auto history = candidate_list(req.contains("history") ? req["history"] : Json::array(), "/history");
    const auto cands = candidate_list(field(req, "candidates"), "/candidates");
    const TagRuleSet rules = req.contains("rules") ? TagRuleSet::from_json(req["rules"]) : default_tag_rules();
    LexicalEntailmentConfig ec = config_.entailment;
    if (req.contains("config")) ec = LexicalEntailmentConfig::from_json(req["config"]);
    const LexicalEntailmentScorer scorer(ec);
    return to_json(filter_and_rank(cands, history, rules, scorer));
}

Json Service::metric(const std::string& kind, const Json& req) const {
    if (kind == "risk") {
        const Json& list = field(req, "samples");
        if (!list.is_array()) throw Error(ErrorCode::SchemaError, "samples must be an array", "/samples");
        std::vector<AnnotatedSample> samples;
        for (std::size_t i = 0; i < list.size(); ++i) {
            samples.push_back(AnnotatedSample::from_json(list[i], "/samples/" + std::to_string(i)));
        }
        RiskConfig rc = config_.risk;
        if (req.contains("config")) {
            const Json& c = req["config"];
            rc.gold_rule = c.value("gold_rule", rc.gold_rule);
            rc.benefit_denominator = c.value("benefit_denominator", rc.benefit_denominator);
        }
        return perceived_risk(samples, rc).to_json();
    }

    const GenerationLog log = GenerationLog::from_json(field(req, "log"), "/log");
    if (kind == "unsafe") {
        CueLexicon lexicon;
        if (req.contains("lexicon_id")) {
            auto it = catalog_.lexicons.find(string_field(req, "lexicon_id"));
            if (it == catalog_.lexicons.end()) throw Error(ErrorCode::NotFound, "unknown lexicon", "/lexicon_id");
            lexicon = it->second;
        } else if (req.contains("lexicon")) {
            lexicon = CueLexicon::from_json(req["lexicon"], "inline");
        }
        std::map<std::string, std::string> concepts;
        if (req.contains("kg_id")) {
            auto g = catalog_.graphs.find(string_field(req, "kg_id"));
            if (g == catalog_.graphs.end()) throw Error(ErrorCode::NotFound, "unknown knowledge graph", "/kg_id");
            for (const auto& n : req.value("kg_nodes", std::vector<std::string>{})) {
                if (!g->second.contains(n)) throw Error(ErrorCode::NotFound, "unknown KG node '" + n + "'", "/kg_nodes");
                concepts.emplace(n, g->second.label(n));
            }
        } else if (req.contains("kg_concepts")) {
            concepts = req["kg_concepts"].get<std::map<std::string, std::string>>();
        }
        return avg_unsafe_matches(log, lexicon, concepts).to_json();
    }
    if (kind == "semantic") {
        const double threshold = req.value("threshold", config_.semantic_threshold);
        return semantic_relation(log, content_token_similarity, threshold).to_json();
    }
    if (kind == "logical") {
        LexicalEntailmentConfig ec = config_.entailment;
        if (req.contains("config")) ec = LexicalEntailmentConfig::from_json(req["config"]);
        return logical_agreement(log, LexicalEntailmentScorer(ec)).to_json();
    }
    throw Error(ErrorCode::NotFound, "unknown metric '" + kind + "'");
}

Json Service::recipes(const std::string& action, const Json& req) const {
    if (action == "evaluate") {
        const food::Recipe recipe = food::Recipe::from_json(field(req, "recipe"), "/recipe");
        const std::string condition = req.value("condition", std::string{});
        const food::ProfileLimits limits = req.contains("limits") ? food::parse_limits(req["limits"]) : food::ProfileLimits{};
        return food::evaluate_recipe(recipe, condition, catalog_.action_rules, catalog_.dietary_rules, limits).to_json();
    }
    if (action == "recommend") {
        const Json& list = field(req, "recipes");
        if (!list.is_array()) throw Error(ErrorCode::SchemaError, "recipes must be an array", "/recipes");
        std::vector<food::Recipe> catalog;
        for (std::size_t i = 0; i < list.size(); ++i) {
            catalog.push_back(food::Recipe::from_json(list[i], "/recipes/" + std::to_string(i)));
        }
        const food::Profile profile = food::Profile::from_json(req.contains("profile") ? req["profile"] : Json(nullptr));
        return food::recommend(catalog, profile, catalog_.action_rules, catalog_.dietary_rules).to_json();
    }
    throw Error(ErrorCode::NotFound, "unknown recipes action '" + action + "'");
}

Json Service::explain(const Json& req) const {
    const Json& phrases_json = field(req, "phrases");
    if (!phrases_json.is_array()) throw Error(ErrorCode::SchemaError, "phrases must be an array", "/phrases");
    const auto phrases = phrases_json.get<std::vector<std::string>>();
    const KnowledgeGraph* kg = nullptr;
    if (req.contains("kg_id")) {
        auto it = catalog_.graphs.find(string_field(req, "kg_id"));
        if (it == catalog_.graphs.end()) throw Error(ErrorCode::NotFound, "unknown knowledge graph", "/kg_id");
        kg = &it->second;
    } else if (catalog_.graphs.size() == 1) {
        kg = &catalog_.graphs.begin()->second;
    } else {
        throw Error(ErrorCode::SchemaError, "kg_id required when several graphs are loaded", "/kg_id");
    }
    ExplainConfig ec = config_.explain;
    if (req.contains("config")) {
        const Json& c = req["config"];
        ec.anchor_threshold = c.value("theta_anchor", ec.anchor_threshold);
        ec.stop_threshold = c.value("theta_stop", ec.stop_threshold);
        ec.max_depth = c.value("max_depth", ec.max_depth);
    }
    return to_json(build_context_tree(phrases, *kg, token_set_similarity, ec));
}

}  // namespace prokno
