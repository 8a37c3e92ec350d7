#pragma once

#include "prokno/cue_matcher.hpp"
#include "prokno/food.hpp"
#include "prokno/kg_explain.hpp"
#include "prokno/metrics.hpp"
#include "prokno/pk_model.hpp"
#include "prokno/qgen.hpp"
#include "prokno/triage.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace prokno {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string pk_dir;
    std::string lexicon_dir;
    std::string kg_dir;
    std::string rules_dir;
    LexicalEntailmentConfig entailment;
    RiskConfig risk;
    double semantic_threshold = 0.5;
    ExplainConfig explain;
    int session_idle_timeout_s = 1800;

    /// Relative directories resolve against `base_dir`.
    static ServiceConfig from_json(const Json& j, const std::string& base_dir = {});
    static ServiceConfig load_file(const std::string& path);

    /// Throws Error{ConfigError} unless every configured directory is readable
    /// and the timeout is positive.
    void validate() const;
};

/// Read-only artifacts shared by every request.
struct Catalog {
    std::map<std::string, std::shared_ptr<const ProcessKnowledgeDoc>> docs;
    std::map<std::string, CueLexicon> lexicons;
    std::map<std::string, KnowledgeGraph> graphs;
    std::vector<food::ActionEffectRule> action_rules;
    std::vector<food::DietaryRule> dietary_rules;

    static Catalog load(const ServiceConfig& config);
};

struct Response {
    int status = 200;
    Json body;
};

/// Transport-independent request handling for the HTTP API. Sessions are
/// kept in memory; each session is mutated under its own lock so distinct
/// sessions proceed in parallel.
class Service {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;

    Service(ServiceConfig config, Catalog catalog, Clock clock = std::chrono::steady_clock::now);

    Response handle(const std::string& method, const std::string& path, const std::string& body);

    std::size_t session_count() const;
    /// Drops sessions idle for longer than the configured timeout.
    std::size_t evict_idle();

    const Catalog& catalog() const noexcept { return catalog_; }
    const ServiceConfig& config() const noexcept { return config_; }

private:
    struct SessionSlot {
        std::mutex mutex;
        std::shared_ptr<const ProcessKnowledgeDoc> doc;
        SessionState state;
        std::chrono::steady_clock::time_point last_used;
    };

    std::shared_ptr<const ProcessKnowledgeDoc> doc(const std::string& id) const;
    std::shared_ptr<SessionSlot> slot(const std::string& id);
    std::string store(std::shared_ptr<const ProcessKnowledgeDoc> doc, SessionState state);

    Json list_instruments() const;
    Json create_session(const Json& req);
    Json answer(const std::string& id, const Json& req);
    Json trace(const std::string& id);
    Json preview(const std::string& id, const Json& req);
    Json classify(const Json& req);
    Json candidates(const Json& req) const;
    Json metric(const std::string& kind, const Json& req) const;
    Json recipes(const std::string& action, const Json& req) const;
    Json explain(const Json& req) const;

    ServiceConfig config_;
    Catalog catalog_;
    Clock clock_;
    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
    std::atomic<std::uint64_t> next_session_{1};
};

/// Error body used by every failing endpoint: {error_code, message, path}.
Json error_json(const Error& e);
int http_status(ErrorCode code);


}  // namespace prokno
