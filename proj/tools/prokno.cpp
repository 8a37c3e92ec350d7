#include "prokno/http_server.hpp"
#include "prokno/service.hpp"
#include "prokno/text.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using prokno::Json;

namespace {

bool g_pretty = false;

void emit(const Json& j) {
    std::cout << (g_pretty ? j.dump(2) : j.dump()) << '\n';
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw prokno::Error(prokno::ErrorCode::NotFound, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Accepts either inline JSON or a path to a JSON file.
Json json_arg(const std::string& value) {
    std::error_code ec;
    const std::string text = fs::is_regular_file(value, ec) ? read_file(value) : value;
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw prokno::Error(prokno::ErrorCode::ParseError, "'" + value + "': " + e.what());
    }
}

std::string text_arg(const std::string& value) {
    std::error_code ec;
    if (fs::is_regular_file(value, ec)) return read_file(value);
    return value;
}

void load_rules(const std::string& dir, std::vector<prokno::food::ActionEffectRule>& actions,
                std::vector<prokno::food::DietaryRule>& dietary) {
    if (dir.empty()) return;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        const std::string name = p.filename().string();
        if (name.ends_with(".actions.json")) {
            auto r = prokno::food::load_action_rules_file(p.string());
            actions.insert(actions.end(), r.begin(), r.end());
        } else if (name.ends_with(".diet.json")) {
            auto r = prokno::food::load_dietary_rules_file(p.string());
            dietary.insert(dietary.end(), r.begin(), r.end());
        }
    }
}

std::vector<prokno::GenerationLog> read_logs(const std::string& path) {
    std::vector<prokno::GenerationLog> logs;
    const auto lines = prokno::parse_jsonl(read_file(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        logs.push_back(prokno::GenerationLog::from_json(lines[i], "/" + std::to_string(i)));
    }
    return logs;
}

int run_triage(const prokno::ProcessKnowledgeDoc& doc) {
    using namespace prokno;
    SessionState state = start_session(doc, "cli");
    std::string line;
    while (!state.done()) {
        const QuestionNode& q = doc.node(state.position);
        std::cout << q.id << ": " << q.text << " " << question_json(q)["answer_domain"].dump() << "\n> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        if (line == ":quit") break;
        if (line == ":trace") {
            emit(to_json(explanation_trace(doc, state)));
            continue;
        }
        try {
            if (line.rfind(":whatif ", 0) == 0) {
                emit(to_json(what_if(doc, state, parse_answer(q, line.substr(8))), doc));
                continue;
            }
            state = submit_answer(doc, state, parse_answer(q, line));
        } catch (const Error& e) {
            std::cout << error_json(e).dump() << '\n';
        }
    }
    emit(to_json(explanation_trace(doc, state)));
    return state.done() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace prokno;

    CLI::App app{"Process-knowledge triage, question constraints, safety metrics and food rules"};
    app.require_subcommand(1);
    app.add_flag("--pretty", g_pretty, "Indent JSON output");

    std::string pk_path, lexicon_path, text, kg_path, in_path, config_path, rules_dir, condition, limits_arg,
        profile_arg, name_filter, kind, mode;
    std::vector<std::string> phrases, kg_nodes;
    std::string benefit = "verbatim";
    double threshold = 0.5;
    double theta_e = 0.6, theta_n = 0.3, theta_c = 0.5;
    ExplainConfig explain_cfg;
    int port = -1;

    auto* validate = app.add_subcommand("validate", "Validate a process-knowledge document");
    validate->add_option("file", pk_path, "Document (*.pk.json)")->required();

    auto* classify = app.add_subcommand("classify", "Classify text against an instrument");
    classify->add_option("--pk", pk_path, "Document")->required();
    classify->add_option("--lexicon", lexicon_path, "Cue lexicon")->required();
    classify->add_option("--text", text, "Text or path to a text file")->required();

    auto* triage = app.add_subcommand("triage", "Interactive terminal session");
    triage->add_option("--pk", pk_path, "Document")->required();

    auto* metrics = app.add_subcommand("metrics", "Safety metrics over JSONL input");
    metrics->add_option("kind", kind, "unsafe | risk | semantic | logical")
        ->required()
        ->check(CLI::IsMember({"unsafe", "risk", "semantic", "logical"}));
    metrics->add_option("--in", in_path, "Input JSONL")->required();
    metrics->add_option("--lexicon", lexicon_path, "Harmful-phrase lexicon (unsafe)");
    metrics->add_option("--kg", kg_path, "Knowledge graph supplying harmful concepts (unsafe)");
    metrics->add_option("--kg-nodes", kg_nodes, "Harmful KG node ids (unsafe)");
    metrics->add_option("--benefit-denominator", benefit, "verbatim | per_sample (risk)")
        ->check(CLI::IsMember({"verbatim", "per_sample"}));
    metrics->add_option("--threshold", threshold, "Similarity threshold (semantic)");
    metrics->add_option("--theta-e", theta_e, "Entailment threshold (logical)");
    metrics->add_option("--theta-n", theta_n, "Neutral threshold (logical)");
    metrics->add_option("--theta-c", theta_c, "Contradiction threshold (logical)");

    auto* recipes = app.add_subcommand("recipes", "Evaluate or recommend recipes");
    recipes->add_option("mode", mode, "evaluate | recommend")
        ->required()
        ->check(CLI::IsMember({"evaluate", "recommend"}));
    recipes->add_option("--in", in_path, "Recipes JSONL")->required();
    recipes->add_option("--rules", rules_dir, "Directory of *.actions.json and *.diet.json")->required();
    recipes->add_option("--condition", condition, "Dietary condition (evaluate)");
    recipes->add_option("--limits", limits_arg, "Profile limits as JSON or a JSON file (evaluate)");
    recipes->add_option("--name", name_filter, "Only evaluate the named recipe (evaluate)");
    recipes->add_option("--profile", profile_arg, "Profile as JSON or a JSON file (recommend)");

    auto* explain = app.add_subcommand("explain", "Build a contextual explanation tree");
    explain->add_option("--kg", kg_path, "Knowledge graph")->required();
    explain->add_option("--phrases", phrases, "Concept phrases")->required();
    explain->add_option("--theta-anchor", explain_cfg.anchor_threshold, "Anchor threshold");
    explain->add_option("--theta-stop", explain_cfg.stop_threshold, "Stop threshold");
    explain->add_option("--max-depth", explain_cfg.max_depth, "Maximum expansion depth");

    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("--config", config_path, "Service config (defaults to $PROKNO_CONFIG)");
    serve->add_option("--port", port, "Override the configured port (0 picks a free port)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validate) {
            Json j;
            try {
                j = Json::parse(read_file(pk_path));
            } catch (const Json::parse_error& e) {
                throw Error(ErrorCode::ParseError, e.what());
            }
            const ValidationReport report = validate_pk(decode_pk(j));
            emit(report.to_json());
            return report.ok() ? 0 : 1;
        }
        if (*classify) {
            const auto doc = load_pk_file(pk_path);
            const auto lexicon = CueLexicon::load_file(lexicon_path);
            emit(to_json(classify_text(doc, lexicon, text_arg(text)), doc));
            return 0;
        }
        if (*triage) return run_triage(load_pk_file(pk_path));
        if (*metrics) {
            if (kind == "risk") {
                std::vector<AnnotatedSample> samples;
                const auto lines = parse_jsonl(read_file(in_path));
                for (std::size_t i = 0; i < lines.size(); ++i) {
                    samples.push_back(AnnotatedSample::from_json(lines[i], "/" + std::to_string(i)));
                }
                RiskConfig rc;
                rc.benefit_denominator = benefit;
                emit(perceived_risk(samples, rc).to_json());
                return 0;
            }
            const auto logs = read_logs(in_path);
            if (logs.empty()) throw Error(ErrorCode::EmptyLog, "no generation logs in '" + in_path + "'");
            if (kind == "unsafe") {
                const CueLexicon lexicon = lexicon_path.empty() ? CueLexicon{} : CueLexicon::load_file(lexicon_path);
                std::map<std::string, std::string> concepts;
                if (!kg_path.empty()) {
                    const auto kg = KnowledgeGraph::load_file(kg_path);
                    for (const auto& n : kg_nodes) {
                        if (!kg.contains(n)) throw Error(ErrorCode::NotFound, "unknown KG node '" + n + "'", "/kg_nodes");
                        concepts.emplace(n, kg.label(n));
                    }
                }
                for (const auto& log : logs) emit(avg_unsafe_matches(log, lexicon, concepts).to_json());
            } else if (kind == "semantic") {
                for (const auto& log : logs) emit(semantic_relation(log, content_token_similarity, threshold).to_json());
            } else {
                const LexicalEntailmentScorer scorer({theta_e, theta_n, theta_c});
                for (const auto& log : logs) emit(logical_agreement(log, scorer).to_json());
            }
            return 0;
        }
        if (*recipes) {
            std::vector<food::ActionEffectRule> actions;
            std::vector<food::DietaryRule> dietary;
            load_rules(rules_dir, actions, dietary);
            const auto catalog = food::parse_recipes_jsonl(read_file(in_path));
            if (mode == "recommend") {
                const auto profile = food::Profile::from_json(profile_arg.empty() ? Json(nullptr) : json_arg(profile_arg));
                emit(food::recommend(catalog, profile, actions, dietary).to_json());
                return 0;
            }
            const auto limits = limits_arg.empty() ? food::ProfileLimits{} : food::parse_limits(json_arg(limits_arg));
            bool found = false;
            for (const auto& r : catalog) {
                if (!name_filter.empty() && r.name != name_filter) continue;
                found = true;
                emit(food::evaluate_recipe(r, condition, actions, dietary, limits).to_json());
            }
            if (!found) throw Error(ErrorCode::NotFound, "no recipe named '" + name_filter + "'", "/name");
            return 0;
        }
        if (*explain) {
            const auto kg = KnowledgeGraph::load_file(kg_path);
            emit(to_json(build_context_tree(phrases, kg, token_set_similarity, explain_cfg)));
            return 0;
        }
        if (*serve) {
            if (config_path.empty()) {
                if (const char* env = std::getenv("PROKNO_CONFIG")) config_path = env;
            }
            if (config_path.empty()) {
                std::cerr << "serve: --config or PROKNO_CONFIG is required\n";
                return 2;
            }
            ServiceConfig cfg = ServiceConfig::load_file(config_path);
            if (port >= 0) cfg.port = port;
            Service service(cfg, Catalog::load(cfg));
            HttpServer server(service);
            const int bound = server.bind(cfg.host, cfg.port);
            if (bound < 0) throw Error(ErrorCode::ConfigError, "cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
            std::cout << "listening on " << cfg.host << ":" << bound << std::endl;
            static HttpServer* active = &server;
            std::signal(SIGINT, [](int) { active->stop(); });
            std::signal(SIGTERM, [](int) { active->stop(); });
            server.listen();
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << error_json(e).dump() << '\n';
        return 1;
    }
    return 2;
}
