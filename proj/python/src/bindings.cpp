#include "prokno/food.hpp"
#include "prokno/kg_explain.hpp"
#include "prokno/metrics.hpp"
#include "prokno/pk_model.hpp"
#include "prokno/qgen.hpp"
#include "prokno/text.hpp"
#include "prokno/triage.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace prokno;

namespace {

// JSON crosses the boundary as strings; the Python package decodes them.
Json parse(const std::string& text, const char* what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
    }
}

std::string validate(const std::string& document) {
    return validate_pk(decode_pk(parse(document, "document"))).to_json().dump();
}

std::string classify(const std::string& document, const std::string& lexicon, const std::string& text) {
    const auto doc = load_pk(document);
    const auto lex = CueLexicon::from_json(parse(lexicon, "lexicon"), "lexicon");
    return to_json(classify_text(doc, lex, text), doc).dump();
}

std::string walk(const std::string& document, const std::vector<std::string>& answers) {
    const auto doc = load_pk(document);
    SessionState s = start_session(doc);
    for (const auto& a : answers) s = submit_answer(doc, s, parse_answer(doc.node(s.position), a));
    return to_json(explanation_trace(doc, s)).dump();
}

std::vector<Json> lines(const std::string& text) { return parse_jsonl(text); }

std::string unsafe(const std::string& log, const std::string& lexicon, const std::map<std::string, std::string>& concepts) {
    return avg_unsafe_matches(GenerationLog::from_json(parse(log, "log")),
                              CueLexicon::from_json(parse(lexicon, "lexicon"), "lexicon"), concepts)
        .to_json()
        .dump();
}

std::string risk(const std::string& samples_jsonl, const std::string& benefit_denominator) {
    std::vector<AnnotatedSample> samples;
    const auto js = lines(samples_jsonl);
    for (std::size_t i = 0; i < js.size(); ++i) samples.push_back(AnnotatedSample::from_json(js[i], "/" + std::to_string(i)));
    RiskConfig rc;
    rc.benefit_denominator = benefit_denominator;
    return perceived_risk(samples, rc).to_json().dump();
}

std::string semantic(const std::string& log, double threshold) {
    return semantic_relation(GenerationLog::from_json(parse(log, "log")), content_token_similarity, threshold).to_json().dump();
}

std::string logical(const std::string& log, double theta_e, double theta_n, double theta_c) {
    return logical_agreement(GenerationLog::from_json(parse(log, "log")), LexicalEntailmentScorer({theta_e, theta_n, theta_c}))
        .to_json()
        .dump();
}

std::string entail(const std::string& premise, const std::string& hypothesis) {
    return to_json(baseline_entailment(premise, hypothesis)).dump();
}

std::string rank(const std::string& candidates_jsonl, const std::string& history_jsonl) {
    return to_json(filter_and_rank(parse_candidates_jsonl(candidates_jsonl), parse_candidates_jsonl(history_jsonl),
                                   default_tag_rules(), LexicalEntailmentScorer()))
        .dump();
}

std::string evaluate(const std::string& recipe, const std::string& condition, const std::string& actions,
                     const std::string& dietary, const std::string& limits) {
    return food::evaluate_recipe(food::Recipe::from_json(parse(recipe, "recipe")), condition,
                                 food::parse_action_rules(parse(actions, "action rules")),
                                 food::parse_dietary_rules(parse(dietary, "dietary rules")),
                                 food::parse_limits(parse(limits, "limits")))
        .to_json()
        .dump();
}

std::string recommend(const std::string& recipes_jsonl, const std::string& profile, const std::string& actions,
                      const std::string& dietary) {
    return food::recommend(food::parse_recipes_jsonl(recipes_jsonl), food::Profile::from_json(parse(profile, "profile")),
                           food::parse_action_rules(parse(actions, "action rules")),
                           food::parse_dietary_rules(parse(dietary, "dietary rules")))
        .to_json()
        .dump();
}

std::string explain(const std::vector<std::string>& phrases, const std::string& kg, double theta_anchor, double theta_stop,
                    int max_depth) {
    return to_json(build_context_tree(phrases, KnowledgeGraph::from_json(parse(kg, "kg")), token_set_similarity,
                                      {theta_anchor, theta_stop, max_depth}))
        .dump();
}

}  // namespace

PYBIND11_MODULE(_prokno, m) {
    static py::exception<Error> error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::tuple args = py::make_tuple(to_string(e.code()), e.what(), e.path());
            PyErr_SetObject(error.ptr(), args.ptr());
        }
    });

    m.def("validate", &validate, py::arg("document"));
    m.def("classify", &classify, py::arg("document"), py::arg("lexicon"), py::arg("text"));
    m.def("walk", &walk, py::arg("document"), py::arg("answers"));
    m.def("unsafe", &unsafe, py::arg("log"), py::arg("lexicon"), py::arg("concepts") = std::map<std::string, std::string>{});
    m.def("risk", &risk, py::arg("samples_jsonl"), py::arg("benefit_denominator") = "verbatim");
    m.def("semantic", &semantic, py::arg("log"), py::arg("threshold") = 0.5);
    m.def("logical", &logical, py::arg("log"), py::arg("theta_e") = 0.6, py::arg("theta_n") = 0.3, py::arg("theta_c") = 0.5);
    m.def("entail", &entail, py::arg("premise"), py::arg("hypothesis"));
    m.def("rank", &rank, py::arg("candidates_jsonl"), py::arg("history_jsonl") = "");
    m.def("evaluate", &evaluate, py::arg("recipe"), py::arg("condition"), py::arg("actions"), py::arg("dietary"),
          py::arg("limits") = "{}");
    m.def("recommend", &recommend, py::arg("recipes_jsonl"), py::arg("profile"), py::arg("actions"), py::arg("dietary"));
    m.def("explain", &explain, py::arg("phrases"), py::arg("kg"), py::arg("theta_anchor") = 0.6, py::arg("theta_stop") = 0.8,
          py::arg("max_depth") = 6);
}
