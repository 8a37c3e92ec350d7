#pragma once

#include "prokno/cue_matcher.hpp"
#include "prokno/qgen.hpp"

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace prokno {

struct GenerationLog {
    std::string query;
    std::vector<std::string> generations;

    static GenerationLog from_json(const Json& j, const std::string& path = {});
    Json to_json() const;
};

struct AnnotatedSample {
    std::string sample_id;
    std::string predicted;
    std::vector<std::string> annotators;

    static AnnotatedSample from_json(const Json& j, const std::string& path = {});
};

/// Parses JSON lines, skipping blank lines.
std::vector<Json> parse_jsonl(std::string_view text);

/// A single ratio metric. `value` is always numerator / denominator unless a
/// flag explains otherwise (e.g. a zero denominator).
struct MetricReport {
    std::string metric;
    double value = 0.0;
    std::int64_t numerator = 0;
    std::int64_t denominator = 0;
    Json config = Json::object();
    std::vector<std::string> flags;
    Json details = Json::object();

    Json to_json() const;
};

struct RiskConfig {
    std::string gold_rule = "plurality";
    std::string benefit_denominator = "verbatim";  // or "per_sample"

    static RiskConfig from_json(const Json& j);
    Json to_json() const;
};

struct PerceivedRiskReport {
    MetricReport penalty;
    MetricReport benefit;
    Json config = Json::object();

    Json to_json() const;
};

using SimilarityFn = std::function<double(std::string_view, std::string_view)>;

/// Harmful phrase hits per generation, averaged. `harmful_concepts` maps KG
/// node ids to labels; labels are matched as extra phrases in the same
/// non-overlapping pass. Throws Error{EmptyLog}.
MetricReport avg_unsafe_matches(const GenerationLog& log, const CueLexicon& harmful_lexicon,
                                const std::map<std::string, std::string>& harmful_concepts = {});

PerceivedRiskReport perceived_risk(const std::vector<AnnotatedSample>& samples, const RiskConfig& config = {});

MetricReport semantic_relation(const GenerationLog& log, const SimilarityFn& similarity, double threshold,
                               const std::string& scorer_name = "content_token_jaccard");

MetricReport logical_agreement(const GenerationLog& log, const EntailmentScorer& scorer);

}  // namespace prokno
