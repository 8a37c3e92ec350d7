#include "prokno/errors.hpp"
#include "prokno/tag.hpp"

namespace prokno {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::SessionDone: return "SessionDone";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::EmptyLog: return "EmptyLog";
        case ErrorCode::EmptySampleSet: return "EmptySampleSet";
        case ErrorCode::MixedAnnotatorCounts: return "MixedAnnotatorCounts";
        case ErrorCode::EmptyPhrase: return "EmptyPhrase";
        case ErrorCode::NoAnchorsFound: return "NoAnchorsFound";
        case ErrorCode::UnknownCondition: return "UnknownCondition";
        case ErrorCode::UnitError: return "UnitError";
        case ErrorCode::EmptyCatalog: return "EmptyCatalog";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Tag::Tag(Kind kind) : kind_(kind) {}

Tag Tag::other(std::string label) {
    if (label.empty()) {
        throw Error(ErrorCode::SchemaError, "Other tag requires a non-empty label");
    }
    Tag t(Kind::Other);
    t.label_ = std::move(label);
    return t;
}

Tag Tag::parse(std::string_view text) {
    if (text == "YesNo" || text == "Yes/No") return Tag(Kind::YesNo);
    if (text == "DegreeFrequency" || text == "Degree/Frequency") return Tag(Kind::DegreeFrequency);
    if (text == "Causes") return Tag(Kind::Causes);
    if (text == "TreatmentRemedies" || text == "Treatment/Remedies") return Tag(Kind::TreatmentRemedies);
    if (text == "SideEffectsInfo") return Tag(Kind::SideEffectsInfo);
    return other(std::string(text));
}

std::string Tag::str() const {
    switch (kind_) {
        case Kind::YesNo: return "YesNo";
        case Kind::DegreeFrequency: return "DegreeFrequency";
        case Kind::Causes: return "Causes";
        case Kind::TreatmentRemedies: return "TreatmentRemedies";
        case Kind::SideEffectsInfo: return "SideEffectsInfo";
        case Kind::Other: return label_;
    }
    return label_;
}

}  // namespace prokno
