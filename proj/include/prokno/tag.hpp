#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace prokno {

/// Conversational role of a question.
class Tag {
public:
    enum class Kind { YesNo, DegreeFrequency, Causes, TreatmentRemedies, SideEffectsInfo, Other };

    Tag() = default;
    explicit Tag(Kind kind);
    static Tag other(std::string label);

    /// Accepts the canonical names ("YesNo", "DegreeFrequency", ...) and the
    /// slash forms ("Yes/No", "Degree/Frequency", ...); any other non-empty
    /// string becomes Other(label). Throws Error{SchemaError} on empty input.
    static Tag parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    const std::string& label() const noexcept { return label_; }
    std::string str() const;

    auto operator<=>(const Tag&) const = default;
    bool operator==(const Tag&) const = default;

private:
    Kind kind_ = Kind::YesNo;
    std::string label_;
};

}  // namespace prokno
