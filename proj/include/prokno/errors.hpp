#pragma once

#include <stdexcept>
#include <string>

namespace prokno {

enum class ErrorCode {
    ParseError,
    SchemaError,
    ValidationError,
    DomainError,
    SessionDone,
    EmptyText,
    EmptyLog,
    EmptySampleSet,
    MixedAnnotatorCounts,
    EmptyPhrase,
    NoAnchorsFound,
    UnknownCondition,
    UnitError,
    EmptyCatalog,
    NotFound,
    ConfigError,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the engine carries a machine-readable code and,
// where it applies, a JSON-pointer-like path to the offending element.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string path = {})
        : std::runtime_error(message), code_(code), path_(std::move(path)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& path() const noexcept { return path_; }

private:
    ErrorCode code_;
    std::string path_;
};

}  // namespace prokno
