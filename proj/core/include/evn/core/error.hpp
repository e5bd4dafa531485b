#pragma once

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace evn {

enum class ErrorCode {
    // state machine
    IllegalTransition,
    MissingArtifact,
    InvalidArtifact,
    // pure operations
    EmptyAssumptionSet,
    EmptyAnchorSet,
    InvalidArgument,
    // gateway
    MissingBinding,
    UnknownTemplate,
    TransportError,
    SchemaExhausted,
    CacheMiss,
    // operators
    ElicitationAborted,
    NoSurvivingDirection,
    AssumptionCountOutOfRange,
    TraceInvalid,
    MissingSections,
    // evalkit
    FormatError,
    CorpusShapeError,
    EmptyGroup,
    RaggedRuns,
    LengthMismatch,
    RatingOutOfRange,
    UndefinedPair,
    // service
    NotFound,
    Conflict,
    StorageFull,
    CorruptRecord,
    Io,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library. `details` carries structured context
/// (offending field, phase, attempts, ...) for the service's error payloads.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object())
        : std::runtime_error(message), code_(code), details_(std::move(details)) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const nlohmann::json& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    nlohmann::json details_;
};

}  // namespace evn
