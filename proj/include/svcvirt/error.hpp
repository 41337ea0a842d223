#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace svcvirt {

enum class ErrorCode {
    MalformedPath,
    StaleHandle,
    KeyNotFound,
    KeyExists,
    UnknownVm,
    MalformedName,
    MalformedPattern,
    AlreadyExists,
    NotFound,
    KindMismatch,
    MalformedServiceKey,
    ServiceExists,
    MalformedRecord,
    UnknownService,
    AccessRefused,
    DependencyCycle,
    NameMismatch,
    HandshakeIncomplete,
    ClassificationConflict,
    RelativePath,
    AlreadyVirtualized,
    NotOriginal,
    UnknownImage,
    UnknownProcess,
    MalformedImage,
    ParseError,
};

// Kebab-case spelling used in trace `result=` fields and status reasons.
std::string_view to_string(ErrorCode code) noexcept;
// Inverse of to_string; false for an unknown spelling.
bool parse_error_code(std::string_view text, ErrorCode& out) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace svcvirt
