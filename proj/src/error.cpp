#include "svcvirt/error.hpp"

namespace svcvirt {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::MalformedPath: return "malformed-path";
    case ErrorCode::StaleHandle: return "stale-handle";
    case ErrorCode::KeyNotFound: return "key-not-found";
    case ErrorCode::KeyExists: return "key-exists";
    case ErrorCode::UnknownVm: return "unknown-vm";
    case ErrorCode::MalformedName: return "malformed-name";
    case ErrorCode::MalformedPattern: return "malformed-pattern";
    case ErrorCode::AlreadyExists: return "already-exists";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::KindMismatch: return "kind-mismatch";
    case ErrorCode::MalformedServiceKey: return "malformed-service-key";
    case ErrorCode::ServiceExists: return "service-exists";
    case ErrorCode::MalformedRecord: return "malformed-record";
    case ErrorCode::UnknownService: return "unknown-service";
    case ErrorCode::AccessRefused: return "access-refused";
    case ErrorCode::DependencyCycle: return "dependency-cycle";
    case ErrorCode::NameMismatch: return "name-mismatch";
    case ErrorCode::HandshakeIncomplete: return "handshake-incomplete";
    case ErrorCode::ClassificationConflict: return "classification-conflict";
    case ErrorCode::RelativePath: return "relative-path";
    case ErrorCode::AlreadyVirtualized: return "already-virtualized";
    case ErrorCode::NotOriginal: return "not-original";
    case ErrorCode::UnknownImage: return "unknown-image";
    case ErrorCode::UnknownProcess: return "unknown-process";
    case ErrorCode::MalformedImage: return "malformed-image";
    case ErrorCode::ParseError: return "parse-error";
    }
    return "unknown-error";
}

bool parse_error_code(std::string_view text, ErrorCode& out) noexcept
{
    for (int i = 0; i <= static_cast<int>(ErrorCode::ParseError); ++i) {
        if (to_string(static_cast<ErrorCode>(i)) == text) {
            out = static_cast<ErrorCode>(i);
            return true;
        }
    }
    return false;
}

} // namespace svcvirt
