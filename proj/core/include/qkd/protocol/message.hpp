#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qkd {

// Classical-channel messages. The wire format is one flat JSON object per
// message, LF-terminated, integers only (bit-exact by construction).

struct BasisAnnounce {
    std::uint64_t session_id = 0;
    std::uint64_t first_slot = 0;
    std::vector<std::uint8_t> bases;

    bool operator==(const BasisAnnounce&) const = default;
};

struct SiftResult {
    std::uint64_t session_id = 0;
    std::vector<std::uint64_t> kept_slots;  // strictly increasing

    bool operator==(const SiftResult&) const = default;
};

struct SampleRequest {
    std::uint64_t session_id = 0;
    std::vector<std::uint64_t> slots;  // strictly increasing

    bool operator==(const SampleRequest&) const = default;
};

struct SampleReveal {
    std::uint64_t session_id = 0;
    std::vector<std::uint8_t> bits;

    bool operator==(const SampleReveal&) const = default;
};

struct AbortMessage {
    std::uint64_t session_id = 0;
    std::string reason;

    bool operator==(const AbortMessage&) const = default;
};

using Message = std::variant<BasisAnnounce, SiftResult, SampleRequest,
                             SampleReveal, AbortMessage>;

enum class DecodeErrorKind {
    BadFraming,        // missing/extra LF, truncated frame
    BadJson,           // not parseable JSON
    NotAnObject,       // top level is not an object
    UnknownType,       // unrecognized "type" tag
    MissingField,
    UnknownField,
    BadValue,          // wrong JSON type, negative/float where unsigned, bit not 0/1
    NonMonotoneSlots,  // slot list not strictly increasing
    LengthMismatch,    // list length contradicts the declared slot range
};

std::string_view to_string(DecodeErrorKind kind);

class DecodeError : public std::runtime_error {
public:
    DecodeError(DecodeErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    DecodeErrorKind kind() const { return kind_; }

private:
    DecodeErrorKind kind_;
};

/// Frame boundary violation: input does not end in exactly one LF, or the
/// byte stream was truncated mid-message. No partial message is ever delivered.
class FramingError : public DecodeError {
public:
    explicit FramingError(const std::string& what)
        : DecodeError(DecodeErrorKind::BadFraming, what) {}
};

/// Serializes to the wire form: one flat JSON line including the trailing LF.
/// Field order is fixed, so equal messages encode to identical bytes.
std::string encode_message(const Message& m);

/// Strict parse of one wire line. Unknown fields, unknown type tags, missing
/// fields, non-0/1 bits, non-unsigned numbers and non-monotone slot lists are
/// all rejected, each with its own DecodeErrorKind.
Message decode_message(std::string_view line);

}  // namespace qkd
