#include "qkd/protocol/message.hpp"

#include <json.hpp>

namespace qkd {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json encode_bit_array(const std::vector<std::uint8_t>& bits) {
    ordered_json arr = ordered_json::array();
    for (auto b : bits) arr.push_back(static_cast<unsigned>(b));
    return arr;
}

ordered_json encode_slot_array(const std::vector<std::uint64_t>& slots) {
    ordered_json arr = ordered_json::array();
    for (auto s : slots) arr.push_back(s);
    return arr;
}

[[noreturn]] void fail(DecodeErrorKind kind, const std::string& what) {
    throw DecodeError(kind, what);
}

const ordered_json& require_field(const ordered_json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end()) {
        fail(DecodeErrorKind::MissingField,
             std::string("missing field \"") + name + '"');
    }
    return *it;
}

std::uint64_t as_unsigned(const ordered_json& v, const char* name) {
    if (!v.is_number_unsigned()) {
        fail(DecodeErrorKind::BadValue,
             std::string("field \"") + name + "\" must be an unsigned integer");
    }
    return v.get<std::uint64_t>();
}

std::vector<std::uint8_t> as_bit_array(const ordered_json& v, const char* name) {
    if (!v.is_array()) {
        fail(DecodeErrorKind::BadValue,
             std::string("field \"") + name + "\" must be an array of 0/1");
    }
    std::vector<std::uint8_t> bits;
    bits.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number_unsigned() || e.get<std::uint64_t>() > 1) {
            fail(DecodeErrorKind::BadValue,
                 std::string("field \"") + name + "\" elements must be 0 or 1");
        }
        bits.push_back(static_cast<std::uint8_t>(e.get<std::uint64_t>()));
    }
    return bits;
}

std::vector<std::uint64_t> as_slot_array(const ordered_json& v, const char* name) {
    if (!v.is_array()) {
        fail(DecodeErrorKind::BadValue,
             std::string("field \"") + name + "\" must be an array of unsigned");
    }
    std::vector<std::uint64_t> slots;
    slots.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number_unsigned()) {
            fail(DecodeErrorKind::BadValue,
                 std::string("field \"") + name +
                     "\" elements must be unsigned integers");
        }
        slots.push_back(e.get<std::uint64_t>());
    }
    for (std::size_t i = 1; i < slots.size(); ++i) {
        if (slots[i] <= slots[i - 1]) {
            fail(DecodeErrorKind::NonMonotoneSlots,
                 std::string("non-monotone slot list in \"") + name + '"');
        }
    }
    return slots;
}

std::string as_string(const ordered_json& v, const char* name) {
    if (!v.is_string()) {
        fail(DecodeErrorKind::BadValue,
             std::string("field \"") + name + "\" must be a string");
    }
    return v.get<std::string>();
}

void reject_unknown_fields(const ordered_json& obj,
                           std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (item.key() == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            fail(DecodeErrorKind::UnknownField,
                 "unknown field \"" + item.key() + '"');
        }
    }
}

}  // namespace

std::string_view to_string(DecodeErrorKind kind) {
    switch (kind) {
        case DecodeErrorKind::BadFraming: return "bad_framing";
        case DecodeErrorKind::BadJson: return "bad_json";
        case DecodeErrorKind::NotAnObject: return "not_an_object";
        case DecodeErrorKind::UnknownType: return "unknown_type";
        case DecodeErrorKind::MissingField: return "missing_field";
        case DecodeErrorKind::UnknownField: return "unknown_field";
        case DecodeErrorKind::BadValue: return "bad_value";
        case DecodeErrorKind::NonMonotoneSlots: return "non_monotone_slots";
        case DecodeErrorKind::LengthMismatch: return "length_mismatch";
    }
    return "unknown";
}

std::string encode_message(const Message& m) {
    ordered_json j;
    std::visit(
        [&j](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, BasisAnnounce>) {
                j["type"] = "basis_announce";
                j["session_id"] = msg.session_id;
                j["first_slot"] = msg.first_slot;
                j["bases"] = encode_bit_array(msg.bases);
            } else if constexpr (std::is_same_v<T, SiftResult>) {
                j["type"] = "sift_result";
                j["session_id"] = msg.session_id;
                j["kept_slots"] = encode_slot_array(msg.kept_slots);
            } else if constexpr (std::is_same_v<T, SampleRequest>) {
                j["type"] = "sample_request";
                j["session_id"] = msg.session_id;
                j["slots"] = encode_slot_array(msg.slots);
            } else if constexpr (std::is_same_v<T, SampleReveal>) {
                j["type"] = "sample_reveal";
                j["session_id"] = msg.session_id;
                j["bits"] = encode_bit_array(msg.bits);
            } else {
                static_assert(std::is_same_v<T, AbortMessage>);
                j["type"] = "abort";
                j["session_id"] = msg.session_id;
                j["reason"] = msg.reason;
            }
        },
        m);
    return j.dump() + '\n';
}

Message decode_message(std::string_view line) {
    if (line.empty() || line.back() != '\n') {
        throw FramingError("message frame does not end with LF (truncated?)");
    }
    const std::string_view body = line.substr(0, line.size() - 1);
    if (body.find('\n') != std::string_view::npos) {
        throw FramingError("message frame contains an embedded LF");
    }

    ordered_json j = ordered_json::parse(body, nullptr, false);
    if (j.is_discarded()) {
        fail(DecodeErrorKind::BadJson, "message is not valid JSON");
    }
    if (!j.is_object()) {
        fail(DecodeErrorKind::NotAnObject, "message is not a JSON object");
    }

    const std::string type = as_string(require_field(j, "type"), "type");

    if (type == "basis_announce") {
        reject_unknown_fields(j, {"type", "session_id", "first_slot", "bases"});
        BasisAnnounce msg;
        msg.session_id = as_unsigned(require_field(j, "session_id"), "session_id");
        msg.first_slot = as_unsigned(require_field(j, "first_slot"), "first_slot");
        msg.bases = as_bit_array(require_field(j, "bases"), "bases");
        return msg;
    }
    if (type == "sift_result") {
        reject_unknown_fields(j, {"type", "session_id", "kept_slots"});
        SiftResult msg;
        msg.session_id = as_unsigned(require_field(j, "session_id"), "session_id");
        msg.kept_slots = as_slot_array(require_field(j, "kept_slots"), "kept_slots");
        return msg;
    }
    if (type == "sample_request") {
        reject_unknown_fields(j, {"type", "session_id", "slots"});
        SampleRequest msg;
        msg.session_id = as_unsigned(require_field(j, "session_id"), "session_id");
        msg.slots = as_slot_array(require_field(j, "slots"), "slots");
        return msg;
    }
    if (type == "sample_reveal") {
        reject_unknown_fields(j, {"type", "session_id", "bits"});
        SampleReveal msg;
        msg.session_id = as_unsigned(require_field(j, "session_id"), "session_id");
        msg.bits = as_bit_array(require_field(j, "bits"), "bits");
        return msg;
    }
    if (type == "abort") {
        reject_unknown_fields(j, {"type", "session_id", "reason"});
        AbortMessage msg;
        msg.session_id = as_unsigned(require_field(j, "session_id"), "session_id");
        msg.reason = as_string(require_field(j, "reason"), "reason");
        return msg;
    }
    fail(DecodeErrorKind::UnknownType, "unknown message type \"" + type + '"');
}

}  // namespace qkd
