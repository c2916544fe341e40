#include <doctest.h>

#include <string>
#include <thread>
#include <vector>

#include "qkd/common.hpp"
#include "qkd/protocol/message.hpp"
#include "qkd/protocol/transport.hpp"
#include "qkd/random.hpp"

#include <sys/socket.h>
#include <unistd.h>

using namespace qkd;

namespace {

Message random_message(RandomStream& rng, int variant) {
    switch (variant) {
        case 0: {
            BasisAnnounce m;
            m.session_id = rng.next_u64();
            m.first_slot = rng.below(1 << 20);
            const auto len = rng.below(128);
            for (std::uint64_t i = 0; i < len; ++i) {
                m.bases.push_back(static_cast<std::uint8_t>(rng.bit()));
            }
            return m;
        }
        case 1: {
            SiftResult m;
            m.session_id = rng.next_u64();
            std::uint64_t slot = rng.below(16);
            const auto len = rng.below(128);
            for (std::uint64_t i = 0; i < len; ++i) {
                m.kept_slots.push_back(slot);
                slot += 1 + rng.below(9);
            }
            return m;
        }
        case 2: {
            SampleRequest m;
            m.session_id = rng.next_u64();
            std::uint64_t slot = rng.below(16);
            const auto len = rng.below(128);
            for (std::uint64_t i = 0; i < len; ++i) {
                m.slots.push_back(slot);
                slot += 1 + rng.below(9);
            }
            return m;
        }
        case 3: {
            SampleReveal m;
            m.session_id = rng.next_u64();
            const auto len = rng.below(128);
            for (std::uint64_t i = 0; i < len; ++i) {
                m.bits.push_back(static_cast<std::uint8_t>(rng.bit()));
            }
            return m;
        }
        default: {
            AbortMessage m;
            m.session_id = rng.next_u64();
            // exercise escaping: quotes, backslashes, control chars
            m.reason = "why \"quoted\" \\slash\t" + std::to_string(rng.next_u64());
            return m;
        }
    }
}

DecodeErrorKind kind_of(std::string_view line) {
    try {
        decode_message(line);
    } catch (const DecodeError& e) {
        return e.kind();
    }
    FAIL("expected a decode error for: ", line);
    return DecodeErrorKind::BadJson;
}

}  // namespace

TEST_SUITE_BEGIN("wire");

TEST_CASE("wire bytes match the published schema exactly") {
    CHECK(encode_message(BasisAnnounce{1, 0, {0, 1, 1, 0}}) ==
          "{\"type\":\"basis_announce\",\"session_id\":1,\"first_slot\":0,"
          "\"bases\":[0,1,1,0]}\n");
    CHECK(encode_message(SiftResult{7, {0, 3, 4}}) ==
          "{\"type\":\"sift_result\",\"session_id\":7,\"kept_slots\":[0,3,4]}\n");
    CHECK(encode_message(SampleRequest{7, {3}}) ==
          "{\"type\":\"sample_request\",\"session_id\":7,\"slots\":[3]}\n");
    CHECK(encode_message(SampleReveal{7, {1, 0}}) ==
          "{\"type\":\"sample_reveal\",\"session_id\":7,\"bits\":[1,0]}\n");
    CHECK(encode_message(AbortMessage{7, "bad input"}) ==
          "{\"type\":\"abort\",\"session_id\":7,\"reason\":\"bad input\"}\n");
}

TEST_CASE("round trip holds for randomized messages of every variant") {
    RandomStream rng(501);
    for (int i = 0; i < 2000; ++i) {
        const Message m = random_message(rng, i % 5);
        const std::string wire = encode_message(m);
        CHECK(decode_message(wire) == m);
        // encoding is deterministic
        CHECK(encode_message(m) == wire);
    }
}

TEST_CASE("decode accepts fields in any order") {
    const auto m = decode_message(
        "{\"session_id\":9,\"bases\":[1,0],\"type\":\"basis_announce\","
        "\"first_slot\":2}\n");
    const auto* announce = std::get_if<BasisAnnounce>(&m);
    REQUIRE(announce != nullptr);
    CHECK(announce->session_id == 9);
    CHECK(announce->first_slot == 2);
    CHECK(announce->bases == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("u64 session ids survive the wire") {
    const std::uint64_t big = 18446744073709551615ull;  // 2^64 - 1
    const Message m = AbortMessage{big, "x"};
    CHECK(decode_message(encode_message(m)) == m);
}

TEST_CASE("malformed inputs are rejected with distinct error kinds") {
    // truncated frame: no LF
    CHECK(kind_of("{\"type\":\"abort\",\"session_id\":1,\"reason\":\"x\"}") ==
          DecodeErrorKind::BadFraming);
    // truncated mid-JSON, LF lost with the tail
    CHECK(kind_of("{\"type\":\"abort\",\"session_id\"") ==
          DecodeErrorKind::BadFraming);
    // embedded LF
    CHECK(kind_of("{\"type\":\"abort\",\n\"session_id\":1,\"reason\":\"x\"}\n") ==
          DecodeErrorKind::BadFraming);
    // not JSON at all
    CHECK(kind_of("{oops\n") == DecodeErrorKind::BadJson);
    // not an object
    CHECK(kind_of("[1,2,3]\n") == DecodeErrorKind::NotAnObject);
    // unknown type tag
    CHECK(kind_of("{\"type\":\"filibuster\",\"session_id\":1}\n") ==
          DecodeErrorKind::UnknownType);
    // missing required field
    CHECK(kind_of("{\"type\":\"abort\",\"session_id\":1}\n") ==
          DecodeErrorKind::MissingField);
    CHECK(kind_of("{\"type\":\"sift_result\",\"session_id\":1}\n") ==
          DecodeErrorKind::MissingField);
    // unknown extra field
    CHECK(kind_of("{\"type\":\"abort\",\"session_id\":1,\"reason\":\"x\","
                  "\"pad\":0}\n") == DecodeErrorKind::UnknownField);
    // floating point where an unsigned is required
    CHECK(kind_of("{\"type\":\"abort\",\"session_id\":1.5,\"reason\":\"x\"}\n") ==
          DecodeErrorKind::BadValue);
    // negative slot index
    CHECK(kind_of("{\"type\":\"sift_result\",\"session_id\":1,"
                  "\"kept_slots\":[-1]}\n") == DecodeErrorKind::BadValue);
    // bit outside {0,1}
    CHECK(kind_of("{\"type\":\"sample_reveal\",\"session_id\":1,"
                  "\"bits\":[0,2]}\n") == DecodeErrorKind::BadValue);
    // wrong JSON type for a field
    CHECK(kind_of("{\"type\":\"abort\",\"session_id\":1,\"reason\":4}\n") ==
          DecodeErrorKind::BadValue);
    // non-monotone and duplicate slot lists
    CHECK(kind_of("{\"type\":\"sift_result\",\"session_id\":1,"
                  "\"kept_slots\":[5,3]}\n") == DecodeErrorKind::NonMonotoneSlots);
    CHECK(kind_of("{\"type\":\"sample_request\",\"session_id\":1,"
                  "\"slots\":[3,3]}\n") == DecodeErrorKind::NonMonotoneSlots);
}

TEST_CASE("every decode error kind has a distinct name") {
    const DecodeErrorKind kinds[] = {
        DecodeErrorKind::BadFraming,    DecodeErrorKind::BadJson,
        DecodeErrorKind::NotAnObject,   DecodeErrorKind::UnknownType,
        DecodeErrorKind::MissingField,  DecodeErrorKind::UnknownField,
        DecodeErrorKind::BadValue,      DecodeErrorKind::NonMonotoneSlots,
        DecodeErrorKind::LengthMismatch,
    };
    std::vector<std::string_view> names;
    for (auto k : kinds) names.push_back(to_string(k));
    for (std::size_t i = 0; i < names.size(); ++i) {
        for (std::size_t j = i + 1; j < names.size(); ++j) {
            CHECK(names[i] != names[j]);
        }
    }
}

namespace {

void exercise_pair(Transport& a, Transport& b) {
    RandomStream rng(502);
    std::vector<Message> to_b, to_a;
    for (int i = 0; i < 50; ++i) {
        to_b.push_back(random_message(rng, i % 5));
        to_a.push_back(random_message(rng, (i + 2) % 5));
    }

    std::thread peer([&] {
        for (const auto& m : to_b) CHECK(b.receive() == m);
        for (const auto& m : to_a) b.send(m);
    });
    for (const auto& m : to_b) a.send(m);
    for (const auto& m : to_a) CHECK(a.receive() == m);
    peer.join();
}

}  // namespace

TEST_CASE("in-process transport delivers ordered and intact") {
    auto pair = make_in_process_pair();
    exercise_pair(*pair.a, *pair.b);
}

TEST_CASE("socket transport delivers ordered and intact") {
    auto pair = make_socket_pair();
    exercise_pair(*pair.a, *pair.b);
}

TEST_CASE("closing one end unblocks the peer with a transport error") {
    auto pair = make_in_process_pair();
    std::thread closer([&] { pair.a.reset(); });
    CHECK_THROWS_AS(pair.b->receive(), TransportError);
    closer.join();

    auto sockets = make_socket_pair();
    std::thread closer2([&] { sockets.a.reset(); });
    CHECK_THROWS_AS(sockets.b->receive(), TransportError);
    closer2.join();
}

TEST_CASE("garbage bytes on the socket surface as decode errors") {
    int fds[2];
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
    auto receiver = make_socket_transport(fds[0]);

    const std::string garbage = "{\"type\":\"nope\",\"session_id\":1}\n";
    REQUIRE(::send(fds[1], garbage.data(), garbage.size(), 0) ==
            static_cast<ssize_t>(garbage.size()));
    CHECK_THROWS_AS(receiver->receive(), DecodeError);

    // a truncated line followed by EOF is a framing error
    const std::string partial = "{\"type\":\"abort\"";
    REQUIRE(::send(fds[1], partial.data(), partial.size(), 0) ==
            static_cast<ssize_t>(partial.size()));
    ::shutdown(fds[1], SHUT_WR);
    CHECK_THROWS_AS(receiver->receive(), FramingError);
    ::close(fds[1]);
}

TEST_SUITE_END();
