#pragma once

#include <memory>
#include <utility>

#include "qkd/common.hpp"
#include "qkd/protocol/message.hpp"

namespace qkd {

/// Ordered, reliable, duplex message delivery between exactly two endpoints.
/// No reordering, no loss, no duplication. Safe for one writer and one
/// reader per direction.
class Transport {
public:
    virtual ~Transport() = default;

    virtual void send(const Message& m) = 0;

    /// Blocks for the next message. Throws TransportError if the link is
    /// closed, FramingError/DecodeError if the peer sent malformed bytes.
    virtual Message receive() = 0;
};

/// The two ends of one duplex link.
struct TransportPair {
    std::unique_ptr<Transport> a;
    std::unique_ptr<Transport> b;
};

/// Queue pair in one process. Messages travel as encoded wire lines so both
/// transports exercise the same codec.
TransportPair make_in_process_pair();

/// LF-framed byte stream over a connected local socket pair (AF_UNIX).
/// The two ends may live in different threads or, after fork, processes.
TransportPair make_socket_pair();

/// Wraps an already-connected stream socket (owns and closes the fd).
std::unique_ptr<Transport> make_socket_transport(int fd);

}  // namespace qkd
