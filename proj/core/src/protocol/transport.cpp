#include "qkd/protocol/transport.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <string>

namespace qkd {

namespace {

// One direction of the in-process link: a queue of encoded wire lines.
struct Pipe {
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<std::string> lines;
    bool closed = false;

    void push(std::string line) {
        {
            std::lock_guard lock(mutex);
            lines.push_back(std::move(line));
        }
        ready.notify_one();
    }

    std::string pop() {
        std::unique_lock lock(mutex);
        ready.wait(lock, [this] { return !lines.empty() || closed; });
        if (lines.empty()) {
            throw TransportError("peer closed the in-process link");
        }
        std::string line = std::move(lines.front());
        lines.pop_front();
        return line;
    }

    void close() {
        {
            std::lock_guard lock(mutex);
            closed = true;
        }
        ready.notify_all();
    }
};

struct InProcessLink {
    Pipe a_to_b;
    Pipe b_to_a;
};

class InProcessTransport final : public Transport {
public:
    InProcessTransport(std::shared_ptr<InProcessLink> link, Pipe& out, Pipe& in)
        : link_(std::move(link)), out_(out), in_(in) {}

    ~InProcessTransport() override { out_.close(); }

    void send(const Message& m) override { out_.push(encode_message(m)); }

    Message receive() override { return decode_message(in_.pop()); }

private:
    std::shared_ptr<InProcessLink> link_;
    Pipe& out_;
    Pipe& in_;
};

class SocketTransport final : public Transport {
public:
    explicit SocketTransport(int fd) : fd_(fd) {
        if (fd_ < 0) throw TransportError("invalid socket descriptor");
    }

    ~SocketTransport() override {
        if (fd_ >= 0) {
            ::shutdown(fd_, SHUT_RDWR);
            ::close(fd_);
        }
    }

    SocketTransport(const SocketTransport&) = delete;
    SocketTransport& operator=(const SocketTransport&) = delete;

    void send(const Message& m) override {
        const std::string line = encode_message(m);
        std::size_t sent = 0;
        while (sent < line.size()) {
            const ssize_t n =
                ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw TransportError(std::string("socket send failed: ") +
                                     std::strerror(errno));
            }
            sent += static_cast<std::size_t>(n);
        }
    }

    Message receive() override {
        // accumulate until the LF frame terminator
        for (;;) {
            const auto lf = buffer_.find('\n');
            if (lf != std::string::npos) {
                std::string line = buffer_.substr(0, lf + 1);
                buffer_.erase(0, lf + 1);
                return decode_message(line);
            }
            char chunk[4096];
            const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw TransportError(std::string("socket recv failed: ") +
                                     std::strerror(errno));
            }
            if (n == 0) {
                if (!buffer_.empty()) {
                    throw FramingError("link closed mid-message");
                }
                throw TransportError("peer closed the socket");
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    int fd_;
    std::string buffer_;
};

}  // namespace

TransportPair make_in_process_pair() {
    auto link = std::make_shared<InProcessLink>();
    TransportPair pair;
    pair.a = std::make_unique<InProcessTransport>(link, link->a_to_b, link->b_to_a);
    pair.b = std::make_unique<InProcessTransport>(link, link->b_to_a, link->a_to_b);
    return pair;
}

TransportPair make_socket_pair() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
        throw TransportError(std::string("socketpair failed: ") +
                             std::strerror(errno));
    }
    TransportPair pair;
    pair.a = std::make_unique<SocketTransport>(fds[0]);
    pair.b = std::make_unique<SocketTransport>(fds[1]);
    return pair;
}

std::unique_ptr<Transport> make_socket_transport(int fd) {
    return std::make_unique<SocketTransport>(fd);
}

}  // namespace qkd
