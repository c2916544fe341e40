#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qkd {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Channel architecture: reference carrier in a second fiber, or
/// time-multiplexed with the signal in the same fiber.
enum class ChannelMode {
    TwoFiber,
    SingleFiberDelayed,
};

/// Wraps an angle to [0, 2*pi).
inline double wrap_phase(double phi) {
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    // fmod of a value just below a multiple of 2*pi can round up to 2*pi
    if (w >= kTwoPi) w -= kTwoPi;
    return w;
}

/// Distance between two angles on the circle, in [0, pi].
inline double circular_distance(double a, double b) {
    double d = std::fabs(wrap_phase(a) - wrap_phase(b));
    return d > kPi ? kTwoPi - d : d;
}

/// Invalid or inconsistent configuration (rejected before any simulation runs).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Violation of the two-party protocol contract by a peer or a harness caller.
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

/// Transport link failed or was closed while a message was still expected.
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem failure while reading configs or emitting run outputs.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qkd
