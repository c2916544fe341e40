#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qkd/alice.hpp"
#include "qkd/common.hpp"
#include "qkd/optics.hpp"
#include "qkd/random.hpp"

namespace qkd {

struct ChannelConfig {
    double length_km = 0.0;
    double loss_db_per_km = 0.2;
    double excess_loss_db = 0.0;
    /// Scalar polarization mode overlap between signal and reference at the
    /// detector; multiplies the signal photon number once.
    double pol_overlap = 1.0;
    double linewidth_hz = 0.0;
    ChannelMode mode = ChannelMode::TwoFiber;
    /// Interferometer delay between reference and signal pulse
    /// (SingleFiberDelayed only). Must fit inside one slot period.
    double delay_s = 0.0;
    double slot_period_s = 1e-6;

    void validate() const;  // throws ConfigError
};

struct PropagatedSlot {
    std::uint64_t slot_index = 0;
    ComplexAmplitude signal;
    std::optional<ComplexAmplitude> reference;
    /// Channel drift phases, kept separate from the amplitudes: the signal
    /// amplitude still carries Alice's encoded phase, and detection combines
    /// it with theta_signal - theta_reference.
    double theta_signal = 0.0;
    double theta_reference = 0.0;
};

struct PropagatedFrame {
    std::vector<PropagatedSlot> slots;
};

/// Power transmittance 10^(-(length_km*loss_db_per_km + excess_loss_db)/10).
double transmittance(const ChannelConfig& cfg);

/// Propagates a frame through the fiber link.
///
/// Amplitudes are scaled for loss (signal additionally by sqrt(pol_overlap)).
/// Phase drift evolves as a Wiener process per slot period:
///   * TwoFiber: signal and reference lines drift independently;
///   * SingleFiberDelayed: one fiber, sampled at t_slot for the signal and
///     t_slot + delay_s for the reference, so drift is common-mode up to the
///     interferometer delay.
PropagatedFrame propagate(const PulseFrame& frame, const ChannelConfig& cfg,
                          RandomStream& rng);

}  // namespace qkd
