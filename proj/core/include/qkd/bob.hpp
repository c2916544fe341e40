#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/common.hpp"
#include "qkd/optics.hpp"
#include "qkd/random.hpp"

namespace qkd {

enum class Decision : std::uint8_t {
    Bit0,
    Bit1,
    Inconclusive,
};

/// Balanced homodyne receiver in shot-noise units: vacuum quadrature
/// variance is 1, a coherent signal of mean photon number mu contributes a
/// mean of 2*sqrt(eta_det*mu)*cos(delta_phi).
struct BobConfig {
    double eta_det = 1.0;
    /// Thermal/electronic noise as equivalent quadrature variance at unit
    /// reference photon number; the strong reference divides it down.
    double electronic_noise = 0.0;
    double mu_reference_at_detector = 1e6;
    /// Postselection dead zone: |q| <= threshold_q0 is Inconclusive.
    double threshold_q0 = 0.0;

    /// Total quadrature noise variance 1 + N_el/mu_ref (mixing gain).
    double noise_variance() const {
        return 1.0 + electronic_noise / mu_reference_at_detector;
    }

    void validate() const;  // throws ConfigError
};

struct DetectionRecord {
    std::uint64_t slot_index = 0;
    std::uint8_t bob_basis = 0;
    double q = 0.0;
    Decision decision = Decision::Inconclusive;
};

/// n i.i.d. uniform basis bits.
std::vector<std::uint8_t> choose_bases(RandomStream& rng, std::size_t n);

/// One quadrature sample:
///   q = 2*sqrt(eta_det) * Re[signal * exp(-j*(phi_b - theta_diff))] + n,
/// with n ~ N(0, 1 + N_el/mu_ref) and theta_diff the channel's
/// theta_signal - theta_reference for the slot.
double homodyne_sample(ComplexAmplitude signal, double theta_diff, double phi_b,
                       const BobConfig& cfg, RandomStream& rng);

/// Sign rule with a dead zone: q > +q0 -> Bit0, q < -q0 -> Bit1,
/// otherwise Inconclusive (q exactly 0 is always Inconclusive).
Decision decide(double q, double threshold_q0);

/// Measures every slot with phi_b = bob_basis * pi/2.
std::vector<DetectionRecord> measure_frame(const PropagatedFrame& frame,
                                           std::span<const std::uint8_t> bases,
                                           const BobConfig& cfg,
                                           RandomStream& rng);

}  // namespace qkd
