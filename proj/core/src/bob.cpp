#include "qkd/bob.hpp"

#include <cmath>
#include <string>

namespace qkd {

void BobConfig::validate() const {
    if (!(eta_det > 0.0 && eta_det <= 1.0)) {
        throw ConfigError("eta_det must be in (0, 1]");
    }
    if (!(electronic_noise >= 0.0)) {
        throw ConfigError("electronic_noise must be >= 0");
    }
    if (!(mu_reference_at_detector > 0.0)) {
        throw ConfigError("mu_reference_at_detector must be > 0");
    }
    if (!(threshold_q0 >= 0.0)) {
        throw ConfigError("threshold_q0 must be >= 0");
    }
}

std::vector<std::uint8_t> choose_bases(RandomStream& rng, std::size_t n) {
    std::vector<std::uint8_t> bases;
    bases.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        bases.push_back(static_cast<std::uint8_t>(rng.bit()));
    }
    return bases;
}

double homodyne_sample(ComplexAmplitude signal, double theta_diff, double phi_b,
                       const BobConfig& cfg, RandomStream& rng) {
    const double delta = phi_b - theta_diff;
    // Re[signal * exp(-j*delta)]
    const double projected =
        signal.re * std::cos(delta) + signal.im * std::sin(delta);
    const double mean = 2.0 * std::sqrt(cfg.eta_det) * projected;
    return mean + rng.gaussian(0.0, std::sqrt(cfg.noise_variance()));
}

Decision decide(double q, double threshold_q0) {
    if (q > threshold_q0) return Decision::Bit0;
    if (q < -threshold_q0) return Decision::Bit1;
    return Decision::Inconclusive;
}

std::vector<DetectionRecord> measure_frame(const PropagatedFrame& frame,
                                           std::span<const std::uint8_t> bases,
                                           const BobConfig& cfg,
                                           RandomStream& rng) {
    cfg.validate();
    if (frame.slots.size() != bases.size()) {
        throw ProtocolError("basis sequence length does not match the frame");
    }

    std::vector<DetectionRecord> records;
    records.reserve(frame.slots.size());
    for (std::size_t i = 0; i < frame.slots.size(); ++i) {
        const auto& slot = frame.slots[i];
        const double phi_b = bases[i] * (kPi / 2.0);
        const double theta_diff = slot.theta_signal - slot.theta_reference;

        DetectionRecord rec;
        rec.slot_index = slot.slot_index;
        rec.bob_basis = bases[i];
        rec.q = homodyne_sample(slot.signal, theta_diff, phi_b, cfg, rng);
        rec.decision = decide(rec.q, cfg.threshold_q0);
        records.push_back(rec);
    }
    return records;
}

}  // namespace qkd
