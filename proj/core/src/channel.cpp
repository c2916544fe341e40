#include "qkd/channel.hpp"

#include <cmath>
#include <string>

namespace qkd {

void ChannelConfig::validate() const {
    if (!(length_km >= 0.0)) throw ConfigError("length_km must be >= 0");
    if (!(loss_db_per_km >= 0.0)) throw ConfigError("loss_db_per_km must be >= 0");
    if (!(excess_loss_db >= 0.0)) throw ConfigError("excess_loss_db must be >= 0");
    if (!(pol_overlap >= 0.0 && pol_overlap <= 1.0)) {
        throw ConfigError("pol_overlap must be in [0, 1]");
    }
    if (!(linewidth_hz >= 0.0)) throw ConfigError("linewidth_hz must be >= 0");
    if (!(slot_period_s > 0.0)) throw ConfigError("slot_period_s must be > 0");
    if (mode == ChannelMode::SingleFiberDelayed) {
        if (!(delay_s >= 0.0)) throw ConfigError("delay_s must be >= 0");
        // the time-multiplexed reference must fit inside its slot
        if (delay_s > slot_period_s) {
            throw ConfigError("delay_s must not exceed slot_period_s");
        }
    }
}

double transmittance(const ChannelConfig& cfg) {
    return std::pow(10.0, -(cfg.length_km * cfg.loss_db_per_km +
                            cfg.excess_loss_db) / 10.0);
}

PropagatedFrame propagate(const PulseFrame& frame, const ChannelConfig& cfg,
                          RandomStream& rng) {
    cfg.validate();

    const bool delayed = cfg.mode == ChannelMode::SingleFiberDelayed;
    for (const auto& slot : frame.slots) {
        if (slot.reference.has_value() != delayed) {
            throw ConfigError("frame was built for the other channel mode");
        }
    }

    const double amp_scale = std::sqrt(transmittance(cfg));
    const double sig_scale = amp_scale * std::sqrt(cfg.pol_overlap);

    PropagatedFrame out;
    out.slots.reserve(frame.slots.size());

    if (delayed) {
        // One fiber. Per slot the path is sampled at t_slot (signal) and
        // t_slot + delay (reference); drift cancels up to the delay residue.
        PhaseDriftProcess path(cfg.linewidth_hz, RandomStream(rng.next_u64()));
        for (const auto& slot : frame.slots) {
            PropagatedSlot p;
            p.slot_index = slot.slot_index;
            p.theta_signal = path.advance(cfg.slot_period_s - cfg.delay_s);
            p.theta_reference = path.advance(cfg.delay_s);
            const auto& s = slot.signal;
            p.signal = {s.re * sig_scale, s.im * sig_scale};
            const auto& r = *slot.reference;
            p.reference = ComplexAmplitude{r.re * amp_scale, r.im * amp_scale};
            out.slots.push_back(p);
        }
    } else {
        // Two fibers drifting independently; the reference line is a strong
        // classical carrier, so only its phase process is tracked.
        PhaseDriftProcess signal_path(cfg.linewidth_hz,
                                      RandomStream(rng.next_u64()));
        PhaseDriftProcess reference_path(cfg.linewidth_hz,
                                         RandomStream(rng.next_u64()));
        for (const auto& slot : frame.slots) {
            PropagatedSlot p;
            p.slot_index = slot.slot_index;
            p.theta_signal = signal_path.advance(cfg.slot_period_s);
            p.theta_reference = reference_path.advance(cfg.slot_period_s);
            const auto& s = slot.signal;
            p.signal = {s.re * sig_scale, s.im * sig_scale};
            out.slots.push_back(p);
        }
    }
    return out;
}

}  // namespace qkd
