#include "qkd/alice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qkd {

namespace {
constexpr double kTableTolerance = 1e-12;
}

EncodingTable EncodingTable::from_rows(const std::array<ElectrodePhases, 4>& rows) {
    EncodingTable table;
    table.rows_ = rows;

    // Invariant 1: identical envelope factor on every row.
    std::array<double, 4> envelopes{};
    for (std::size_t i = 0; i < 4; ++i) {
        envelopes[i] = std::fabs(std::cos(0.5 * (rows[i].phi1 - rows[i].phi2)));
    }
    const auto [lo, hi] = std::minmax_element(envelopes.begin(), envelopes.end());
    if (*hi - *lo > kTableTolerance) {
        throw ConfigError("encoding table violates the constant-envelope "
                          "constraint: spread " + std::to_string(*hi - *lo));
    }
    if (*lo <= kTableTolerance) {
        throw ConfigError("encoding table envelope is zero; no light leaves "
                          "the modulator");
    }
    table.envelope_ = envelopes[0];

    // Invariant 2: the four mean phases form the QPSK set {0, pi/2, pi, 3pi/2}.
    std::array<bool, 4> taken{};
    for (const auto& row : rows) {
        const double phase = wrap_phase(0.5 * (row.phi1 + row.phi2));
        bool placed = false;
        for (std::size_t k = 0; k < 4; ++k) {
            if (circular_distance(phase, k * (kPi / 2.0)) <= kTableTolerance) {
                if (taken[k]) {
                    throw ConfigError("encoding table repeats constellation "
                                      "point " + std::to_string(k));
                }
                taken[k] = true;
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw ConfigError("encoding table phase " + std::to_string(phase) +
                              " is not a QPSK constellation point");
        }
    }
    return table;
}

double EncodingTable::symbol_phase(Symbol s) const {
    const auto& r = row(s);
    return wrap_phase(0.5 * (r.phi1 + r.phi2));
}

EncodingTable default_table() {
    std::array<ElectrodePhases, 4> rows{};
    for (std::uint8_t basis = 0; basis < 2; ++basis) {
        for (std::uint8_t bit = 0; bit < 2; ++bit) {
            const double phi_a = bit * kPi + basis * (kPi / 2.0);
            rows[EncodingTable::row_index({basis, bit})] = {phi_a + kPi / 4.0,
                                                            phi_a - kPi / 4.0};
        }
    }
    return EncodingTable::from_rows(rows);
}

void AliceConfig::validate(ChannelMode mode) const {
    if (!(mu_signal > 0.0)) {
        throw ConfigError("mu_signal must be > 0");
    }
    if (mode == ChannelMode::SingleFiberDelayed) {
        if (!mu_reference.has_value()) {
            throw ConfigError("mu_reference is required in single-fiber "
                              "delayed mode");
        }
        if (!(*mu_reference > 0.0)) {
            throw ConfigError("mu_reference must be > 0");
        }
    }
}

ComplexAmplitude encode_symbol(Symbol s, const EncodingTable& table,
                               ComplexAmplitude e_in) {
    const auto& r = table.row(s);
    return mzm_dual_drive(e_in, r.phi1, r.phi2);
}

std::vector<Symbol> random_symbols(RandomStream& rng, std::size_t n) {
    std::vector<Symbol> symbols;
    symbols.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        symbols.push_back({static_cast<std::uint8_t>(rng.bit()),
                           static_cast<std::uint8_t>(rng.bit())});
    }
    return symbols;
}

PulseFrame build_frame(std::span<const Symbol> symbols, const AliceConfig& cfg,
                       ChannelMode mode) {
    cfg.validate(mode);
    if (symbols.empty()) {
        throw ConfigError("cannot build a frame from an empty symbol sequence");
    }

    // Divide the envelope factor out of the modulator input so that exactly
    // mu_signal photons leave per slot, whatever the table's electrode offset.
    const ComplexAmplitude drive{std::sqrt(cfg.mu_signal) / cfg.table.envelope(),
                                 0.0};

    PulseFrame frame;
    frame.slots.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        PulseSlot slot;
        slot.slot_index = i;
        slot.alice_symbol = symbols[i];
        slot.signal = encode_symbol(symbols[i], cfg.table, drive);
        if (mode == ChannelMode::SingleFiberDelayed) {
            // reference phase 0: the session's global phase reference
            slot.reference = ComplexAmplitude{std::sqrt(*cfg.mu_reference), 0.0};
        }
        frame.slots.push_back(std::move(slot));
    }
    return frame;
}

}  // namespace qkd
