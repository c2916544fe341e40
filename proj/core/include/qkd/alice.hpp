#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qkd/common.hpp"
#include "qkd/optics.hpp"
#include "qkd/random.hpp"

namespace qkd {

/// One BB84 choice: a basis and a bit, both binary.
struct Symbol {
    std::uint8_t basis = 0;
    std::uint8_t bit = 0;

    bool operator==(const Symbol&) const = default;
};

struct ElectrodePhases {
    double phi1 = 0.0;
    double phi2 = 0.0;
};

/// Maps (basis, bit) to the two MZM electrode phases. A valid table drives
/// the modulator so that
///   * the envelope factor |cos((phi1-phi2)/2)| is the same for all rows, and
///   * the four mean phases (phi1+phi2)/2 form the QPSK set {0, pi/2, pi, 3pi/2}.
class EncodingTable {
public:
    /// Validates both invariants (1e-12 tolerance); throws ConfigError.
    static EncodingTable from_rows(const std::array<ElectrodePhases, 4>& rows);

    const ElectrodePhases& row(Symbol s) const {
        return rows_[row_index(s)];
    }

    /// Common envelope factor |cos((phi1-phi2)/2)|.
    double envelope() const { return envelope_; }

    /// Mean phase (phi1+phi2)/2 of a row, wrapped to [0, 2*pi).
    double symbol_phase(Symbol s) const;

    static std::size_t row_index(Symbol s) {
        return static_cast<std::size_t>(s.basis) * 2 + s.bit;
    }

private:
    EncodingTable() = default;
    std::array<ElectrodePhases, 4> rows_{};
    double envelope_ = 0.0;
};

/// Table constructed from the QPSK constraints with electrode offset pi/4:
/// phi_alice = bit*pi + basis*pi/2, phi1 = phi_alice + pi/4, phi2 = phi_alice - pi/4.
EncodingTable default_table();

struct AliceConfig {
    /// Mean photon number per signal pulse actually launched (the envelope
    /// factor is divided out at frame construction).
    double mu_signal = 1.0;
    /// Mean photon number per reference pulse; required in delayed mode.
    std::optional<double> mu_reference;
    EncodingTable table = default_table();

    void validate(ChannelMode mode) const;
};

struct PulseSlot {
    std::uint64_t slot_index = 0;
    ComplexAmplitude signal;
    std::optional<ComplexAmplitude> reference;
    Symbol alice_symbol;  // never leaves Alice's side of the harness
};

struct PulseFrame {
    std::vector<PulseSlot> slots;
};

/// Applies the table row for s to the input field through the MZM.
ComplexAmplitude encode_symbol(Symbol s, const EncodingTable& table,
                               ComplexAmplitude e_in);

/// n i.i.d. symbols, each of the four (basis, bit) values with probability 1/4.
std::vector<Symbol> random_symbols(RandomStream& rng, std::size_t n);

/// Builds Alice's outgoing frame. Signal slots carry exactly mu_signal photons
/// regardless of the table's envelope factor; in SingleFiberDelayed mode every
/// slot also carries a phase-0 reference pulse of mu_reference photons.
PulseFrame build_frame(std::span<const Symbol> symbols, const AliceConfig& cfg,
                       ChannelMode mode);

}  // namespace qkd
