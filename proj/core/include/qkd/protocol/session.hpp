#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qkd/alice.hpp"
#include "qkd/bob.hpp"
#include "qkd/channel.hpp"
#include "qkd/common.hpp"
#include "qkd/protocol/transport.hpp"

namespace qkd {

/// Session ended without a key: a peer aborted, a message was malformed, or
/// the transport failed. Carries the abort reason.
class SessionAborted : public ProtocolError {
public:
    explicit SessionAborted(const std::string& reason)
        : ProtocolError(reason) {}
};

/// Reference sifting rule: keep slots where the bases agree and Bob's
/// measurement was conclusive. The distributed exchange below must reproduce
/// exactly this.
std::vector<std::uint64_t> sift(std::span<const std::uint8_t> alice_bases,
                                std::span<const DetectionRecord> bob_records);

/// Fraction of disagreeing positions. Empty or unequal-length samples are an
/// error (the estimate would be undefined).
double estimate_qber(std::span<const std::uint8_t> alice_bits,
                     std::span<const std::uint8_t> bob_bits);

struct SessionParams {
    std::uint64_t n_pulses = 0;
    double sample_fraction = 0.0;  // in (0, 1)
    std::uint64_t seed = 0;

    void validate() const;
};

/// Ground-truth group of a slot (the three histogram peaks).
enum class SlotLabel : std::uint8_t {
    CoincidenceBit0,
    CoincidenceBit1,
    AntiCoincidence,
};

std::string_view to_string(SlotLabel label);

struct SlotDiagnostic {
    std::uint64_t slot = 0;
    double phi_a = 0.0;
    double phi_b = 0.0;
    double q = 0.0;
    SlotLabel label = SlotLabel::AntiCoincidence;
};

struct SessionReport {
    std::uint64_t n_pulses = 0;
    std::uint64_t n_base_matched = 0;
    std::uint64_t n_inconclusive = 0;
    std::uint64_t n_key_bits = 0;
    double qber_estimate = 0.0;
    std::vector<std::uint8_t> sifted_key;      // Alice's key, sample removed
    std::vector<std::uint8_t> bob_sifted_key;  // Bob's view of the same slots
    std::uint64_t seed = 0;
    std::string config_snapshot_json;  // flat JSON object
    std::vector<SlotDiagnostic> slots;
};

/// Deterministic serialization (fixed field order); equal reports give
/// byte-identical output.
std::string report_to_json(const SessionReport& report);

// --- endpoint state machines -------------------------------------------
//
// Wire exchange (strictly alternating):
//   Bob   -> Alice : BasisAnnounce  (his bases for slots [0, n))
//   Alice -> Bob   : SiftResult     (basis-matched candidate slots)
//   Bob   -> Alice : SiftResult     (final kept = candidates minus his
//                                    inconclusive slots)
//   Alice -> Bob   : SampleRequest  (seeded random sample of the kept slots)
//   Bob   -> Alice : SampleReveal   (his bits on the sample)
//
// Either side sends AbortMessage and raises SessionAborted on any violation;
// no partial key survives an abort.

class AliceSession {
public:
    AliceSession(std::uint64_t session_id, std::vector<std::uint8_t> bases,
                 std::vector<std::uint8_t> bits, double sample_fraction,
                 RandomStream sample_rng);

    /// Runs Alice's side to completion over the link (blocking).
    void run(Transport& link);

    const std::vector<std::uint64_t>& kept_slots() const { return kept_; }
    const std::vector<std::uint64_t>& revealed_slots() const { return revealed_; }
    const std::vector<std::uint8_t>& final_key() const { return key_; }
    double qber_estimate() const { return qber_; }

private:
    std::uint64_t session_id_;
    std::vector<std::uint8_t> bases_;
    std::vector<std::uint8_t> bits_;
    double sample_fraction_;
    RandomStream sample_rng_;

    std::vector<std::uint64_t> kept_;
    std::vector<std::uint64_t> revealed_;
    std::vector<std::uint8_t> key_;
    double qber_ = 0.0;
};

class BobSession {
public:
    BobSession(std::uint64_t session_id, std::vector<DetectionRecord> records);

    /// Runs Bob's side to completion over the link (blocking).
    void run(Transport& link);

    const std::vector<std::uint64_t>& kept_slots() const { return kept_; }
    const std::vector<std::uint64_t>& revealed_slots() const { return revealed_; }
    const std::vector<std::uint8_t>& final_key() const { return key_; }

private:
    std::uint64_t session_id_;
    std::vector<DetectionRecord> records_;

    std::vector<std::uint64_t> kept_;
    std::vector<std::uint64_t> revealed_;
    std::vector<std::uint8_t> key_;
};

/// Everything a harness needs downstream of one session: the report plus the
/// simulation-side ground truth for histogram/peak analysis.
struct SessionOutcome {
    SessionReport report;
    std::vector<Symbol> alice_symbols;
    std::vector<DetectionRecord> records;
};

/// End-to-end run: frame construction, propagation, measurement, then the
/// full message exchange over the given duplex link (alice_end and bob_end
/// are the two ends of one Transport pair; the endpoints run on separate
/// threads). Fully deterministic given seed. Throws SessionAborted on any
/// protocol or transport failure.
///
/// config_snapshot_json, when given, is embedded verbatim in the report;
/// otherwise a flat snapshot is synthesized from the arguments.
SessionOutcome run_session(const AliceConfig& alice_cfg, const BobConfig& bob_cfg,
                           const ChannelConfig& channel_cfg,
                           const SessionParams& params, Transport& alice_end,
                           Transport& bob_end,
                           std::string_view config_snapshot_json = {});

}  // namespace qkd
