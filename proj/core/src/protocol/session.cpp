#include "qkd/protocol/session.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <utility>

#include <json.hpp>

namespace qkd {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Next message, which must be a T for this session. A received abort is
/// surfaced as SessionAborted; anything else unexpected is a ProtocolError
/// (turned into an outgoing abort by the endpoint's catch-all).
template <typename T>
T expect(Transport& link, std::uint64_t session_id) {
    Message m = link.receive();
    if (const auto* abort = std::get_if<AbortMessage>(&m)) {
        throw SessionAborted("peer aborted: " + abort->reason);
    }
    T* msg = std::get_if<T>(&m);
    if (msg == nullptr) {
        throw ProtocolError("unexpected message type for this protocol state");
    }
    if (msg->session_id != session_id) {
        throw ProtocolError("session id mismatch");
    }
    return std::move(*msg);
}

/// Both lists sorted ascending.
bool is_subset(const std::vector<std::uint64_t>& sub,
               const std::vector<std::uint64_t>& super) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

std::vector<std::uint8_t> bits_at(const std::vector<std::uint8_t>& bits,
                                  const std::vector<std::uint64_t>& slots) {
    std::vector<std::uint8_t> out;
    out.reserve(slots.size());
    for (auto s : slots) out.push_back(bits[s]);
    return out;
}

/// kept minus revealed, both sorted ascending.
std::vector<std::uint64_t> remaining_slots(const std::vector<std::uint64_t>& kept,
                                           const std::vector<std::uint64_t>& revealed) {
    std::vector<std::uint64_t> out;
    out.reserve(kept.size() - revealed.size());
    std::set_difference(kept.begin(), kept.end(), revealed.begin(), revealed.end(),
                        std::back_inserter(out));
    return out;
}

}  // namespace

std::vector<std::uint64_t> sift(std::span<const std::uint8_t> alice_bases,
                                std::span<const DetectionRecord> bob_records) {
    if (alice_bases.size() != bob_records.size()) {
        throw ProtocolError("sift inputs have different lengths");
    }
    std::vector<std::uint64_t> kept;
    for (std::size_t i = 0; i < alice_bases.size(); ++i) {
        if (alice_bases[i] == bob_records[i].bob_basis &&
            bob_records[i].decision != Decision::Inconclusive) {
            kept.push_back(i);
        }
    }
    return kept;
}

double estimate_qber(std::span<const std::uint8_t> alice_bits,
                     std::span<const std::uint8_t> bob_bits) {
    if (alice_bits.size() != bob_bits.size()) {
        throw ProtocolError("QBER sample lengths differ");
    }
    if (alice_bits.empty()) {
        throw ProtocolError("QBER estimate over an empty sample is undefined");
    }
    std::size_t errors = 0;
    for (std::size_t i = 0; i < alice_bits.size(); ++i) {
        if (alice_bits[i] != bob_bits[i]) ++errors;
    }
    return static_cast<double>(errors) / static_cast<double>(alice_bits.size());
}

void SessionParams::validate() const {
    if (n_pulses == 0) throw ConfigError("n_pulses must be > 0");
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0)) {
        throw ConfigError("sample_fraction must be in (0, 1)");
    }
}

std::string_view to_string(SlotLabel label) {
    switch (label) {
        case SlotLabel::CoincidenceBit0: return "coincidence-bit0";
        case SlotLabel::CoincidenceBit1: return "coincidence-bit1";
        case SlotLabel::AntiCoincidence: return "anti-coincidence";
    }
    return "unknown";
}

// --- AliceSession --------------------------------------------------------

AliceSession::AliceSession(std::uint64_t session_id,
                           std::vector<std::uint8_t> bases,
                           std::vector<std::uint8_t> bits,
                           double sample_fraction, RandomStream sample_rng)
    : session_id_(session_id),
      bases_(std::move(bases)),
      bits_(std::move(bits)),
      sample_fraction_(sample_fraction),
      sample_rng_(std::move(sample_rng)) {
    if (bases_.size() != bits_.size()) {
        throw ProtocolError("alice bases/bits lengths differ");
    }
    if (!(sample_fraction_ > 0.0 && sample_fraction_ < 1.0)) {
        throw ConfigError("sample_fraction must be in (0, 1)");
    }
}

void AliceSession::run(Transport& link) {
    try {
        const auto announce = expect<BasisAnnounce>(link, session_id_);
        if (announce.first_slot != 0) {
            throw ProtocolError("basis announcement must start at slot 0");
        }
        if (announce.bases.size() != bases_.size()) {
            throw DecodeError(DecodeErrorKind::LengthMismatch,
                              "announced bases cover " +
                                  std::to_string(announce.bases.size()) +
                                  " slots, session has " +
                                  std::to_string(bases_.size()));
        }

        // candidate set: slots where the bases coincide
        std::vector<std::uint64_t> candidates;
        for (std::size_t i = 0; i < bases_.size(); ++i) {
            if (bases_[i] == announce.bases[i]) candidates.push_back(i);
        }
        link.send(SiftResult{session_id_, candidates});

        // Bob strikes his inconclusive slots and returns the final kept set.
        const auto final_sift = expect<SiftResult>(link, session_id_);
        if (!is_subset(final_sift.kept_slots, candidates)) {
            throw ProtocolError("final sift result is not a subset of the "
                                "candidate slots");
        }
        kept_ = final_sift.kept_slots;
        if (kept_.empty()) {
            throw ProtocolError("sifting left no slots; no key material");
        }

        // Sacrificial QBER sample: seeded random subset of the kept slots.
        const auto m = static_cast<std::size_t>(
            std::ceil(sample_fraction_ * static_cast<double>(kept_.size())));
        std::vector<std::uint64_t> pool = kept_;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(
                                          sample_rng_.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        revealed_.assign(pool.begin(), pool.begin() + static_cast<long>(m));
        std::sort(revealed_.begin(), revealed_.end());
        link.send(SampleRequest{session_id_, revealed_});

        const auto reveal = expect<SampleReveal>(link, session_id_);
        if (reveal.bits.size() != revealed_.size()) {
            throw DecodeError(DecodeErrorKind::LengthMismatch,
                              "revealed bits cover " +
                                  std::to_string(reveal.bits.size()) +
                                  " slots, requested " +
                                  std::to_string(revealed_.size()));
        }
        qber_ = estimate_qber(bits_at(bits_, revealed_), reveal.bits);

        // Revealed slots are sacrificed; the rest is the sifted key.
        key_ = bits_at(bits_, remaining_slots(kept_, revealed_));
    } catch (const SessionAborted&) {
        throw;
    } catch (const std::exception& e) {
        try {
            link.send(AbortMessage{session_id_, e.what()});
        } catch (...) {
            // peer unreachable; the local abort still propagates
        }
        throw SessionAborted(e.what());
    }
}

// --- BobSession -----------------------------------------------------------

BobSession::BobSession(std::uint64_t session_id,
                       std::vector<DetectionRecord> records)
    : session_id_(session_id), records_(std::move(records)) {}

void BobSession::run(Transport& link) {
    try {
        BasisAnnounce announce;
        announce.session_id = session_id_;
        announce.first_slot = 0;
        announce.bases.reserve(records_.size());
        for (const auto& rec : records_) announce.bases.push_back(rec.bob_basis);
        link.send(announce);

        const auto candidates = expect<SiftResult>(link, session_id_);
        for (auto slot : candidates.kept_slots) {
            if (slot >= records_.size()) {
                throw ProtocolError("sift result references slot beyond the "
                                    "session");
            }
        }

        // keep only the conclusive candidates
        kept_.clear();
        for (auto slot : candidates.kept_slots) {
            if (records_[slot].decision != Decision::Inconclusive) {
                kept_.push_back(slot);
            }
        }
        link.send(SiftResult{session_id_, kept_});

        const auto request = expect<SampleRequest>(link, session_id_);
        if (!is_subset(request.slots, kept_)) {
            throw ProtocolError("sample request is not a subset of the kept "
                                "slots");
        }
        revealed_ = request.slots;

        SampleReveal reveal;
        reveal.session_id = session_id_;
        reveal.bits.reserve(revealed_.size());
        for (auto slot : revealed_) {
            reveal.bits.push_back(
                records_[slot].decision == Decision::Bit1 ? 1 : 0);
        }
        link.send(reveal);

        key_.clear();
        for (auto slot : remaining_slots(kept_, revealed_)) {
            key_.push_back(records_[slot].decision == Decision::Bit1 ? 1 : 0);
        }
    } catch (const SessionAborted&) {
        throw;
    } catch (const std::exception& e) {
        try {
            link.send(AbortMessage{session_id_, e.what()});
        } catch (...) {
        }
        throw SessionAborted(e.what());
    }
}

// --- run_session ----------------------------------------------------------

namespace {

std::string synthesize_snapshot(const AliceConfig& alice_cfg,
                                const BobConfig& bob_cfg,
                                const ChannelConfig& channel_cfg,
                                const SessionParams& params) {
    ordered_json j;
    j["mu_signal"] = alice_cfg.mu_signal;
    if (alice_cfg.mu_reference) j["mu_reference"] = *alice_cfg.mu_reference;
    j["eta_det"] = bob_cfg.eta_det;
    j["electronic_noise"] = bob_cfg.electronic_noise;
    j["mu_reference_at_detector"] = bob_cfg.mu_reference_at_detector;
    j["threshold_q0"] = bob_cfg.threshold_q0;
    j["mode"] = channel_cfg.mode == ChannelMode::TwoFiber ? "two_fiber"
                                                          : "single_fiber_delayed";
    j["length_km"] = channel_cfg.length_km;
    j["loss_db_per_km"] = channel_cfg.loss_db_per_km;
    j["excess_loss_db"] = channel_cfg.excess_loss_db;
    j["pol_overlap"] = channel_cfg.pol_overlap;
    j["linewidth_hz"] = channel_cfg.linewidth_hz;
    if (channel_cfg.mode == ChannelMode::SingleFiberDelayed) {
        j["delay_s"] = channel_cfg.delay_s;
    }
    j["slot_period_s"] = channel_cfg.slot_period_s;
    j["n_pulses"] = params.n_pulses;
    j["sample_fraction"] = params.sample_fraction;
    j["seed"] = params.seed;
    return j.dump();
}

}  // namespace

SessionOutcome run_session(const AliceConfig& alice_cfg, const BobConfig& bob_cfg,
                           const ChannelConfig& channel_cfg,
                           const SessionParams& params, Transport& alice_end,
                           Transport& bob_end,
                           std::string_view config_snapshot_json) {
    params.validate();
    channel_cfg.validate();
    alice_cfg.validate(channel_cfg.mode);
    bob_cfg.validate();

    const std::uint64_t seed = params.seed;

    // Substreams carved from the session seed; tags are part of the
    // determinism contract (see README).
    RandomStream alice_rng(derive_seed(seed, 0));
    RandomStream bob_basis_rng(derive_seed(seed, 1));
    RandomStream channel_rng(derive_seed(seed, 2));
    RandomStream detector_rng(derive_seed(seed, 3));
    RandomStream sample_rng(derive_seed(seed, 4));

    const auto n = static_cast<std::size_t>(params.n_pulses);
    auto symbols = random_symbols(alice_rng, n);
    const auto frame = build_frame(symbols, alice_cfg, channel_cfg.mode);
    const auto propagated = propagate(frame, channel_cfg, channel_rng);
    const auto bob_bases = choose_bases(bob_basis_rng, n);
    auto records = measure_frame(propagated, bob_bases, bob_cfg, detector_rng);

    std::vector<std::uint8_t> alice_bases(n);
    std::vector<std::uint8_t> alice_bits(n);
    for (std::size_t i = 0; i < n; ++i) {
        alice_bases[i] = symbols[i].basis;
        alice_bits[i] = symbols[i].bit;
    }

    // session id := seed (unique per run, stable across reruns)
    AliceSession alice(seed, std::move(alice_bases), std::move(alice_bits),
                       params.sample_fraction, std::move(sample_rng));
    BobSession bob(seed, records);

    std::exception_ptr alice_error;
    std::thread alice_thread([&] {
        try {
            alice.run(alice_end);
        } catch (...) {
            alice_error = std::current_exception();
        }
    });
    std::exception_ptr bob_error;
    try {
        bob.run(bob_end);
    } catch (...) {
        bob_error = std::current_exception();
    }
    alice_thread.join();
    if (alice_error) std::rethrow_exception(alice_error);
    if (bob_error) std::rethrow_exception(bob_error);

    SessionOutcome outcome;
    SessionReport& report = outcome.report;
    report.n_pulses = params.n_pulses;
    report.seed = seed;
    report.qber_estimate = alice.qber_estimate();
    report.sifted_key = alice.final_key();
    report.bob_sifted_key = bob.final_key();
    report.n_key_bits = report.sifted_key.size();
    report.config_snapshot_json =
        config_snapshot_json.empty()
            ? synthesize_snapshot(alice_cfg, bob_cfg, channel_cfg, params)
            : std::string(config_snapshot_json);

    report.slots.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool matched = symbols[i].basis == records[i].bob_basis;
        if (matched) ++report.n_base_matched;
        if (records[i].decision == Decision::Inconclusive) {
            ++report.n_inconclusive;
        }
        SlotDiagnostic d;
        d.slot = i;
        d.phi_a = alice_cfg.table.symbol_phase(symbols[i]);
        d.phi_b = records[i].bob_basis * (kPi / 2.0);
        d.q = records[i].q;
        d.label = matched ? (symbols[i].bit ? SlotLabel::CoincidenceBit1
                                            : SlotLabel::CoincidenceBit0)
                          : SlotLabel::AntiCoincidence;
        report.slots.push_back(d);
    }

    outcome.alice_symbols = std::move(symbols);
    outcome.records = std::move(records);
    return outcome;
}

std::string report_to_json(const SessionReport& report) {
    ordered_json j;
    j["n_pulses"] = report.n_pulses;
    j["n_base_matched"] = report.n_base_matched;
    j["n_inconclusive"] = report.n_inconclusive;
    j["n_key_bits"] = report.n_key_bits;
    j["qber_estimate"] = report.qber_estimate;
    j["sifted_key"] = report.sifted_key;
    j["bob_sifted_key"] = report.bob_sifted_key;
    j["seed"] = report.seed;
    j["config"] = report.config_snapshot_json.empty()
                      ? ordered_json::object()
                      : ordered_json::parse(report.config_snapshot_json);
    ordered_json slots = ordered_json::array();
    for (const auto& d : report.slots) {
        ordered_json s;
        s["slot"] = d.slot;
        s["phi_a"] = d.phi_a;
        s["phi_b"] = d.phi_b;
        s["q"] = d.q;
        s["label"] = to_string(d.label);
        slots.push_back(std::move(s));
    }
    j["slots"] = std::move(slots);
    return j.dump();
}

}  // namespace qkd
