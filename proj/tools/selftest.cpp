#include "selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qkd/alice.hpp"
#include "qkd/bob.hpp"
#include "qkd/channel.hpp"
#include "qkd/common.hpp"
#include "qkd/harness/scenario.hpp"
#include "qkd/optics.hpp"
#include "qkd/protocol/message.hpp"
#include "qkd/protocol/session.hpp"
#include "qkd/protocol/transport.hpp"
#include "qkd/random.hpp"

namespace qkd::tools {

namespace {

struct Check {
    const char* name;
    std::function<std::string()> run;  // empty string = pass, else detail
};

std::string check_encoder_exactness() {
    const auto table = default_table();
    const ComplexAmplitude drive{1.0 / table.envelope(), 0.0};
    double mag0 = -1.0;
    bool seen[4] = {false, false, false, false};
    for (std::uint8_t basis = 0; basis < 2; ++basis) {
        for (std::uint8_t bit = 0; bit < 2; ++bit) {
            const auto out = encode_symbol({basis, bit}, table, drive);
            if (mag0 < 0.0) mag0 = out.magnitude();
            if (std::fabs(out.magnitude() - mag0) > 1e-12) {
                return "output magnitudes differ across symbols";
            }
            const double phase = wrap_phase(out.phase());
            for (int k = 0; k < 4; ++k) {
                if (circular_distance(phase, k * kPi / 2.0) <= 1e-12) {
                    seen[k] = true;
                }
            }
        }
    }
    for (int k = 0; k < 4; ++k) {
        if (!seen[k]) return "constellation point missing";
    }
    return {};
}

std::string check_push_push() {
    RandomStream rng(11);
    for (int i = 0; i < 256; ++i) {
        const auto e = ComplexAmplitude::from_polar(rng.uniform() * 3.0,
                                                    rng.uniform() * kTwoPi);
        const double phi = (rng.uniform() - 0.5) * 8.0 * kPi;
        const auto a = mzm_dual_drive(e, phi, phi);
        const auto b = phase_shift(e, -phi);
        if (std::fabs(a.re - b.re) > 1e-12 || std::fabs(a.im - b.im) > 1e-12) {
            return "mzm(e, phi, phi) != phase_shift(e, -phi)";
        }
    }
    return {};
}

std::string check_attenuation_composition() {
    RandomStream rng(12);
    for (int i = 0; i < 256; ++i) {
        const auto e = ComplexAmplitude::from_polar(rng.uniform() * 10.0,
                                                    rng.uniform() * kTwoPi);
        const double a = rng.uniform() * 20.0;
        const double b = rng.uniform() * 20.0;
        const auto chained = attenuate(attenuate(e, a), b);
        const auto direct = attenuate(e, a + b);
        if (std::fabs(chained.re - direct.re) > 1e-12 ||
            std::fabs(chained.im - direct.im) > 1e-12) {
            return "attenuation does not compose additively";
        }
    }
    return {};
}

std::string check_vacuum_statistics() {
    RandomStream rng(13);
    BobConfig cfg;
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double q = homodyne_sample({0.0, 0.0}, 0.0, 0.0, cfg, rng);
        sum += q;
        sum_sq += q * q;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    if (std::fabs(mean) > 3.0 / std::sqrt(n)) return "vacuum mean off";
    if (std::fabs(var - 1.0) > 3.0 * std::sqrt(2.0 / n)) return "vacuum variance off";
    return {};
}

std::string check_mean_law_point() {
    RandomStream rng(14);
    BobConfig cfg;
    const int n = 50000;
    const ComplexAmplitude signal{1.0, 0.0};  // mu = 1, phase 0
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += homodyne_sample(signal, 0.0, 0.0, cfg, rng);
    }
    const double mean = sum / n;
    if (std::fabs(mean - 2.0) > 3.0 / std::sqrt(n)) {
        return "homodyne mean != 2*sqrt(mu) at mu=1";
    }
    return {};
}

std::string check_sift_equivalence() {
    RandomStream rng(15);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::uint8_t> alice(16);
        std::vector<DetectionRecord> records(16);
        for (int i = 0; i < 16; ++i) {
            alice[i] = static_cast<std::uint8_t>(rng.bit());
            records[i].slot_index = static_cast<std::uint64_t>(i);
            records[i].bob_basis = static_cast<std::uint8_t>(rng.bit());
            const auto r = rng.below(3);
            records[i].decision = r == 0   ? Decision::Bit0
                                  : r == 1 ? Decision::Bit1
                                           : Decision::Inconclusive;
        }
        std::vector<std::uint64_t> brute;
        for (int i = 0; i < 16; ++i) {
            if (alice[i] == records[i].bob_basis &&
                records[i].decision != Decision::Inconclusive) {
                brute.push_back(static_cast<std::uint64_t>(i));
            }
        }
        if (sift(alice, records) != brute) return "sift disagrees with brute force";
    }
    return {};
}

std::string check_wire_roundtrip() {
    RandomStream rng(16);
    for (int i = 0; i < 600; ++i) {
        Message m;
        switch (i % 5) {
            case 0: {
                BasisAnnounce msg;
                msg.session_id = rng.next_u64();
                msg.first_slot = rng.below(1000);
                const auto len = rng.below(64);
                for (std::uint64_t k = 0; k < len; ++k) {
                    msg.bases.push_back(static_cast<std::uint8_t>(rng.bit()));
                }
                m = msg;
                break;
            }
            case 1: {
                SiftResult msg;
                msg.session_id = rng.next_u64();
                std::uint64_t slot = 0;
                const auto len = rng.below(64);
                for (std::uint64_t k = 0; k < len; ++k) {
                    slot += 1 + rng.below(5);
                    msg.kept_slots.push_back(slot);
                }
                m = msg;
                break;
            }
            case 2: {
                SampleRequest msg;
                msg.session_id = rng.next_u64();
                std::uint64_t slot = 0;
                const auto len = rng.below(64);
                for (std::uint64_t k = 0; k < len; ++k) {
                    slot += 1 + rng.below(5);
                    msg.slots.push_back(slot);
                }
                m = msg;
                break;
            }
            case 3: {
                SampleReveal msg;
                msg.session_id = rng.next_u64();
                const auto len = rng.below(64);
                for (std::uint64_t k = 0; k < len; ++k) {
                    msg.bits.push_back(static_cast<std::uint8_t>(rng.bit()));
                }
                m = msg;
                break;
            }
            default: {
                AbortMessage msg;
                msg.session_id = rng.next_u64();
                msg.reason = "reason \"" + std::to_string(rng.next_u64()) + "\"";
                m = msg;
                break;
            }
        }
        if (decode_message(encode_message(m)) != m) return "round trip mismatch";
    }

    const auto rejects = [](std::string_view line, DecodeErrorKind kind) {
        try {
            decode_message(line);
        } catch (const DecodeError& e) {
            return e.kind() == kind;
        }
        return false;
    };
    if (!rejects("{\"type\":\"nope\",\"session_id\":1}\n",
                 DecodeErrorKind::UnknownType)) {
        return "unknown type not rejected";
    }
    if (!rejects("{\"type\":\"sift_result\",\"session_id\":1,"
                 "\"kept_slots\":[5,3]}\n",
                 DecodeErrorKind::NonMonotoneSlots)) {
        return "non-monotone slots not rejected";
    }
    if (!rejects("{\"type\":\"abort\",\"session_id\":1",
                 DecodeErrorKind::BadFraming)) {
        return "truncated frame not rejected";
    }
    if (!rejects("{\"type\":\"abort\",\"session_id\":1,\"reason\":\"x\","
                 "\"extra\":0}\n",
                 DecodeErrorKind::UnknownField)) {
        return "unknown field not rejected";
    }
    return {};
}

std::string check_session_determinism() {
    const auto run_once = [] {
        AliceConfig alice;
        alice.mu_signal = 4.0;
        BobConfig bob;
        ChannelConfig channel;
        SessionParams params{2000, 0.25, 20240423};
        auto pair = make_in_process_pair();
        const auto outcome =
            run_session(alice, bob, channel, params, *pair.a, *pair.b);
        return report_to_json(outcome.report);
    };
    if (run_once() != run_once()) return "reports differ between identical runs";
    return {};
}

}  // namespace

int run_selftest(std::FILE* out) {
    const Check checks[] = {
        {"encoder constellation and envelope", check_encoder_exactness},
        {"push-push equivalence", check_push_push},
        {"attenuation composition", check_attenuation_composition},
        {"vacuum quadrature statistics", check_vacuum_statistics},
        {"homodyne mean law", check_mean_law_point},
        {"sift brute-force equivalence", check_sift_equivalence},
        {"wire format round trip and rejects", check_wire_roundtrip},
        {"session determinism", check_session_determinism},
    };

    int failures = 0;
    for (const auto& check : checks) {
        std::string detail;
        try {
            detail = check.run();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (detail.empty()) {
            std::fprintf(out, "[PASS] %s\n", check.name);
        } else {
            std::fprintf(out, "[FAIL] %s: %s\n", check.name, detail.c_str());
            ++failures;
        }
    }
    return failures;
}

}  // namespace qkd::tools
