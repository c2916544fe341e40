#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

#include "qkd/alice.hpp"
#include "qkd/common.hpp"
#include "support/oracles.hpp"

using namespace qkd;

TEST_SUITE_BEGIN("alice");

TEST_CASE("default_table rows follow the pi/4 electrode construction") {
    const auto table = default_table();

    const auto check_row = [&](Symbol s, double phi1, double phi2,
                               double phi_a) {
        const auto& r = table.row(s);
        CHECK(r.phi1 == doctest::Approx(phi1).epsilon(1e-12));
        CHECK(r.phi2 == doctest::Approx(phi2).epsilon(1e-12));
        CHECK(circular_distance(table.symbol_phase(s), phi_a) <= 1e-12);
    };

    check_row({0, 0}, kPi / 4.0, -kPi / 4.0, 0.0);
    check_row({1, 0}, 3.0 * kPi / 4.0, kPi / 4.0, kPi / 2.0);
    check_row({0, 1}, 5.0 * kPi / 4.0, 3.0 * kPi / 4.0, kPi);
    check_row({1, 1}, 7.0 * kPi / 4.0, 5.0 * kPi / 4.0, 3.0 * kPi / 2.0);
}

TEST_CASE("default_table satisfies both table invariants") {
    const auto table = default_table();
    CHECK(table.envelope() == doctest::Approx(std::cos(kPi / 4.0)).epsilon(1e-12));
    CHECK(table.envelope() == doctest::Approx(0.70711).epsilon(1e-5));

    // constellation: exactly {0, pi/2, pi, 3pi/2}
    std::array<bool, 4> seen{};
    for (std::uint8_t basis = 0; basis < 2; ++basis) {
        for (std::uint8_t bit = 0; bit < 2; ++bit) {
            const double phase = table.symbol_phase({basis, bit});
            for (int k = 0; k < 4; ++k) {
                if (circular_distance(phase, k * kPi / 2.0) <= 1e-12) {
                    seen[static_cast<std::size_t>(k)] = true;
                }
            }
        }
    }
    for (bool s : seen) CHECK(s);
}

TEST_CASE("from_rows rejects tables violating an invariant") {
    // unequal envelopes
    CHECK_THROWS_AS(EncodingTable::from_rows({{{kPi / 4, -kPi / 4},
                                               {kPi / 3, -kPi / 3},
                                               {kPi + kPi / 4, kPi - kPi / 4},
                                               {-kPi / 4, kPi / 4}}}),
                    ConfigError);
    // constant envelope but phases off the QPSK grid
    CHECK_THROWS_AS(EncodingTable::from_rows({{{0.1 + kPi / 4, 0.1 - kPi / 4},
                                               {kPi / 4, -kPi / 4},
                                               {kPi + kPi / 4, kPi - kPi / 4},
                                               {-kPi / 4, kPi / 4}}}),
                    ConfigError);
    // repeated constellation point
    CHECK_THROWS_AS(EncodingTable::from_rows({{{kPi / 4, -kPi / 4},
                                               {kPi / 4, -kPi / 4},
                                               {kPi + kPi / 4, kPi - kPi / 4},
                                               {-kPi / 4, kPi / 4}}}),
                    ConfigError);
    // zero envelope (no light)
    CHECK_THROWS_AS(
        EncodingTable::from_rows({{{kPi / 2, -kPi / 2},
                                   {kPi, 0.0},
                                   {3 * kPi / 2, kPi / 2},
                                   {kTwoPi, kPi}}}),
        ConfigError);
}

TEST_CASE("encode_symbol matches the arm-sum oracle through the default table") {
    const auto table = default_table();
    const ComplexAmplitude one{1.0, 0.0};

    const auto b0 = encode_symbol({0, 0}, table, one);
    CHECK(b0.magnitude() == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(circular_distance(b0.phase(), 0.0) <= 1e-12);

    const auto b1 = encode_symbol({0, 1}, table, one);
    CHECK(b1.magnitude() == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(circular_distance(b1.phase(), kPi) <= 1e-12);

    double mag = -1.0;
    for (std::uint8_t basis = 0; basis < 2; ++basis) {
        for (std::uint8_t bit = 0; bit < 2; ++bit) {
            const Symbol s{basis, bit};
            const auto got = encode_symbol(s, table, one);
            const auto& r = table.row(s);
            const auto want = oracles::mzm_sum_form({1.0, 0.0}, r.phi1, r.phi2);
            CHECK(got.re == doctest::Approx(want.real()).epsilon(1e-12));
            CHECK(got.im == doctest::Approx(want.imag()).epsilon(1e-12));
            if (mag < 0.0) mag = got.magnitude();
            CHECK(got.magnitude() == doctest::Approx(mag).epsilon(1e-12));
        }
    }
}

TEST_CASE("random_symbols: empty, uniform, reproducible") {
    RandomStream rng(201);
    CHECK(random_symbols(rng, 0).empty());

    const std::size_t n = 100000;
    const auto symbols = random_symbols(rng, n);
    std::array<std::size_t, 4> counts{};
    for (const auto& s : symbols) {
        counts[EncodingTable::row_index(s)]++;
    }
    const double tol = oracles::binomial_3sigma(0.25, n);
    for (auto c : counts) {
        CHECK(std::fabs(static_cast<double>(c) / n - 0.25) <= tol);
    }

    RandomStream r1(77), r2(77);
    CHECK(random_symbols(r1, 500) == random_symbols(r2, 500));
}

TEST_CASE("build_frame normalizes launched photon number exactly") {
    AliceConfig cfg;
    cfg.mu_signal = 1.0;

    const auto frame = build_frame(std::array{Symbol{0, 0}}, cfg,
                                   ChannelMode::TwoFiber);
    REQUIRE(frame.slots.size() == 1);
    CHECK(frame.slots[0].signal.re == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(frame.slots[0].signal.im == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(frame.slots[0].reference.has_value());

    cfg.mu_signal = 0.1;
    RandomStream rng(202);
    const auto symbols = random_symbols(rng, 4096);
    const auto faint = build_frame(symbols, cfg, ChannelMode::TwoFiber);
    for (const auto& slot : faint.slots) {
        CHECK(std::fabs(slot.signal.photon_number() - 0.1) <= 1e-12);
        CHECK_FALSE(slot.reference.has_value());
    }
    // slot indices contiguous from 0
    for (std::size_t i = 0; i < faint.slots.size(); ++i) {
        CHECK(faint.slots[i].slot_index == i);
        CHECK(faint.slots[i].alice_symbol == symbols[i]);
    }
}

TEST_CASE("build_frame in delayed mode carries phase-0 reference pulses") {
    AliceConfig cfg;
    cfg.mu_signal = 0.5;
    cfg.mu_reference = 400.0;

    const auto frame = build_frame(std::array{Symbol{1, 0}, Symbol{0, 1}}, cfg,
                                   ChannelMode::SingleFiberDelayed);
    for (const auto& slot : frame.slots) {
        REQUIRE(slot.reference.has_value());
        CHECK(slot.reference->photon_number() ==
              doctest::Approx(400.0).epsilon(1e-12));
        CHECK(slot.reference->im == 0.0);
        CHECK(slot.reference->re > 0.0);
    }

    cfg.mu_reference.reset();
    CHECK_THROWS_AS(build_frame(std::array{Symbol{0, 0}}, cfg,
                                ChannelMode::SingleFiberDelayed),
                    ConfigError);
}

TEST_CASE("build_frame rejects empty input and bad mu") {
    AliceConfig cfg;
    CHECK_THROWS_AS(build_frame({}, cfg, ChannelMode::TwoFiber), ConfigError);
    cfg.mu_signal = 0.0;
    CHECK_THROWS_AS(build_frame(std::array{Symbol{0, 0}}, cfg,
                                ChannelMode::TwoFiber),
                    ConfigError);
}

TEST_CASE("frame constellation covers exactly the four QPSK phases") {
    AliceConfig cfg;
    cfg.mu_signal = 2.0;
    const std::array<Symbol, 4> all{Symbol{0, 0}, Symbol{1, 0}, Symbol{0, 1},
                                    Symbol{1, 1}};
    const auto frame = build_frame(all, cfg, ChannelMode::TwoFiber);

    std::set<int> hit;
    for (const auto& slot : frame.slots) {
        const double phase = wrap_phase(slot.signal.phase());
        for (int k = 0; k < 4; ++k) {
            if (circular_distance(phase, k * kPi / 2.0) <= 1e-12) hit.insert(k);
        }
    }
    CHECK(hit.size() == 4);
}

TEST_CASE("bit flip rotates by pi, basis flip rotates by pi/2") {
    const auto table = default_table();
    for (std::uint8_t basis = 0; basis < 2; ++basis) {
        for (std::uint8_t bit = 0; bit < 2; ++bit) {
            const double base = table.symbol_phase({basis, bit});
            const double bit_flipped =
                table.symbol_phase({basis, static_cast<std::uint8_t>(1 - bit)});
            const double basis_flipped =
                table.symbol_phase({static_cast<std::uint8_t>(1 - basis), bit});
            CHECK(circular_distance(base + kPi, bit_flipped) <= 1e-12);
            // +pi/2 raising the basis bit, -pi/2 lowering it
            const double expected_step =
                basis == 0 ? kPi / 2.0 : -kPi / 2.0;
            CHECK(circular_distance(base + expected_step, basis_flipped) <=
                  1e-12);
        }
    }
}

TEST_CASE("an injected table with a different electrode offset still works") {
    // offset pi/3: envelope cos(pi/3) = 0.5, same constellation
    std::array<ElectrodePhases, 4> rows{};
    for (std::uint8_t basis = 0; basis < 2; ++basis) {
        for (std::uint8_t bit = 0; bit < 2; ++bit) {
            const double phi_a = bit * kPi + basis * (kPi / 2.0);
            rows[EncodingTable::row_index({basis, bit})] = {phi_a + kPi / 3.0,
                                                            phi_a - kPi / 3.0};
        }
    }
    AliceConfig cfg;
    cfg.mu_signal = 2.5;
    cfg.table = EncodingTable::from_rows(rows);
    CHECK(cfg.table.envelope() == doctest::Approx(0.5).epsilon(1e-12));

    RandomStream rng(203);
    const auto frame =
        build_frame(random_symbols(rng, 256), cfg, ChannelMode::TwoFiber);
    for (const auto& slot : frame.slots) {
        CHECK(std::fabs(slot.signal.photon_number() - 2.5) <= 1e-12);
    }
}

TEST_SUITE_END();
