#include <benchmark/benchmark.h>

#include <vector>

#include "qkd/alice.hpp"
#include "qkd/bob.hpp"
#include "qkd/channel.hpp"
#include "qkd/harness/histogram.hpp"
#include "qkd/optics.hpp"
#include "qkd/protocol/message.hpp"
#include "qkd/protocol/session.hpp"
#include "qkd/random.hpp"

namespace {

void BM_MzmDualDrive(benchmark::State& state) {
    qkd::ComplexAmplitude e{1.0, 0.0};
    double phi = 0.0;
    for (auto _ : state) {
        phi += 1e-3;
        auto out = qkd::mzm_dual_drive(e, phi, -phi);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_MzmDualDrive);

void BM_HomodyneSample(benchmark::State& state) {
    qkd::BobConfig cfg;
    qkd::RandomStream rng(1);
    const qkd::ComplexAmplitude signal{2.0, 0.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            qkd::homodyne_sample(signal, 0.0, 0.0, cfg, rng));
    }
}
BENCHMARK(BM_HomodyneSample);

void BM_BuildFrame(benchmark::State& state) {
    qkd::AliceConfig cfg;
    cfg.mu_signal = 1.0;
    qkd::RandomStream rng(2);
    const auto symbols =
        qkd::random_symbols(rng, static_cast<std::size_t>(state.range()));
    for (auto _ : state) {
        auto frame = qkd::build_frame(symbols, cfg, qkd::ChannelMode::TwoFiber);
        benchmark::DoNotOptimize(frame);
    }
    state.SetItemsProcessed(state.iterations() * state.range());
}
BENCHMARK(BM_BuildFrame)->Range(1024, 1 << 16);

void BM_PropagateTwoFiber(benchmark::State& state) {
    qkd::AliceConfig alice;
    alice.mu_signal = 1.0;
    qkd::RandomStream rng(3);
    const auto frame = qkd::build_frame(
        qkd::random_symbols(rng, static_cast<std::size_t>(state.range())),
        alice, qkd::ChannelMode::TwoFiber);
    qkd::ChannelConfig cfg;
    cfg.linewidth_hz = 1e4;
    for (auto _ : state) {
        auto out = qkd::propagate(frame, cfg, rng);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range());
}
BENCHMARK(BM_PropagateTwoFiber)->Range(1024, 1 << 16);

void BM_Sift(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range());
    qkd::RandomStream rng(4);
    std::vector<std::uint8_t> bases(n);
    std::vector<qkd::DetectionRecord> records(n);
    for (std::size_t i = 0; i < n; ++i) {
        bases[i] = static_cast<std::uint8_t>(rng.bit());
        records[i].slot_index = i;
        records[i].bob_basis = static_cast<std::uint8_t>(rng.bit());
        records[i].decision =
            rng.bit() ? qkd::Decision::Bit1 : qkd::Decision::Bit0;
    }
    for (auto _ : state) {
        auto kept = qkd::sift(bases, records);
        benchmark::DoNotOptimize(kept);
    }
    state.SetItemsProcessed(state.iterations() * state.range());
}
BENCHMARK(BM_Sift)->Range(1024, 1 << 16);

void BM_EncodeDecodeAnnounce(benchmark::State& state) {
    qkd::BasisAnnounce msg;
    msg.session_id = 42;
    qkd::RandomStream rng(5);
    for (int i = 0; i < state.range(); ++i) {
        msg.bases.push_back(static_cast<std::uint8_t>(rng.bit()));
    }
    const qkd::Message m = msg;
    for (auto _ : state) {
        auto round = qkd::decode_message(qkd::encode_message(m));
        benchmark::DoNotOptimize(round);
    }
    state.SetItemsProcessed(state.iterations() * state.range());
}
BENCHMARK(BM_EncodeDecodeAnnounce)->Range(256, 1 << 14);

void BM_Histogram(benchmark::State& state) {
    qkd::RandomStream rng(6);
    std::vector<double> xs(static_cast<std::size_t>(state.range()));
    for (auto& x : xs) x = rng.gaussian();
    for (auto _ : state) {
        auto h = qkd::histogram(xs, 0.25, -8.0, 8.0);
        benchmark::DoNotOptimize(h);
    }
    state.SetItemsProcessed(state.iterations() * state.range());
}
BENCHMARK(BM_Histogram)->Range(1 << 12, 1 << 18);

}  // namespace

BENCHMARK_MAIN();
