#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qkd/alice.hpp"
#include "qkd/bob.hpp"
#include "qkd/channel.hpp"
#include "qkd/harness/analysis.hpp"
#include "qkd/harness/histogram.hpp"
#include "qkd/protocol/session.hpp"

namespace qkd {

/// Full parameter set for one run, loaded from a flat JSON config file
/// (unknown fields rejected). mu_signal may alternatively be given as
/// signal_power_dbm + rep_rate_hz, converted at parse time.
struct ScenarioConfig {
    AliceConfig alice;
    BobConfig bob;
    ChannelConfig channel;
    SessionParams params;
    OpticalConstants constants;
    double rep_rate_hz = 1e6;
    std::optional<double> signal_power_dbm;
    std::optional<std::string> out_dir;

    /// Resolved flat config (defaults applied), fixed field order; embedded
    /// in the session report as the config snapshot.
    std::string snapshot_json;

    /// Effective detected photon number eta_det * pol_overlap * T * mu_signal.
    double mu_eff() const;
};

ScenarioConfig parse_scenario_json(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct ScenarioOutputs {
    SessionOutcome outcome;
    Histogram hist;
    PeakSummary peaks;
    std::filesystem::path report_path;
    std::filesystem::path histogram_path;
    std::filesystem::path peaks_path;
};

/// Runs the scenario end-to-end over an in-process transport and writes
/// report.json, histogram.csv (header bin_center,count) and peaks.csv
/// (header group,count,mean,var,weight) into out_dir. Output bytes are a
/// pure function of the config (including its seed).
///
/// Histogram binning: width 0.25 shot-noise units over
/// [-4*sqrt(mu_eff)-4, +4*sqrt(mu_eff)+4).
ScenarioOutputs run_scenario(const ScenarioConfig& cfg,
                             const std::filesystem::path& out_dir);

struct SweepPoint {
    double value = 0.0;
    std::uint64_t seed = 0;
    double qber_estimate = 0.0;
    double key_rate = 0.0;  // n_key_bits / n_pulses
    std::uint64_t n_key_bits = 0;
};

/// Runs the base config once per value with the named numeric parameter
/// overridden and point seed = base seed + point index. Points execute in
/// parallel, capped by max_threads (0 = QKD_SIM_THREADS env var, falling
/// back to hardware concurrency). Results come back in value order.
std::vector<SweepPoint> sweep_scenario(std::string_view base_config_json,
                                       const std::string& param,
                                       std::span<const double> values,
                                       unsigned max_threads = 0);

/// sweep.csv with header value,qber,key_rate.
void write_sweep_csv(const std::filesystem::path& path,
                     std::span<const SweepPoint> points);

}  // namespace qkd
