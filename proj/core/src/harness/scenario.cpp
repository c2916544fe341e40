#include "qkd/harness/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qkd/protocol/transport.hpp"

namespace qkd {

namespace {

using ordered_json = nlohmann::ordered_json;

// Shortest round-trip decimal form (same renderer the JSON outputs use), so
// CSV and JSON agree byte for byte between runs.
std::string fmt(double x) { return ordered_json(x).dump(); }

const std::set<std::string>& known_fields() {
    static const std::set<std::string> fields = {
        "n_pulses", "sample_fraction", "seed", "out_dir",
        "mu_signal", "signal_power_dbm", "mu_reference",
        "eta_det", "electronic_noise", "mu_reference_at_detector", "threshold_q0",
        "mode", "length_km", "loss_db_per_km", "excess_loss_db", "pol_overlap",
        "linewidth_hz", "delay_s", "slot_period_s",
        "wavelength_m", "rep_rate_hz",
    };
    return fields;
}

double get_number(const ordered_json& j, const char* name) {
    const auto& v = j.at(name);
    if (!v.is_number()) {
        throw ConfigError(std::string("config field \"") + name +
                          "\" must be a number");
    }
    return v.get<double>();
}

double get_number_or(const ordered_json& j, const char* name, double fallback) {
    return j.contains(name) ? get_number(j, name) : fallback;
}

std::uint64_t get_unsigned(const ordered_json& j, const char* name) {
    const auto& v = j.at(name);
    if (!v.is_number_unsigned()) {
        throw ConfigError(std::string("config field \"") + name +
                          "\" must be an unsigned integer");
    }
    return v.get<std::uint64_t>();
}

void require(const ordered_json& j, const char* name) {
    if (!j.contains(name)) {
        throw ConfigError(std::string("config is missing required field \"") +
                          name + '"');
    }
}

}  // namespace

double ScenarioConfig::mu_eff() const {
    return bob.eta_det * channel.pol_overlap * transmittance(channel) *
           alice.mu_signal;
}

ScenarioConfig parse_scenario_json(std::string_view text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("scenario config is not valid JSON");
    if (!j.is_object()) throw ConfigError("scenario config must be a flat JSON object");

    for (const auto& item : j.items()) {
        if (known_fields().find(item.key()) == known_fields().end()) {
            throw ConfigError("unknown config field \"" + item.key() + '"');
        }
    }

    ScenarioConfig cfg;

    require(j, "mode");
    const auto& mode_v = j.at("mode");
    if (!mode_v.is_string()) throw ConfigError("config field \"mode\" must be a string");
    const std::string mode = mode_v.get<std::string>();
    if (mode == "two_fiber") {
        cfg.channel.mode = ChannelMode::TwoFiber;
    } else if (mode == "single_fiber_delayed") {
        cfg.channel.mode = ChannelMode::SingleFiberDelayed;
    } else {
        throw ConfigError("config field \"mode\" must be \"two_fiber\" or "
                          "\"single_fiber_delayed\"");
    }

    require(j, "n_pulses");
    require(j, "sample_fraction");
    require(j, "seed");
    require(j, "length_km");
    require(j, "linewidth_hz");
    cfg.params.n_pulses = get_unsigned(j, "n_pulses");
    cfg.params.sample_fraction = get_number(j, "sample_fraction");
    cfg.params.seed = get_unsigned(j, "seed");

    cfg.constants.wavelength_m = get_number_or(j, "wavelength_m", 1.543e-6);
    if (!(cfg.constants.wavelength_m > 0.0)) {
        throw ConfigError("wavelength_m must be > 0");
    }
    cfg.rep_rate_hz = get_number_or(j, "rep_rate_hz", 1e6);
    if (!(cfg.rep_rate_hz > 0.0)) throw ConfigError("rep_rate_hz must be > 0");

    // mu_signal directly, or converted from a received-power figure
    const bool has_mu = j.contains("mu_signal");
    const bool has_power = j.contains("signal_power_dbm");
    if (has_mu == has_power) {
        throw ConfigError("config must set exactly one of mu_signal and "
                          "signal_power_dbm");
    }
    if (has_mu) {
        cfg.alice.mu_signal = get_number(j, "mu_signal");
    } else {
        cfg.signal_power_dbm = get_number(j, "signal_power_dbm");
        cfg.alice.mu_signal = dbm_to_photons_per_pulse(
            *cfg.signal_power_dbm, cfg.constants, cfg.rep_rate_hz);
    }
    if (j.contains("mu_reference")) {
        cfg.alice.mu_reference = get_number(j, "mu_reference");
    }

    cfg.bob.eta_det = get_number_or(j, "eta_det", 1.0);
    cfg.bob.electronic_noise = get_number_or(j, "electronic_noise", 0.0);
    cfg.bob.mu_reference_at_detector =
        get_number_or(j, "mu_reference_at_detector", 1e6);
    cfg.bob.threshold_q0 = get_number_or(j, "threshold_q0", 0.0);

    cfg.channel.length_km = get_number(j, "length_km");
    cfg.channel.loss_db_per_km = get_number_or(j, "loss_db_per_km", 0.2);
    cfg.channel.excess_loss_db = get_number_or(j, "excess_loss_db", 0.0);
    cfg.channel.pol_overlap = get_number_or(j, "pol_overlap", 1.0);
    cfg.channel.linewidth_hz = get_number(j, "linewidth_hz");
    cfg.channel.slot_period_s =
        get_number_or(j, "slot_period_s", 1.0 / cfg.rep_rate_hz);
    if (cfg.channel.mode == ChannelMode::SingleFiberDelayed) {
        require(j, "delay_s");
        cfg.channel.delay_s = get_number(j, "delay_s");
    } else if (j.contains("delay_s")) {
        throw ConfigError("delay_s only applies to single_fiber_delayed mode");
    }

    if (j.contains("out_dir")) {
        const auto& v = j.at("out_dir");
        if (!v.is_string()) throw ConfigError("out_dir must be a string");
        cfg.out_dir = v.get<std::string>();
    }

    cfg.params.validate();
    cfg.channel.validate();
    cfg.alice.validate(cfg.channel.mode);
    cfg.bob.validate();

    // resolved snapshot, fixed field order
    ordered_json snap;
    snap["n_pulses"] = cfg.params.n_pulses;
    snap["sample_fraction"] = cfg.params.sample_fraction;
    snap["seed"] = cfg.params.seed;
    snap["mode"] = mode;
    snap["mu_signal"] = cfg.alice.mu_signal;
    if (cfg.signal_power_dbm) snap["signal_power_dbm"] = *cfg.signal_power_dbm;
    if (cfg.alice.mu_reference) snap["mu_reference"] = *cfg.alice.mu_reference;
    snap["eta_det"] = cfg.bob.eta_det;
    snap["electronic_noise"] = cfg.bob.electronic_noise;
    snap["mu_reference_at_detector"] = cfg.bob.mu_reference_at_detector;
    snap["threshold_q0"] = cfg.bob.threshold_q0;
    snap["length_km"] = cfg.channel.length_km;
    snap["loss_db_per_km"] = cfg.channel.loss_db_per_km;
    snap["excess_loss_db"] = cfg.channel.excess_loss_db;
    snap["pol_overlap"] = cfg.channel.pol_overlap;
    snap["linewidth_hz"] = cfg.channel.linewidth_hz;
    if (cfg.channel.mode == ChannelMode::SingleFiberDelayed) {
        snap["delay_s"] = cfg.channel.delay_s;
    }
    snap["slot_period_s"] = cfg.channel.slot_period_s;
    snap["wavelength_m"] = cfg.constants.wavelength_m;
    snap["rep_rate_hz"] = cfg.rep_rate_hz;
    cfg.snapshot_json = snap.dump();

    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    if (in.bad()) throw IoError("failed reading config file " + path.string());
    return parse_scenario_json(text.str());
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("failed writing output file " + path.string());
}

std::string histogram_csv(const Histogram& h) {
    std::string csv = "bin_center,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        csv += fmt(h.bin_center(i));
        csv += ',';
        csv += std::to_string(h.counts[i]);
        csv += '\n';
    }
    return csv;
}

std::string peaks_csv(const PeakSummary& peaks) {
    const auto row = [](std::string_view group, const PeakGroup& g) {
        std::string r{group};
        r += ',';
        r += std::to_string(g.count);
        r += ',';
        r += fmt(g.mean_q);
        r += ',';
        r += fmt(g.var_q);
        r += ',';
        r += fmt(g.weight);
        r += '\n';
        return r;
    };
    std::string csv = "group,count,mean,var,weight\n";
    csv += row("coincidence-bit0", peaks.coincidence_bit0);
    csv += row("coincidence-bit1", peaks.coincidence_bit1);
    csv += row("anti-coincidence", peaks.anti_coincidence);
    return csv;
}

SessionOutcome run_over_in_process_link(const ScenarioConfig& cfg) {
    auto pair = make_in_process_pair();
    return run_session(cfg.alice, cfg.bob, cfg.channel, cfg.params, *pair.a,
                       *pair.b, cfg.snapshot_json);
}

}  // namespace

ScenarioOutputs run_scenario(const ScenarioConfig& cfg,
                             const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + out_dir.string() +
                      ": " + ec.message());
    }

    ScenarioOutputs out;
    out.outcome = run_over_in_process_link(cfg);

    std::vector<double> q_samples;
    q_samples.reserve(out.outcome.report.slots.size());
    for (const auto& slot : out.outcome.report.slots) q_samples.push_back(slot.q);

    const double span = 4.0 * std::sqrt(cfg.mu_eff()) + 4.0;
    out.hist = histogram(q_samples, 0.25, -span, span);
    out.peaks = peak_summary(out.outcome.records, out.outcome.alice_symbols);

    out.report_path = out_dir / "report.json";
    out.histogram_path = out_dir / "histogram.csv";
    out.peaks_path = out_dir / "peaks.csv";
    write_file(out.report_path, report_to_json(out.outcome.report));
    write_file(out.histogram_path, histogram_csv(out.hist));
    write_file(out.peaks_path, peaks_csv(out.peaks));
    return out;
}

namespace {

const std::set<std::string>& sweepable_fields() {
    static const std::set<std::string> fields = {
        "n_pulses", "sample_fraction",
        "mu_signal", "signal_power_dbm", "mu_reference",
        "eta_det", "electronic_noise", "mu_reference_at_detector", "threshold_q0",
        "length_km", "loss_db_per_km", "excess_loss_db", "pol_overlap",
        "linewidth_hz", "delay_s", "slot_period_s",
    };
    return fields;
}

unsigned resolve_thread_cap(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QKD_SIM_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace

std::vector<SweepPoint> sweep_scenario(std::string_view base_config_json,
                                       const std::string& param,
                                       std::span<const double> values,
                                       unsigned max_threads) {
    if (sweepable_fields().find(param) == sweepable_fields().end()) {
        throw ConfigError("\"" + param + "\" is not a sweepable parameter");
    }
    if (values.empty()) throw ConfigError("sweep needs at least one value");

    ordered_json base = ordered_json::parse(base_config_json, nullptr, false);
    if (base.is_discarded() || !base.is_object()) {
        throw ConfigError("scenario config is not a JSON object");
    }
    const std::uint64_t base_seed =
        base.contains("seed") && base["seed"].is_number_unsigned()
            ? base["seed"].get<std::uint64_t>()
            : throw ConfigError("config is missing required field \"seed\"");

    // Every point gets its own validated config; sweeping mu_signal clears a
    // conflicting power spec (and vice versa) so overrides stay well-formed.
    std::vector<ScenarioConfig> configs;
    configs.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        ordered_json point = base;
        if (param == "n_pulses") {
            const double v = values[i];
            if (!(v >= 1.0) || v != std::floor(v)) {
                throw ConfigError("n_pulses sweep values must be positive "
                                  "integers");
            }
            point[param] = static_cast<std::uint64_t>(v);
        } else {
            point[param] = values[i];
        }
        if (param == "mu_signal") point.erase("signal_power_dbm");
        if (param == "signal_power_dbm") point.erase("mu_signal");
        point["seed"] = base_seed + i;  // documented derivation
        configs.push_back(parse_scenario_json(point.dump()));
    }

    std::vector<SweepPoint> points(values.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    const unsigned n_threads = std::min<unsigned>(
        resolve_thread_cap(max_threads),
        static_cast<unsigned>(values.size()));

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            try {
                const auto outcome = run_over_in_process_link(configs[i]);
                SweepPoint p;
                p.value = values[i];
                p.seed = configs[i].params.seed;
                p.qber_estimate = outcome.report.qber_estimate;
                p.n_key_bits = outcome.report.n_key_bits;
                p.key_rate = static_cast<double>(outcome.report.n_key_bits) /
                             static_cast<double>(outcome.report.n_pulses);
                points[i] = p;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);

    return points;
}

void write_sweep_csv(const std::filesystem::path& path,
                     std::span<const SweepPoint> points) {
    std::string csv = "value,qber,key_rate\n";
    for (const auto& p : points) {
        csv += fmt(p.value);
        csv += ',';
        csv += fmt(p.qber_estimate);
        csv += ',';
        csv += fmt(p.key_rate);
        csv += '\n';
    }
    write_file(path, csv);
}

}  // namespace qkd
