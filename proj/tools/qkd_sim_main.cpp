// qkd-sim: scenario runner for the BB84/QPSK homodyne simulator.
//
// Verbs:
//   run      --config <path> [--seed <u64>] [--out <dir>]
//   sweep    --config <path> --param <name> --values <v1,v2,...> --out <dir>
//   selftest
//
// Exit codes: 0 ok, 1 selftest/internal failure, 2 usage, 3 config error,
// 4 I/O error, 5 session abort.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkd/common.hpp"
#include "qkd/harness/scenario.hpp"
#include "qkd/protocol/session.hpp"
#include "selftest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;
constexpr int kExitAbort = 5;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qkd::IoError("cannot open config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    if (in.bad()) throw qkd::IoError("failed reading config file " + path);
    return text.str();
}

int do_run(const std::string& config_path, std::optional<std::uint64_t> seed,
           const std::optional<std::string>& out_dir) {
    std::string text = read_file(config_path);
    if (seed) {
        // patch the seed before parsing so the report's config snapshot
        // reflects the seed actually used
        auto j = nlohmann::ordered_json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw qkd::ConfigError("scenario config is not a JSON object");
        }
        j["seed"] = *seed;
        text = j.dump();
    }
    const auto cfg = qkd::parse_scenario_json(text);

    std::string dir;
    if (out_dir) {
        dir = *out_dir;
    } else if (cfg.out_dir) {
        dir = *cfg.out_dir;
    } else {
        std::fprintf(stderr,
                     "error: no output directory (--out or config out_dir)\n");
        return kExitUsage;
    }

    const auto outputs = qkd::run_scenario(cfg, dir);
    const auto& report = outputs.outcome.report;
    std::printf("n_pulses=%llu base_matched=%llu key_bits=%llu qber=%.6g\n",
                static_cast<unsigned long long>(report.n_pulses),
                static_cast<unsigned long long>(report.n_base_matched),
                static_cast<unsigned long long>(report.n_key_bits),
                report.qber_estimate);
    std::printf("wrote %s\n", outputs.report_path.c_str());
    std::printf("wrote %s\n", outputs.histogram_path.c_str());
    std::printf("wrote %s\n", outputs.peaks_path.c_str());
    return kExitOk;
}

int do_sweep(const std::string& config_path, const std::string& param,
             const std::vector<double>& values, const std::string& out_dir) {
    const std::string text = read_file(config_path);
    const auto points = qkd::sweep_scenario(text, param, values);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw qkd::IoError("cannot create output directory " + out_dir + ": " +
                           ec.message());
    }
    const auto csv_path = std::filesystem::path(out_dir) / "sweep.csv";
    qkd::write_sweep_csv(csv_path, points);
    std::printf("wrote %s (%zu points)\n", csv_path.c_str(), points.size());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coherent-state BB84/QPSK homodyne QKD simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_dir;

    auto* run = app.add_subcommand(
        "run", "Run one scenario and emit report.json/histogram.csv/peaks.csv");
    run->add_option("--config", config_path, "Scenario config file (flat JSON)")
        ->required();
    run->add_option("--seed", seed_override, "Override the config seed");
    run->add_option("--out", out_dir, "Output directory");

    std::string sweep_param;
    std::vector<double> sweep_values;
    std::string sweep_out;
    auto* sweep = app.add_subcommand(
        "sweep", "Vary one parameter over a list; emits sweep.csv");
    sweep->add_option("--config", config_path, "Scenario config file (flat JSON)")
        ->required();
    sweep->add_option("--param", sweep_param, "Parameter to vary")->required();
    sweep->add_option("--values", sweep_values, "Comma-separated values")
        ->required()
        ->delimiter(',');
    sweep->add_option("--out", sweep_out, "Output directory")->required();

    auto* selftest =
        app.add_subcommand("selftest", "Run the fast invariant subset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run->parsed()) {
            return do_run(config_path, seed_override, out_dir);
        }
        if (sweep->parsed()) {
            return do_sweep(config_path, sweep_param, sweep_values, sweep_out);
        }
        if (selftest->parsed()) {
            const int failures = qkd::tools::run_selftest(stdout);
            return failures == 0 ? kExitOk : kExitFailure;
        }
    } catch (const qkd::SessionAborted& e) {
        std::fprintf(stderr, "session aborted: %s\n", e.what());
        return kExitAbort;
    } catch (const qkd::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const qkd::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}
