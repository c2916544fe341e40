#include "qkd/harness/analysis.hpp"

#include <cmath>

namespace qkd {

namespace {

struct Accumulator {
    std::uint64_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double q) {
        ++count;
        sum += q;
        sum_sq += q * q;
    }

    PeakGroup finish(std::uint64_t n_total) const {
        PeakGroup g;
        g.count = count;
        g.weight = static_cast<double>(count) / static_cast<double>(n_total);
        if (count > 0) {
            g.mean_q = sum / static_cast<double>(count);
        }
        if (count > 1) {
            const double n = static_cast<double>(count);
            g.var_q = (sum_sq - n * g.mean_q * g.mean_q) / (n - 1.0);
        }
        return g;
    }
};

}  // namespace

PeakSummary peak_summary(std::span<const DetectionRecord> records,
                         std::span<const Symbol> alice_symbols) {
    if (records.size() != alice_symbols.size()) {
        throw ProtocolError("peak summary inputs have different lengths");
    }
    if (records.empty()) {
        throw ProtocolError("peak summary over an empty session is undefined");
    }

    Accumulator coinc0, coinc1, anti;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const bool matched = alice_symbols[i].basis == records[i].bob_basis;
        if (!matched) {
            anti.add(records[i].q);
        } else if (alice_symbols[i].bit == 0) {
            coinc0.add(records[i].q);
        } else {
            coinc1.add(records[i].q);
        }
    }

    PeakSummary summary;
    summary.coincidence_bit0 = coinc0.finish(records.size());
    summary.coincidence_bit1 = coinc1.finish(records.size());
    summary.anti_coincidence = anti.finish(records.size());
    return summary;
}

double theoretical_qber(double mu_eff, double sigma_sq) {
    if (!(mu_eff >= 0.0)) throw ConfigError("mu_eff must be >= 0");
    if (!(sigma_sq > 0.0)) throw ConfigError("sigma_sq must be > 0");
    return 0.5 * std::erfc(2.0 * std::sqrt(mu_eff) / std::sqrt(2.0 * sigma_sq));
}

}  // namespace qkd
