#include "qkd/harness/histogram.hpp"

#include <cmath>

namespace qkd {

Histogram histogram(std::span<const double> samples, double bin_width,
                    double lo, double hi) {
    if (!(bin_width > 0.0)) throw ConfigError("bin_width must be > 0");
    if (!(hi > lo)) throw ConfigError("histogram range is degenerate");

    const auto n_bins = static_cast<std::size_t>(
        std::ceil((hi - lo) / bin_width - 1e-9));

    Histogram h;
    h.bin_edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) {
        h.bin_edges[i] = lo + static_cast<double>(i) * bin_width;
    }
    h.counts.assign(n_bins, 0);
    h.n_total = samples.size();

    const double top = h.bin_edges.back();
    for (double x : samples) {
        if (x < lo) {
            ++h.underflow;
        } else if (x >= top) {
            ++h.overflow;
        } else {
            auto idx = static_cast<std::size_t>((x - lo) / bin_width);
            if (idx >= n_bins) idx = n_bins - 1;  // edge rounding guard
            ++h.counts[idx];
        }
    }
    return h;
}

}  // namespace qkd
