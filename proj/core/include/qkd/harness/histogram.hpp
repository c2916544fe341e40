#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qkd/common.hpp"

namespace qkd {

/// Uniform-width histogram with left-closed right-open bins.
/// sum(counts) + underflow + overflow == n_total always holds.
struct Histogram {
    std::vector<double> bin_edges;  // size counts.size() + 1, strictly increasing
    std::vector<std::uint64_t> counts;
    std::uint64_t n_total = 0;
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;

    double bin_center(std::size_t i) const {
        return 0.5 * (bin_edges[i] + bin_edges[i + 1]);
    }
};

/// Bins samples over [lo, hi) with the given bin width. The top edge is
/// lo + n_bins*width with n_bins = ceil((hi-lo)/width), so the range is
/// always fully covered. Throws ConfigError on degenerate parameters.
Histogram histogram(std::span<const double> samples, double bin_width,
                    double lo, double hi);

}  // namespace qkd
