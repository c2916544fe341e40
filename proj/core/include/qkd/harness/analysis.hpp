#pragma once

#include <cstdint>
#include <span>

#include "qkd/alice.hpp"
#include "qkd/bob.hpp"
#include "qkd/protocol/session.hpp"

namespace qkd {

struct PeakGroup {
    std::uint64_t count = 0;
    double mean_q = 0.0;
    double var_q = 0.0;  // sample variance (n-1); 0 for groups of size < 2
    double weight = 0.0;
};

/// Ground-truth decomposition of the detected-output histogram into its
/// coincidence (outer, antipodal) and anti-coincidence (inner) peaks.
/// Weights sum to 1, counts sum to the number of pulses.
struct PeakSummary {
    PeakGroup coincidence_bit0;
    PeakGroup coincidence_bit1;
    PeakGroup anti_coincidence;
};

/// Groups records by (bases matched?, Alice's bit). Simulation-side
/// diagnostic: needs Alice's ground-truth symbols.
PeakSummary peak_summary(std::span<const DetectionRecord> records,
                         std::span<const Symbol> alice_symbols);

/// Closed-form error rate of the antipodal sign decision:
///   0.5 * erfc( 2*sqrt(mu_eff) / sqrt(2*sigma_sq) )
/// with mu_eff the effective detected photon number
/// (eta_det * pol_overlap * transmittance * mu_signal).
double theoretical_qber(double mu_eff, double sigma_sq);

}  // namespace qkd
