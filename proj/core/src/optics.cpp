#include "qkd/optics.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace qkd {

PhaseDriftProcess::PhaseDriftProcess(double linewidth_hz, RandomStream stream)
    : linewidth_hz_(linewidth_hz), stream_(std::move(stream)) {
    if (linewidth_hz < 0.0) {
        throw ConfigError("linewidth_hz must be >= 0, got " +
                          std::to_string(linewidth_hz));
    }
}

double PhaseDriftProcess::advance(double dt_s) {
    if (dt_s < 0.0) {
        throw ConfigError("drift time step must be >= 0");
    }
    // Wiener increment: zero sigma (zero linewidth or dt) adds exactly 0,
    // so the accumulated phase is bit-stable in those cases.
    const double sigma = std::sqrt(kTwoPi * linewidth_hz_ * dt_s);
    phase_rad_ += sigma * stream_.gaussian();
    return phase_rad_;
}

ComplexAmplitude mzm_dual_drive(ComplexAmplitude e_in, double phi1, double phi2) {
    const double envelope = std::cos(0.5 * (phi1 - phi2));
    const double mean_phase = 0.5 * (phi1 + phi2);
    const std::complex<double> out =
        e_in.value() * envelope *
        std::complex<double>(std::cos(mean_phase), std::sin(mean_phase));
    return {out.real(), out.imag()};
}

ComplexAmplitude phase_shift(ComplexAmplitude e, double phi_b) {
    const double c = std::cos(phi_b);
    const double s = std::sin(phi_b);
    // e * exp(-j*phi_b)
    return {e.re * c + e.im * s, e.im * c - e.re * s};
}

ComplexAmplitude attenuate(ComplexAmplitude e, double loss_db) {
    if (!(loss_db >= 0.0)) {
        throw ConfigError("attenuation must be >= 0 dB, got " +
                          std::to_string(loss_db));
    }
    const double scale = std::pow(10.0, -loss_db / 20.0);
    return {e.re * scale, e.im * scale};
}

double dbm_to_watts(double p_dbm) {
    return 1e-3 * std::pow(10.0, p_dbm / 10.0);
}

double dbm_to_photons_per_pulse(double p_dbm, const OpticalConstants& constants,
                                double rep_rate_hz) {
    if (!(rep_rate_hz > 0.0)) {
        throw ConfigError("rep_rate_hz must be > 0, got " +
                          std::to_string(rep_rate_hz));
    }
    return dbm_to_watts(p_dbm) / (rep_rate_hz * constants.photon_energy_j());
}

}  // namespace qkd
