#pragma once

#include <cmath>
#include <complex>

#include "qkd/common.hpp"
#include "qkd/random.hpp"

namespace qkd {

/// Optical field envelope of one pulse slot, in sqrt(photon) units:
/// photon_number() == |E|^2 is the mean photon number of the slot.
struct ComplexAmplitude {
    double re = 0.0;
    double im = 0.0;

    constexpr ComplexAmplitude() = default;
    constexpr ComplexAmplitude(double re_, double im_) : re(re_), im(im_) {}

    static ComplexAmplitude from_polar(double magnitude, double phase_rad) {
        return {magnitude * std::cos(phase_rad), magnitude * std::sin(phase_rad)};
    }

    std::complex<double> value() const { return {re, im}; }

    double photon_number() const { return re * re + im * im; }
    double magnitude() const { return std::hypot(re, im); }

    /// Principal argument in (-pi, pi].
    double phase() const { return std::atan2(im, re); }
};

/// Physical constants used only to convert powers into photon numbers.
struct OpticalConstants {
    double wavelength_m = 1.543e-6;
    double planck_j_s = 6.62607015e-34;
    double light_speed_m_s = 2.99792458e8;

    double photon_energy_j() const {
        return planck_j_s * light_speed_m_s / wavelength_m;
    }
};

/// Wiener phase-noise process: increments over dt are zero-mean Gaussian
/// with variance 2*pi*linewidth*dt. Owns its random stream.
class PhaseDriftProcess {
public:
    PhaseDriftProcess(double linewidth_hz, RandomStream stream);

    /// Advances the process by dt seconds; returns the accumulated phase.
    double advance(double dt_s);

    double phase() const { return phase_rad_; }
    double linewidth_hz() const { return linewidth_hz_; }

private:
    double linewidth_hz_;
    double phase_rad_ = 0.0;
    RandomStream stream_;
};

/// Dual-electrode Mach-Zehnder transfer:
///   E_out = E_in * cos((phi1 - phi2)/2) * exp(j*(phi1 + phi2)/2)
/// The cosine envelope is kept explicit so constant-envelope drive schemes
/// become a testable property rather than an assumption.
ComplexAmplitude mzm_dual_drive(ComplexAmplitude e_in, double phi1, double phi2);

/// Single-electrode phase modulation, E * exp(-j*phi_b). The minus sign makes
/// a receiver's modulation subtract from the transmitted phase, so the
/// detected relative phase is phi_alice - phi_bob.
ComplexAmplitude phase_shift(ComplexAmplitude e, double phi_b);

/// Amplitude attenuation by loss_db >= 0 (photon number scales by
/// 10^(-loss_db/10)). Negative loss is a config error, not amplification.
ComplexAmplitude attenuate(ComplexAmplitude e, double loss_db);

double dbm_to_watts(double p_dbm);

/// Mean photon number per pulse for a given average power and pulse rate.
double dbm_to_photons_per_pulse(double p_dbm, const OpticalConstants& constants,
                                double rep_rate_hz);

}  // namespace qkd
