// Atmosphere - International Standard Atmosphere and airspeed conversions
// Part of adaptp - adaptive climb/descent trajectory prediction

#include "adaptp/atmosphere.hpp"

#include <cmath>
#include <string>

#include "adaptp/errors.hpp"
#include "adaptp/units.hpp"

namespace adaptp::atmosphere {

namespace {

constexpr double kMu = (kGamma - 1.0) / kGamma;

void check_altitude(double h_ft) {
    if (!(h_ft >= 0.0 && h_ft <= kMaxAltitudeFt)) {
        throw DomainError("altitude " + std::to_string(h_ft) +
                          " ft outside ISA range [0, 60000]");
    }
}

double pressure_at(double h_m, double temperature) {
    if (h_m <= kTropopauseM) {
        return kP0 * std::pow(temperature / kT0, -kG0 / (kLapse * kR));
    }
    const double p_trop = kP0 * std::pow(kTTrop / kT0, -kG0 / (kLapse * kR));
    return p_trop * std::exp(-kG0 / (kR * kTTrop) * (h_m - kTropopauseM));
}

} // namespace

AtmoState isa_at(double h_ft) {
    check_altitude(h_ft);
    const double h_m = h_ft * units::kFtToM;
    const double temperature =
        h_m <= kTropopauseM ? kT0 + kLapse * h_m : kTTrop;
    const double pressure = pressure_at(h_m, temperature);
    const double density = pressure / (kR * temperature);
    const double sound = std::sqrt(kGamma * kR * temperature);
    return {h_ft, temperature, pressure, density, sound * units::kMpsToKt};
}

double tas_from_cas(double cas_kt, double h_ft) {
    if (!(cas_kt > 0.0)) {
        throw DomainError("CAS must be positive");
    }
    const AtmoState atmo = isa_at(h_ft);
    const double rho0 = kP0 / (kR * kT0);
    const double cas = cas_kt * units::kKtToMps;
    const double impact =
        kP0 * (std::pow(1.0 + kMu / 2.0 * rho0 / kP0 * cas * cas, 1.0 / kMu) -
               1.0);
    const double p = atmo.pressure_pa;
    const double tas = std::sqrt(2.0 / kMu * p / atmo.density_kgm3 *
                                 (std::pow(1.0 + impact / p, kMu) - 1.0));
    return tas * units::kMpsToKt;
}

double cas_from_tas(double tas_kt, double h_ft) {
    if (!(tas_kt > 0.0)) {
        throw DomainError("TAS must be positive");
    }
    const AtmoState atmo = isa_at(h_ft);
    const double rho0 = kP0 / (kR * kT0);
    const double tas = tas_kt * units::kKtToMps;
    const double p = atmo.pressure_pa;
    const double impact =
        p * (std::pow(1.0 + kMu / 2.0 * atmo.density_kgm3 / p * tas * tas,
                      1.0 / kMu) -
             1.0);
    const double cas = std::sqrt(2.0 / kMu * kP0 / rho0 *
                                 (std::pow(1.0 + impact / kP0, kMu) - 1.0));
    return cas * units::kMpsToKt;
}

double mach_from_tas(double tas_kt, double h_ft) {
    if (!(tas_kt > 0.0)) {
        throw DomainError("TAS must be positive");
    }
    return tas_kt / isa_at(h_ft).sound_speed_kt;
}

double tas_from_mach(double mach, double h_ft) {
    if (!(mach > 0.0)) {
        throw DomainError("Mach must be positive");
    }
    return mach * isa_at(h_ft).sound_speed_kt;
}

double crossover_altitude(double cas_kt, double mach) {
    if (!(cas_kt > 0.0) || !(mach > 0.0 && mach < 1.0)) {
        throw DomainError("crossover needs cas > 0 and 0 < mach < 1");
    }
    // Mach at constant CAS increases monotonically with altitude.
    auto residual = [&](double h) {
        return mach_from_tas(tas_from_cas(cas_kt, h), h) - mach;
    };
    double lo = 0.0;
    double hi = kMaxAltitudeFt;
    const double r_lo = residual(lo);
    const double r_hi = residual(hi);
    if (r_lo > 0.0) {
        throw NotFoundError("crossover below 0 ft for the given CAS/Mach");
    }
    if (r_hi < 0.0) {
        throw NotFoundError("crossover above 60000 ft for the given CAS/Mach");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-9; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double r = residual(mid);
        if (r == 0.0) {
            return mid;
        }
        (r < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace adaptp::atmosphere
