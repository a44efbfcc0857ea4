// Atmosphere - International Standard Atmosphere and airspeed conversions
// Part of adaptp - adaptive climb/descent trajectory prediction
//
// Two-layer ISA: linear lapse to the tropopause (11 km geopotential),
// isothermal above. Altitudes are geopotential feet, speeds knots.
#pragma once

namespace adaptp::atmosphere {

inline constexpr double kT0 = 288.15;           // K
inline constexpr double kP0 = 101325.0;         // Pa
inline constexpr double kR = 287.05287;         // J/(kg K)
inline constexpr double kGamma = 1.4;
inline constexpr double kG0 = 9.80665;          // m/s^2
inline constexpr double kLapse = -0.0065;       // K/m
inline constexpr double kTropopauseM = 11000.0; // geopotential m
inline constexpr double kTropopauseFt = kTropopauseM / 0.3048;
inline constexpr double kTTrop = kT0 + kLapse * kTropopauseM; // 216.65 K
inline constexpr double kMaxAltitudeFt = 60000.0;

struct AtmoState {
    double h_ft;
    double temperature_k;
    double pressure_pa;
    double density_kgm3;
    double sound_speed_kt;
};

/// ISA state at `h_ft` in [0, 60 000]; DomainError outside.
AtmoState isa_at(double h_ft);

/// Compressible CAS -> TAS. DomainError for cas <= 0 or h out of range.
double tas_from_cas(double cas_kt, double h_ft);
/// Inverse of tas_from_cas.
double cas_from_tas(double tas_kt, double h_ft);

double mach_from_tas(double tas_kt, double h_ft);
double tas_from_mach(double mach, double h_ft);

/// Altitude where a constant-CAS profile reaches `mach`. Bisection over
/// [0, 60 000] ft; NotFoundError when no crossing exists in that range.
double crossover_altitude(double cas_kt, double mach);

} // namespace adaptp::atmosphere
