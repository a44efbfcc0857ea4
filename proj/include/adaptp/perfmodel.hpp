// Performance Model - open total-energy climb/descent model
// Part of adaptp - adaptive climb/descent trajectory prediction
//
// ROCD from the total-energy balance
//   dh/dt = (T_HR - D) * V_TAS / (m * g0) * f(M)
// with ISA temperature ratio fixed at one (no temperature deviation), a
// BADA-3-style climb thrust law and a parabolic drag polar.
#pragma once

#include <string>
#include <vector>

#include "adaptp/trajectory.hpp"

namespace adaptp::perf {

enum class EngineType { Jet, Turboprop };

enum class EsfBranch {
    ConstCasBelowTrop,
    ConstCasAboveTrop,
    ConstMachBelowTrop,
    ConstMachAboveTrop,
};

/// Maximum climb thrust coefficients.
///   jet:       T = c1 * (1 - h/c2 + c3 * h^2)        (h in ft)
///   turboprop: T = c1 / V_TAS[kt] * (1 - h/c2) + c3
/// Above `break_ft` (when positive) thrust is multiplied by `break_factor`.
struct ThrustCoeffs {
    double c1 = 0.0; // N (jet) or N*kt (turboprop)
    double c2 = 0.0; // ft
    double c3 = 0.0; // 1/ft^2 (jet) or N (turboprop)
    double break_ft = 0.0;
    double break_factor = 1.0;
};

struct DragCoeffs {
    double cd0 = 0.0;
    double cd2 = 0.0;
    double wing_area_m2 = 0.0;
};

/// CAS below the crossover altitude, Mach above it.
struct SpeedSchedule {
    double cas_kt = 0.0;
    double mach = 0.0;
};

struct AircraftConfig {
    std::string type_code;
    EngineType engine = EngineType::Jet;
    double mass_kg = 0.0;
    double g0 = 9.80665;
    ThrustCoeffs thrust;
    DragCoeffs drag;
    SpeedSchedule climb_schedule;
    SpeedSchedule descent_schedule;
    double descent_thrust_fraction = 0.1;

    const SpeedSchedule &schedule(Phase phase) const {
        return phase == Phase::Climb ? climb_schedule : descent_schedule;
    }
};

/// Throws ConfigError when the config breaks its invariants (positive
/// mass, non-negative drag, Mach in (0,1), crossover in (10 000, 45 000) ft).
void validate(const AircraftConfig &cfg);

/// Crossover altitude of the schedule flown in `phase`.
double crossover_ft(const AircraftConfig &cfg, Phase phase);

double climb_thrust_n(const AircraftConfig &cfg, double h_ft, double tas_kt);
double drag_n(const AircraftConfig &cfg, double h_ft, double tas_kt);

/// Energy share factor. DomainError unless 0 < mach < 1.
double esf(double mach, EsfBranch branch);

/// Rate of climb/descent in ft/min.
double rocd(const AircraftConfig &cfg, double h_ft, double tas_kt,
            Phase phase, EsfBranch branch);

/// Speed flown by the schedule at an altitude, with the matching ESF branch.
struct ScheduledSpeed {
    double tas_kt;
    EsfBranch branch;
};
ScheduledSpeed scheduled_speed(const SpeedSchedule &schedule,
                               double crossover_ft, double h_ft);

/// RK4 integration of dh/dt = rocd along the speed schedule, one blip per
/// `dt`. The first blip that reaches `h_target_ft` is clamped onto the
/// target (TAS/ROCD interpolated to the crossing fraction) and ends the
/// trajectory. DivergenceError when ROCD points the wrong way for more than
/// ten consecutive steps.
Trajectory integrate_trajectory(const AircraftConfig &cfg, double h0_ft,
                                double h_target_ft, Phase phase,
                                double dt = kBlipInterval);

/// Upper end of the reference emulation span: the tropopause or 5 000 ft
/// above the crossover, whichever is higher.
double emulation_ceiling_ft(const AircraftConfig &cfg, Phase phase);

/// Reference span (FL210 <-> emulation ceiling) integrated for `phase`.
Trajectory reference_trajectory(const AircraftConfig &cfg, Phase phase,
                                double dt = kBlipInterval);

/// Open synthetic stand-ins for a mixed fleet: five jets from light to heavy
/// and two turboprops (one with a thrust breakpoint near FL230).
std::vector<AircraftConfig> synth_fleet();

/// Looks up a fleet member by type code; ConfigError when absent.
const AircraftConfig &find_config(const std::vector<AircraftConfig> &fleet,
                                  const std::string &type_code);

} // namespace adaptp::perf
