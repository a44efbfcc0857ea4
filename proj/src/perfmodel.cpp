// Performance Model - open total-energy climb/descent model
// Part of adaptp - adaptive climb/descent trajectory prediction

#include "adaptp/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adaptp/atmosphere.hpp"
#include "adaptp/errors.hpp"
#include "adaptp/units.hpp"

namespace adaptp::perf {

namespace atm = adaptp::atmosphere;

void validate(const AircraftConfig &cfg) {
    auto fail = [&](const std::string &msg) {
        throw ConfigError("aircraft config '" + cfg.type_code + "': " + msg);
    };
    if (!(cfg.mass_kg > 0.0)) fail("mass must be positive");
    if (!(cfg.g0 > 0.0)) fail("g0 must be positive");
    if (!(cfg.drag.cd0 >= 0.0 && cfg.drag.cd2 >= 0.0)) {
        fail("drag coefficients must be non-negative");
    }
    if (!(cfg.drag.wing_area_m2 > 0.0)) fail("wing area must be positive");
    if (!(cfg.descent_thrust_fraction > 0.0 &&
          cfg.descent_thrust_fraction < 1.0)) {
        fail("descent thrust fraction must lie in (0, 1)");
    }
    for (Phase phase : {Phase::Climb, Phase::Descent}) {
        const SpeedSchedule &s = cfg.schedule(phase);
        if (!(s.mach > 0.0 && s.mach < 1.0)) fail("Mach must lie in (0, 1)");
        if (!(s.cas_kt > 0.0)) fail("CAS must be positive");
        double xover = 0.0;
        try {
            xover = atm::crossover_altitude(s.cas_kt, s.mach);
        } catch (const NotFoundError &) {
            fail("speed schedule has no crossover");
        }
        if (!(xover > 10000.0 && xover < 45000.0)) {
            fail("crossover altitude " + std::to_string(xover) +
                 " ft outside (10000, 45000)");
        }
    }
}

double crossover_ft(const AircraftConfig &cfg, Phase phase) {
    const SpeedSchedule &s = cfg.schedule(phase);
    return atm::crossover_altitude(s.cas_kt, s.mach);
}

double climb_thrust_n(const AircraftConfig &cfg, double h_ft, double tas_kt) {
    const ThrustCoeffs &c = cfg.thrust;
    double thrust = 0.0;
    if (cfg.engine == EngineType::Jet) {
        thrust = c.c1 * (1.0 - h_ft / c.c2 + c.c3 * h_ft * h_ft);
    } else {
        thrust = c.c1 / tas_kt * (1.0 - h_ft / c.c2) + c.c3;
    }
    if (c.break_ft > 0.0 && h_ft > c.break_ft) {
        thrust *= c.break_factor;
    }
    return thrust;
}

double drag_n(const AircraftConfig &cfg, double h_ft, double tas_kt) {
    const double rho = atm::isa_at(h_ft).density_kgm3;
    const double v = tas_kt * units::kKtToMps;
    const double qs = 0.5 * rho * v * v * cfg.drag.wing_area_m2;
    const double cl = cfg.mass_kg * cfg.g0 / qs;
    const double cd = cfg.drag.cd0 + cfg.drag.cd2 * cl * cl;
    return qs * cd;
}

double esf(double mach, EsfBranch branch) {
    if (!(mach > 0.0 && mach < 1.0)) {
        throw DomainError("ESF needs 0 < Mach < 1");
    }
    constexpr double kappa = atm::kGamma;
    constexpr double lapse_term =
        kappa * atm::kR * atm::kLapse / (2.0 * atm::kG0);
    const double m2 = mach * mach;
    const double phi = 1.0 + (kappa - 1.0) / 2.0 * m2;
    const double cas_term = std::pow(phi, -1.0 / (kappa - 1.0)) *
                            (std::pow(phi, kappa / (kappa - 1.0)) - 1.0);
    switch (branch) {
    case EsfBranch::ConstMachAboveTrop:
        return 1.0;
    case EsfBranch::ConstMachBelowTrop:
        return 1.0 / (1.0 + lapse_term * m2);
    case EsfBranch::ConstCasBelowTrop:
        return 1.0 / (1.0 + lapse_term * m2 + cas_term);
    case EsfBranch::ConstCasAboveTrop:
        return 1.0 / (1.0 + cas_term);
    }
    return 1.0;
}

double rocd(const AircraftConfig &cfg, double h_ft, double tas_kt,
            Phase phase, EsfBranch branch) {
    if (!(tas_kt > 0.0)) {
        throw DomainError("TAS must be positive");
    }
    double thrust = climb_thrust_n(cfg, h_ft, tas_kt);
    if (phase == Phase::Descent) {
        thrust *= cfg.descent_thrust_fraction;
    }
    const double drag = drag_n(cfg, h_ft, tas_kt);
    const double v = tas_kt * units::kKtToMps;
    const double mach = atm::mach_from_tas(tas_kt, h_ft);
    const double climb_mps =
        (thrust - drag) * v / (cfg.mass_kg * cfg.g0) * esf(mach, branch);
    return climb_mps * units::kMpsToFtPerMin;
}

ScheduledSpeed scheduled_speed(const SpeedSchedule &schedule,
                               double crossover, double h_ft) {
    const bool above_trop = h_ft > atm::kTropopauseFt;
    if (h_ft < crossover) {
        return {atm::tas_from_cas(schedule.cas_kt, h_ft),
                above_trop ? EsfBranch::ConstCasAboveTrop
                           : EsfBranch::ConstCasBelowTrop};
    }
    return {atm::tas_from_mach(schedule.mach, h_ft),
            above_trop ? EsfBranch::ConstMachAboveTrop
                       : EsfBranch::ConstMachBelowTrop};
}

Trajectory integrate_trajectory(const AircraftConfig &cfg, double h0_ft,
                                double h_target_ft, Phase phase, double dt) {
    if (h0_ft == h_target_ft) {
        throw DomainError("integration needs h0 != h_target");
    }
    if (!(dt > 0.0)) {
        throw DomainError("integration step must be positive");
    }
    if ((h_target_ft > h0_ft) != (phase == Phase::Climb)) {
        throw DomainError("target altitude inconsistent with phase");
    }
    const SpeedSchedule &schedule = cfg.schedule(phase);
    const double xover = atm::crossover_altitude(schedule.cas_kt, schedule.mach);
    const double sign = phase_sign(phase);

    struct Point {
        double tas;
        double rocd;
    };
    auto evaluate = [&](double h) {
        const ScheduledSpeed s = scheduled_speed(schedule, xover, h);
        return Point{s.tas_kt, rocd(cfg, h, s.tas_kt, phase, s.branch)};
    };
    // dh/dt in ft/s
    auto slope = [&](double h) { return evaluate(h).rocd / 60.0; };

    Trajectory traj;
    traj.aircraft_type = cfg.type_code;
    traj.phase = phase;
    traj.h_target_ft = h_target_ft;

    double h = h0_ft;
    Point here = evaluate(h);
    traj.blips.push_back({0.0, h, here.tas, here.rocd});

    constexpr long kMaxSteps = 100000;
    int wrong_way = 0;
    for (long step = 1; step <= kMaxSteps; ++step) {
        const double k1 = here.rocd / 60.0;
        const double k2 = slope(h + 0.5 * dt * k1);
        const double k3 = slope(h + 0.5 * dt * k2);
        const double k4 = slope(h + dt * k3);
        const double h_next = h + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t = static_cast<double>(step) * dt;

        if (target_reached(phase, h_next, h_target_ft)) {
            const double frac = (h_target_ft - h) / (h_next - h);
            const Point next = evaluate(h_next);
            const Point at_target = evaluate(h_target_ft);
            traj.blips.push_back(
                {t, h_target_ft, at_target.tas,
                 here.rocd + frac * (next.rocd - here.rocd)});
            return traj;
        }

        h = h_next;
        here = evaluate(h);
        traj.blips.push_back({t, h, here.tas, here.rocd});

        wrong_way = sign * here.rocd > 0.0 ? 0 : wrong_way + 1;
        if (wrong_way > 10) {
            throw DivergenceError("config '" + cfg.type_code +
                                  "' cannot sustain the " +
                                  std::string(to_string(phase)) + " at " +
                                  std::to_string(h) + " ft");
        }
    }
    throw DivergenceError("integration did not reach target altitude");
}

double emulation_ceiling_ft(const AircraftConfig &cfg, Phase phase) {
    return std::max(atm::kTropopauseFt, crossover_ft(cfg, phase) + 5000.0);
}

Trajectory reference_trajectory(const AircraftConfig &cfg, Phase phase,
                                double dt) {
    constexpr double kFl210 = 21000.0;
    const double top = emulation_ceiling_ft(cfg, phase);
    return phase == Phase::Climb
               ? integrate_trajectory(cfg, kFl210, top, phase, dt)
               : integrate_trajectory(cfg, top, kFl210, phase, dt);
}

const AircraftConfig &find_config(const std::vector<AircraftConfig> &fleet,
                                  const std::string &type_code) {
    auto it = std::find_if(fleet.begin(), fleet.end(), [&](const auto &c) {
        return c.type_code == type_code;
    });
    if (it == fleet.end()) {
        throw ConfigError("no aircraft config for type '" + type_code + "'");
    }
    return *it;
}

} // namespace adaptp::perf
