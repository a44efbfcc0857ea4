// Fleet - open synthetic aircraft configurations
// Part of adaptp - adaptive climb/descent trajectory prediction

#include "adaptp/perfmodel.hpp"

namespace adaptp::perf {

std::vector<AircraftConfig> synth_fleet() {
    std::vector<AircraftConfig> fleet;

    AircraftConfig c;
    // Light business jet.
    c.type_code = "JL1";
    c.engine = EngineType::Jet;
    c.mass_kg = 7000.0;
    c.thrust = {30000.0, 45000.0, 1.0e-10};
    c.drag = {0.025, 0.045, 32.0};
    c.climb_schedule = {260.0, 0.70};
    c.descent_schedule = {270.0, 0.72};
    c.descent_thrust_fraction = 0.12;
    fleet.push_back(c);

    // Narrow-body twin (A320 class).
    c = {};
    c.type_code = "JM1";
    c.engine = EngineType::Jet;
    c.mass_kg = 64000.0;
    c.thrust = {141000.0, 47000.0, 1.0e-10};
    c.drag = {0.024, 0.0375, 122.6};
    c.climb_schedule = {300.0, 0.78};
    c.descent_schedule = {300.0, 0.78};
    c.descent_thrust_fraction = 0.10;
    fleet.push_back(c);

    // Narrow-body twin (B738 class).
    c = {};
    c.type_code = "JM2";
    c.engine = EngineType::Jet;
    c.mass_kg = 65300.0;
    c.thrust = {146000.0, 50000.0, 8.0e-11};
    c.drag = {0.0253, 0.0358, 124.6};
    c.climb_schedule = {290.0, 0.78};
    c.descent_schedule = {290.0, 0.78};
    c.descent_thrust_fraction = 0.10;
    fleet.push_back(c);

    // Regional jet (E190 class).
    c = {};
    c.type_code = "JR1";
    c.engine = EngineType::Jet;
    c.mass_kg = 43000.0;
    c.thrust = {100000.0, 47000.0, 1.0e-10};
    c.drag = {0.025, 0.041, 92.5};
    c.climb_schedule = {290.0, 0.76};
    c.descent_schedule = {290.0, 0.77};
    c.descent_thrust_fraction = 0.10;
    fleet.push_back(c);

    // Wide-body twin (B787 class).
    c = {};
    c.type_code = "JH1";
    c.engine = EngineType::Jet;
    c.mass_kg = 210000.0;
    c.thrust = {480000.0, 52000.0, 7.0e-11};
    c.drag = {0.019, 0.043, 377.0};
    c.climb_schedule = {310.0, 0.85};
    c.descent_schedule = {300.0, 0.85};
    c.descent_thrust_fraction = 0.08;
    fleet.push_back(c);

    // Regional twin turboprop (DH8D class).
    c = {};
    c.type_code = "TP1";
    c.engine = EngineType::Turboprop;
    c.mass_kg = 26000.0;
    c.thrust = {8.0e6, 150000.0, 4500.0};
    c.drag = {0.026, 0.035, 63.1};
    c.climb_schedule = {210.0, 0.56};
    c.descent_schedule = {230.0, 0.60};
    c.descent_thrust_fraction = 0.15;
    fleet.push_back(c);

    // Single turboprop (PC12 class) with a thrust step near FL230.
    c = {};
    c.type_code = "TP2";
    c.engine = EngineType::Turboprop;
    c.mass_kg = 4200.0;
    c.thrust = {1.4e6, 150000.0, 900.0, 23000.0, 0.85};
    c.drag = {0.025, 0.040, 25.8};
    c.climb_schedule = {160.0, 0.45};
    c.descent_schedule = {180.0, 0.48};
    c.descent_thrust_fraction = 0.15;
    fleet.push_back(c);

    return fleet;
}

} // namespace adaptp::perf
