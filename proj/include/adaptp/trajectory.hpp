// Trajectory - radar blip and trajectory data model
// Part of adaptp - adaptive climb/descent trajectory prediction
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace adaptp {

/// Fixed radar refresh interval (s).
inline constexpr double kBlipInterval = 6.0;

enum class Phase { Climb, Descent };

std::string_view to_string(Phase phase);
/// Parses "climb" / "descent"; throws FormatError otherwise.
Phase parse_phase(std::string_view text);

/// +1 for climb, -1 for descent.
constexpr double phase_sign(Phase phase) {
    return phase == Phase::Climb ? 1.0 : -1.0;
}

/// True once `h_ft` is at or beyond `h_target_ft` in the direction of travel.
constexpr bool target_reached(Phase phase, double h_ft, double h_target_ft) {
    return phase == Phase::Climb ? h_ft >= h_target_ft : h_ft <= h_target_ft;
}

struct Blip {
    double t_s = 0.0;
    double h_ft = 0.0;
    double tas_kt = 0.0;
    double rocd_ftmin = 0.0;

    friend bool operator==(const Blip &, const Blip &) = default;
};

struct Trajectory {
    std::string id;
    std::string aircraft_type;
    Phase phase = Phase::Climb;
    std::string day_tag;
    double h_target_ft = 0.0;
    std::vector<Blip> blips;

    friend bool operator==(const Trajectory &, const Trajectory &) = default;
};

/// Checks blip ordering, 6 s cadence and phase/altitude consistency.
/// Throws FormatError naming the trajectory id.
void validate(const Trajectory &traj, double dt = kBlipInterval);

} // namespace adaptp
