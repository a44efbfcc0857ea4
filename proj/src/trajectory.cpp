// Trajectory - radar blip and trajectory data model
// Part of adaptp - adaptive climb/descent trajectory prediction

#include "adaptp/trajectory.hpp"

#include <cmath>
#include <string>

#include "adaptp/errors.hpp"

namespace adaptp {

std::string_view to_string(Phase phase) {
    return phase == Phase::Climb ? "climb" : "descent";
}

Phase parse_phase(std::string_view text) {
    if (text == "climb") return Phase::Climb;
    if (text == "descent") return Phase::Descent;
    throw FormatError("unknown phase '" + std::string(text) + "'");
}

void validate(const Trajectory &traj, double dt) {
    auto fail = [&](const std::string &msg) {
        throw FormatError("trajectory '" + traj.id + "': " + msg);
    };
    const auto &b = traj.blips;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!std::isfinite(b[i].t_s) || !std::isfinite(b[i].h_ft) ||
            !std::isfinite(b[i].tas_kt) || !std::isfinite(b[i].rocd_ftmin)) {
            fail("non-finite blip at index " + std::to_string(i));
        }
        if (i == 0) continue;
        const double gap = b[i].t_s - b[i - 1].t_s;
        if (!(gap > 0.0)) {
            fail("time not strictly increasing at blip " + std::to_string(i));
        }
        if (std::abs(gap - dt) > 1e-6) {
            fail("cadence violation at blip " + std::to_string(i) + " (gap " +
                 std::to_string(gap) + " s)");
        }
    }
    if (b.size() >= 2) {
        const double net = b.back().h_ft - b.front().h_ft;
        if (net * phase_sign(traj.phase) <= 0.0) {
            fail("phase '" + std::string(to_string(traj.phase)) +
                 "' inconsistent with net altitude change");
        }
    }
}

} // namespace adaptp
