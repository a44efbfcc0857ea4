// Kalman - constant-rate Kalman filter trajectory predictor (KF-TP)
// Part of adaptp - adaptive climb/descent trajectory prediction
#pragma once

#include <Eigen/Dense>

#include "adaptp/trajectory.hpp"

namespace adaptp::kalman {

/// Index of each component in the state vector [rocd, tas, h].
enum Component : int { kRocd = 0, kTas = 1, kAltitude = 2 };

struct KfState {
    Eigen::Vector3d x = Eigen::Vector3d::Zero(); ///< [ft/min, kt, ft]
    Eigen::Matrix3d P = Eigen::Matrix3d::Identity();
};

struct KfConfig {
    double alpha_p = 1e5;
    double alpha_q = 1.0;
    /// Forcing in ft/min; applied per step as alpha_b * dt / 60. Positive
    /// in climbs and negative in descents by convention of the caller.
    double alpha_b = 500.0;
    /// Component receiving the forcing (altitude by default).
    Component forcing_slot = kAltitude;
    Eigen::Matrix3d R =
        Eigen::Vector3d(100.0 * 100.0, 2.5 * 2.5, 100.0 * 100.0).asDiagonal();
    double dt = kBlipInterval;

    /// Forcing defaults used for benchmarking: +500 ft/min climbing,
    /// -1500 ft/min descending.
    static KfConfig for_phase(Phase phase);
    /// ConfigError unless alpha_p, alpha_q > 0 and R positive definite.
    void validate() const;
};

/// x = y, P = alpha_p I.
KfState kf_init(const Eigen::Vector3d &y, const KfConfig &cfg);

/// h += rocd dt/60, forcing added to the configured slot, P = F P F' + Q.
KfState kf_predict(const KfState &s, const KfConfig &cfg);

/// Kalman update with H = I and Joseph-form covariance.
/// NumericalError if the innovation covariance is not positive definite.
KfState kf_update(const KfState &s, const Eigen::Vector3d &y,
                  const KfConfig &cfg);

/// Below this |ROCD| no trajectory is generated.
inline constexpr double kMinRocdFtMin = 500.0;

struct KfPrediction {
    bool failed = false;
    double time_s = 0.0;
    double distance_nmi = 0.0;
};

/// Constant-rate extrapolation to h_target at the filtered ROCD and TAS.
/// Fails when |rocd| < 500 ft/min or ROCD points away from the target.
KfPrediction kf_tp(const KfState &s, double h_target_ft);

/// Measurement vector [rocd, tas, h] of a blip.
Eigen::Vector3d measurement(const Blip &b);

} // namespace adaptp::kalman
