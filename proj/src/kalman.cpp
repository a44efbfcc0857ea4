// Kalman - constant-rate Kalman filter trajectory predictor (KF-TP)
// Part of adaptp - adaptive climb/descent trajectory prediction

#include "adaptp/kalman.hpp"

#include <cmath>

#include "adaptp/errors.hpp"

namespace adaptp::kalman {

KfConfig KfConfig::for_phase(Phase phase) {
    KfConfig cfg;
    cfg.alpha_b = phase == Phase::Climb ? 500.0 : -1500.0;
    return cfg;
}

void KfConfig::validate() const {
    if (!(alpha_p > 0.0 && alpha_q > 0.0)) {
        throw ConfigError("alpha_p and alpha_q must be positive");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("Kalman step must be positive");
    }
    if (Eigen::LLT<Eigen::Matrix3d>(R).info() != Eigen::Success) {
        throw ConfigError("measurement covariance must be positive definite");
    }
}

KfState kf_init(const Eigen::Vector3d &y, const KfConfig &cfg) {
    return {y, cfg.alpha_p * Eigen::Matrix3d::Identity()};
}

KfState kf_predict(const KfState &s, const KfConfig &cfg) {
    Eigen::Matrix3d f = Eigen::Matrix3d::Identity();
    f(kAltitude, kRocd) = cfg.dt / 60.0;
    KfState out;
    out.x = f * s.x;
    out.x(cfg.forcing_slot) += cfg.alpha_b * cfg.dt / 60.0;
    out.P = f * s.P * f.transpose() +
            cfg.alpha_q * Eigen::Matrix3d::Identity();
    out.P = 0.5 * (out.P + out.P.transpose());
    return out;
}

KfState kf_update(const KfState &s, const Eigen::Vector3d &y,
                  const KfConfig &cfg) {
    const Eigen::Matrix3d innovation_cov = s.P + cfg.R;
    Eigen::LLT<Eigen::Matrix3d> llt(innovation_cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("innovation covariance not positive definite");
    }
    // K = P S^-1, computed as (S^-1 P)' since both are symmetric.
    const Eigen::Matrix3d gain = llt.solve(s.P).transpose();
    const Eigen::Matrix3d i_minus_k = Eigen::Matrix3d::Identity() - gain;
    KfState out;
    out.x = s.x + gain * (y - s.x);
    out.P = i_minus_k * s.P * i_minus_k.transpose() +
            gain * cfg.R * gain.transpose();
    out.P = 0.5 * (out.P + out.P.transpose());
    return out;
}

KfPrediction kf_tp(const KfState &s, double h_target_ft) {
    KfPrediction p;
    const double rocd = s.x(kRocd);
    const double to_go = h_target_ft - s.x(kAltitude);
    if (std::abs(rocd) < kMinRocdFtMin || to_go * rocd < 0.0) {
        p.failed = true;
        return p;
    }
    p.time_s = to_go / rocd * 60.0;
    p.distance_nmi = s.x(kTas) * p.time_s / 3600.0;
    return p;
}

Eigen::Vector3d measurement(const Blip &b) {
    return {b.rocd_ftmin, b.tas_kt, b.h_ft};
}

} // namespace adaptp::kalman
