// LSSM - discrete-time linear state-space surrogate
// Part of adaptp - adaptive climb/descent trajectory prediction
//
// State x = [altitude ft, TAS kt]. One step of the surrogate is
//   x(t+1) = phi_a * x(t) + phi_b
// where phi_b is a constant per-step forcing. The six entries of
// (phi_a, phi_b) form the parameter vector theta.
#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "adaptp/trajectory.hpp"

namespace adaptp::lssm {

using Theta = Eigen::Matrix<double, 6, 1>;

struct StateVec {
    double h_ft = 0.0;
    double tas_kt = 0.0;

    Eigen::Vector2d vec() const { return {h_ft, tas_kt}; }
    static StateVec from(const Eigen::Vector2d &v) { return {v(0), v(1)}; }
    bool finite() const;

    friend bool operator==(const StateVec &, const StateVec &) = default;
};

/// Continuous dynamics xdot = A x + b (b absorbs the input term).
struct ContinuousLssm {
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
};

struct Lssm {
    Eigen::Matrix2d phi_a = Eigen::Matrix2d::Identity();
    Eigen::Vector2d phi_b = Eigen::Vector2d::Zero();
    double dt = kBlipInterval;

    /// Packs [a00, a01, a10, a11, b0, b1].
    Theta theta() const;
    static Lssm from_theta(const Theta &theta, double dt = kBlipInterval);

    StateVec step(const StateVec &x) const {
        return {phi_a(0, 0) * x.h_ft + phi_a(0, 1) * x.tas_kt + phi_b(0),
                phi_a(1, 0) * x.h_ft + phi_a(1, 1) * x.tas_kt + phi_b(1)};
    }
};

/// Diagonal residual scaling L (cost uses L^-2).
struct ScalingMatrix {
    double h_ft = 30000.0;
    double tas_kt = 400.0;
};

/// phi_a = exp(dt A) by scaling and squaring; phi_b = (phi_a - I) A^-1 b
/// when A is well conditioned, otherwise the integral series
/// dt * sum (dt A)^k / (k+1)! applied to b.
Lssm discretize(const ContinuousLssm &c, double dt);

/// [x0, x1, ..., xn]. OverflowError naming the first non-finite step.
std::vector<StateVec> rollout(const Lssm &m, const StateVec &x0, long n);

/// Sum over blips 2..n of the L-scaled squared residual between the free
/// rollout (seeded at the first blip, no teacher forcing) and the data.
/// Non-finite rollouts give +inf.
double fit_cost(const Lssm &m, std::span<const StateVec> observed,
                const ScalingMatrix &scale = {});
/// Same, on a trajectory; FormatError on cadence violation.
double fit_cost(const Lssm &m, const Trajectory &traj,
                const ScalingMatrix &scale = {});

/// (altitude, TAS) pairs of the blips.
std::vector<StateVec> states_of(const Trajectory &traj);

/// Root-mean-square rollout error of a model against observed states.
struct RolloutRmse {
    double h_ft;
    double tas_kt;
};
RolloutRmse rollout_rmse(const Lssm &m, std::span<const StateVec> observed);

/// Cubic least-squares fit TAS(z) = l1 z^3 + l2 z^2 + l3 z + l4 with
/// z = h / 30 000 ft. Diagnostic only.
struct CubicTasFit {
    double lambda1, lambda2, lambda3, lambda4;
    double rmse_kt;
};
CubicTasFit cubic_tas_fit(const Trajectory &traj);

/// Seven-number text record: six theta entries then dt.
std::string format_record(const Lssm &m);
Lssm parse_record(std::string_view text);

} // namespace adaptp::lssm
