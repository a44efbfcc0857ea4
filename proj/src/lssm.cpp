// LSSM - discrete-time linear state-space surrogate
// Part of adaptp - adaptive climb/descent trajectory prediction

#include "adaptp/lssm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "adaptp/errors.hpp"

namespace adaptp::lssm {

namespace {

// Taylor series of exp(x) for small ||x||.
Eigen::Matrix2d taylor_exp(const Eigen::Matrix2d &x) {
    Eigen::Matrix2d sum = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d term = Eigen::Matrix2d::Identity();
    for (int k = 1; k <= 30; ++k) {
        term = term * x / static_cast<double>(k);
        if (term.isZero(0.0)) break;
        sum += term;
        if (term.cwiseAbs().maxCoeff() <=
            1e-18 * sum.cwiseAbs().maxCoeff()) {
            break;
        }
    }
    return sum;
}

Eigen::Matrix2d expm(const Eigen::Matrix2d &x) {
    const double norm = x.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    Eigen::Matrix2d result = taylor_exp(x / std::ldexp(1.0, squarings));
    for (int i = 0; i < squarings; ++i) {
        result = result * result;
    }
    return result;
}

// dt * sum_k (dt A)^k / (k+1)!  ==  integral_0^dt exp(sA) ds
Eigen::Matrix2d integral_series(const Eigen::Matrix2d &a, double dt) {
    const Eigen::Matrix2d x = dt * a;
    Eigen::Matrix2d sum = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d term = Eigen::Matrix2d::Identity();
    for (int k = 1; k <= 500; ++k) {
        term = term * x / static_cast<double>(k + 1);
        if (term.isZero(0.0)) break;
        sum += term;
        if (term.cwiseAbs().maxCoeff() <=
            1e-18 * sum.cwiseAbs().maxCoeff()) {
            break;
        }
    }
    return dt * sum;
}

double condition_number(const Eigen::Matrix2d &a) {
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(a);
    const auto &s = svd.singularValues();
    if (s(1) == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / s(1);
}

} // namespace

bool StateVec::finite() const {
    return std::isfinite(h_ft) && std::isfinite(tas_kt);
}

Theta Lssm::theta() const {
    Theta t;
    t << phi_a(0, 0), phi_a(0, 1), phi_a(1, 0), phi_a(1, 1), phi_b(0),
        phi_b(1);
    return t;
}

Lssm Lssm::from_theta(const Theta &theta, double dt) {
    Lssm m;
    m.phi_a << theta(0), theta(1), theta(2), theta(3);
    m.phi_b << theta(4), theta(5);
    m.dt = dt;
    return m;
}

Lssm discretize(const ContinuousLssm &c, double dt) {
    if (!(dt > 0.0)) {
        throw DomainError("discretization step must be positive");
    }
    Lssm m;
    m.dt = dt;
    m.phi_a = expm(dt * c.a);
    if (condition_number(c.a) < 1e12) {
        m.phi_b = (m.phi_a - Eigen::Matrix2d::Identity()) *
                  c.a.partialPivLu().solve(c.b);
    } else {
        m.phi_b = integral_series(c.a, dt) * c.b;
    }
    return m;
}

std::vector<StateVec> rollout(const Lssm &m, const StateVec &x0, long n) {
    if (n < 1) {
        throw DomainError("rollout needs at least one step");
    }
    std::vector<StateVec> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back(x0);
    StateVec x = x0;
    for (long k = 1; k <= n; ++k) {
        x = m.step(x);
        if (!x.finite()) {
            throw OverflowError("rollout state non-finite at step " +
                                    std::to_string(k),
                                k);
        }
        out.push_back(x);
    }
    return out;
}

double fit_cost(const Lssm &m, std::span<const StateVec> observed,
                const ScalingMatrix &scale) {
    if (observed.size() < 2) {
        throw FormatError("fit cost needs at least two observations");
    }
    const double wh = 1.0 / (scale.h_ft * scale.h_ft);
    const double wv = 1.0 / (scale.tas_kt * scale.tas_kt);
    double cost = 0.0;
    StateVec x = observed[0];
    for (std::size_t i = 1; i < observed.size(); ++i) {
        x = m.step(x);
        const double dh = x.h_ft - observed[i].h_ft;
        const double dv = x.tas_kt - observed[i].tas_kt;
        cost += dh * dh * wh + dv * dv * wv;
    }
    return std::isfinite(cost) ? cost
                               : std::numeric_limits<double>::infinity();
}

double fit_cost(const Lssm &m, const Trajectory &traj,
                const ScalingMatrix &scale) {
    if (traj.blips.size() < 2) {
        throw FormatError("trajectory '" + traj.id +
                          "' needs at least two blips");
    }
    for (std::size_t i = 1; i < traj.blips.size(); ++i) {
        const double gap = traj.blips[i].t_s - traj.blips[i - 1].t_s;
        if (std::abs(gap - m.dt) > 1e-6) {
            throw FormatError("trajectory '" + traj.id +
                              "': cadence violation at blip " +
                              std::to_string(i));
        }
    }
    const std::vector<StateVec> states = states_of(traj);
    return fit_cost(m, states, scale);
}

std::vector<StateVec> states_of(const Trajectory &traj) {
    std::vector<StateVec> states;
    states.reserve(traj.blips.size());
    for (const Blip &b : traj.blips) {
        states.push_back({b.h_ft, b.tas_kt});
    }
    return states;
}

RolloutRmse rollout_rmse(const Lssm &m, std::span<const StateVec> observed) {
    if (observed.size() < 2) {
        throw FormatError("RMSE needs at least two observations");
    }
    double sh = 0.0;
    double sv = 0.0;
    StateVec x = observed[0];
    for (std::size_t i = 1; i < observed.size(); ++i) {
        x = m.step(x);
        const double dh = x.h_ft - observed[i].h_ft;
        const double dv = x.tas_kt - observed[i].tas_kt;
        sh += dh * dh;
        sv += dv * dv;
    }
    const double n = static_cast<double>(observed.size() - 1);
    return {std::sqrt(sh / n), std::sqrt(sv / n)};
}

CubicTasFit cubic_tas_fit(const Trajectory &traj) {
    const auto &blips = traj.blips;
    if (blips.size() < 8) {
        throw DegenerateInputError("cubic TAS fit needs at least 8 blips");
    }
    const auto [lo, hi] = std::minmax_element(
        blips.begin(), blips.end(),
        [](const Blip &a, const Blip &b) { return a.h_ft < b.h_ft; });
    if (hi->h_ft - lo->h_ft < 2000.0) {
        throw DegenerateInputError(
            "cubic TAS fit needs an altitude span of at least 2000 ft");
    }
    const auto n = static_cast<Eigen::Index>(blips.size());
    Eigen::MatrixXd design(n, 4);
    Eigen::VectorXd tas(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z = blips[static_cast<std::size_t>(i)].h_ft / 30000.0;
        design.row(i) << z * z * z, z * z, z, 1.0;
        tas(i) = blips[static_cast<std::size_t>(i)].tas_kt;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 4) {
        throw DegenerateInputError("cubic TAS fit design is rank deficient");
    }
    const Eigen::Vector4d coeffs = qr.solve(tas);
    const double rmse =
        std::sqrt((design * coeffs - tas).squaredNorm() / static_cast<double>(n));
    return {coeffs(0), coeffs(1), coeffs(2), coeffs(3), rmse};
}

std::string format_record(const Lssm &m) {
    const Theta t = m.theta();
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g",
                  t(0), t(1), t(2), t(3), t(4), t(5), m.dt);
    return buf;
}

Lssm parse_record(std::string_view text) {
    std::istringstream in{std::string(text)};
    Theta t;
    double dt = 0.0;
    for (int i = 0; i < 6; ++i) {
        if (!(in >> t(i))) {
            throw FormatError("LSSM record needs 7 numbers");
        }
    }
    if (!(in >> dt) || !(dt > 0.0)) {
        throw FormatError("LSSM record has invalid dt");
    }
    std::string extra;
    if (in >> extra) {
        throw FormatError("LSSM record has trailing data '" + extra + "'");
    }
    return Lssm::from_theta(t, dt);
}

} // namespace adaptp::lssm
