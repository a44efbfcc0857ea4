// Fitting - LSSM system identification and prior construction
// Part of adaptp - adaptive climb/descent trajectory prediction

#include <cmath>
#include <limits>
#include <random>

#include "adaptp/optimizer.hpp"
#include "adaptp/parallel.hpp"

namespace adaptp::opt {

using lssm::Lssm;
using lssm::ScalingMatrix;
using lssm::StateVec;

namespace {

// The search runs in L-scaled coordinates z = L^-1 x, on the deviation of
// the scaled transition matrix from identity. Every coordinate is then a
// per-step change of order 1e-3, which suits the per-coordinate simplex.
Eigen::VectorXd to_search(const Lssm &m, const ScalingMatrix &s) {
    Eigen::VectorXd p(6);
    p << m.phi_a(0, 0) - 1.0, m.phi_a(0, 1) * s.tas_kt / s.h_ft,
        m.phi_a(1, 0) * s.h_ft / s.tas_kt, m.phi_a(1, 1) - 1.0,
        m.phi_b(0) / s.h_ft, m.phi_b(1) / s.tas_kt;
    return p;
}

Lssm from_search(const Eigen::VectorXd &p, const ScalingMatrix &s,
                 double dt) {
    Lssm m;
    m.dt = dt;
    m.phi_a << p(0) + 1.0, p(1) * s.h_ft / s.tas_kt,
        p(2) * s.tas_kt / s.h_ft, p(3) + 1.0;
    m.phi_b << p(4) * s.h_ft, p(5) * s.tas_kt;
    return m;
}

bool rollout_finite(const Lssm &m, std::span<const StateVec> states) {
    StateVec x = states.front();
    for (std::size_t i = 1; i < states.size(); ++i) {
        x = m.step(x);
        if (!x.finite()) return false;
    }
    return true;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Lssm warm_start(std::span<const StateVec> states, const ScalingMatrix &scale) {
    if (states.size() < 3) {
        throw DegenerateInputError("warm start needs at least three states");
    }
    const auto n = static_cast<Eigen::Index>(states.size() - 1);
    Eigen::MatrixXd z(n, 2);
    Eigen::MatrixXd dz(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto &a = states[static_cast<std::size_t>(i)];
        const auto &b = states[static_cast<std::size_t>(i) + 1];
        z.row(i) << a.h_ft / scale.h_ft, a.tas_kt / scale.tas_kt;
        dz.row(i) << (b.h_ft - a.h_ft) / scale.h_ft,
            (b.tas_kt - a.tas_kt) / scale.tas_kt;
    }
    const Eigen::RowVector2d mean = z.colwise().mean();
    const Eigen::MatrixXd centered = z.rowwise() - mean;
    // Minimum-norm solution: along a single segment h and TAS are nearly
    // collinear, so the regression is often rank deficient.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(centered);
    cod.setThreshold(1e-6);
    const Eigen::Matrix2d g = cod.solve(dz).transpose();

    Eigen::Matrix2d phi_s = Eigen::Matrix2d::Identity() + g;
    Eigen::Vector2d b_s = Eigen::Vector2d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Vector2d zi = z.row(i).transpose();
        const Eigen::Vector2d zn = zi + dz.row(i).transpose();
        b_s += zn - phi_s * zi;
    }
    b_s /= static_cast<double>(n);

    Lssm m;
    m.phi_a << phi_s(0, 0), phi_s(0, 1) * scale.h_ft / scale.tas_kt,
        phi_s(1, 0) * scale.tas_kt / scale.h_ft, phi_s(1, 1);
    m.phi_b << b_s(0) * scale.h_ft, b_s(1) * scale.tas_kt;

    // Fall back to constant-rate motion when the regression rolls out worse.
    Lssm constant_rate;
    constant_rate.phi_b
        << (states.back().h_ft - states.front().h_ft) / static_cast<double>(n),
        (states.back().tas_kt - states.front().tas_kt) / static_cast<double>(n);
    if (!(lssm::fit_cost(m, states, scale) <=
          lssm::fit_cost(constant_rate, states, scale))) {
        return constant_rate;
    }
    return m;
}

FitResult fit_states(std::span<const StateVec> states, const Lssm &init,
                     const ScalingMatrix &scale, const SimplexConfig &cfg,
                     std::uint64_t seed, const std::string &trajectory_id,
                     double ridge) {
    cfg.validate();
    if (!(ridge >= 0.0)) throw ConfigError("ridge weight must be non-negative");
    if (states.size() < 2) {
        throw FitFailureError("fit needs at least two states", trajectory_id);
    }
    const double dt = init.dt;
    const double penalty_weight = ridge * static_cast<double>(states.size() - 1);
    auto objective = [&](const Eigen::VectorXd &p) {
        return lssm::fit_cost(from_search(p, scale, dt), states, scale) +
               penalty_weight * p.head<4>().squaredNorm();
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto jitter = [&](const Eigen::VectorXd &p) {
        Eigen::VectorXd q = p;
        for (int i = 0; i < 4; ++i) q(i) += 0.01 * normal(rng);
        for (int i = 4; i < 6; ++i) q(i) += 0.1 * std::abs(p(i)) * normal(rng);
        return q;
    };

    Eigen::VectorXd best_p = to_search(init, scale);
    double best_cost = objective(best_p);
    int iterations = 0;
    bool have_start = std::isfinite(best_cost);

    for (int run = 0; run <= cfg.restarts; ++run) {
        Eigen::VectorXd start = best_p;
        if (run > 0 || !have_start) {
            start = jitter(best_p);
            if (!std::isfinite(objective(start))) continue;
        }
        const NelderMeadResult r = nelder_mead(objective, start, cfg);
        iterations += r.iterations;
        if (!have_start || r.f < best_cost) {
            best_cost = r.f;
            best_p = r.x;
            have_start = true;
        }
    }
    if (!have_start || !std::isfinite(best_cost)) {
        throw FitFailureError("no restart produced a finite rollout",
                              trajectory_id);
    }
    const Lssm model = from_search(best_p, scale, dt);
    return {model, lssm::fit_cost(model, states, scale), iterations};
}

FitResult fit_trajectory(const Trajectory &traj, const Lssm &init,
                         const ScalingMatrix &scale, const SimplexConfig &cfg,
                         std::uint64_t seed, double ridge) {
    if (traj.blips.size() < 10) {
        throw FitFailureError("trajectory needs at least 10 blips", traj.id);
    }
    // Cadence check via the cost function's own validation.
    (void)lssm::fit_cost(init, traj, scale);
    const std::vector<StateVec> states = lssm::states_of(traj);
    return fit_states(states, init, scale, cfg, seed, traj.id, ridge);
}

std::vector<Lssm> PriorSet::group(const std::string &aircraft_type,
                                  Phase phase) const {
    std::vector<Lssm> out;
    for (const PriorEntry &e : entries) {
        if (e.aircraft_type == aircraft_type && e.phase == phase) {
            out.push_back(e.model);
        }
    }
    return out;
}

std::map<std::pair<std::string, Phase>, std::size_t> PriorSet::counts() const {
    std::map<std::pair<std::string, Phase>, std::size_t> out;
    for (const PriorEntry &e : entries) {
        ++out[{e.aircraft_type, e.phase}];
    }
    return out;
}

namespace {

struct Segment {
    std::string name;
    std::vector<StateVec> states;
};

std::vector<Segment> segments_of(const Trajectory &traj,
                                 const BuildPriorOptions &options) {
    std::vector<StateVec> all = lssm::states_of(traj);
    const auto it = options.crossovers.find({traj.aircraft_type, traj.phase});
    if (it == options.crossovers.end()) {
        return {{"full", std::move(all)}};
    }
    Segment below{"below", {}};
    Segment above{"above", {}};
    for (const StateVec &s : all) {
        (s.h_ft < it->second ? below : above).states.push_back(s);
    }
    std::vector<Segment> out;
    for (Segment *seg : {&below, &above}) {
        if (seg->states.size() >= options.min_segment_blips) {
            out.push_back(std::move(*seg));
        }
    }
    if (out.empty()) {
        out.push_back({"full", std::move(all)});
    }
    return out;
}

struct TrajectoryFits {
    std::vector<PriorEntry> entries;
    std::vector<FitLogRow> log;
};

} // namespace

PriorBuild build_prior(const std::vector<Trajectory> &dataset,
                       const BuildPriorOptions &options) {
    if (dataset.empty()) {
        throw EmptyPriorError("cannot build a prior from an empty dataset");
    }
    options.simplex.validate();
    std::vector<TrajectoryFits> fits(dataset.size());

    parallel_for(
        dataset.size(),
        [&](std::size_t i) {
            const Trajectory &traj = dataset[i];
            TrajectoryFits &out = fits[i];
            if (traj.blips.size() < options.min_segment_blips) {
                out.log.push_back({traj.id, "full", 0, 0.0, "skipped"});
                return;
            }
            for (const Segment &seg : segments_of(traj, options)) {
                const std::uint64_t seed =
                    derive_seed(options.seed, traj.id + "/" + seg.name);
                try {
                    const Lssm init = warm_start(seg.states, options.scale);
                    FitResult r = fit_states(seg.states, init, options.scale,
                                             options.simplex, seed, traj.id,
                                             options.ridge);
                    if (!rollout_finite(r.model, seg.states)) {
                        throw FitFailureError("non-finite rollout", traj.id);
                    }
                    out.entries.push_back({r.model, traj.aircraft_type,
                                           traj.phase, seg.name, traj.id,
                                           r.cost});
                    out.log.push_back(
                        {traj.id, seg.name, r.iterations, r.cost, "ok"});
                } catch (const Error &) {
                    out.log.push_back(
                        {traj.id, seg.name, 0,
                         std::numeric_limits<double>::infinity(), "failed"});
                }
            }
        },
        options.threads);

    PriorBuild build;
    for (TrajectoryFits &f : fits) {
        for (PriorEntry &e : f.entries) {
            build.prior.entries.push_back(std::move(e));
        }
        for (FitLogRow &row : f.log) {
            build.log.push_back(std::move(row));
        }
    }
    if (build.prior.empty()) {
        throw EmptyPriorError("no trajectory could be fitted");
    }
    return build;
}

} // namespace adaptp::opt
