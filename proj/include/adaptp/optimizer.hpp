// Optimizer - Nelder-Mead simplex and LSSM system identification
// Part of adaptp - adaptive climb/descent trajectory prediction
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "adaptp/errors.hpp"
#include "adaptp/lssm.hpp"
#include "adaptp/trajectory.hpp"

namespace adaptp::opt {

// =============================================================================
// Nelder-Mead
// =============================================================================

struct SimplexConfig {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    int max_iters = 2000;
    double f_tol = 1e-15; ///< stop when f(worst) - f(best) <= f_tol
    double x_tol = 1e-10; ///< stop when every vertex is within x_tol of best
    int restarts = 3;

    /// ConfigError unless expansion > reflection > contraction > 0 and
    /// 0 < shrink < 1.
    void validate() const;
};

enum class StopReason { FTol, XTol, MaxIters };

struct NelderMeadResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    StopReason reason = StopReason::MaxIters;
    /// Best-vertex cost after setup (index 0) and after every iteration.
    std::vector<double> best_history;
};

using Objective = std::function<double(const Eigen::VectorXd &)>;

/// Minimizes `f` from `x0`. Initial simplex perturbs each coordinate by 5%
/// (at least 1e-4). Non-finite evaluations during the search count as +inf;
/// a non-finite f(x0) is a ConfigError.
NelderMeadResult nelder_mead(const Objective &f, const Eigen::VectorXd &x0,
                             const SimplexConfig &cfg = {});

// =============================================================================
// System identification
// =============================================================================

/// Affine least-squares one-step regression of successive states, used as
/// the starting point when fitting recorded (non-rollout) trajectories.
lssm::Lssm warm_start(std::span<const lssm::StateVec> states,
                      const lssm::ScalingMatrix &scale = {});

struct FitResult {
    lssm::Lssm model;
    double cost = 0.0;
    int iterations = 0;
};

/// Minimizes the rollout fit cost over theta from `init`, followed by
/// `cfg.restarts` jittered restarts from the incumbent. Returns the best
/// model; its objective never exceeds the one at `init`. FitFailureError
/// when no start yields a finite rollout.
///
/// `ridge` > 0 adds ridge * (n - 1) * |Phi_A' - I|^2 on the L-scaled
/// transition matrix Phi_A'. Along one segment h and TAS are nearly
/// collinear, so the plain cost has a flat valley of models that match the
/// segment but extrapolate very differently; the penalty picks the one
/// closest to pure forcing. FitResult::cost is always the plain cost.
FitResult fit_states(std::span<const lssm::StateVec> states,
                     const lssm::Lssm &init, const lssm::ScalingMatrix &scale,
                     const SimplexConfig &cfg, std::uint64_t seed,
                     const std::string &trajectory_id = {},
                     double ridge = 0.0);

/// fit_states on a trajectory of at least 10 blips.
FitResult fit_trajectory(const Trajectory &traj, const lssm::Lssm &init,
                         const lssm::ScalingMatrix &scale,
                         const SimplexConfig &cfg, std::uint64_t seed = 0,
                         double ridge = 0.0);

// =============================================================================
// Prior set
// =============================================================================

struct PriorEntry {
    lssm::Lssm model;
    std::string aircraft_type;
    Phase phase = Phase::Climb;
    std::string segment; ///< "below", "above" or "full"
    std::string source_id;
    double final_cost = 0.0;
};

class PriorSet {
  public:
    std::vector<PriorEntry> entries;

    /// Models for one (type, phase) group, in entry order.
    std::vector<lssm::Lssm> group(const std::string &aircraft_type,
                                  Phase phase) const;
    /// Entry counts keyed by (type, phase).
    std::map<std::pair<std::string, Phase>, std::size_t> counts() const;
    bool empty() const { return entries.empty(); }
};

class EmptyPriorError : public Error {
  public:
    using Error::Error;
};

struct FitLogRow {
    std::string trajectory_id;
    std::string segment;
    int iterations = 0;
    double final_cost = 0.0;
    std::string status; ///< "ok", "failed" or "skipped"
};

/// Crossover altitude per (type, phase), used to split fits into
/// below/above-transition segments.
using CrossoverTable = std::map<std::pair<std::string, Phase>, double>;

struct BuildPriorOptions {
    SimplexConfig simplex;
    lssm::ScalingMatrix scale;
    CrossoverTable crossovers;
    std::uint64_t seed = 0;
    std::size_t min_segment_blips = 10;
    /// Ridge weight passed to fit_states for recorded trajectories.
    double ridge = 0.1;
    unsigned threads = 0; ///< 0 = hardware concurrency
};

struct PriorBuild {
    PriorSet prior;
    std::vector<FitLogRow> log; ///< one row per attempted fit, input order
};

/// Fits every trajectory (split at the crossover when the type/phase is in
/// `crossovers`), keeping successful fits. Trajectory fits are independent
/// and merged in input order; the result depends only on the inputs and
/// seed. EmptyPriorError when nothing could be fitted.
PriorBuild build_prior(const std::vector<Trajectory> &dataset,
                       const BuildPriorOptions &options = {});

/// Line-oriented prior file: one LSSM record per line tagged with type,
/// phase, segment, source id and final cost. FormatError on bad input.
void write_prior(const std::string &path, const PriorSet &prior);
PriorSet read_prior(const std::string &path);

/// Stable 64-bit mix of a seed and a string key (FNV-1a + splitmix).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

} // namespace adaptp::opt
