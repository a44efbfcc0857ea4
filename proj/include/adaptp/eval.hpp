// Eval - TOC/BOD metrics, method benchmark, sweeps and speedup timing
// Part of adaptp - adaptive climb/descent trajectory prediction
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adaptp/kalman.hpp"
#include "adaptp/lwpf.hpp"
#include "adaptp/optimizer.hpp"
#include "adaptp/perfmodel.hpp"
#include "adaptp/trajectory.hpp"

namespace adaptp::eval {

enum class Method { BadaT0, BadaReinit, KfTp, Lwpf };

inline constexpr Method kAllMethods[] = {Method::BadaT0, Method::BadaReinit,
                                         Method::KfTp, Method::Lwpf};

std::string_view to_string(Method method);
/// Accepts "bada_t0", "bada_reinit", "kf_tp" (or "kf-tp") and "lwpf".
Method parse_method(std::string_view text);

struct Truth {
    double time_s = 0.0;
    double distance_nmi = 0.0;
};

/// Time of the first blip at or beyond the target (interpolated between the
/// straddling blips) and the trapezoidal TAS integral up to it.
/// TruthUndefinedError when the target is never reached.
Truth truth_toc_bod(const Trajectory &traj);

/// Trapezoidal distance flown (nmi) from the first blip up to time t_s.
double distance_until(const Trajectory &traj, double t_s);

/// One scored (or failed) prediction made after a blip.
struct TpError {
    std::string trajectory_id;
    std::string aircraft_type;
    Phase phase = Phase::Climb;
    int blip = 0;
    double t_s = 0.0;
    double pred_time_s = 0.0;
    double pred_dist_nmi = 0.0;
    double true_time_s = 0.0;
    double true_dist_nmi = 0.0;
    double abs_time_err = 0.0;
    double abs_dist_err = 0.0;
    bool failed = false;
};

struct Aggregate {
    Method method = Method::Lwpf;
    Phase phase = Phase::Climb;
    std::string aircraft_type; ///< "ALL" for the phase-wide row
    double mae_time_s = 0.0;
    double mae_dist_nmi = 0.0;
    double failure_rate = 0.0;
    std::size_t n_points = 0; ///< scored predictions
    std::size_t n_failed = 0;
};

struct MethodResult {
    Method method = Method::Lwpf;
    std::vector<TpError> errors;      ///< sorted by (trajectory id, blip)
    std::vector<Aggregate> aggregates;
    std::vector<std::string> excluded; ///< trajectories without a defined truth
};

/// Per phase and type rows (plus an "ALL" row per phase), computed from the
/// stream in its stored order so the values can be recomputed exactly.
std::vector<Aggregate> aggregate(Method method, const std::vector<TpError> &errors);

/// Kalman predictor settings with a signed forcing per phase.
struct KfSettings {
    double alpha_p = 1e5;
    double alpha_q = 1.0;
    double alpha_b_climb = 500.0;
    double alpha_b_descent = -1500.0;
    kalman::Component forcing_slot = kalman::kAltitude;

    kalman::KfConfig config(Phase phase) const;
};

struct EvalContext {
    /// Nominal performance configurations (bada_* methods).
    std::vector<perf::AircraftConfig> fleet;
    /// Fitted prior (lwpf). Per (type, phase) groups; when a group is empty
    /// every model of the phase is used.
    opt::PriorSet prior;
    lwpf::FilterConfig filter;
    KfSettings kf;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// Replays every trajectory blip by blip and scores each method's
/// remaining time/distance prediction against the truth. Prediction
/// failures are recorded, never thrown. ConfigError on an empty test set.
MethodResult evaluate_method(Method method, const std::vector<Trajectory> &test,
                             const EvalContext &ctx);

/// Prior models of one trajectory's group (falling back to the phase).
std::vector<lssm::Theta> prior_for(const opt::PriorSet &prior,
                                   const std::string &aircraft_type, Phase phase);

// -----------------------------------------------------------------------------
// Sweeps
// -----------------------------------------------------------------------------

struct KfGrid {
    std::vector<double> alpha_p{1.0, 1e2, 1e3, 1e4, 1e5};
    std::vector<double> alpha_q{1e-4, 1e-2, 1.0};
    /// Forcing magnitudes in ft/min; descents use the negated value.
    std::vector<double> alpha_b{0.0, 500.0, 1000.0, 1500.0, 2000.0};
};

struct PhaseCells {
    double mae_time_s = 0.0;
    double mae_dist_nmi = 0.0;
    double failure_rate = 0.0;
    std::size_t n_points = 0;
};

struct KfSweepRow {
    double alpha_p = 0.0;
    double alpha_q = 0.0;
    double alpha_b = 0.0;
    std::string aircraft_type; ///< "ALL" for the pooled row
    PhaseCells climb;
    PhaseCells descent;
    bool best_climb = false;   ///< lowest pooled climb MAE time
    bool best_descent = false; ///< lowest pooled descent MAE time
};

/// One row per grid cell and type (plus "ALL"), climb and descent side by
/// side. ConfigError on an empty grid axis.
std::vector<KfSweepRow> sweep_kf(const std::vector<Trajectory> &val,
                                 const KfGrid &grid, const EvalContext &ctx);
std::string format_kf_sweep(const std::vector<KfSweepRow> &rows);

struct ParticleSweepRow {
    int n_particles = 0;
    std::string aircraft_type;
    Phase phase = Phase::Climb;
    PhaseCells cells;
};

inline const std::vector<int> kDefaultParticleCounts{50, 100, 200, 400, 800, 1600};

/// One row per count, type and phase. ConfigError on an empty count list.
std::vector<ParticleSweepRow> sweep_particles(const std::vector<Trajectory> &val,
                                              const std::vector<int> &counts,
                                              const EvalContext &ctx);
std::string format_particle_sweep(const std::vector<ParticleSweepRow> &rows);

// -----------------------------------------------------------------------------
// Surrogate speedup
// -----------------------------------------------------------------------------

struct BenchRow {
    std::string aircraft_type;
    Phase phase = Phase::Climb;
    double h0_ft = 0.0;
    double h_target_ft = 0.0;
    long steps = 0;
    double integrate_ms = 0.0; ///< median over repetitions
    double rollout_ms = 0.0;   ///< median over repetitions
    double ratio = 1.0;        ///< integrate / rollout (1 for empty spans)
};

/// Times integrate_trajectory against an LSSM rollout of the same step
/// count over [h0, h_target]. Each repetition runs both once after a
/// discarded warm-up; medians of `reps` repetitions are reported.
BenchRow bench_span(const perf::AircraftConfig &cfg, const lssm::Lssm &model,
                    Phase phase, double h0_ft, double h_target_ft, int reps);

/// Surrogate per (type, phase) fitted on the FL210 <-> ceiling reference.
using SurrogateTable = std::map<std::pair<std::string, Phase>, lssm::Lssm>;
SurrogateTable fit_reference_surrogates(const std::vector<perf::AircraftConfig> &fleet,
                                        const opt::SimplexConfig &simplex,
                                        std::uint64_t seed, unsigned threads = 0);

/// FL210 <-> FL350 spans for every config and phase present in
/// `surrogates`. ConfigError when a config has no surrogate.
std::vector<BenchRow> bench_speedup(const std::vector<perf::AircraftConfig> &fleet,
                                    const SurrogateTable &surrogates, int reps);
double mean_ratio(const std::vector<BenchRow> &rows);
std::string format_bench(const std::vector<BenchRow> &rows);

// -----------------------------------------------------------------------------
// CSV output
// -----------------------------------------------------------------------------

/// Per-blip stream; numbers printed with %.17g so aggregates recompute
/// bit-exactly after a round trip.
std::string format_stream(Method method, const std::vector<TpError> &errors);
std::vector<TpError> parse_stream(const std::string &text);
std::string format_aggregates(const std::vector<Aggregate> &rows);

} // namespace adaptp::eval
