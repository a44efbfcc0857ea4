// LWPF - Liu-West particle filter over LSSM parameters and state
// Part of adaptp - adaptive climb/descent trajectory prediction
//
// Each particle carries a state x = [h, TAS] and its own LSSM parameters
// theta. Per radar blip the filter runs
//   predict -> shrink_parameters -> update_weights -> maybe_resample
//   -> check_reinit -> estimate
// and can then sample an ensemble of rollouts to the target altitude.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "adaptp/lssm.hpp"
#include "adaptp/trajectory.hpp"

namespace adaptp::lwpf {

using lssm::Lssm;
using lssm::StateVec;
using lssm::Theta;
using Rng = std::mt19937_64;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

struct FilterConfig {
    int n_particles = 400;
    double b = 0.2;             ///< kernel spread; shrinkage a = 1 - b^2
    double resample_frac = 0.5; ///< resample when n_eff < frac * n_particles
    double reinit_tas_kt = 5.0; ///< re-initialise when |TAS gap| exceeds this
    Eigen::Matrix2d obs_noise =
        Eigen::Vector2d(100.0 * 100.0, 2.5 * 2.5).asDiagonal();
    int ensemble_samples = 100;
    long max_steps = 600;
    double init_sd_h_ft = 100.0;
    double init_sd_tas_kt = 2.5;
    double dt = kBlipInterval;
    std::uint64_t seed = 0;

    double a() const { return 1.0 - b * b; }
    /// ConfigError on 0 < b < 1, n_particles >= 1, resample_frac in (0,1]
    /// or a non-positive-definite observation covariance.
    void validate() const;
    /// Observation covariance L^2 (30 000 ft, 400 kt) instead of the
    /// radar-noise default.
    static Eigen::Matrix2d scaling_noise();
};

struct Particle {
    StateVec state;
    Theta theta;
    double weight = 0.0;
    bool valid = true; ///< false once a propagation went non-finite
};

struct FilterState {
    std::vector<Particle> particles;
    long t = 0;
    StateVec last_observation;
    StateVec estimate;
    Theta theta_mean = Theta::Zero();
    Matrix6d theta_var = Matrix6d::Zero();
};

/// Samples n particles: states from N(x0, init_sd^2), parameters uniformly
/// with replacement from `prior`, uniform weights. ConfigError if `prior`
/// is empty.
FilterState init(std::span<const Theta> prior, const StateVec &x0,
                 const FilterConfig &cfg, Rng &rng);

/// Advances every particle one step through its own LSSM. Weights are left
/// untouched; non-finite results mark the particle invalid.
void predict(FilterState &fs);

/// Weighted parameter mean and covariance of the current particle set.
void parameter_moments(const FilterState &fs, Theta &mean, Matrix6d &var);

/// theta_i <- a theta_i + (1-a) theta_bar + N(0, b^2 V). Moments use the
/// weights as they stand; when all thetas coincide nothing moves.
void shrink_parameters(FilterState &fs, const FilterConfig &cfg, Rng &rng);

/// Gaussian observation likelihood exp(-r' R^-1 r / 2), unnormalised.
double likelihood(const StateVec &x, const StateVec &y,
                  const Eigen::Matrix2d &obs_noise);

/// w_i = p(y | x_i) / sum_j p(y | x_j). Invalid particles get zero weight and
/// their state is parked on y. Returns true (and leaves uniform weights) when
/// every likelihood underflowed to zero.
bool update_weights(FilterState &fs, const StateVec &y,
                    const FilterConfig &cfg);

/// 1 / sum w_i^2.
double effective_n(const FilterState &fs);

/// Stratified selection: stratum k draws (k + uniforms[k]) / n against the
/// cumulative weights. Exposed for exhaustive checks.
std::vector<std::size_t> stratified_indices(std::span<const double> weights,
                                            std::span<const double> uniforms);

/// Stratified resampling when n_eff < resample_frac * n. Returns whether it
/// fired; resampled particles carry uniform weights.
bool maybe_resample(FilterState &fs, const FilterConfig &cfg, Rng &rng);

struct ReinitCheck {
    bool fired = false;
    double tas_gap_kt = 0.0;
};

/// Re-initialises around `y` from the prior when |estimate TAS - y TAS|
/// strictly exceeds reinit_tas_kt. The step index is kept.
ReinitCheck check_reinit(FilterState &fs, const StateVec &y,
                         std::span<const Theta> prior,
                         const FilterConfig &cfg, Rng &rng);

/// Weighted mean state over valid particles.
StateVec estimate(const FilterState &fs);

struct EnsembleSample {
    double time_s = 0.0;
    double distance_nmi = 0.0;
    bool terminal = false; ///< reached the target within max_steps
};

enum class PredictionStatus { Ok, Reached, Failed };

struct EnsemblePrediction {
    PredictionStatus status = PredictionStatus::Ok;
    std::vector<EnsembleSample> samples;
    double time_mean_s = 0.0;
    double time_sd_s = 0.0;
    double distance_mean_nmi = 0.0;
    double distance_sd_nmi = 0.0;
    double terminal_fraction = 0.0;
};

/// Multinomially samples particles and rolls each out until it reaches
/// `h_target_ft` (time = steps * dt, distance = sum TAS * dt). Status
/// Reached when the estimate is already at the target; Failed when no
/// sample reaches it within max_steps.
EnsemblePrediction ensemble_predict(const FilterState &fs, Phase phase,
                                    double h_target_ft,
                                    const FilterConfig &cfg, Rng &rng);

struct Diagnostics {
    long t = 0;
    StateVec observation;
    StateVec estimate;
    double n_eff = 0.0; ///< after the weight update, before resampling
    double weight_sum = 0.0;
    bool resampled = false;
    bool reinit = false;
    bool underflow = false;
    double tas_gap_kt = 0.0;
};

/// One full filter cycle for observation `y`.
Diagnostics assimilate(FilterState &fs, const StateVec &y,
                       std::span<const Theta> prior, const FilterConfig &cfg,
                       Rng &rng);

/// Filter instance owning its prior, configuration and random stream.
class LiuWestFilter {
  public:
    LiuWestFilter(std::vector<Theta> prior, FilterConfig cfg);

    void start(const StateVec &x0);
    Diagnostics step(const StateVec &y);
    EnsemblePrediction predict_to(Phase phase, double h_target_ft);

    const FilterState &state() const { return state_; }
    const FilterConfig &config() const { return cfg_; }

  private:
    std::vector<Theta> prior_;
    FilterConfig cfg_;
    Rng rng_;
    FilterState state_;
};

/// Parameter vectors of a set of models.
std::vector<Theta> thetas_of(std::span<const Lssm> models);

} // namespace adaptp::lwpf
