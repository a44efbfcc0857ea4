// LWPF - Liu-West particle filter over LSSM parameters and state
// Part of adaptp - adaptive climb/descent trajectory prediction

#include "adaptp/lwpf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adaptp/errors.hpp"

namespace adaptp::lwpf {

namespace {

double uniform01(Rng &rng) {
    return std::generate_canonical<double, 53>(rng);
}

StateVec step_theta(const Theta &th, const StateVec &x) {
    return {th(0) * x.h_ft + th(1) * x.tas_kt + th(4),
            th(2) * x.h_ft + th(3) * x.tas_kt + th(5)};
}

std::size_t pick(std::span<const double> cumulative, double u) {
    const auto it =
        std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = static_cast<std::size_t>(it - cumulative.begin());
    return std::min(idx, cumulative.size() - 1);
}

} // namespace

void FilterConfig::validate() const {
    if (!(b > 0.0 && b < 1.0)) {
        throw ConfigError("Liu-West spread b must lie in (0, 1)");
    }
    if (n_particles < 1) {
        throw ConfigError("particle count must be positive");
    }
    if (!(resample_frac > 0.0 && resample_frac <= 1.0)) {
        throw ConfigError("resample fraction must lie in (0, 1]");
    }
    if (ensemble_samples < 1 || max_steps < 1 || !(dt > 0.0)) {
        throw ConfigError("ensemble settings must be positive");
    }
    if (!(init_sd_h_ft >= 0.0 && init_sd_tas_kt >= 0.0)) {
        throw ConfigError("initial state spread must be non-negative");
    }
    Eigen::LLT<Eigen::Matrix2d> llt(obs_noise);
    if (llt.info() != Eigen::Success) {
        throw ConfigError("observation covariance must be positive definite");
    }
}

Eigen::Matrix2d FilterConfig::scaling_noise() {
    return Eigen::Vector2d(30000.0 * 30000.0, 400.0 * 400.0).asDiagonal();
}

FilterState init(std::span<const Theta> prior, const StateVec &x0,
                 const FilterConfig &cfg, Rng &rng) {
    if (prior.empty()) {
        throw ConfigError("particle filter prior group is empty");
    }
    FilterState fs;
    const auto n = static_cast<std::size_t>(cfg.n_particles);
    fs.particles.resize(n);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> choose(0, prior.size() - 1);
    const double w = 1.0 / static_cast<double>(n);
    for (Particle &p : fs.particles) {
        p.state.h_ft = x0.h_ft + cfg.init_sd_h_ft * normal(rng);
        p.state.tas_kt = x0.tas_kt + cfg.init_sd_tas_kt * normal(rng);
        p.theta = prior[choose(rng)];
        p.weight = w;
        p.valid = true;
    }
    fs.last_observation = x0;
    fs.estimate = estimate(fs);
    parameter_moments(fs, fs.theta_mean, fs.theta_var);
    return fs;
}

void predict(FilterState &fs) {
    for (Particle &p : fs.particles) {
        if (!p.valid) continue;
        p.state = step_theta(p.theta, p.state);
        if (!p.state.finite()) p.valid = false;
    }
    ++fs.t;
}

void parameter_moments(const FilterState &fs, Theta &mean, Matrix6d &var) {
    mean.setZero();
    for (const Particle &p : fs.particles) mean += p.weight * p.theta;
    var.setZero();
    for (const Particle &p : fs.particles) {
        const Theta d = p.theta - mean;
        var += p.weight * (d * d.transpose());
    }
}

void shrink_parameters(FilterState &fs, const FilterConfig &cfg, Rng &rng) {
    parameter_moments(fs, fs.theta_mean, fs.theta_var);
    const Theta &first = fs.particles.front().theta;
    const bool all_equal = std::all_of(
        fs.particles.begin(), fs.particles.end(),
        [&](const Particle &p) { return p.theta == first; });
    if (all_equal) return;

    // Factor V through its correlation matrix: theta entries span many
    // orders of magnitude (ft forcing vs. cross-coupling terms).
    const Matrix6d &v = fs.theta_var;
    Theta sd;
    for (int i = 0; i < 6; ++i) {
        sd(i) = v(i, i) > 0.0 ? std::sqrt(v(i, i)) : 0.0;
    }
    Matrix6d corr = Matrix6d::Zero();
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            if (sd(i) > 0.0 && sd(j) > 0.0) {
                corr(i, j) = v(i, j) / (sd(i) * sd(j));
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix6d> eig(corr);
    const Theta root_eigs = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix6d factor =
        sd.asDiagonal() * eig.eigenvectors() * root_eigs.asDiagonal();

    const double a = cfg.a();
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Particle &p : fs.particles) {
        Theta z;
        for (int i = 0; i < 6; ++i) z(i) = normal(rng);
        p.theta = a * p.theta + (1.0 - a) * fs.theta_mean + cfg.b * (factor * z);
    }
}

double likelihood(const StateVec &x, const StateVec &y,
                  const Eigen::Matrix2d &obs_noise) {
    const Eigen::Vector2d r = y.vec() - x.vec();
    return std::exp(-0.5 * r.dot(obs_noise.ldlt().solve(r)));
}

bool update_weights(FilterState &fs, const StateVec &y,
                    const FilterConfig &cfg) {
    const Eigen::Matrix2d info = cfg.obs_noise.inverse();
    double total = 0.0;
    for (Particle &p : fs.particles) {
        if (!p.valid) {
            p.weight = 0.0;
            p.state = y;
            continue;
        }
        const Eigen::Vector2d r = y.vec() - p.state.vec();
        p.weight = std::exp(-0.5 * r.dot(info * r));
        total += p.weight;
    }
    fs.last_observation = y;
    const double n = static_cast<double>(fs.particles.size());
    if (!(total > 0.0)) {
        for (Particle &p : fs.particles) p.weight = 1.0 / n;
        return true;
    }
    for (Particle &p : fs.particles) p.weight /= total;
    return false;
}

double effective_n(const FilterState &fs) {
    double sum_sq = 0.0;
    for (const Particle &p : fs.particles) sum_sq += p.weight * p.weight;
    return 1.0 / sum_sq;
}

std::vector<std::size_t> stratified_indices(std::span<const double> weights,
                                            std::span<const double> uniforms) {
    const std::size_t n = uniforms.size();
    std::vector<double> cumulative(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
    std::vector<std::size_t> out(n);
    std::size_t j = 0;
    const double total = cumulative.back();
    for (std::size_t k = 0; k < n; ++k) {
        const double u =
            total * (static_cast<double>(k) + uniforms[k]) / static_cast<double>(n);
        while (j + 1 < cumulative.size() && cumulative[j] <= u) ++j;
        out[k] = j;
    }
    return out;
}

bool maybe_resample(FilterState &fs, const FilterConfig &cfg, Rng &rng) {
    const double n = static_cast<double>(fs.particles.size());
    if (!(effective_n(fs) < cfg.resample_frac * n)) return false;

    std::vector<double> weights(fs.particles.size());
    std::vector<double> uniforms(fs.particles.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] = fs.particles[i].weight;
        uniforms[i] = uniform01(rng);
    }
    const std::vector<std::size_t> idx = stratified_indices(weights, uniforms);
    std::vector<Particle> next;
    next.reserve(idx.size());
    for (std::size_t i : idx) {
        next.push_back(fs.particles[i]);
        next.back().weight = 1.0 / n;
    }
    fs.particles = std::move(next);
    return true;
}

ReinitCheck check_reinit(FilterState &fs, const StateVec &y,
                         std::span<const Theta> prior,
                         const FilterConfig &cfg, Rng &rng) {
    ReinitCheck check;
    check.tas_gap_kt = std::abs(estimate(fs).tas_kt - y.tas_kt);
    if (check.tas_gap_kt > cfg.reinit_tas_kt) {
        const long t = fs.t;
        fs = init(prior, y, cfg, rng);
        fs.t = t;
        check.fired = true;
    }
    return check;
}

StateVec estimate(const FilterState &fs) {
    double h = 0.0;
    double v = 0.0;
    double total = 0.0;
    for (const Particle &p : fs.particles) {
        if (!p.valid) continue;
        h += p.weight * p.state.h_ft;
        v += p.weight * p.state.tas_kt;
        total += p.weight;
    }
    if (!(total > 0.0)) return fs.last_observation;
    return {h / total, v / total};
}

EnsemblePrediction ensemble_predict(const FilterState &fs, Phase phase,
                                    double h_target_ft,
                                    const FilterConfig &cfg, Rng &rng) {
    EnsemblePrediction pred;
    if (target_reached(phase, estimate(fs).h_ft, h_target_ft)) {
        pred.status = PredictionStatus::Reached;
        return pred;
    }
    std::vector<double> cumulative(fs.particles.size());
    double running = 0.0;
    for (std::size_t i = 0; i < fs.particles.size(); ++i) {
        const Particle &p = fs.particles[i];
        running += p.valid ? p.weight : 0.0;
        cumulative[i] = running;
    }
    if (!(running > 0.0)) {
        pred.status = PredictionStatus::Failed;
        return pred;
    }

    pred.samples.reserve(static_cast<std::size_t>(cfg.ensemble_samples));
    double sum_t = 0.0;
    double sum_d = 0.0;
    int terminal = 0;
    for (int s = 0; s < cfg.ensemble_samples; ++s) {
        const Particle &p = fs.particles[pick(cumulative, running * uniform01(rng))];
        StateVec x = p.state;
        EnsembleSample sample;
        double tas_sum = 0.0;
        for (long k = 0; k < cfg.max_steps; ++k) {
            if (target_reached(phase, x.h_ft, h_target_ft)) {
                sample.terminal = true;
                sample.time_s = static_cast<double>(k) * cfg.dt;
                break;
            }
            tas_sum += x.tas_kt;
            x = step_theta(p.theta, x);
            if (!x.finite()) break;
        }
        if (!sample.terminal && x.finite() &&
            target_reached(phase, x.h_ft, h_target_ft)) {
            sample.terminal = true;
            sample.time_s = static_cast<double>(cfg.max_steps) * cfg.dt;
        }
        if (sample.terminal) {
            sample.distance_nmi = tas_sum * cfg.dt / 3600.0;
            sum_t += sample.time_s;
            sum_d += sample.distance_nmi;
            ++terminal;
        }
        pred.samples.push_back(sample);
    }
    pred.terminal_fraction =
        static_cast<double>(terminal) / static_cast<double>(cfg.ensemble_samples);
    if (terminal == 0) {
        pred.status = PredictionStatus::Failed;
        return pred;
    }
    pred.time_mean_s = sum_t / terminal;
    pred.distance_mean_nmi = sum_d / terminal;
    if (terminal > 1) {
        double vt = 0.0;
        double vd = 0.0;
        for (const EnsembleSample &s : pred.samples) {
            if (!s.terminal) continue;
            vt += (s.time_s - pred.time_mean_s) * (s.time_s - pred.time_mean_s);
            vd += (s.distance_nmi - pred.distance_mean_nmi) *
                  (s.distance_nmi - pred.distance_mean_nmi);
        }
        pred.time_sd_s = std::sqrt(vt / (terminal - 1));
        pred.distance_sd_nmi = std::sqrt(vd / (terminal - 1));
    }
    return pred;
}

Diagnostics assimilate(FilterState &fs, const StateVec &y,
                       std::span<const Theta> prior, const FilterConfig &cfg,
                       Rng &rng) {
    Diagnostics d;
    d.observation = y;
    predict(fs);
    shrink_parameters(fs, cfg, rng);
    d.underflow = update_weights(fs, y, cfg);
    d.n_eff = effective_n(fs);
    d.resampled = maybe_resample(fs, cfg, rng);
    const ReinitCheck re = check_reinit(fs, y, prior, cfg, rng);
    d.reinit = re.fired;
    d.tas_gap_kt = re.tas_gap_kt;
    fs.estimate = estimate(fs);
    d.estimate = fs.estimate;
    d.t = fs.t;
    for (const Particle &p : fs.particles) d.weight_sum += p.weight;
    return d;
}

LiuWestFilter::LiuWestFilter(std::vector<Theta> prior, FilterConfig cfg)
    : prior_(std::move(prior)), cfg_(std::move(cfg)), rng_(cfg_.seed) {
    cfg_.validate();
    if (prior_.empty()) {
        throw ConfigError("particle filter prior group is empty");
    }
}

void LiuWestFilter::start(const StateVec &x0) {
    state_ = init(prior_, x0, cfg_, rng_);
}

Diagnostics LiuWestFilter::step(const StateVec &y) {
    return assimilate(state_, y, prior_, cfg_, rng_);
}

EnsemblePrediction LiuWestFilter::predict_to(Phase phase, double h_target_ft) {
    return ensemble_predict(state_, phase, h_target_ft, cfg_, rng_);
}

std::vector<Theta> thetas_of(std::span<const Lssm> models) {
    std::vector<Theta> out;
    out.reserve(models.size());
    for (const Lssm &m : models) out.push_back(m.theta());
    return out;
}

} // namespace adaptp::lwpf
