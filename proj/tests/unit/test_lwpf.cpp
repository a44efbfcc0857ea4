#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"

#include "adaptp/errors.hpp"
#include "adaptp/lwpf.hpp"

using namespace adaptp;
using namespace adaptp::lwpf;

namespace {

Theta theta_of(double a00, double a01, double a10, double a11, double b0, double b1) {
    Theta t;
    t << a00, a01, a10, a11, b0, b1;
    return t;
}

Theta identity_theta(double b0 = 0.0, double b1 = 0.0) {
    return theta_of(1.0, 0.0, 0.0, 1.0, b0, b1);
}

// Small family of climbing models with mild speed coupling.
std::vector<Theta> synthetic_prior(int n) {
    std::vector<Theta> out;
    for (int i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back(theta_of(1.0, 0.0, 2e-6 * s, 0.999 + 0.0005 * s, 120.0 + 80.0 * s,
                               0.2 + 0.3 * s));
    }
    return out;
}

FilterState manual_state(const std::vector<StateVec> &xs, const std::vector<double> &ws) {
    FilterState fs;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Particle p;
        p.state = xs[i];
        p.theta = identity_theta();
        p.weight = ws[i];
        fs.particles.push_back(p);
    }
    return fs;
}

// Exact E[copies] per particle: every stratum's selection is piecewise
// constant in its uniform, so evaluate at the midpoint of each piece.
std::vector<double> exact_expected_copies(const std::vector<double> &w) {
    const std::size_t n = w.size();
    std::vector<double> cum(n);
    std::partial_sum(w.begin(), w.end(), cum.begin());
    std::vector<double> cuts{0.0, 1.0};
    for (std::size_t k = 0; k < n; ++k) {
        for (double c : cum) {
            const double u = c * static_cast<double>(n) - static_cast<double>(k);
            if (u > 0.0 && u < 1.0) cuts.push_back(u);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> expected(n, 0.0);
    for (std::size_t c = 1; c < cuts.size(); ++c) {
        const double len = cuts[c] - cuts[c - 1];
        if (len <= 0.0) continue;
        const std::vector<double> u(n, 0.5 * (cuts[c] + cuts[c - 1]));
        for (std::size_t idx : stratified_indices(w, u)) expected[idx] += len;
    }
    return expected;
}

} // namespace

TEST_SUITE("lwpf") {

TEST_CASE("config validation") {
    FilterConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.a() == doctest::Approx(0.96).epsilon(1e-15));
    c.b = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.resample_frac = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.obs_noise(1, 1) = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(FilterConfig::scaling_noise()(0, 0) == 30000.0 * 30000.0);
}

TEST_CASE("init") {
    Rng rng(1);
    FilterConfig cfg;
    cfg.n_particles = 64;
    const auto prior = synthetic_prior(5);
    const FilterState fs = init(prior, {20000.0, 300.0}, cfg, rng);
    REQUIRE(fs.particles.size() == 64);
    for (const Particle &p : fs.particles) {
        CHECK(p.weight == 1.0 / 64.0);
        CHECK(std::find(prior.begin(), prior.end(), p.theta) != prior.end());
    }

    const std::vector<Theta> single{identity_theta(5.0)};
    cfg.init_sd_h_ft = 0.0;
    cfg.init_sd_tas_kt = 0.0;
    const FilterState same = init(single, {20000.0, 300.0}, cfg, rng);
    for (const Particle &p : same.particles) {
        CHECK(p.theta == single[0]);
        CHECK(p.state == StateVec{20000.0, 300.0});
    }
    CHECK_THROWS_AS(init(std::vector<Theta>{}, {0.0, 0.0}, cfg, rng), ConfigError);
}

TEST_CASE("predict") {
    FilterState still = manual_state({{1.0, 2.0}, {3.0, 4.0}}, {0.5, 0.5});
    predict(still);
    CHECK(still.particles[0].state == StateVec{1.0, 2.0});
    CHECK(still.t == 1);

    FilterState fs = manual_state({{20000.0, 300.0}, {21000.0, 310.0}, {19000.0, 290.0}},
                                  {0.2, 0.5, 0.3});
    fs.particles[0].theta = theta_of(0.999, 0.5, 1e-5, 0.998, 100.0, 1.0);
    fs.particles[1].theta = theta_of(1.0, 0.0, 0.0, 1.0, 50.0, -0.5);
    fs.particles[2].theta = theta_of(0.99, 1.0, -1e-5, 1.001, 0.0, 0.0);
    std::vector<StateVec> expect;
    for (const Particle &p : fs.particles) {
        expect.push_back(lssm::rollout(Lssm::from_theta(p.theta), p.state, 1)[1]);
    }
    predict(fs);
    double h = 0.0;
    double v = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(fs.particles[i].state == expect[i]);
        h += fs.particles[i].weight * expect[i].h_ft;
        v += fs.particles[i].weight * expect[i].tas_kt;
    }
    CHECK(std::abs(estimate(fs).h_ft - h) < 1e-12 * h);
    CHECK(std::abs(estimate(fs).tas_kt - v) < 1e-12 * v);
}

TEST_CASE("non-finite predictions are flagged, not thrown") {
    FilterState fs = manual_state({{1e308, 1.0}, {1000.0, 200.0}}, {0.5, 0.5});
    fs.particles[0].theta = theta_of(10.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    CHECK_NOTHROW(predict(fs));
    CHECK_FALSE(fs.particles[0].valid);
    FilterConfig cfg;
    update_weights(fs, {1000.0, 200.0}, cfg);
    CHECK(fs.particles[0].weight == 0.0);
    CHECK(fs.particles[1].weight == 1.0);
}

TEST_CASE("shrinkage leaves identical thetas untouched") {
    Rng rng(2);
    FilterConfig cfg;
    FilterState fs = manual_state({{0, 0}, {1, 1}, {2, 2}}, {0.2, 0.3, 0.5});
    for (Particle &p : fs.particles) p.theta = theta_of(0.99, 0.1, 0.0, 1.0, 40.0, 2.0);
    shrink_parameters(fs, cfg, rng);
    for (const Particle &p : fs.particles) {
        CHECK(p.theta == theta_of(0.99, 0.1, 0.0, 1.0, 40.0, 2.0));
    }
    CHECK(fs.theta_var.norm() == 0.0);
}

TEST_CASE("shrinkage pulls toward the mean by a") {
    Rng rng(3);
    FilterConfig cfg;
    const Theta v = theta_of(0.5, -1.0, 2.0, 0.25, 100.0, 3.0);
    const int draws = 20000;
    Theta sum = Theta::Zero();
    for (int k = 0; k < draws; ++k) {
        FilterState fs = manual_state({{0, 0}, {0, 0}}, {0.5, 0.5});
        fs.particles[0].theta = v;
        fs.particles[1].theta = -v;
        shrink_parameters(fs, cfg, rng);
        CHECK(fs.theta_mean.norm() == doctest::Approx(0.0));
        sum += fs.particles[0].theta;
    }
    const Theta mean = sum / draws;
    for (int i = 0; i < 6; ++i) {
        const double se = cfg.b * std::abs(v(i)) / std::sqrt(static_cast<double>(draws));
        CHECK(std::abs(mean(i) - cfg.a() * v(i)) < 3.0 * se);
    }
}

TEST_CASE("weights") {
    FilterConfig cfg;
    const StateVec y{20000.0, 300.0};
    CHECK(likelihood(y, y, cfg.obs_noise) == 1.0);
    FilterState fs = manual_state({y, y, y, y}, {0.1, 0.2, 0.3, 0.4});
    CHECK_FALSE(update_weights(fs, y, cfg));
    for (const Particle &p : fs.particles) CHECK(p.weight == 0.25);

    FilterState two = manual_state({y, {20000.0 + 10 * 100.0, 300.0}}, {0.5, 0.5});
    update_weights(two, y, cfg);
    CHECK(two.particles[0].weight > 0.99);
    CHECK(two.particles[0].weight == doctest::Approx(1.0 / (1.0 + std::exp(-50.0))));

    FilterState gone = manual_state({{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5});
    CHECK(update_weights(gone, {1e9, 1e6}, cfg));
    CHECK(gone.particles[0].weight == 0.5);
}

TEST_CASE("effective sample size") {
    const StateVec s{0, 0};
    CHECK(effective_n(manual_state({s, s, s, s}, {0.25, 0.25, 0.25, 0.25})) == doctest::Approx(4.0));
    CHECK(effective_n(manual_state({s, s, s}, {0.0, 1.0, 0.0})) == 1.0);
    CHECK(effective_n(manual_state({s, s, s, s}, {0.5, 0.5, 0.0, 0.0})) == 2.0);
}

TEST_CASE("resampling") {
    Rng rng(4);
    FilterConfig cfg;
    const StateVec s{0, 0};
    FilterState uni = manual_state({s, s, s, s}, {0.25, 0.25, 0.25, 0.25});
    CHECK_FALSE(maybe_resample(uni, cfg, rng));

    FilterState peaked = manual_state({{1, 1}, {2, 2}, {3, 3}, {4, 4}}, {0.0, 0.0, 1.0, 0.0});
    CHECK(maybe_resample(peaked, cfg, rng));
    for (const Particle &p : peaked.particles) {
        CHECK(p.state == StateVec{3, 3});
        CHECK(p.weight == 0.25);
    }
}

TEST_CASE("stratified expectation by exhaustive integration") {
    for (const std::vector<double> &w :
         {std::vector<double>{0.1, 0.2, 0.3, 0.4}, std::vector<double>{0.7, 0.05, 0.05, 0.2, 0.0},
          std::vector<double>{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}) {
        const auto e = exact_expected_copies(w);
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(std::abs(e[i] - static_cast<double>(w.size()) * w[i]) < 1e-9);
        }
    }
}

TEST_CASE("reinit threshold is strict") {
    Rng rng(5);
    FilterConfig cfg;
    cfg.n_particles = 8; // weights of 1/8 keep the estimate exact
    cfg.init_sd_h_ft = 0.0;
    cfg.init_sd_tas_kt = 0.0;
    const std::vector<Theta> prior{identity_theta()};
    FilterState fs = init(prior, {20000.0, 300.0}, cfg, rng);
    fs.t = 7;
    CHECK_FALSE(check_reinit(fs, {20000.0, 300.0}, prior, cfg, rng).fired);
    const ReinitCheck at = check_reinit(fs, {20000.0, 305.0}, prior, cfg, rng);
    CHECK_FALSE(at.fired);
    CHECK(at.tas_gap_kt == 5.0);
    fs.particles[0].weight = 0.25;
    fs.particles[1].weight = 0.0;
    const ReinitCheck over = check_reinit(fs, {20100.0, 305.1}, prior, cfg, rng);
    CHECK(over.fired);
    CHECK(fs.t == 7);
    for (const Particle &p : fs.particles) {
        CHECK(p.weight == 0.125);
        CHECK(p.state == StateVec{20100.0, 305.1});
    }
}

TEST_CASE("estimate") {
    CHECK(estimate(manual_state({{5.0, 6.0}}, {1.0})) == StateVec{5.0, 6.0});
    CHECK(estimate(manual_state({{5.0, 6.0}, {-5.0, -6.0}}, {0.5, 0.5})) == StateVec{0.0, 0.0});
    const std::vector<StateVec> xs{{1.5, 2.0}, {3.0, -1.0}, {7.25, 0.5}, {-2.0, 4.0}, {10.0, 10.0}};
    const std::vector<double> ws{0.1, 0.15, 0.25, 0.2, 0.3};
    double h = 0.0;
    double v = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        h += ws[i] * xs[i].h_ft;
        v += ws[i] * xs[i].tas_kt;
    }
    const StateVec e = estimate(manual_state(xs, ws));
    CHECK(std::abs(e.h_ft - h) < 1e-12);
    CHECK(std::abs(e.tas_kt - v) < 1e-12);
}

TEST_CASE("ensemble prediction") {
    Rng rng(6);
    FilterConfig cfg;
    FilterState fs = manual_state({{20000.0, 360.0}}, {1.0});
    fs.particles[0].theta = identity_theta(600.0, 0.0);
    const EnsemblePrediction p = ensemble_predict(fs, Phase::Climb, 23000.0, cfg, rng);
    REQUIRE(p.status == PredictionStatus::Ok);
    CHECK(p.time_mean_s == 30.0);
    CHECK(p.time_sd_s == 0.0);
    CHECK(p.distance_mean_nmi == doctest::Approx(5 * 360.0 * 6.0 / 3600.0));
    CHECK(p.terminal_fraction == 1.0);
    CHECK(p.samples.size() == static_cast<std::size_t>(cfg.ensemble_samples));

    CHECK(ensemble_predict(fs, Phase::Climb, 19000.0, cfg, rng).status == PredictionStatus::Reached);
    CHECK(ensemble_predict(fs, Phase::Descent, 15000.0, cfg, rng).status == PredictionStatus::Failed);

    FilterState down = manual_state({{20000.0, 300.0}, {20000.0, 300.0}}, {0.5, 0.5});
    for (Particle &q : down.particles) q.theta = identity_theta(-250.0, -0.5);
    const EnsemblePrediction d = ensemble_predict(down, Phase::Descent, 15000.0, cfg, rng);
    CHECK(d.time_mean_s == 120.0);
    CHECK(d.time_sd_s < 1e-12);
    CHECK(d.distance_sd_nmi < 1e-12);
}

TEST_CASE("assimilating the predicted state keeps everything quiet") {
    Rng rng(7);
    FilterConfig cfg;
    cfg.n_particles = 50;
    cfg.init_sd_h_ft = 0.0;
    cfg.init_sd_tas_kt = 0.0;
    const std::vector<Theta> prior{identity_theta(100.0, 0.5)};
    FilterState fs = init(prior, {20000.0, 300.0}, cfg, rng);
    const Diagnostics d = assimilate(fs, {20100.0, 300.5}, prior, cfg, rng);
    CHECK(d.n_eff == doctest::Approx(50.0));
    CHECK_FALSE(d.resampled);
    CHECK_FALSE(d.reinit);
    for (const Particle &p : fs.particles) CHECK(p.weight == doctest::Approx(1.0 / 50.0));

    const Diagnostics jump = assimilate(fs, {20200.0, 321.0}, prior, cfg, rng);
    CHECK(jump.reinit);
}

TEST_CASE("parameter mean moves toward the generating model") {
    const auto prior = synthetic_prior(30);
    const Theta truth = prior[21];
    FilterConfig cfg;
    cfg.n_particles = 300;
    cfg.seed = 8;
    LiuWestFilter filter(prior, cfg);
    const auto xs = lssm::rollout(Lssm::from_theta(truth), {15000.0, 280.0}, 50);
    filter.start(xs[0]);
    auto scaled_gap = [&] {
        Theta d = filter.state().theta_mean - truth;
        for (int i = 0; i < 6; ++i) d(i) /= std::max(std::abs(truth(i)), 1e-3);
        return d.norm();
    };
    double early = 0.0;
    for (int k = 1; k <= 50; ++k) {
        const Diagnostics d = filter.step(xs[static_cast<std::size_t>(k)]);
        CHECK(d.weight_sum == doctest::Approx(1.0).epsilon(1e-12));
        if (k == 5) early = scaled_gap();
    }
    CHECK(scaled_gap() < early);
    CHECK(std::abs(filter.state().estimate.tas_kt - xs.back().tas_kt) < 2.5);
}

TEST_CASE("filter runs are deterministic") {
    const auto prior = synthetic_prior(10);
    FilterConfig cfg;
    cfg.n_particles = 100;
    cfg.seed = 99;
    const auto xs = lssm::rollout(Lssm::from_theta(prior[3]), {15000.0, 280.0}, 20);
    auto run = [&] {
        LiuWestFilter f(prior, cfg);
        f.start(xs[0]);
        std::vector<double> trace;
        for (std::size_t k = 1; k < xs.size(); ++k) {
            const Diagnostics d = f.step(xs[k]);
            trace.push_back(d.estimate.h_ft);
            trace.push_back(d.n_eff);
        }
        const EnsemblePrediction p = f.predict_to(Phase::Climb, 25000.0);
        trace.push_back(p.time_mean_s);
        return trace;
    };
    CHECK(run() == run());
}

}
