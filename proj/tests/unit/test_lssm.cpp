#include <cmath>
#include <random>

#include "doctest.h"

#include "adaptp/errors.hpp"
#include "adaptp/lssm.hpp"
#include "adaptp/optimizer.hpp"
#include "adaptp/perfmodel.hpp"

#include "helpers.hpp"

using namespace adaptp;
using namespace adaptp::lssm;

namespace {

// Plain truncated power series for exp(dt A) and its integral against b.
Lssm taylor_oracle(const ContinuousLssm &c, double dt, int terms) {
    const Eigen::Matrix2d x = dt * c.a;
    Eigen::Matrix2d term = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d expo = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d integ = Eigen::Matrix2d::Identity(); // sum x^k/(k+1)!
    for (int k = 1; k < terms; ++k) {
        term = term * x / static_cast<double>(k);
        expo += term;
        integ += term / static_cast<double>(k + 1);
    }
    Lssm m;
    m.phi_a = expo;
    m.phi_b = dt * integ * c.b;
    m.dt = dt;
    return m;
}

Trajectory as_trajectory(const std::vector<StateVec> &xs) {
    Trajectory t;
    t.id = "R";
    t.aircraft_type = "X";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        t.blips.push_back({6.0 * static_cast<double>(i), xs[i].h_ft, xs[i].tas_kt, 0.0});
    }
    return t;
}

} // namespace

TEST_SUITE("lssm") {

TEST_CASE("zero dynamics") {
    ContinuousLssm c;
    c.b = {12.5, -0.25};
    const Lssm m = discretize(c, 6.0);
    CHECK((m.phi_a - Eigen::Matrix2d::Identity()).norm() == 0.0);
    CHECK(m.phi_b(0) == doctest::Approx(75.0).epsilon(1e-15));
    CHECK(m.phi_b(1) == doctest::Approx(-1.5).epsilon(1e-15));
    const auto xs = rollout(m, {1000.0, 200.0}, 40);
    CHECK(xs.back().h_ft == doctest::Approx(1000.0 + 40 * 75.0).epsilon(1e-9));
    CHECK(xs.back().tas_kt == doctest::Approx(200.0 - 40 * 1.5).epsilon(1e-9));
}

TEST_CASE("diagonal A against the series oracle") {
    for (double a : {-0.3, -0.01, 0.02, 0.4}) {
        ContinuousLssm c;
        c.a = Eigen::Vector2d(a, a).asDiagonal();
        c.b = {3.0, -2.0};
        const Lssm m = discretize(c, 6.0);
        const Lssm o = taylor_oracle(c, 6.0, 30);
        CHECK(m.phi_a(0, 0) == doctest::Approx(std::exp(6.0 * a)).epsilon(1e-12));
        CHECK((m.phi_a - o.phi_a).cwiseAbs().maxCoeff() < 1e-12 * o.phi_a.norm());
        CHECK((m.phi_b - o.phi_b).cwiseAbs().maxCoeff() < 1e-12 * o.phi_b.norm());
    }
}

TEST_CASE("nilpotent A is exact") {
    ContinuousLssm c;
    c.a << 0.0, 1.0, 0.0, 0.0;
    const Lssm m = discretize(c, 6.0);
    CHECK(m.phi_a(0, 0) == 1.0);
    CHECK(m.phi_a(0, 1) == 6.0);
    CHECK(m.phi_a(1, 0) == 0.0);
    CHECK(m.phi_a(1, 1) == 1.0);
    CHECK(m.phi_b.norm() == 0.0);
}

TEST_CASE("semigroup property") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 50; ++i) {
        ContinuousLssm c;
        c.a << u(rng), u(rng), u(rng), u(rng);
        const Eigen::Matrix2d one = discretize(c, 3.0).phi_a;
        const Eigen::Matrix2d two = discretize(c, 6.0).phi_a;
        CHECK((two - one * one).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, two.norm()));
    }
}

TEST_CASE("rollout examples") {
    Lssm m;
    m.phi_b = {10.0, 0.0};
    const auto xs = rollout(m, {20000.0, 300.0}, 3);
    REQUIRE(xs.size() == 4);
    CHECK(xs[0].h_ft == 20000.0);
    CHECK(xs[1].h_ft == 20010.0);
    CHECK(xs[2].h_ft == 20020.0);
    CHECK(xs[3].h_ft == 20030.0);
    for (const auto &x : xs) CHECK(x.tas_kt == 300.0);

    Lssm z;
    z.phi_a.setZero();
    z.phi_b = {123.0, 45.0};
    const auto ys = rollout(z, {1.0, 2.0}, 5);
    for (std::size_t i = 1; i < ys.size(); ++i) CHECK(ys[i] == StateVec{123.0, 45.0});
}

TEST_CASE("rollout overflow names the step") {
    Lssm m;
    m.phi_a = Eigen::Matrix2d::Identity() * 1e200;
    try {
        rollout(m, {1e200, 1.0}, 10);
        FAIL("expected overflow");
    } catch (const OverflowError &e) {
        CHECK(e.step() == 1);
    }
}

TEST_CASE("fit cost examples") {
    Lssm m;
    m.phi_b = {100.0, 1.0};
    const auto xs = rollout(m, {10000.0, 250.0}, 20);
    CHECK(fit_cost(m, std::span<const StateVec>(xs)) == 0.0);

    std::vector<StateVec> one = {xs[0], xs[1]};
    one[1].h_ft += 30000.0;
    CHECK(fit_cost(m, std::span<const StateVec>(one)) == doctest::Approx(1.0).epsilon(1e-15));

    Lssm still;
    const std::vector<StateVec> three = {{0.0, 0.0}, {300.0, 4.0}, {600.0, 8.0}};
    CHECK(std::abs(fit_cost(still, std::span<const StateVec>(three)) - 0.0010) < 1e-12);
}

TEST_CASE("fit cost ignores metadata and enforces cadence") {
    Lssm m;
    m.phi_b = {50.0, 0.5};
    Trajectory t = as_trajectory(rollout(m, {15000.0, 280.0}, 12));
    t.blips[4].h_ft += 120.0;
    const double base = fit_cost(m, t);
    t.id = "OTHER";
    t.aircraft_type = "ZZZ";
    CHECK(fit_cost(m, t) == base);
    t.blips[3].t_s += 1.0;
    CHECK_THROWS_AS(fit_cost(m, t), FormatError);
    CHECK_THROWS_AS(fit_cost(m, std::span<const StateVec>(states_of(t)).first(1)), FormatError);
}

TEST_CASE("fitted surrogate RMSE cross-check") {
    const auto fleet = perf::synth_fleet();
    const Trajectory ref = perf::reference_trajectory(perf::find_config(fleet, "JM2"), Phase::Climb);
    const auto states = states_of(ref);
    const opt::FitResult fit =
        opt::fit_states(states, opt::warm_start(states), {}, {}, 1);

    // Independent accumulation of the rollout residuals.
    double sh = 0.0;
    double sv = 0.0;
    double cost = 0.0;
    Eigen::Vector2d x = states[0].vec();
    for (std::size_t i = 1; i < states.size(); ++i) {
        x = fit.model.phi_a * x + fit.model.phi_b;
        const double dh = x(0) - states[i].h_ft;
        const double dv = x(1) - states[i].tas_kt;
        sh += dh * dh;
        sv += dv * dv;
        cost += std::pow(dh / 30000.0, 2) + std::pow(dv / 400.0, 2);
    }
    const double n = static_cast<double>(states.size() - 1);
    const RolloutRmse r = rollout_rmse(fit.model, states);
    CHECK(r.h_ft == doctest::Approx(std::sqrt(sh / n)).epsilon(1e-9));
    CHECK(r.tas_kt == doctest::Approx(std::sqrt(sv / n)).epsilon(1e-9));
    CHECK(fit_cost(fit.model, ref) == doctest::Approx(cost).epsilon(1e-9));
    CHECK(fit.cost == doctest::Approx(cost).epsilon(1e-9));
}

TEST_CASE("cubic TAS fit") {
    Trajectory lin;
    for (int i = 0; i < 20; ++i) {
        const double h = 10000.0 + 500.0 * i;
        lin.blips.push_back({6.0 * i, h, 200.0 + 0.004 * h, 0.0});
    }
    const CubicTasFit f = cubic_tas_fit(lin);
    CHECK(std::abs(f.lambda1) < 1e-9);
    CHECK(std::abs(f.lambda2) < 1e-9);
    CHECK(f.lambda3 == doctest::Approx(0.004 * 30000.0).epsilon(1e-9));
    CHECK(f.rmse_kt < 1e-9);

    Trajectory flat = lin;
    for (auto &b : flat.blips) b.tas_kt = 310.0;
    const CubicTasFit g = cubic_tas_fit(flat);
    CHECK(std::abs(g.lambda1) < 1e-9);
    CHECK(std::abs(g.lambda2) < 1e-9);
    CHECK(std::abs(g.lambda3) < 1e-9);
    CHECK(g.lambda4 == doctest::Approx(310.0).epsilon(1e-12));

    Trajectory level = lin;
    for (auto &b : level.blips) b.h_ft = 20000.0;
    CHECK_THROWS_AS(cubic_tas_fit(level), DegenerateInputError);

    const auto fleet = perf::synth_fleet();
    const perf::AircraftConfig &c = perf::find_config(fleet, "JM2");
    const double xover = perf::crossover_ft(c, Phase::Climb);
    const Trajectory below = perf::integrate_trajectory(c, 12000.0, xover - 500.0, Phase::Climb);
    CHECK(cubic_tas_fit(below).rmse_kt < 1.0);
}

TEST_CASE("records round trip") {
    Lssm m;
    m.phi_a << 0.99912345678901234, 1e-7, -3.25e-5, 1.0000001;
    m.phi_b = {95.123456789, -0.000123};
    m.dt = 6.0;
    const Lssm back = parse_record(format_record(m));
    CHECK(back.theta() == m.theta());
    CHECK(back.dt == m.dt);
    CHECK(Lssm::from_theta(m.theta()).phi_a == m.phi_a);
    CHECK_THROWS_AS(parse_record("1 2 3"), FormatError);
    CHECK_THROWS_AS(parse_record("1 0 0 1 0 0 -6"), FormatError);
    CHECK_THROWS_AS(parse_record("1 0 0 1 0 0 6 7"), FormatError);
}

}
