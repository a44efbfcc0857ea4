#include <cmath>
#include <random>

#include "doctest.h"

#include "adaptp/errors.hpp"
#include "adaptp/optimizer.hpp"
#include "adaptp/perfmodel.hpp"

#include "helpers.hpp"

using namespace adaptp;
using namespace adaptp::opt;
using lssm::Lssm;
using lssm::StateVec;

namespace {

bool monotone(const std::vector<double> &h) {
    for (std::size_t i = 1; i < h.size(); ++i) {
        if (h[i] > h[i - 1]) return false;
    }
    return true;
}

double rosenbrock(const Eigen::VectorXd &x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
}

Lssm reference_surrogate() {
    const auto fleet = perf::synth_fleet();
    const Trajectory ref =
        perf::reference_trajectory(perf::find_config(fleet, "JM2"), Phase::Climb);
    const auto states = lssm::states_of(ref);
    return fit_states(states, warm_start(states), {}, {}, 3).model;
}

Trajectory above_crossover_climb(const perf::AircraftConfig &c) {
    const double x = perf::crossover_ft(c, Phase::Climb);
    Trajectory t = perf::integrate_trajectory(c, x + 100.0, perf::emulation_ceiling_ft(c, Phase::Climb),
                                              Phase::Climb);
    t.id = "ABOVE";
    return t;
}

} // namespace

TEST_SUITE("optimizer") {

TEST_CASE("simplex config validation") {
    SimplexConfig c;
    CHECK_NOTHROW(c.validate());
    c.expansion = 0.9;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.shrink = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.contraction = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("quadratic started at its minimum") {
    Eigen::VectorXd c(3);
    c << 1.0, -2.0, 0.5;
    const NelderMeadResult r =
        nelder_mead([&](const Eigen::VectorXd &x) { return (x - c).squaredNorm(); }, c);
    // The starting vertex is already optimal after the k + 1 setup evaluations.
    CHECK(r.best_history.front() < 1e-12);
    CHECK(r.f < 1e-12);
    CHECK(r.x == c);
    CHECK(monotone(r.best_history));
}

TEST_CASE("quadratic from elsewhere converges") {
    Eigen::VectorXd c(4);
    c << 3.0, -1.0, 0.25, 8.0;
    const NelderMeadResult r =
        nelder_mead([&](const Eigen::VectorXd &x) { return (x - c).squaredNorm(); },
                    Eigen::VectorXd::Zero(4));
    CHECK(r.f < 1e-10);
    CHECK(monotone(r.best_history));
}

TEST_CASE("Rosenbrock from (-1.2, 1)") {
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    SimplexConfig cfg;
    cfg.max_iters = 500;
    const NelderMeadResult r = nelder_mead(rosenbrock, x0, cfg);
    CHECK(r.f < 1e-6);
    CHECK(r.iterations <= 500);
    CHECK(monotone(r.best_history));
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("constant objective stops on f_tol at x0") {
    Eigen::VectorXd x0(2);
    x0 << 4.0, 5.0;
    const NelderMeadResult r = nelder_mead([](const Eigen::VectorXd &) { return 7.0; }, x0);
    CHECK(r.reason == StopReason::FTol);
    CHECK(r.x == x0);
    CHECK(r.f == 7.0);
}

TEST_CASE("non-finite start is rejected and non-finite search points are skipped") {
    Eigen::VectorXd x0(1);
    x0 << 0.0;
    CHECK_THROWS_AS(
        nelder_mead([](const Eigen::VectorXd &) { return std::nan(""); }, x0), ConfigError);
    x0 << 2.0;
    const NelderMeadResult r = nelder_mead(
        [](const Eigen::VectorXd &x) {
            return x(0) < 0.5 ? std::numeric_limits<double>::infinity() : (x(0) - 1.0) * (x(0) - 1.0);
        },
        x0);
    CHECK(r.f < 1e-12);
    CHECK(monotone(r.best_history));
}

TEST_CASE("fit started at the truth stays there") {
    const Lssm m = reference_surrogate();
    const auto xs = lssm::rollout(m, {21000.0, 380.0}, 80);
    const FitResult r = fit_states(xs, m, {}, {}, 9);
    CHECK(r.cost == 0.0);
    CHECK((r.model.theta() - m.theta()).cwiseAbs().maxCoeff() <= SimplexConfig{}.x_tol);
}

TEST_CASE("self-identification from identity dynamics") {
    const Lssm m = reference_surrogate();
    const auto xs = lssm::rollout(m, {21000.0, 380.0}, 80);
    const FitResult r = fit_states(xs, Lssm{}, {}, {}, 11);
    const lssm::RolloutRmse e = lssm::rollout_rmse(r.model, xs);
    CHECK(e.h_ft < 10.0);
    CHECK(e.tas_kt < 0.5);
}

TEST_CASE("fit never ends above its start") {
    const auto fleet = perf::synth_fleet();
    const Trajectory t = above_crossover_climb(perf::find_config(fleet, "JM1"));
    const auto xs = lssm::states_of(t);
    const Lssm init = warm_start(xs);
    const FitResult r = fit_trajectory(t, init, {}, {}, 4);
    CHECK(r.cost <= lssm::fit_cost(init, t));
    CHECK(std::isfinite(fit_trajectory(t, init, {}, {}, 4, 0.1).cost));
    CHECK_THROWS_AS(fit_trajectory(t, init, {}, {}, 4, -1.0), ConfigError);
}

TEST_CASE("above-crossover fit improves on identity at least tenfold") {
    const auto fleet = perf::synth_fleet();
    for (const char *type : {"JM2", "JH1"}) {
        CAPTURE(type);
        const Trajectory t = above_crossover_climb(perf::find_config(fleet, type));
        REQUIRE(t.blips.size() >= 10);
        const auto xs = lssm::states_of(t);
        const FitResult r = fit_trajectory(t, Lssm{}, {}, {}, 2);
        CHECK(lssm::rollout_rmse(r.model, xs).h_ft * 10.0 <= lssm::rollout_rmse(Lssm{}, xs).h_ft);
    }
}

TEST_CASE("short trajectories cannot be fitted") {
    const Trajectory t = testutil::make_traj("S", Phase::Climb, 1000.0, {0, 100, 200, 300, 400});
    CHECK_THROWS_AS(fit_trajectory(t, Lssm{}, {}, {}), FitFailureError);
}

TEST_CASE("build_prior on one trajectory and on duplicates") {
    const auto fleet = perf::synth_fleet();
    Trajectory t = perf::integrate_trajectory(perf::find_config(fleet, "JM2"), 15000.0, 33000.0,
                                              Phase::Climb);
    t.id = "ONE";
    const PriorBuild one = build_prior({t});
    CHECK(one.prior.entries.size() >= 1);
    CHECK(one.log.size() == one.prior.entries.size());

    const PriorBuild two = build_prior({t, t});
    REQUIRE(two.prior.entries.size() == 2);
    const auto d = two.prior.entries[0].model.theta() - two.prior.entries[1].model.theta();
    CHECK(d.norm() < SimplexConfig{}.x_tol * 10.0);

    BuildPriorOptions split;
    split.crossovers[{"JM2", Phase::Climb}] = perf::crossover_ft(perf::find_config(fleet, "JM2"), Phase::Climb);
    const PriorBuild seg = build_prior({t}, split);
    REQUIRE(seg.prior.entries.size() == 2);
    CHECK(seg.prior.entries[0].segment == "below");
    CHECK(seg.prior.entries[1].segment == "above");
    CHECK(seg.prior.counts().at({"JM2", Phase::Climb}) == 2);
    CHECK(seg.prior.group("JM2", Phase::Climb).size() == 2);
    CHECK(seg.prior.group("JM2", Phase::Descent).empty());

    CHECK_THROWS_AS(build_prior({}), EmptyPriorError);
    const Trajectory tiny = testutil::make_traj("T", Phase::Climb, 1000.0, {0, 100, 200});
    CHECK_THROWS_AS(build_prior({tiny}), EmptyPriorError);
}

TEST_CASE("build_prior is reproducible and thread-independent") {
    const auto fleet = perf::synth_fleet();
    std::vector<Trajectory> data;
    for (int i = 0; i < 6; ++i) {
        perf::AircraftConfig c = perf::find_config(fleet, "JM1");
        c.mass_kg *= 0.9 + 0.04 * i;
        Trajectory t = perf::integrate_trajectory(c, 14000.0, 30000.0, Phase::Climb);
        t.id = "F" + std::to_string(i);
        data.push_back(t);
    }
    BuildPriorOptions a;
    a.threads = 1;
    BuildPriorOptions b;
    b.threads = 3;
    const PriorBuild pa = build_prior(data, a);
    const PriorBuild pb = build_prior(data, b);
    REQUIRE(pa.prior.entries.size() == pb.prior.entries.size());
    for (std::size_t i = 0; i < pa.prior.entries.size(); ++i) {
        CHECK(pa.prior.entries[i].model.theta() == pb.prior.entries[i].model.theta());
        CHECK(pa.prior.entries[i].source_id == data[i].id);
    }
}

TEST_CASE("mass-jittered climbs give a dispersed prior") {
    const auto fleet = perf::synth_fleet();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    std::vector<Trajectory> data;
    for (int i = 0; i < 100; ++i) {
        perf::AircraftConfig c = perf::find_config(fleet, "JM2");
        c.mass_kg *= 1.0 + jitter(rng);
        Trajectory t = perf::integrate_trajectory(c, 16000.0, 26000.0, Phase::Climb);
        t.id = "M" + std::to_string(i);
        data.push_back(t);
    }
    const PriorBuild p = build_prior(data);
    REQUIRE(p.prior.entries.size() == 100);
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 100; ++i) {
        for (std::size_t j = i + 1; j < 100; ++j) {
            min_gap = std::min(min_gap, (p.prior.entries[i].model.theta() -
                                         p.prior.entries[j].model.theta()).norm());
        }
    }
    CHECK(min_gap > 0.0);
}

TEST_CASE("prior file round trip") {
    testutil::TempDir dir("prior");
    PriorSet p;
    Lssm m;
    m.phi_a << 0.999, 0.01, -1e-6, 1.0;
    m.phi_b = {88.5, 0.125};
    p.entries.push_back({m, "JM2", Phase::Climb, "below", "D01-JM2-C001", 1.5e-4});
    p.entries.push_back({Lssm{}, "TP1", Phase::Descent, "full", "D02-TP1-D001", 0.0});
    write_prior(dir / "p.lssm", p);
    const PriorSet q = read_prior(dir / "p.lssm");
    REQUIRE(q.entries.size() == 2);
    CHECK(q.entries[0].model.theta() == m.theta());
    CHECK(q.entries[0].aircraft_type == "JM2");
    CHECK(q.entries[0].segment == "below");
    CHECK(q.entries[0].final_cost == 1.5e-4);
    CHECK(q.entries[1].phase == Phase::Descent);
    CHECK(q.entries[1].source_id == "D02-TP1-D001");

    {
        std::ofstream bad(dir / "bad.lssm");
        bad << "JM2 climb full X 1 0 0 1 0\n";
    }
    CHECK_THROWS_AS(read_prior(dir / "bad.lssm"), FormatError);
    CHECK_THROWS_AS(read_prior(dir / "missing.lssm"), ConfigError);
}

TEST_CASE("derived seeds") {
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
}

}
