#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"

#include "adaptp/atmosphere.hpp"
#include "adaptp/errors.hpp"
#include "adaptp/perfmodel.hpp"

using namespace adaptp;
using namespace adaptp::perf;
namespace atm = adaptp::atmosphere;

namespace {

constexpr double kKt = 1852.0 / 3600.0;

// Hand evaluation of the total-energy balance with textbook ISA density.
double oracle_rocd_climb(const AircraftConfig &c, double h_ft, double tas_kt, double f) {
    const double hm = h_ft * 0.3048;
    const double temp = 288.15 - 0.0065 * hm;
    const double p = 101325.0 * std::pow(temp / 288.15, 9.80665 / (0.0065 * 287.05287));
    const double rho = p / (287.05287 * temp);
    const double v = tas_kt * kKt;
    const double lift_coeff = c.mass_kg * 9.80665 / (0.5 * rho * v * v * c.drag.wing_area_m2);
    const double drag =
        0.5 * rho * v * v * c.drag.wing_area_m2 * (c.drag.cd0 + c.drag.cd2 * lift_coeff * lift_coeff);
    const double thrust = c.thrust.c1 * (1.0 - h_ft / c.thrust.c2 + c.thrust.c3 * h_ft * h_ft);
    return (thrust - drag) * v / (c.mass_kg * 9.80665) * f * 60.0 / 0.3048;
}

// Energy share from the finite-difference slope of TAS along a profile.
template <typename Speed>
double fd_esf(Speed speed_kt, double h_ft) {
    const double dh = 1.0;
    const double v = speed_kt(h_ft) * kKt;
    const double dv = (speed_kt(h_ft + dh) - speed_kt(h_ft - dh)) * kKt / (2.0 * dh * 0.3048);
    return 1.0 / (1.0 + v / 9.80665 * dv);
}

double time_at(const Trajectory &t, double h) {
    for (std::size_t i = 1; i < t.blips.size(); ++i) {
        const Blip &a = t.blips[i - 1];
        const Blip &b = t.blips[i];
        if ((a.h_ft - h) * (b.h_ft - h) <= 0.0) {
            return a.t_s + (h - a.h_ft) / (b.h_ft - a.h_ft) * (b.t_s - a.t_s);
        }
    }
    FAIL("altitude not crossed");
    return 0.0;
}

} // namespace

TEST_SUITE("perfmodel") {

TEST_CASE("zero excess thrust gives zero ROCD") {
    AircraftConfig c = find_config(synth_fleet(), "JM2");
    const double h = 15000.0;
    const double tas = atm::tas_from_cas(c.climb_schedule.cas_kt, h);
    const double drag = drag_n(c, h, tas);
    c.thrust = {drag, std::numeric_limits<double>::infinity(), 0.0, 0.0, 1.0};
    CHECK(std::abs(rocd(c, h, tas, Phase::Climb, EsfBranch::ConstCasBelowTrop)) < 1e-9);
}

TEST_CASE("ESF of one leaves the specific excess power unchanged") {
    const AircraftConfig c = find_config(synth_fleet(), "JH1");
    const double h = 38000.0;
    const double tas = atm::tas_from_mach(0.8, h);
    const double v = tas * kKt;
    const double excess = (climb_thrust_n(c, h, tas) - drag_n(c, h, tas)) * v / (c.mass_kg * c.g0);
    CHECK(rocd(c, h, tas, Phase::Climb, EsfBranch::ConstMachAboveTrop) ==
          doctest::Approx(excess * 60.0 / 0.3048).epsilon(1e-12));
}

TEST_CASE("ROCD matches a hand evaluation at FL200") {
    for (const AircraftConfig &c : synth_fleet()) {
        if (c.engine != EngineType::Jet) continue;
        CAPTURE(c.type_code);
        const double h = 20000.0;
        const double tas = atm::tas_from_cas(c.climb_schedule.cas_kt, h);
        const double f = esf(atm::mach_from_tas(tas, h), EsfBranch::ConstCasBelowTrop);
        CHECK(std::abs(rocd(c, h, tas, Phase::Climb, EsfBranch::ConstCasBelowTrop) -
                       oracle_rocd_climb(c, h, tas, f)) < 0.1);
    }
}

TEST_CASE("descent uses the thrust fraction") {
    const AircraftConfig c = find_config(synth_fleet(), "JM1");
    const double h = 18000.0;
    const double tas = atm::tas_from_cas(c.descent_schedule.cas_kt, h);
    const double f = esf(atm::mach_from_tas(tas, h), EsfBranch::ConstCasBelowTrop);
    const double expected = (c.descent_thrust_fraction * climb_thrust_n(c, h, tas) - drag_n(c, h, tas)) *
                            tas * kKt / (c.mass_kg * c.g0) * f * 60.0 / 0.3048;
    CHECK(rocd(c, h, tas, Phase::Descent, EsfBranch::ConstCasBelowTrop) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected < 0.0);
}

TEST_CASE("ESF branches") {
    CHECK(esf(0.3, EsfBranch::ConstMachAboveTrop) == 1.0);
    CHECK(esf(0.85, EsfBranch::ConstMachAboveTrop) == 1.0);
    CHECK(esf(1e-6, EsfBranch::ConstCasAboveTrop) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(esf(1e-6, EsfBranch::ConstCasBelowTrop) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(esf(0.0, EsfBranch::ConstCasBelowTrop), DomainError);
    CHECK_THROWS_AS(esf(1.0, EsfBranch::ConstMachBelowTrop), DomainError);
    for (double m = 0.05; m < 1.0; m += 0.05) {
        for (EsfBranch b : {EsfBranch::ConstCasBelowTrop, EsfBranch::ConstCasAboveTrop,
                            EsfBranch::ConstMachBelowTrop, EsfBranch::ConstMachAboveTrop}) {
            const double f = esf(m, b);
            CHECK(f > 0.0);
            CHECK(f <= 1.3);
        }
    }
}

TEST_CASE("ESF matches finite differences along constant CAS and Mach") {
    const double cas = 300.0;
    const double h07 = atm::crossover_altitude(cas, 0.7);
    REQUIRE(h07 < atm::kTropopauseFt);
    const double f_cas = esf(0.7, EsfBranch::ConstCasBelowTrop);
    CHECK(f_cas > 0.5);
    CHECK(f_cas < 1.0);
    CHECK(std::abs(f_cas - fd_esf([&](double h) { return atm::tas_from_cas(cas, h); }, h07)) < 1e-3);

    const double h = 25000.0;
    CHECK(std::abs(esf(0.78, EsfBranch::ConstMachBelowTrop) -
                   fd_esf([](double x) { return atm::tas_from_mach(0.78, x); }, h)) < 1e-3);
    const double ha = 39000.0;
    const double m = atm::mach_from_tas(atm::tas_from_cas(250.0, ha), ha);
    CHECK(std::abs(esf(m, EsfBranch::ConstCasAboveTrop) -
                   fd_esf([](double x) { return atm::tas_from_cas(250.0, x); }, ha)) < 1e-3);
}

TEST_CASE("integration preconditions and monotone climb") {
    const AircraftConfig c = find_config(synth_fleet(), "JM2");
    CHECK_THROWS_AS(integrate_trajectory(c, 21000.0, 21000.0, Phase::Climb), DomainError);
    CHECK_THROWS_AS(integrate_trajectory(c, 21000.0, 25000.0, Phase::Climb, 0.0), DomainError);
    const Trajectory t = integrate_trajectory(c, 21000.0, 35000.0, Phase::Climb);
    for (std::size_t i = 1; i < t.blips.size(); ++i) {
        CHECK(t.blips[i].h_ft > t.blips[i - 1].h_ft);
        CHECK(t.blips[i].t_s == doctest::Approx(6.0 * static_cast<double>(i)));
    }
    CHECK(t.blips.back().h_ft == 35000.0);
    CHECK_NOTHROW(validate(t));
}

TEST_CASE("halving the step changes time to FL350 by under half a second") {
    const AircraftConfig c = find_config(synth_fleet(), "JM2");
    // Integrate past the target so the crossing time is not cadence-quantized.
    const Trajectory coarse = integrate_trajectory(c, 21000.0, 37000.0, Phase::Climb, 6.0);
    const Trajectory fine = integrate_trajectory(c, 21000.0, 37000.0, Phase::Climb, 3.0);
    CHECK(std::abs(time_at(coarse, 35000.0) - time_at(fine, 35000.0)) < 0.5);
}

TEST_CASE("integration is deterministic and Mach segments hold TAS") {
    const AircraftConfig c = find_config(synth_fleet(), "JR1");
    const Trajectory a = integrate_trajectory(c, 21000.0, 39000.0, Phase::Climb);
    const Trajectory b = integrate_trajectory(c, 21000.0, 39000.0, Phase::Climb);
    CHECK(a == b);
    const double xover = crossover_ft(c, Phase::Climb);
    for (std::size_t i = 1; i < a.blips.size(); ++i) {
        const Blip &p = a.blips[i - 1];
        const Blip &q = a.blips[i];
        if (p.h_ft > atm::kTropopauseFt && p.h_ft > xover) {
            CHECK(std::abs(q.tas_kt - p.tas_kt) < 0.01);
        }
        if (q.h_ft < xover) {
            CHECK(q.tas_kt >= p.tas_kt);
        }
    }
}

TEST_CASE("an underpowered config diverges") {
    AircraftConfig c = find_config(synth_fleet(), "JM2");
    c.thrust.c1 *= 0.2;
    CHECK_THROWS_AS(integrate_trajectory(c, 21000.0, 35000.0, Phase::Climb), DivergenceError);
}

TEST_CASE("synthetic fleet contract") {
    const auto fleet = synth_fleet();
    REQUIRE(fleet.size() >= 6);
    int jets = 0;
    int props = 0;
    for (const AircraftConfig &c : fleet) {
        CAPTURE(c.type_code);
        CHECK_NOTHROW(validate(c));
        CHECK_NOTHROW(integrate_trajectory(c, 21000.0, 33000.0, Phase::Climb));
        CHECK_NOTHROW(integrate_trajectory(c, 21000.0, 35000.0, Phase::Climb));
        CHECK_NOTHROW(integrate_trajectory(c, 35000.0, 21000.0, Phase::Descent));
        if (c.engine == EngineType::Jet) {
            ++jets;
            const double x = crossover_ft(c, Phase::Climb);
            CHECK(x > 25000.0);
            CHECK(x < 35000.0);
        } else {
            ++props;
        }
    }
    CHECK(jets >= 4);
    CHECK(props >= 2);
    CHECK_THROWS_AS(find_config(fleet, "NOPE"), ConfigError);
}

TEST_CASE("turboprops climb slower than the heavy jet over FL210-FL250") {
    const auto fleet = synth_fleet();
    auto mean_rocd = [](const AircraftConfig &c) {
        const Trajectory t = integrate_trajectory(c, 21000.0, 25000.0, Phase::Climb);
        return (t.blips.back().h_ft - t.blips.front().h_ft) / (t.blips.back().t_s / 60.0);
    };
    const double heavy = mean_rocd(find_config(fleet, "JH1"));
    for (const AircraftConfig &c : fleet) {
        if (c.engine == EngineType::Turboprop) {
            CAPTURE(c.type_code);
            CHECK(mean_rocd(c) < heavy);
        }
    }
}

TEST_CASE("config validation") {
    AircraftConfig c = find_config(synth_fleet(), "JM2");
    AircraftConfig bad = c;
    bad.mass_kg = 0.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.drag.cd2 = -0.1;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.climb_schedule.mach = 1.2;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = c;
    bad.climb_schedule.mach = 0.45; // crossover far too low
    CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("reference span") {
    const AircraftConfig c = find_config(synth_fleet(), "JM2");
    const double ceiling = emulation_ceiling_ft(c, Phase::Climb);
    CHECK(ceiling == doctest::Approx(std::max(atm::kTropopauseFt, crossover_ft(c, Phase::Climb) + 5000.0)));
    const Trajectory up = reference_trajectory(c, Phase::Climb);
    CHECK(up.blips.front().h_ft == 21000.0);
    CHECK(up.blips.back().h_ft == doctest::Approx(ceiling));
    const Trajectory down = reference_trajectory(c, Phase::Descent);
    CHECK(down.blips.back().h_ft == 21000.0);
}

}
