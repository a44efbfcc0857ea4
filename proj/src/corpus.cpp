// Corpus - seeded synthetic trajectory corpus
// Part of adaptp - adaptive climb/descent trajectory prediction

#include <cmath>
#include <cstdio>
#include <random>

#include "adaptp/atmosphere.hpp"
#include "adaptp/dataio.hpp"
#include "adaptp/errors.hpp"
#include "adaptp/optimizer.hpp"

namespace adaptp::data {

namespace {

using Rng = std::mt19937_64;

constexpr int kMaxAttempts = 6; // first try plus five resamples
constexpr double kMinGainFt = 4000.0;
constexpr double kCeilingFt = 41000.0;

double uniform(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double symmetric(Rng &rng, double half_width) {
    return half_width > 0.0 ? uniform(rng, -half_width, half_width) : 0.0;
}

double gauss(Rng &rng, double sd) {
    return sd > 0.0 ? std::normal_distribution<double>(0.0, sd)(rng) : 0.0;
}

double round_to_level(double h_ft) { return std::round(h_ft / 1000.0) * 1000.0; }

struct DayConditions {
    double thrust_scale = 1.0;
    double cas_offset_kt = 0.0;
};

perf::AircraftConfig perturb(const perf::AircraftConfig &base, Phase phase,
                             const DayConditions &day, const CorpusJitter &j,
                             Rng &rng) {
    perf::AircraftConfig cfg = base;
    cfg.mass_kg *= 1.0 + symmetric(rng, j.mass_frac);
    const double thrust = (1.0 + symmetric(rng, j.thrust_frac)) * day.thrust_scale;
    cfg.thrust.c1 *= thrust;
    if (cfg.engine == perf::EngineType::Turboprop) cfg.thrust.c3 *= thrust;
    perf::SpeedSchedule &s =
        phase == Phase::Climb ? cfg.climb_schedule : cfg.descent_schedule;
    s.cas_kt += symmetric(rng, j.cas_kt) + day.cas_offset_kt;
    s.mach += symmetric(rng, j.mach);
    perf::validate(cfg);
    return cfg;
}

struct Span {
    double h0;
    double target;
};

// Start and cleared level. Jets flagged as transitioning straddle the
// crossover with at least ten blips on each side; the others stay below it.
Span sample_span(const perf::AircraftConfig &cfg, Phase phase, bool transition,
                 Rng &rng) {
    const bool jet = cfg.engine == perf::EngineType::Jet;
    const double xover = perf::crossover_ft(cfg, phase);
    Span s{};
    if (phase == Phase::Climb) {
        if (jet && transition) {
            s.h0 = xover - uniform(rng, 5000.0, 9000.0);
            s.target = std::min(round_to_level(xover + uniform(rng, 3000.0, 6000.0)),
                                kCeilingFt);
        } else if (jet) {
            s.h0 = uniform(rng, 8000.0, 14000.0);
            s.target = round_to_level(xover - uniform(rng, 1500.0, 3500.0));
        } else {
            s.h0 = uniform(rng, 8000.0, 14000.0);
            s.target = round_to_level(uniform(rng, 18000.0, 25000.0));
        }
        s.target = std::max(s.target, round_to_level(s.h0 + kMinGainFt + 500.0));
    } else {
        if (jet && transition) {
            s.h0 = std::min(xover + uniform(rng, 3000.0, 7000.0), kCeilingFt);
            s.target = round_to_level(xover - uniform(rng, 8000.0, 14000.0));
        } else if (jet) {
            s.h0 = xover - uniform(rng, 1000.0, 3000.0);
            s.target = round_to_level(uniform(rng, 8000.0, 14000.0));
        } else {
            s.h0 = uniform(rng, 18000.0, 25000.0);
            s.target = round_to_level(uniform(rng, 8000.0, 13000.0));
        }
        s.target = std::min(s.target, round_to_level(s.h0 - kMinGainFt - 500.0));
    }
    return s;
}

// Constant-rate descent on the CAS schedule, captured at the cleared level.
Trajectory fixed_rate_descent(const perf::AircraftConfig &cfg, const Span &s,
                              double rate_ftmin, double dt) {
    const perf::SpeedSchedule &sched = cfg.descent_schedule;
    const double xover = perf::crossover_ft(cfg, Phase::Descent);
    Trajectory traj;
    traj.aircraft_type = cfg.type_code;
    traj.phase = Phase::Descent;
    traj.h_target_ft = s.target;
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        double h = s.h0 - rate_ftmin * t / 60.0;
        const bool last = h <= s.target;
        if (last) h = s.target;
        traj.blips.push_back(
            {t, h, perf::scheduled_speed(sched, xover, h).tas_kt, -rate_ftmin});
        if (last) return traj;
    }
}

void add_noise(Trajectory &traj, const CorpusJitter &j, Rng &rng) {
    const std::size_t n = traj.blips.size();
    for (std::size_t k = 0; k < n; ++k) {
        Blip &b = traj.blips[k];
        const double dh = gauss(rng, j.noise_h_ft);
        // The captured level is reported exactly so the target stays defined.
        if (k + 1 < n) b.h_ft += dh;
        b.tas_kt += gauss(rng, j.noise_tas_kt);
        b.rocd_ftmin += gauss(rng, j.noise_rocd_ftmin);
    }
}

// Noise can make an interior blip touch the target early; keep it short of
// the cleared level so the capture point is the final blip.
void keep_target_last(Trajectory &traj) {
    const double sign = phase_sign(traj.phase);
    for (std::size_t k = 0; k + 1 < traj.blips.size(); ++k) {
        Blip &b = traj.blips[k];
        if (target_reached(traj.phase, b.h_ft, traj.h_target_ft)) {
            b.h_ft = traj.h_target_ft - sign * 1.0;
        }
    }
}

} // namespace

CorpusJitter CorpusJitter::none() {
    CorpusJitter j;
    j.mass_frac = j.thrust_frac = j.cas_kt = j.mach = 0.0;
    j.day_thrust_frac = j.day_cas_kt = 0.0;
    j.noise_h_ft = j.noise_tas_kt = j.noise_rocd_ftmin = 0.0;
    return j;
}

CorpusSpec CorpusSpec::defaults(const std::vector<perf::AircraftConfig> &fleet) {
    static const std::map<std::string, PhaseCounts> kMix = {
        {"JL1", {1, 1}}, {"JM1", {4, 4}}, {"JM2", {5, 5}}, {"JR1", {2, 2}},
        {"JH1", {1, 1}}, {"TP1", {2, 2}}, {"TP2", {1, 1}},
    };
    CorpusSpec spec;
    for (const perf::AircraftConfig &c : fleet) {
        auto it = kMix.find(c.type_code);
        spec.per_day[c.type_code] = it != kMix.end() ? it->second : PhaseCounts{1, 1};
    }
    return spec;
}

std::string day_tag(int day_index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "D%02d", day_index + 1);
    return buf;
}

void quantize(Trajectory &traj) {
    auto q = [](double v) { return std::round(v * 100.0) / 100.0; };
    traj.h_target_ft = q(traj.h_target_ft);
    for (Blip &b : traj.blips) {
        b.t_s = q(b.t_s);
        b.h_ft = q(b.h_ft);
        b.tas_kt = q(b.tas_kt);
        b.rocd_ftmin = q(b.rocd_ftmin);
    }
}

std::vector<Trajectory> generate_corpus(
    const std::vector<perf::AircraftConfig> &fleet, const CorpusSpec &spec,
    std::vector<std::string> *skipped) {
    if (fleet.empty()) throw ConfigError("corpus generation needs a fleet");
    if (spec.days < 1) throw ConfigError("corpus needs at least one day");
    for (const auto &[type, counts] : spec.per_day) {
        perf::find_config(fleet, type);
        if (counts.climbs < 0 || counts.descents < 0) {
            throw ConfigError("negative flight count for type '" + type + "'");
        }
    }
    const CorpusJitter &j = spec.jitter;

    std::vector<Trajectory> corpus;
    for (int d = 0; d < spec.days; ++d) {
        const std::string tag = day_tag(d);
        Rng day_rng(opt::derive_seed(spec.seed, tag));
        DayConditions day;
        day.thrust_scale = 1.0 + gauss(day_rng, j.day_thrust_frac);
        day.cas_offset_kt = gauss(day_rng, j.day_cas_kt);

        for (const perf::AircraftConfig &base : fleet) {
            auto counts = spec.per_day.find(base.type_code);
            if (counts == spec.per_day.end()) continue;
            for (Phase phase : {Phase::Climb, Phase::Descent}) {
                const int n = phase == Phase::Climb ? counts->second.climbs
                                                    : counts->second.descents;
                for (int i = 0; i < n; ++i) {
                    char suffix[16];
                    std::snprintf(suffix, sizeof suffix, "%c%03d",
                                  phase == Phase::Climb ? 'C' : 'D', i + 1);
                    const std::string id = tag + "-" + base.type_code + "-" + suffix;
                    Rng rng(opt::derive_seed(spec.seed, id));
                    const bool transition =
                        uniform(rng, 0.0, 1.0) < j.transition_fraction;
                    const bool fixed_rate = phase == Phase::Descent &&
                                            base.type_code == spec.fixed_rate_descent_type;

                    bool done = false;
                    for (int attempt = 0; attempt < kMaxAttempts && !done; ++attempt) {
                        try {
                            const perf::AircraftConfig cfg =
                                perturb(base, phase, day, j, rng);
                            const Span s = sample_span(cfg, phase, transition, rng);
                            Trajectory traj =
                                fixed_rate
                                    ? fixed_rate_descent(cfg, s, uniform(rng, 1000.0, 2000.0),
                                                         kBlipInterval)
                                    : perf::integrate_trajectory(cfg, s.h0, s.target, phase);
                            traj.id = id;
                            traj.aircraft_type = base.type_code;
                            traj.day_tag = tag;
                            add_noise(traj, j, rng);
                            keep_target_last(traj);
                            quantize(traj);
                            validate(traj);
                            corpus.push_back(std::move(traj));
                            done = true;
                        } catch (const Error &) {
                            // resample the flight
                        }
                    }
                    if (!done && skipped) skipped->push_back(id);
                }
            }
        }
    }
    return corpus;
}

} // namespace adaptp::data
