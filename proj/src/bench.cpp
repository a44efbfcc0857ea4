// Eval - surrogate speedup timing
// Part of adaptp - adaptive climb/descent trajectory prediction

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "adaptp/errors.hpp"
#include "adaptp/eval.hpp"
#include "adaptp/parallel.hpp"

namespace adaptp::eval {

namespace {

constexpr double kFl210 = 21000.0;
constexpr double kFl350 = 35000.0;
// Calls per timed sample, so short spans stay above clock resolution.
constexpr int kInner = 20;

using Clock = std::chrono::steady_clock;

template <typename Fn>
double time_ms(Fn &&fn) {
    const auto start = Clock::now();
    for (int i = 0; i < kInner; ++i) fn();
    const std::chrono::duration<double, std::milli> elapsed = Clock::now() - start;
    return elapsed.count() / kInner;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

volatile double g_sink = 0.0;

} // namespace

BenchRow bench_span(const perf::AircraftConfig &cfg, const lssm::Lssm &model,
                    Phase phase, double h0_ft, double h_target_ft, int reps) {
    if (reps < 1) throw ConfigError("benchmark needs at least one repetition");
    BenchRow row;
    row.aircraft_type = cfg.type_code;
    row.phase = phase;
    row.h0_ft = h0_ft;
    row.h_target_ft = h_target_ft;
    if (h0_ft == h_target_ft) return row; // nothing to integrate: ratio 1

    const Trajectory ref = perf::integrate_trajectory(cfg, h0_ft, h_target_ft, phase);
    row.steps = static_cast<long>(ref.blips.size()) - 1;
    const lssm::StateVec x0{ref.blips.front().h_ft, ref.blips.front().tas_kt};

    auto integrate = [&] {
        g_sink = perf::integrate_trajectory(cfg, h0_ft, h_target_ft, phase).blips.back().h_ft;
    };
    auto roll = [&] { g_sink = lssm::rollout(model, x0, row.steps).back().h_ft; };

    time_ms(integrate); // warm-up
    time_ms(roll);
    std::vector<double> t_int;
    std::vector<double> t_roll;
    for (int r = 0; r < reps; ++r) {
        t_int.push_back(time_ms(integrate));
        t_roll.push_back(time_ms(roll));
    }
    row.integrate_ms = median(t_int);
    row.rollout_ms = median(t_roll);
    row.ratio = row.rollout_ms > 0.0 ? row.integrate_ms / row.rollout_ms : 1.0;
    return row;
}

SurrogateTable fit_reference_surrogates(const std::vector<perf::AircraftConfig> &fleet,
                                        const opt::SimplexConfig &simplex,
                                        std::uint64_t seed, unsigned threads) {
    struct Job {
        const perf::AircraftConfig *cfg;
        Phase phase;
        lssm::Lssm model;
    };
    std::vector<Job> jobs;
    for (const perf::AircraftConfig &c : fleet) {
        for (Phase phase : {Phase::Climb, Phase::Descent}) jobs.push_back({&c, phase, {}});
    }
    parallel_for(
        jobs.size(),
        [&](std::size_t i) {
            Job &j = jobs[i];
            const Trajectory ref = perf::reference_trajectory(*j.cfg, j.phase);
            const std::vector<lssm::StateVec> states = lssm::states_of(ref);
            const lssm::Lssm init = opt::warm_start(states);
            const std::string key = j.cfg->type_code + "/" + std::string(to_string(j.phase));
            j.model = opt::fit_states(states, init, {}, simplex, opt::derive_seed(seed, key),
                                      key)
                          .model;
        },
        threads);
    SurrogateTable table;
    for (const Job &j : jobs) table[{j.cfg->type_code, j.phase}] = j.model;
    return table;
}

std::vector<BenchRow> bench_speedup(const std::vector<perf::AircraftConfig> &fleet,
                                    const SurrogateTable &surrogates, int reps) {
    std::vector<BenchRow> rows;
    for (const perf::AircraftConfig &c : fleet) {
        for (Phase phase : {Phase::Climb, Phase::Descent}) {
            auto it = surrogates.find({c.type_code, phase});
            if (it == surrogates.end()) {
                throw ConfigError("no surrogate for " + c.type_code + " " +
                                  std::string(to_string(phase)));
            }
            const bool climb = phase == Phase::Climb;
            rows.push_back(bench_span(c, it->second, phase, climb ? kFl210 : kFl350,
                                      climb ? kFl350 : kFl210, reps));
        }
    }
    return rows;
}

double mean_ratio(const std::vector<BenchRow> &rows) {
    if (rows.empty()) return 1.0;
    double sum = 0.0;
    for (const BenchRow &r : rows) sum += r.ratio;
    return sum / static_cast<double>(rows.size());
}

std::string format_bench(const std::vector<BenchRow> &rows) {
    std::ostringstream out;
    out << "type,phase,h0_ft,h_target_ft,steps,integrate_ms,rollout_ms,ratio\n";
    char buf[256];
    for (const BenchRow &r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.0f,%.0f,%ld,%.6g,%.6g,%.4g\n",
                      r.aircraft_type.c_str(), std::string(to_string(r.phase)).c_str(),
                      r.h0_ft, r.h_target_ft, r.steps, r.integrate_ms, r.rollout_ms,
                      r.ratio);
        out << buf;
    }
    out << "MEAN,,,,,,," << mean_ratio(rows) << '\n';
    return out.str();
}

} // namespace adaptp::eval
