// Eval - hyperparameter sweeps over a validation set
// Part of adaptp - adaptive climb/descent trajectory prediction

#include <cstdio>
#include <set>
#include <sstream>

#include "adaptp/errors.hpp"
#include "adaptp/eval.hpp"

namespace adaptp::eval {

namespace {

PhaseCells cells_of(const Aggregate &a) {
    return {a.mae_time_s, a.mae_dist_nmi, a.failure_rate, a.n_points};
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string cells_csv(const PhaseCells &c) {
    return num(c.mae_time_s) + "," + num(c.mae_dist_nmi) + "," + num(c.failure_rate) +
           "," + std::to_string(c.n_points);
}

std::vector<std::string> types_of(const std::vector<Trajectory> &trajs) {
    std::set<std::string> types;
    for (const Trajectory &t : trajs) types.insert(t.aircraft_type);
    std::vector<std::string> out(types.begin(), types.end());
    out.emplace_back("ALL");
    return out;
}

// Lowest MAE time among rows with scored points; ties keep the first.
template <typename Get>
void mark_best(std::vector<KfSweepRow> &rows, Get get, bool KfSweepRow::*flag) {
    KfSweepRow *best = nullptr;
    for (KfSweepRow &r : rows) {
        if (r.aircraft_type != "ALL" || get(r).n_points == 0) continue;
        if (!best || get(r).mae_time_s < get(*best).mae_time_s) best = &r;
    }
    if (best) best->*flag = true;
}

} // namespace

std::vector<KfSweepRow> sweep_kf(const std::vector<Trajectory> &val,
                                 const KfGrid &grid, const EvalContext &ctx) {
    if (grid.alpha_p.empty() || grid.alpha_q.empty() || grid.alpha_b.empty()) {
        throw ConfigError("Kalman sweep grid axes must be non-empty");
    }
    const std::vector<std::string> types = types_of(val);
    std::vector<KfSweepRow> rows;
    for (double ap : grid.alpha_p) {
        for (double aq : grid.alpha_q) {
            for (double ab : grid.alpha_b) {
                EvalContext cell = ctx;
                cell.kf.alpha_p = ap;
                cell.kf.alpha_q = aq;
                cell.kf.alpha_b_climb = ab;
                cell.kf.alpha_b_descent = -ab;
                const MethodResult r = evaluate_method(Method::KfTp, val, cell);
                for (const std::string &type : types) {
                    KfSweepRow row;
                    row.alpha_p = ap;
                    row.alpha_q = aq;
                    row.alpha_b = ab;
                    row.aircraft_type = type;
                    for (const Aggregate &a : r.aggregates) {
                        if (a.aircraft_type != type) continue;
                        (a.phase == Phase::Climb ? row.climb : row.descent) = cells_of(a);
                    }
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    mark_best(rows, [](const KfSweepRow &r) -> const PhaseCells & { return r.climb; },
              &KfSweepRow::best_climb);
    mark_best(rows, [](const KfSweepRow &r) -> const PhaseCells & { return r.descent; },
              &KfSweepRow::best_descent);
    return rows;
}

std::string format_kf_sweep(const std::vector<KfSweepRow> &rows) {
    std::ostringstream out;
    out << "alpha_p,alpha_q,alpha_b,type,"
           "climb_mae_time_s,climb_mae_dist_nmi,climb_failure_rate,climb_n_points,"
           "descent_mae_time_s,descent_mae_dist_nmi,descent_failure_rate,"
           "descent_n_points,best\n";
    for (const KfSweepRow &r : rows) {
        std::string best = r.best_climb && r.best_descent ? "climb+descent"
                           : r.best_climb                 ? "climb"
                           : r.best_descent               ? "descent"
                                                          : "";
        out << num(r.alpha_p) << ',' << num(r.alpha_q) << ',' << num(r.alpha_b) << ','
            << r.aircraft_type << ',' << cells_csv(r.climb) << ','
            << cells_csv(r.descent) << ',' << best << '\n';
    }
    return out.str();
}

std::vector<ParticleSweepRow> sweep_particles(const std::vector<Trajectory> &val,
                                              const std::vector<int> &counts,
                                              const EvalContext &ctx) {
    if (counts.empty()) throw ConfigError("particle sweep needs at least one count");
    std::vector<ParticleSweepRow> rows;
    for (int n : counts) {
        EvalContext cell = ctx;
        cell.filter.n_particles = n;
        const MethodResult r = evaluate_method(Method::Lwpf, val, cell);
        for (const Aggregate &a : r.aggregates) {
            rows.push_back({n, a.aircraft_type, a.phase, cells_of(a)});
        }
    }
    return rows;
}

std::string format_particle_sweep(const std::vector<ParticleSweepRow> &rows) {
    std::ostringstream out;
    out << "n_particles,type,phase,mae_time_s,mae_dist_nmi,failure_rate,n_points\n";
    for (const ParticleSweepRow &r : rows) {
        out << r.n_particles << ',' << r.aircraft_type << ',' << to_string(r.phase) << ','
            << cells_csv(r.cells) << '\n';
    }
    return out.str();
}

} // namespace adaptp::eval
