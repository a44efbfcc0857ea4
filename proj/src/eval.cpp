// Eval - truth bookkeeping and per-blip method replay
// Part of adaptp - adaptive climb/descent trajectory prediction

#include "adaptp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "adaptp/errors.hpp"
#include "adaptp/parallel.hpp"

namespace adaptp::eval {

std::string_view to_string(Method method) {
    switch (method) {
    case Method::BadaT0: return "bada_t0";
    case Method::BadaReinit: return "bada_reinit";
    case Method::KfTp: return "kf_tp";
    case Method::Lwpf: return "lwpf";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    if (text == "bada_t0") return Method::BadaT0;
    if (text == "bada_reinit") return Method::BadaReinit;
    if (text == "kf_tp" || text == "kf-tp") return Method::KfTp;
    if (text == "lwpf") return Method::Lwpf;
    throw ConfigError("unknown method '" + std::string(text) + "'");
}

double distance_until(const Trajectory &traj, double t_s) {
    const std::vector<Blip> &b = traj.blips;
    double d = 0.0;
    for (std::size_t k = 1; k < b.size(); ++k) {
        if (b[k - 1].t_s >= t_s) break;
        if (b[k].t_s <= t_s) {
            d += 0.5 * (b[k - 1].tas_kt + b[k].tas_kt) * (b[k].t_s - b[k - 1].t_s);
        } else {
            const double f = (t_s - b[k - 1].t_s) / (b[k].t_s - b[k - 1].t_s);
            const double tas = b[k - 1].tas_kt + f * (b[k].tas_kt - b[k - 1].tas_kt);
            d += 0.5 * (b[k - 1].tas_kt + tas) * (t_s - b[k - 1].t_s);
            break;
        }
    }
    return d / 3600.0;
}

Truth truth_toc_bod(const Trajectory &traj) {
    const std::vector<Blip> &b = traj.blips;
    for (std::size_t k = 0; k < b.size(); ++k) {
        if (!target_reached(traj.phase, b[k].h_ft, traj.h_target_ft)) continue;
        double t = b[k].t_s;
        if (k > 0 && b[k].h_ft != traj.h_target_ft) {
            const double f = (traj.h_target_ft - b[k - 1].h_ft) /
                             (b[k].h_ft - b[k - 1].h_ft);
            t = b[k - 1].t_s + f * (b[k].t_s - b[k - 1].t_s);
        }
        return {t - b.front().t_s, distance_until(traj, t)};
    }
    throw TruthUndefinedError("trajectory '" + traj.id +
                              "' never reaches its target altitude");
}

kalman::KfConfig KfSettings::config(Phase phase) const {
    kalman::KfConfig cfg;
    cfg.alpha_p = alpha_p;
    cfg.alpha_q = alpha_q;
    cfg.alpha_b = phase == Phase::Climb ? alpha_b_climb : alpha_b_descent;
    cfg.forcing_slot = forcing_slot;
    cfg.validate();
    return cfg;
}

std::vector<lssm::Theta> prior_for(const opt::PriorSet &prior,
                                   const std::string &aircraft_type, Phase phase) {
    std::vector<lssm::Lssm> models = prior.group(aircraft_type, phase);
    if (models.empty()) {
        for (const opt::PriorEntry &e : prior.entries) {
            if (e.phase == phase) models.push_back(e.model);
        }
    }
    return lwpf::thetas_of(models);
}

namespace {

struct Prediction {
    bool failed = false;
    double time_s = 0.0;
    double dist_nmi = 0.0;
};

// Remaining time/distance along a predicted trajectory seen from time t_s.
Prediction remaining_along(const Trajectory &pred, double t_s) {
    const Truth end = truth_toc_bod(pred);
    if (t_s >= end.time_s) return {false, 0.0, 0.0};
    return {false, end.time_s - t_s,
            std::max(0.0, end.distance_nmi - distance_until(pred, t_s))};
}

Prediction integrate_from(const perf::AircraftConfig &cfg, const Trajectory &traj,
                          double h_ft) {
    if (target_reached(traj.phase, h_ft, traj.h_target_ft)) return {};
    const Trajectory pred =
        perf::integrate_trajectory(cfg, h_ft, traj.h_target_ft, traj.phase);
    return remaining_along(pred, 0.0);
}

class Replay {
  public:
    Replay(Method method, const Trajectory &traj, const EvalContext &ctx)
        : method_(method), traj_(traj), ctx_(ctx) {}

    // Prediction after blip k has been observed.
    Prediction after(std::size_t k) {
        try {
            switch (method_) {
            case Method::BadaT0: return bada_t0(k);
            case Method::BadaReinit: return bada_reinit(k);
            case Method::KfTp: return kf(k);
            case Method::Lwpf: return lwpf(k);
            }
        } catch (const Error &) {
            broken_ = method_ == Method::Lwpf;
        }
        return {true, 0.0, 0.0};
    }

  private:
    Prediction bada_t0(std::size_t k) {
        if (k == 0) {
            const perf::AircraftConfig &cfg =
                perf::find_config(ctx_.fleet, traj_.aircraft_type);
            const Blip &b0 = traj_.blips.front();
            if (!target_reached(traj_.phase, b0.h_ft, traj_.h_target_ft)) {
                frozen_ = perf::integrate_trajectory(cfg, b0.h_ft, traj_.h_target_ft,
                                                     traj_.phase);
            }
        }
        if (frozen_.blips.empty()) return {true, 0.0, 0.0};
        return remaining_along(frozen_, traj_.blips[k].t_s - traj_.blips.front().t_s);
    }

    Prediction bada_reinit(std::size_t k) {
        const perf::AircraftConfig &cfg =
            perf::find_config(ctx_.fleet, traj_.aircraft_type);
        return integrate_from(cfg, traj_, traj_.blips[k].h_ft);
    }

    Prediction kf(std::size_t k) {
        const Eigen::Vector3d y = kalman::measurement(traj_.blips[k]);
        if (k == 0 || !kf_ready_) {
            kf_cfg_ = ctx_.kf.config(traj_.phase);
            kf_state_ = kalman::kf_init(y, kf_cfg_);
            kf_ready_ = true;
        } else {
            kf_ready_ = false;
            kf_state_ = kalman::kf_update(kalman::kf_predict(kf_state_, kf_cfg_), y,
                                          kf_cfg_);
            kf_ready_ = true;
        }
        const kalman::KfPrediction p = kalman::kf_tp(kf_state_, traj_.h_target_ft);
        return {p.failed, p.time_s, p.distance_nmi};
    }

    Prediction lwpf(std::size_t k) {
        if (broken_) return {true, 0.0, 0.0};
        const Blip &b = traj_.blips[k];
        const lssm::StateVec y{b.h_ft, b.tas_kt};
        if (k == 0) {
            std::vector<lssm::Theta> prior =
                prior_for(ctx_.prior, traj_.aircraft_type, traj_.phase);
            if (prior.empty()) {
                broken_ = true;
                return {true, 0.0, 0.0};
            }
            lwpf::FilterConfig cfg = ctx_.filter;
            cfg.seed = opt::derive_seed(ctx_.seed, traj_.id);
            filter_.emplace(std::move(prior), cfg);
            filter_->start(y);
        } else {
            filter_->step(y);
        }
        const lwpf::EnsemblePrediction p =
            filter_->predict_to(traj_.phase, traj_.h_target_ft);
        switch (p.status) {
        case lwpf::PredictionStatus::Reached: return {};
        case lwpf::PredictionStatus::Failed: return {true, 0.0, 0.0};
        case lwpf::PredictionStatus::Ok: break;
        }
        return {false, p.time_mean_s, p.distance_mean_nmi};
    }

    Method method_;
    const Trajectory &traj_;
    const EvalContext &ctx_;
    Trajectory frozen_;
    kalman::KfConfig kf_cfg_;
    kalman::KfState kf_state_;
    bool kf_ready_ = false;
    std::optional<lwpf::LiuWestFilter> filter_;
    bool broken_ = false;
};

std::vector<TpError> replay(Method method, const Trajectory &traj, const Truth &truth,
                            const EvalContext &ctx) {
    std::vector<TpError> out;
    Replay run(method, traj, ctx);
    const double t0 = traj.blips.front().t_s;
    for (std::size_t k = 0; k < traj.blips.size(); ++k) {
        const double t = traj.blips[k].t_s - t0;
        if (!(t < truth.time_s)) break;
        const Prediction p = run.after(k);
        TpError e;
        e.trajectory_id = traj.id;
        e.aircraft_type = traj.aircraft_type;
        e.phase = traj.phase;
        e.blip = static_cast<int>(k);
        e.t_s = t;
        e.true_time_s = truth.time_s - t;
        e.true_dist_nmi = truth.distance_nmi - distance_until(traj, traj.blips[k].t_s);
        e.failed = p.failed;
        if (!p.failed) {
            e.pred_time_s = p.time_s;
            e.pred_dist_nmi = p.dist_nmi;
            e.abs_time_err = std::abs(p.time_s - e.true_time_s);
            e.abs_dist_err = std::abs(p.dist_nmi - e.true_dist_nmi);
        }
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace

std::vector<Aggregate> aggregate(Method method, const std::vector<TpError> &errors) {
    struct Sums {
        double time = 0.0;
        double dist = 0.0;
        std::size_t scored = 0;
        std::size_t failed = 0;
    };
    std::map<std::pair<Phase, std::string>, Sums> groups;
    for (Phase phase : {Phase::Climb, Phase::Descent}) groups[{phase, "ALL"}];
    for (const TpError &e : errors) {
        for (const std::string &type : {e.aircraft_type, std::string("ALL")}) {
            Sums &s = groups[{e.phase, type}];
            if (e.failed) {
                ++s.failed;
            } else {
                s.time += e.abs_time_err;
                s.dist += e.abs_dist_err;
                ++s.scored;
            }
        }
    }
    std::vector<Aggregate> rows;
    for (Phase phase : {Phase::Climb, Phase::Descent}) {
        std::vector<std::pair<std::string, Sums>> ordered;
        for (const auto &[key, s] : groups) {
            if (key.first == phase && key.second != "ALL") ordered.emplace_back(key.second, s);
        }
        ordered.emplace_back("ALL", groups[{phase, "ALL"}]);
        for (const auto &[type, s] : ordered) {
            Aggregate a;
            a.method = method;
            a.phase = phase;
            a.aircraft_type = type;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            a.mae_time_s = s.scored ? s.time / static_cast<double>(s.scored) : nan;
            a.mae_dist_nmi = s.scored ? s.dist / static_cast<double>(s.scored) : nan;
            const std::size_t total = s.scored + s.failed;
            a.failure_rate = total ? static_cast<double>(s.failed) / static_cast<double>(total)
                                   : 0.0;
            a.n_points = s.scored;
            a.n_failed = s.failed;
            rows.push_back(std::move(a));
        }
    }
    return rows;
}

MethodResult evaluate_method(Method method, const std::vector<Trajectory> &test,
                             const EvalContext &ctx) {
    if (test.empty()) throw ConfigError("evaluation needs a non-empty test set");
    if (method == Method::Lwpf) ctx.filter.validate();
    if (method == Method::KfTp) {
        ctx.kf.config(Phase::Climb);
        ctx.kf.config(Phase::Descent);
    }

    std::vector<std::vector<TpError>> per_traj(test.size());
    std::vector<char> excluded(test.size(), 0);
    parallel_for(
        test.size(),
        [&](std::size_t i) {
            Truth truth;
            try {
                truth = truth_toc_bod(test[i]);
            } catch (const TruthUndefinedError &) {
                excluded[i] = 1;
                return;
            }
            per_traj[i] = replay(method, test[i], truth, ctx);
        },
        ctx.threads);

    MethodResult result;
    result.method = method;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (excluded[i]) result.excluded.push_back(test[i].id);
        for (TpError &e : per_traj[i]) result.errors.push_back(std::move(e));
    }
    std::stable_sort(result.errors.begin(), result.errors.end(),
                     [](const TpError &a, const TpError &b) {
                         if (a.trajectory_id != b.trajectory_id) {
                             return a.trajectory_id < b.trajectory_id;
                         }
                         return a.blip < b.blip;
                     });
    std::sort(result.excluded.begin(), result.excluded.end());
    result.aggregates = aggregate(method, result.errors);
    return result;
}

// -----------------------------------------------------------------------------
// CSV
// -----------------------------------------------------------------------------

namespace {

constexpr const char *kStreamHeader =
    "method,trajectory_id,type,phase,blip,t_s,pred_time_s,pred_dist_nmi,"
    "true_time_s,true_dist_nmi,abs_time_err_s,abs_dist_err_nmi,failed";

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string format_stream(Method method, const std::vector<TpError> &errors) {
    std::ostringstream out;
    out << kStreamHeader << '\n';
    for (const TpError &e : errors) {
        out << to_string(method) << ',' << e.trajectory_id << ',' << e.aircraft_type
            << ',' << to_string(e.phase) << ',' << e.blip << ',' << g17(e.t_s) << ','
            << g17(e.pred_time_s) << ',' << g17(e.pred_dist_nmi) << ','
            << g17(e.true_time_s) << ',' << g17(e.true_dist_nmi) << ','
            << g17(e.abs_time_err) << ',' << g17(e.abs_dist_err) << ','
            << (e.failed ? 1 : 0) << '\n';
    }
    return out.str();
}

std::vector<TpError> parse_stream(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kStreamHeader) {
        throw FormatError("per-blip stream: unexpected header");
    }
    std::vector<TpError> out;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) f.push_back(field);
        if (f.size() != 13) {
            throw FormatError("per-blip stream line " + std::to_string(line_no) +
                              ": expected 13 fields");
        }
        try {
            TpError e;
            e.trajectory_id = f[1];
            e.aircraft_type = f[2];
            e.phase = parse_phase(f[3]);
            e.blip = std::stoi(f[4]);
            e.t_s = std::stod(f[5]);
            e.pred_time_s = std::stod(f[6]);
            e.pred_dist_nmi = std::stod(f[7]);
            e.true_time_s = std::stod(f[8]);
            e.true_dist_nmi = std::stod(f[9]);
            e.abs_time_err = std::stod(f[10]);
            e.abs_dist_err = std::stod(f[11]);
            e.failed = f[12] == "1";
            out.push_back(std::move(e));
        } catch (const std::logic_error &) {
            throw FormatError("per-blip stream line " + std::to_string(line_no) +
                              ": bad number");
        }
    }
    return out;
}

std::string format_aggregates(const std::vector<Aggregate> &rows) {
    std::ostringstream out;
    out << "method,phase,type,mae_time_s,mae_dist_nmi,failure_rate,n_points,n_failed\n";
    for (const Aggregate &a : rows) {
        out << to_string(a.method) << ',' << to_string(a.phase) << ','
            << a.aircraft_type << ',' << g17(a.mae_time_s) << ','
            << g17(a.mae_dist_nmi) << ',' << g17(a.failure_rate) << ','
            << a.n_points << ',' << a.n_failed << '\n';
    }
    return out.str();
}

} // namespace adaptp::eval
