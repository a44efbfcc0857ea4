// CLI - command-line pipeline driver
// Part of adaptp - adaptive climb/descent trajectory prediction

#include "adaptp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "adaptp/dataio.hpp"
#include "adaptp/errors.hpp"
#include "adaptp/eval.hpp"
#include "adaptp/kalman.hpp"
#include "adaptp/lwpf.hpp"
#include "adaptp/optimizer.hpp"

namespace adaptp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

std::string read_text(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string fnv1a(const std::string &text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// UTC time, or SOURCE_DATE_EPOCH when set (reproducible manifests).
std::string timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char *epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Config files override flags: every key must name a known option.
template <typename T>
void take(json &cfg, const char *key, T &value) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return;
    try {
        value = it->template get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
    cfg.erase(it);
}

json load_config(const std::string &path) {
    if (path.empty()) return json::object();
    try {
        json j = json::parse(read_text(path));
        if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
        return j;
    } catch (const json::exception &e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
}

void reject_leftovers(const json &cfg) {
    if (!cfg.empty()) {
        throw ConfigError("unknown config key '" + cfg.begin().key() + "'");
    }
}

class Outputs {
  public:
    explicit Outputs(fs::path root) : root_(std::move(root)) {}

    void write(const std::string &name, const std::string &text) {
        write_text(root_ / name, text);
        files_.push_back({{"path", name}, {"fnv1a64", fnv1a(text)}});
    }
    const json &files() const { return files_; }
    const fs::path &root() const { return root_; }

  private:
    fs::path root_;
    json files_ = json::array();
};

void write_manifest(const fs::path &path, const std::string &command,
                    const std::string &config_file, std::uint64_t seed,
                    const json &inputs, const json &outputs, const json &effective,
                    const json &extra = json::object()) {
    json m;
    m["command"] = command;
    m["config_file"] = config_file;
    m["seed"] = seed;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["tool_version"] = kToolVersion;
    m["timestamp"] = timestamp();
    m["effective_config"] = effective;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    write_text(path, m.dump(2) + "\n");
}

opt::CrossoverTable crossovers_of(const std::vector<perf::AircraftConfig> &fleet) {
    opt::CrossoverTable table;
    for (const perf::AircraftConfig &c : fleet) {
        for (Phase p : {Phase::Climb, Phase::Descent}) {
            table[{c.type_code, p}] = perf::crossover_ft(c, p);
        }
    }
    return table;
}

std::vector<Trajectory> split_of(const std::vector<Trajectory> &corpus,
                                 const std::string &split, std::uint64_t split_seed) {
    const data::SplitName which = data::parse_split(split);
    return data::select_split(corpus, data::split_by_day(corpus, split_seed), which);
}

Eigen::Matrix2d obs_noise_of(const std::string &name) {
    if (name == "radar") return lwpf::FilterConfig{}.obs_noise;
    if (name == "scaling") return lwpf::FilterConfig::scaling_noise();
    throw ConfigError("unknown observation noise '" + name + "' (radar|scaling)");
}

// ---------------------------------------------------------------------------
// Shared method settings
// ---------------------------------------------------------------------------

struct MethodOpts {
    int particles = 400;
    std::string obs_noise = "radar";
    double kf_alpha_p = 1e5;
    double kf_alpha_q = 1.0;
    double kf_alpha_b_climb = 500.0;
    double kf_alpha_b_descent = -1500.0;

    void add(CLI::App *cmd) {
        cmd->add_option("--particles", particles, "Particles per filter")->capture_default_str();
        cmd->add_option("--obs-noise", obs_noise, "Filter observation noise: radar|scaling")
            ->capture_default_str();
        cmd->add_option("--kf-alpha-p", kf_alpha_p, "Initial KF covariance scale")
            ->capture_default_str();
        cmd->add_option("--kf-alpha-q", kf_alpha_q, "KF process noise scale")->capture_default_str();
        cmd->add_option("--kf-alpha-b-climb", kf_alpha_b_climb, "KF forcing in climb (ft/min)")
            ->capture_default_str();
        cmd->add_option("--kf-alpha-b-descent", kf_alpha_b_descent,
                        "KF forcing in descent (ft/min)")
            ->capture_default_str();
    }
    void apply(json &cfg) {
        take(cfg, "particles", particles);
        take(cfg, "obs_noise", obs_noise);
        take(cfg, "kf_alpha_p", kf_alpha_p);
        take(cfg, "kf_alpha_q", kf_alpha_q);
        take(cfg, "kf_alpha_b_climb", kf_alpha_b_climb);
        take(cfg, "kf_alpha_b_descent", kf_alpha_b_descent);
    }
    json to_json() const {
        return {{"particles", particles},
                {"obs_noise", obs_noise},
                {"kf_alpha_p", kf_alpha_p},
                {"kf_alpha_q", kf_alpha_q},
                {"kf_alpha_b_climb", kf_alpha_b_climb},
                {"kf_alpha_b_descent", kf_alpha_b_descent}};
    }
    lwpf::FilterConfig filter() const {
        lwpf::FilterConfig f;
        f.n_particles = particles;
        f.obs_noise = obs_noise_of(obs_noise);
        f.validate();
        return f;
    }
    eval::KfSettings kf() const {
        eval::KfSettings k;
        k.alpha_p = kf_alpha_p;
        k.alpha_q = kf_alpha_q;
        k.alpha_b_climb = kf_alpha_b_climb;
        k.alpha_b_descent = kf_alpha_b_descent;
        return k;
    }
};

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenOpts {
    std::string config;
    std::string fleet = "builtin";
    int days = 29;
    std::string out;
    std::uint64_t seed = 0;
    std::string jitter_profile = "default";
    double transition_fraction = 0.5;

    void apply(json cfg) {
        take(cfg, "fleet", fleet);
        take(cfg, "days", days);
        take(cfg, "out", out);
        take(cfg, "seed", seed);
        take(cfg, "jitter_profile", jitter_profile);
        take(cfg, "transition_fraction", transition_fraction);
        reject_leftovers(cfg);
    }
    json to_json() const {
        return {{"fleet", fleet},
                {"days", days},
                {"out", out},
                {"seed", seed},
                {"jitter_profile", jitter_profile},
                {"transition_fraction", transition_fraction}};
    }
};

int cmd_gen(GenOpts o, std::ostream &err) {
    o.apply(load_config(o.config));
    if (o.out.empty()) throw ConfigError("--out is required");
    const std::vector<perf::AircraftConfig> fleet = load_fleet(o.fleet);
    data::CorpusSpec spec = data::CorpusSpec::defaults(fleet);
    spec.days = o.days;
    spec.seed = o.seed;
    if (o.jitter_profile == "none") {
        spec.jitter = data::CorpusJitter::none();
    } else if (o.jitter_profile != "default") {
        throw ConfigError("unknown jitter profile '" + o.jitter_profile + "' (default|none)");
    }
    spec.jitter.transition_fraction = o.transition_fraction;

    std::vector<std::string> skipped;
    const std::vector<Trajectory> corpus = data::generate_corpus(fleet, spec, &skipped);
    for (const std::string &id : skipped) {
        err << "gen: skipped " << id << " (no feasible configuration after resampling)\n";
    }
    if (corpus.empty()) throw Error("corpus generation produced no trajectories");

    Outputs outputs(o.out);
    outputs.write("corpus.csv", data::format_trajectories(corpus));
    write_manifest(fs::path(o.out) / "manifest.json", "gen", o.config, o.seed,
                   {{"fleet", o.fleet}}, outputs.files(), o.to_json(),
                   {{"trajectories", corpus.size()}, {"skipped", skipped}});
    return kOk;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitOpts {
    std::string config;
    std::string corpus;
    std::string split = "train";
    std::uint64_t split_seed = 0;
    std::uint64_t seed = 0;
    std::string fleet = "builtin";
    std::string out;
    double ridge = 0.1;
    int max_iters = 2000;
    int restarts = 3;
    unsigned threads = 0;

    void apply(json cfg) {
        take(cfg, "corpus", corpus);
        take(cfg, "split", split);
        take(cfg, "split_seed", split_seed);
        take(cfg, "seed", seed);
        take(cfg, "fleet", fleet);
        take(cfg, "out", out);
        take(cfg, "ridge", ridge);
        take(cfg, "max_iters", max_iters);
        take(cfg, "restarts", restarts);
        take(cfg, "threads", threads);
        reject_leftovers(cfg);
    }
    json to_json() const {
        return {{"corpus", corpus}, {"split", split},         {"split_seed", split_seed},
                {"seed", seed},     {"fleet", fleet},         {"out", out},
                {"ridge", ridge},   {"max_iters", max_iters}, {"restarts", restarts}};
    }
};

std::string format_fit_log(const std::vector<opt::FitLogRow> &log) {
    std::ostringstream out;
    out << "trajectory_id,segment,iterations,final_cost,status\n";
    char buf[64];
    for (const opt::FitLogRow &r : log) {
        std::snprintf(buf, sizeof buf, "%.17g", r.final_cost);
        out << r.trajectory_id << ',' << r.segment << ',' << r.iterations << ',' << buf << ','
            << r.status << '\n';
    }
    return out.str();
}

int cmd_fit(FitOpts o, std::ostream &err) {
    o.apply(load_config(o.config));
    if (o.corpus.empty() || o.out.empty()) throw ConfigError("--corpus and --out are required");
    const std::vector<perf::AircraftConfig> fleet = load_fleet(o.fleet);
    const std::vector<Trajectory> corpus = data::read_trajectories(o.corpus);
    const std::vector<Trajectory> train = split_of(corpus, o.split, o.split_seed);
    if (train.empty()) throw opt::EmptyPriorError("split '" + o.split + "' is empty");

    opt::BuildPriorOptions options;
    options.simplex.max_iters = o.max_iters;
    options.simplex.restarts = o.restarts;
    options.crossovers = crossovers_of(fleet);
    options.seed = o.seed;
    options.ridge = o.ridge;
    options.threads = o.threads;
    const opt::PriorBuild build = opt::build_prior(train, options);

    const fs::path out(o.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    opt::write_prior(o.out, build.prior);
    const std::string log_text = format_fit_log(build.log);
    write_text(o.out + ".fitlog.csv", log_text);

    std::size_t failed = 0;
    for (const opt::FitLogRow &r : build.log) failed += r.status != "ok";
    if (failed) err << "fit: " << failed << " segment fits failed or were skipped\n";

    json counts = json::object();
    for (const auto &[key, n] : build.prior.counts()) {
        counts[key.first + "/" + std::string(to_string(key.second))] = n;
    }
    json files = json::array();
    files.push_back({{"path", out.filename().string()}, {"fnv1a64", fnv1a(read_text(o.out))}});
    files.push_back({{"path", out.filename().string() + ".fitlog.csv"},
                     {"fnv1a64", fnv1a(log_text)}});
    write_manifest(o.out + ".manifest.json", "fit", o.config, o.seed,
                   {{"corpus", o.corpus}, {"fleet", o.fleet}}, files, o.to_json(),
                   {{"prior_counts", counts},
                    {"train_trajectories", train.size()},
                    {"attempted_fits", build.log.size()}});
    return kOk;
}

// ---------------------------------------------------------------------------
// assimilate
// ---------------------------------------------------------------------------

struct AssimilateOpts {
    std::string config;
    std::string prior;
    std::string corpus;
    std::string trajectory_id;
    std::string method = "lwpf";
    std::string out;
    std::uint64_t seed = 0;
    MethodOpts m;

    void apply(json cfg) {
        take(cfg, "prior", prior);
        take(cfg, "corpus", corpus);
        take(cfg, "trajectory_id", trajectory_id);
        take(cfg, "method", method);
        take(cfg, "out", out);
        take(cfg, "seed", seed);
        m.apply(cfg);
        reject_leftovers(cfg);
    }
    json to_json() const {
        json j = m.to_json();
        j.update({{"prior", prior},
                  {"corpus", corpus},
                  {"trajectory_id", trajectory_id},
                  {"method", method},
                  {"out", out},
                  {"seed", seed}});
        return j;
    }
};

json state_json(const lssm::StateVec &s) { return {{"h_ft", s.h_ft}, {"tas_kt", s.tas_kt}}; }

json lwpf_line(const Blip &blip, std::size_t k, const lwpf::Diagnostics &d,
               const lwpf::EnsemblePrediction &p) {
    json pred;
    pred["status"] = p.status == lwpf::PredictionStatus::Ok        ? "ok"
                     : p.status == lwpf::PredictionStatus::Reached ? "reached"
                                                                   : "failed";
    pred["time_s"] = p.time_mean_s;
    pred["time_sd_s"] = p.time_sd_s;
    pred["distance_nmi"] = p.distance_mean_nmi;
    pred["distance_sd_nmi"] = p.distance_sd_nmi;
    pred["terminal_fraction"] = p.terminal_fraction;
    json samples = json::array();
    for (const lwpf::EnsembleSample &s : p.samples) {
        if (s.terminal) samples.push_back({s.time_s, s.distance_nmi});
    }
    pred["samples"] = samples;
    return {{"method", "lwpf"},
            {"blip", k},
            {"t_s", blip.t_s},
            {"step", d.t},
            {"observation", state_json(d.observation)},
            {"estimate", state_json(d.estimate)},
            {"n_eff", d.n_eff},
            {"weight_sum", d.weight_sum},
            {"resampled", d.resampled},
            {"reinit", d.reinit},
            {"underflow", d.underflow},
            {"tas_gap_kt", d.tas_gap_kt},
            {"prediction", pred}};
}

int cmd_assimilate(AssimilateOpts o) {
    o.apply(load_config(o.config));
    if (o.corpus.empty() || o.out.empty() || o.trajectory_id.empty()) {
        throw ConfigError("--corpus, --trajectory-id and --out are required");
    }
    const eval::Method method = eval::parse_method(o.method);
    if (method != eval::Method::Lwpf && method != eval::Method::KfTp) {
        throw ConfigError("assimilate supports --method lwpf or kf-tp");
    }
    const std::vector<Trajectory> corpus = data::read_trajectories(o.corpus);
    auto it = std::find_if(corpus.begin(), corpus.end(),
                           [&](const Trajectory &t) { return t.id == o.trajectory_id; });
    if (it == corpus.end()) {
        throw ConfigError("unknown trajectory id '" + o.trajectory_id + "'");
    }
    const Trajectory &traj = *it;
    std::ostringstream lines;

    if (method == eval::Method::Lwpf) {
        if (o.prior.empty()) throw ConfigError("--prior is required for lwpf");
        const opt::PriorSet prior = opt::read_prior(o.prior);
        std::vector<lssm::Theta> thetas = eval::prior_for(prior, traj.aircraft_type, traj.phase);
        if (thetas.empty()) {
            throw opt::EmptyPriorError("prior has no models for " + traj.aircraft_type);
        }
        lwpf::FilterConfig cfg = o.m.filter();
        cfg.seed = opt::derive_seed(o.seed, traj.id);
        lwpf::LiuWestFilter filter(std::move(thetas), cfg);
        for (std::size_t k = 0; k < traj.blips.size(); ++k) {
            const Blip &b = traj.blips[k];
            const lssm::StateVec y{b.h_ft, b.tas_kt};
            lwpf::Diagnostics d;
            if (k == 0) {
                filter.start(y);
                d.observation = y;
                d.estimate = filter.state().estimate;
                d.n_eff = lwpf::effective_n(filter.state());
                for (const lwpf::Particle &p : filter.state().particles) d.weight_sum += p.weight;
            } else {
                d = filter.step(y);
            }
            const lwpf::EnsemblePrediction p = filter.predict_to(traj.phase, traj.h_target_ft);
            lines << lwpf_line(b, k, d, p).dump() << '\n';
        }
    } else {
        const kalman::KfConfig cfg = o.m.kf().config(traj.phase);
        kalman::KfState s;
        for (std::size_t k = 0; k < traj.blips.size(); ++k) {
            const Blip &b = traj.blips[k];
            const Eigen::Vector3d y = kalman::measurement(b);
            s = k == 0 ? kalman::kf_init(y, cfg)
                       : kalman::kf_update(kalman::kf_predict(s, cfg), y, cfg);
            const kalman::KfPrediction p = kalman::kf_tp(s, traj.h_target_ft);
            json line = {
                {"method", "kf-tp"},
                {"blip", k},
                {"t_s", b.t_s},
                {"observation",
                 {{"rocd_ftmin", y(0)}, {"tas_kt", y(1)}, {"h_ft", y(2)}}},
                {"estimate",
                 {{"rocd_ftmin", s.x(0)}, {"tas_kt", s.x(1)}, {"h_ft", s.x(2)}}},
                {"p_trace", s.P.trace()},
                {"prediction",
                 {{"failed", p.failed}, {"time_s", p.time_s}, {"distance_nmi", p.distance_nmi}}}};
            lines << line.dump() << '\n';
        }
    }

    const fs::path out(o.out);
    write_text(out, lines.str());
    json files = json::array();
    files.push_back({{"path", out.filename().string()}, {"fnv1a64", fnv1a(lines.str())}});
    write_manifest(o.out + ".manifest.json", "assimilate", o.config, o.seed,
                   {{"prior", o.prior}, {"corpus", o.corpus}}, files, o.to_json());
    return kOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOpts {
    std::string config;
    std::string prior;
    std::string corpus;
    std::string split = "test";
    std::uint64_t split_seed = 0;
    std::string methods = "all";
    std::string out;
    std::uint64_t seed = 0;
    std::string fleet = "builtin";
    unsigned threads = 0;
    MethodOpts m;

    void apply(json cfg) {
        take(cfg, "prior", prior);
        take(cfg, "corpus", corpus);
        take(cfg, "split", split);
        take(cfg, "split_seed", split_seed);
        take(cfg, "methods", methods);
        take(cfg, "out", out);
        take(cfg, "seed", seed);
        take(cfg, "fleet", fleet);
        take(cfg, "threads", threads);
        m.apply(cfg);
        reject_leftovers(cfg);
    }
    json to_json() const {
        json j = m.to_json();
        j.update({{"prior", prior},
                  {"corpus", corpus},
                  {"split", split},
                  {"split_seed", split_seed},
                  {"methods", methods},
                  {"out", out},
                  {"seed", seed},
                  {"fleet", fleet}});
        return j;
    }
};

std::vector<eval::Method> parse_methods(const std::string &text) {
    if (text == "all") return {std::begin(eval::kAllMethods), std::end(eval::kAllMethods)};
    std::vector<eval::Method> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(eval::parse_method(item));
    if (out.empty()) throw ConfigError("no methods selected");
    return out;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double quantile(const std::vector<double> &sorted, double q) {
    if (sorted.empty()) return std::nan("");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Raw error distributions summarised for error-bar plots.
std::string format_error_bars(const std::vector<eval::MethodResult> &results) {
    std::ostringstream out;
    out << "method,phase,metric,n,mean,sd,p05,p25,p50,p75,p95\n";
    for (const eval::MethodResult &r : results) {
        for (Phase phase : {Phase::Climb, Phase::Descent}) {
            for (int metric = 0; metric < 2; ++metric) {
                std::vector<double> v;
                for (const eval::TpError &e : r.errors) {
                    if (e.phase == phase && !e.failed) {
                        v.push_back(metric == 0 ? e.abs_time_err : e.abs_dist_err);
                    }
                }
                double mean = 0.0;
                for (double x : v) mean += x;
                mean = v.empty() ? std::nan("") : mean / static_cast<double>(v.size());
                double var = 0.0;
                for (double x : v) var += (x - mean) * (x - mean);
                const double sd =
                    v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
                std::sort(v.begin(), v.end());
                out << eval::to_string(r.method) << ',' << to_string(phase) << ','
                    << (metric == 0 ? "abs_time_err_s" : "abs_dist_err_nmi") << ',' << v.size()
                    << ',' << g17(mean) << ',' << g17(sd) << ',' << g17(quantile(v, 0.05))
                    << ',' << g17(quantile(v, 0.25)) << ',' << g17(quantile(v, 0.5)) << ','
                    << g17(quantile(v, 0.75)) << ',' << g17(quantile(v, 0.95)) << '\n';
            }
        }
    }
    return out.str();
}

// Per-type KF-TP against LWPF, sized by scored blips.
std::string format_kf_vs_lwpf(const eval::MethodResult &kf, const eval::MethodResult &pf) {
    std::ostringstream out;
    out << "phase,type,kf_tp_mae_time_s,lwpf_mae_time_s,kf_tp_mae_dist_nmi,lwpf_mae_dist_nmi,"
           "n_points\n";
    for (const eval::Aggregate &a : kf.aggregates) {
        if (a.aircraft_type == "ALL") continue;
        for (const eval::Aggregate &b : pf.aggregates) {
            if (b.phase != a.phase || b.aircraft_type != a.aircraft_type) continue;
            out << to_string(a.phase) << ',' << a.aircraft_type << ',' << g17(a.mae_time_s)
                << ',' << g17(b.mae_time_s) << ',' << g17(a.mae_dist_nmi) << ','
                << g17(b.mae_dist_nmi) << ',' << b.n_points + b.n_failed << '\n';
        }
    }
    return out.str();
}

eval::EvalContext context_of(const std::string &fleet, const std::string &prior,
                             const MethodOpts &m, std::uint64_t seed, unsigned threads,
                             bool need_prior) {
    eval::EvalContext ctx;
    ctx.fleet = load_fleet(fleet);
    if (need_prior) {
        if (prior.empty()) throw ConfigError("--prior is required");
        ctx.prior = opt::read_prior(prior);
    }
    ctx.filter = m.filter();
    ctx.kf = m.kf();
    ctx.seed = seed;
    ctx.threads = threads;
    return ctx;
}

int cmd_evaluate(EvaluateOpts o, std::ostream &err) {
    o.apply(load_config(o.config));
    if (o.corpus.empty() || o.out.empty()) throw ConfigError("--corpus and --out are required");
    const std::vector<eval::Method> methods = parse_methods(o.methods);
    const bool need_prior =
        std::find(methods.begin(), methods.end(), eval::Method::Lwpf) != methods.end();
    const eval::EvalContext ctx =
        context_of(o.fleet, o.prior, o.m, o.seed, o.threads, need_prior);
    const std::vector<Trajectory> test =
        split_of(data::read_trajectories(o.corpus), o.split, o.split_seed);

    std::vector<eval::MethodResult> results;
    for (eval::Method method : methods) {
        results.push_back(eval::evaluate_method(method, test, ctx));
    }

    Outputs outputs(o.out);
    std::vector<eval::Aggregate> all;
    json excluded = json::array();
    for (const eval::MethodResult &r : results) {
        all.insert(all.end(), r.aggregates.begin(), r.aggregates.end());
        outputs.write("blips_" + std::string(eval::to_string(r.method)) + ".csv",
                      eval::format_stream(r.method, r.errors));
        for (const std::string &id : r.excluded) {
            err << "evaluate: " << eval::to_string(r.method) << ": excluded " << id
                << " (target never reached)\n";
            excluded.push_back(id);
        }
    }
    outputs.write("aggregates.csv", eval::format_aggregates(all));
    outputs.write("fig2_error_bars.csv", format_error_bars(results));
    const eval::MethodResult *kf = nullptr;
    const eval::MethodResult *pf = nullptr;
    for (const eval::MethodResult &r : results) {
        if (r.method == eval::Method::KfTp) kf = &r;
        if (r.method == eval::Method::Lwpf) pf = &r;
    }
    if (kf && pf) outputs.write("fig4_kf_vs_lwpf.csv", format_kf_vs_lwpf(*kf, *pf));

    write_manifest(fs::path(o.out) / "manifest.json", "evaluate", o.config, o.seed,
                   {{"prior", o.prior}, {"corpus", o.corpus}, {"fleet", o.fleet}},
                   outputs.files(), o.to_json(),
                   {{"test_trajectories", test.size()}, {"excluded", excluded}});
    return kOk;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepOpts {
    std::string config;
    std::string what;
    std::string prior;
    std::string corpus;
    std::string split = "val";
    std::uint64_t split_seed = 0;
    std::string out;
    std::uint64_t seed = 0;
    std::string fleet = "builtin";
    unsigned threads = 0;
    std::vector<int> counts = eval::kDefaultParticleCounts;
    std::vector<double> alpha_p = eval::KfGrid{}.alpha_p;
    std::vector<double> alpha_q = eval::KfGrid{}.alpha_q;
    std::vector<double> alpha_b = eval::KfGrid{}.alpha_b;
    MethodOpts m;

    void apply(json cfg) {
        take(cfg, "what", what);
        take(cfg, "prior", prior);
        take(cfg, "corpus", corpus);
        take(cfg, "split", split);
        take(cfg, "split_seed", split_seed);
        take(cfg, "out", out);
        take(cfg, "seed", seed);
        take(cfg, "fleet", fleet);
        take(cfg, "threads", threads);
        take(cfg, "counts", counts);
        take(cfg, "alpha_p", alpha_p);
        take(cfg, "alpha_q", alpha_q);
        take(cfg, "alpha_b", alpha_b);
        m.apply(cfg);
        reject_leftovers(cfg);
    }
    json to_json() const {
        json j = m.to_json();
        j.update({{"what", what},
                  {"prior", prior},
                  {"corpus", corpus},
                  {"split", split},
                  {"split_seed", split_seed},
                  {"out", out},
                  {"seed", seed},
                  {"fleet", fleet},
                  {"counts", counts},
                  {"alpha_p", alpha_p},
                  {"alpha_q", alpha_q},
                  {"alpha_b", alpha_b}});
        return j;
    }
};

int cmd_sweep(SweepOpts o) {
    o.apply(load_config(o.config));
    if (o.what != "kf" && o.what != "particles") {
        throw ConfigError("--what must be kf or particles");
    }
    if (o.corpus.empty() || o.out.empty()) throw ConfigError("--corpus and --out are required");
    const eval::EvalContext ctx =
        context_of(o.fleet, o.prior, o.m, o.seed, o.threads, o.what == "particles");
    const std::vector<Trajectory> val =
        split_of(data::read_trajectories(o.corpus), o.split, o.split_seed);
    if (val.empty()) throw ConfigError("split '" + o.split + "' is empty");

    Outputs outputs(o.out);
    if (o.what == "kf") {
        const eval::KfGrid grid{o.alpha_p, o.alpha_q, o.alpha_b};
        outputs.write("sweep_kf.csv", eval::format_kf_sweep(eval::sweep_kf(val, grid, ctx)));
    } else {
        outputs.write("sweep_particles.csv",
                      eval::format_particle_sweep(eval::sweep_particles(val, o.counts, ctx)));
    }
    write_manifest(fs::path(o.out) / "manifest.json", "sweep", o.config, o.seed,
                   {{"prior", o.prior}, {"corpus", o.corpus}, {"fleet", o.fleet}},
                   outputs.files(), o.to_json());
    return kOk;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchOpts {
    std::string config;
    std::string fleet = "builtin";
    int reps = 5;
    std::string out;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    void apply(json cfg) {
        take(cfg, "fleet", fleet);
        take(cfg, "reps", reps);
        take(cfg, "out", out);
        take(cfg, "seed", seed);
        take(cfg, "threads", threads);
        reject_leftovers(cfg);
    }
    json to_json() const {
        return {{"fleet", fleet}, {"reps", reps}, {"out", out}, {"seed", seed}};
    }
};

int cmd_bench(BenchOpts o, std::ostream &out) {
    o.apply(load_config(o.config));
    if (o.reps < 1) throw ConfigError("--reps must be at least 1");
    const std::vector<perf::AircraftConfig> fleet = load_fleet(o.fleet);
    const eval::SurrogateTable surrogates =
        eval::fit_reference_surrogates(fleet, opt::SimplexConfig{}, o.seed, o.threads);
    const std::string table = eval::format_bench(eval::bench_speedup(fleet, surrogates, o.reps));
    if (o.out.empty()) {
        out << table;
        return kOk;
    }
    Outputs outputs(o.out);
    outputs.write("bench.csv", table);
    write_manifest(fs::path(o.out) / "manifest.json", "bench", o.config, o.seed,
                   {{"fleet", o.fleet}}, outputs.files(), o.to_json());
    return kOk;
}

} // namespace

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"adaptp - adaptive climb/descent trajectory prediction"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    GenOpts gen;
    CLI::App *c_gen = app.add_subcommand("gen", "Generate a synthetic trajectory corpus");
    c_gen->add_option("--config", gen.config, "JSON config file (overrides flags)");
    c_gen->add_option("--fleet", gen.fleet, "Fleet JSON file or 'builtin'")->capture_default_str();
    c_gen->add_option("--days", gen.days, "Number of days")->capture_default_str();
    c_gen->add_option("--out", gen.out, "Output directory");
    c_gen->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    c_gen->add_option("--jitter-profile", gen.jitter_profile, "default|none")
        ->capture_default_str();
    c_gen->add_option("--transition-fraction", gen.transition_fraction,
                      "Fraction of jets crossing the CAS/Mach transition")
        ->capture_default_str();

    FitOpts fit;
    CLI::App *c_fit = app.add_subcommand("fit", "Fit the LSSM prior on a corpus split");
    c_fit->add_option("--config", fit.config, "JSON config file (overrides flags)");
    c_fit->add_option("--corpus", fit.corpus, "Trajectory CSV");
    c_fit->add_option("--split", fit.split, "train|val|test")->capture_default_str();
    c_fit->add_option("--split-seed", fit.split_seed, "Day split seed")->capture_default_str();
    c_fit->add_option("--seed", fit.seed, "Fit seed")->capture_default_str();
    c_fit->add_option("--fleet", fit.fleet, "Fleet (crossover altitudes)")->capture_default_str();
    c_fit->add_option("--out", fit.out, "Prior file");
    c_fit->add_option("--ridge", fit.ridge, "Ridge weight toward pure forcing")
        ->capture_default_str();
    c_fit->add_option("--max-iters", fit.max_iters, "Nelder-Mead iterations")->capture_default_str();
    c_fit->add_option("--restarts", fit.restarts, "Jittered restarts")->capture_default_str();
    c_fit->add_option("--threads", fit.threads, "Worker threads (0 = all cores)");

    AssimilateOpts as;
    CLI::App *c_as = app.add_subcommand("assimilate", "Replay one trajectory through a filter");
    c_as->add_option("--config", as.config, "JSON config file (overrides flags)");
    c_as->add_option("--prior", as.prior, "Prior file (lwpf)");
    c_as->add_option("--corpus", as.corpus, "Trajectory CSV");
    c_as->add_option("--trajectory-id", as.trajectory_id, "Trajectory to replay");
    c_as->add_option("--method", as.method, "lwpf|kf-tp")->capture_default_str();
    c_as->add_option("--out", as.out, "Diagnostics JSON-lines file");
    c_as->add_option("--seed", as.seed, "Random seed")->capture_default_str();
    as.m.add(c_as);

    EvaluateOpts ev;
    CLI::App *c_ev = app.add_subcommand("evaluate", "Benchmark the predictors on a split");
    c_ev->add_option("--config", ev.config, "JSON config file (overrides flags)");
    c_ev->add_option("--prior", ev.prior, "Prior file");
    c_ev->add_option("--corpus", ev.corpus, "Trajectory CSV");
    c_ev->add_option("--split", ev.split, "train|val|test")->capture_default_str();
    c_ev->add_option("--split-seed", ev.split_seed, "Day split seed")->capture_default_str();
    c_ev->add_option("--methods", ev.methods, "all or comma list")->capture_default_str();
    c_ev->add_option("--out", ev.out, "Report directory");
    c_ev->add_option("--seed", ev.seed, "Random seed")->capture_default_str();
    c_ev->add_option("--fleet", ev.fleet, "Fleet for bada_* methods")->capture_default_str();
    c_ev->add_option("--threads", ev.threads, "Worker threads (0 = all cores)");
    ev.m.add(c_ev);

    SweepOpts sw;
    CLI::App *c_sw = app.add_subcommand("sweep", "Hyperparameter sweeps on a split");
    c_sw->add_option("--config", sw.config, "JSON config file (overrides flags)");
    c_sw->add_option("--what", sw.what, "kf|particles");
    c_sw->add_option("--prior", sw.prior, "Prior file (particles)");
    c_sw->add_option("--corpus", sw.corpus, "Trajectory CSV");
    c_sw->add_option("--split", sw.split, "train|val|test")->capture_default_str();
    c_sw->add_option("--split-seed", sw.split_seed, "Day split seed")->capture_default_str();
    c_sw->add_option("--out", sw.out, "Output directory");
    c_sw->add_option("--seed", sw.seed, "Random seed")->capture_default_str();
    c_sw->add_option("--fleet", sw.fleet, "Fleet file or 'builtin'")->capture_default_str();
    c_sw->add_option("--threads", sw.threads, "Worker threads (0 = all cores)");
    c_sw->add_option("--counts", sw.counts, "Particle counts")->delimiter(',');
    c_sw->add_option("--alpha-p", sw.alpha_p, "alpha_p grid")->delimiter(',');
    c_sw->add_option("--alpha-q", sw.alpha_q, "alpha_q grid")->delimiter(',');
    c_sw->add_option("--alpha-b", sw.alpha_b, "alpha_b grid (ft/min)")->delimiter(',');
    sw.m.add(c_sw);

    BenchOpts bn;
    CLI::App *c_bn = app.add_subcommand("bench", "Time LSSM rollouts against RK4 integration");
    c_bn->add_option("--config", bn.config, "JSON config file (overrides flags)");
    c_bn->add_option("--fleet", bn.fleet, "Fleet file or 'builtin'")->capture_default_str();
    c_bn->add_option("--reps", bn.reps, "Repetitions (median)")->capture_default_str();
    c_bn->add_option("--out", bn.out, "Output directory (stdout when omitted)");
    c_bn->add_option("--seed", bn.seed, "Surrogate fit seed")->capture_default_str();
    c_bn->add_option("--threads", bn.threads, "Worker threads (0 = all cores)");

    std::string export_out;
    CLI::App *c_ex = app.add_subcommand("export-fleet", "Write the built-in fleet as JSON");
    c_ex->add_option("--out", export_out, "Fleet JSON file")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back(); // program name
    try {
        app.parse(rev);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*c_gen) return cmd_gen(gen, err);
        if (*c_fit) return cmd_fit(fit, err);
        if (*c_as) return cmd_assimilate(as);
        if (*c_ev) return cmd_evaluate(ev, err);
        if (*c_sw) return cmd_sweep(sw);
        if (*c_bn) return cmd_bench(bn, out);
        if (*c_ex) {
            save_fleet(perf::synth_fleet(), export_out);
            return kOk;
        }
    } catch (const ConfigError &e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const FormatError &e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kUsageError;
}

int run(int argc, char **argv) {
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

} // namespace adaptp::cli
