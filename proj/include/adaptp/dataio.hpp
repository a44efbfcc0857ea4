// Data I/O - trajectory CSV, day-level splits and synthetic corpora
// Part of adaptp - adaptive climb/descent trajectory prediction
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "adaptp/perfmodel.hpp"
#include "adaptp/trajectory.hpp"

namespace adaptp::data {

/// CSV header of the trajectory format (one row per blip).
inline constexpr const char *kCsvHeader =
    "id,type,phase,day,t_s,h_ft,tas_kt,rocd_ftmin,h_target_ft";

/// Rows of one trajectory must be contiguous. Values are printed with two
/// decimals. FormatError (with line numbers / trajectory id) on bad input.
std::vector<Trajectory> read_trajectories(const std::string &path);
std::vector<Trajectory> parse_trajectories(const std::string &text,
                                           const std::string &source = "<text>");
void write_trajectories(const std::vector<Trajectory> &trajs,
                        const std::string &path);
std::string format_trajectories(const std::vector<Trajectory> &trajs);

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

struct SplitRatio {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

/// Shuffles the distinct day tags with `seed` and partitions them:
/// val = floor(val * n), test = round(test * n), train = the rest, each
/// at least one day. ConfigError with fewer than three days.
DatasetSplit split_by_day(const std::vector<Trajectory> &trajs,
                          std::uint64_t seed, SplitRatio ratio = {});

enum class SplitName { Train, Val, Test };
SplitName parse_split(const std::string &name);

/// Trajectories whose day belongs to the named split, in input order.
std::vector<Trajectory> select_split(const std::vector<Trajectory> &trajs,
                                     const DatasetSplit &split,
                                     SplitName which);

/// Per-flight perturbations of the reference configuration.
struct CorpusJitter {
    double mass_frac = 0.20;    ///< uniform +/- fraction of mass
    double thrust_frac = 0.10;  ///< uniform +/- fraction of thrust
    double cas_kt = 15.0;       ///< uniform +/- CAS schedule offset
    double mach = 0.02;         ///< uniform +/- Mach schedule offset
    double day_thrust_frac = 0.03; ///< day-level thrust offset (sd)
    double day_cas_kt = 4.0;       ///< day-level CAS offset (sd)
    double noise_h_ft = 100.0;
    double noise_tas_kt = 2.5;
    double noise_rocd_ftmin = 100.0;
    /// Fraction of jet flights whose segment spans the CAS/Mach crossover.
    double transition_fraction = 0.5;

    /// All perturbations and noise switched off.
    static CorpusJitter none();
};

struct PhaseCounts {
    int climbs = 0;
    int descents = 0;
};

struct CorpusSpec {
    int days = 29;
    /// Flights per day and type; types missing from the map get none.
    std::map<std::string, PhaseCounts> per_day;
    CorpusJitter jitter;
    /// Turboprop type flying fixed-rate descents (empty = none).
    std::string fixed_rate_descent_type = "TP1";
    std::uint64_t seed = 0;

    /// Defaults sized for ~1 000 trajectories over 29 days.
    static CorpusSpec defaults(const std::vector<perf::AircraftConfig> &fleet);
};

/// Day tag "D01", "D02", ...
std::string day_tag(int day_index);

/// Generates the synthetic corpus. Flights whose sampled configuration
/// cannot complete the phase are resampled up to five times, then dropped
/// (their ids are appended to `skipped` when given).
std::vector<Trajectory> generate_corpus(
    const std::vector<perf::AircraftConfig> &fleet, const CorpusSpec &spec,
    std::vector<std::string> *skipped = nullptr);

/// Rounds blip values to the two decimals used on disk.
void quantize(Trajectory &traj);

} // namespace adaptp::data
