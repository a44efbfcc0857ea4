// Data I/O - trajectory CSV and day-level splits
// Part of adaptp - adaptive climb/descent trajectory prediction

#include "adaptp/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "adaptp/errors.hpp"

namespace adaptp::data {

namespace {

std::vector<std::string> split_fields(const std::string &line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string &text, const std::string &where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception &) {
        throw FormatError(where + ": bad number '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v)) {
        throw FormatError(where + ": bad number '" + text + "'");
    }
    return v;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

} // namespace

std::vector<Trajectory> parse_trajectories(const std::string &text,
                                           const std::string &source) {
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    std::vector<Trajectory> out;
    std::set<std::string> seen;

    if (!std::getline(in, line)) return out;
    ++line_no;
    if (strip_cr(line) != kCsvHeader) {
        throw FormatError(source + ":1: unexpected header");
    }
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        const std::vector<std::string> f = split_fields(line);
        if (f.size() != 9) {
            throw FormatError(where + ": expected 9 fields, got " +
                              std::to_string(f.size()));
        }
        if (f[0].empty()) throw FormatError(where + ": empty id");
        Phase phase;
        try {
            phase = parse_phase(f[2]);
        } catch (const FormatError &e) {
            throw FormatError(where + ": trajectory '" + f[0] + "': " + e.what());
        }
        const Blip blip{parse_number(f[4], where), parse_number(f[5], where),
                        parse_number(f[6], where), parse_number(f[7], where)};
        const double h_target = parse_number(f[8], where);

        if (out.empty() || out.back().id != f[0]) {
            if (!seen.insert(f[0]).second) {
                throw FormatError(where + ": rows of trajectory '" + f[0] +
                                  "' are not contiguous");
            }
            Trajectory t;
            t.id = f[0];
            t.aircraft_type = f[1];
            t.phase = phase;
            t.day_tag = f[3];
            t.h_target_ft = h_target;
            out.push_back(std::move(t));
        }
        Trajectory &t = out.back();
        if (t.aircraft_type != f[1] || t.phase != phase || t.day_tag != f[3] ||
            t.h_target_ft != h_target) {
            throw FormatError(where + ": trajectory '" + t.id +
                              "' changes type/phase/day/target mid-trajectory");
        }
        if (!t.blips.empty() && !(blip.t_s > t.blips.back().t_s)) {
            throw FormatError(where + ": trajectory '" + t.id +
                              "': time not strictly increasing");
        }
        t.blips.push_back(blip);
    }
    for (const Trajectory &t : out) validate(t);
    return out;
}

std::vector<Trajectory> read_trajectories(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open trajectory file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trajectories(buf.str(), path);
}

std::string format_trajectories(const std::vector<Trajectory> &trajs) {
    std::string out = std::string(kCsvHeader) + "\n";
    char row[512];
    for (const Trajectory &t : trajs) {
        for (const Blip &b : t.blips) {
            std::snprintf(row, sizeof row, "%s,%s,%s,%s,%.2f,%.2f,%.2f,%.2f,%.2f\n",
                          t.id.c_str(), t.aircraft_type.c_str(),
                          std::string(to_string(t.phase)).c_str(),
                          t.day_tag.c_str(), b.t_s, b.h_ft, b.tas_kt,
                          b.rocd_ftmin, t.h_target_ft);
            out += row;
        }
    }
    return out;
}

void write_trajectories(const std::vector<Trajectory> &trajs,
                        const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot open '" + path + "' for writing");
    }
    out << format_trajectories(trajs);
    if (!out) throw Error("failed writing '" + path + "'");
}

DatasetSplit split_by_day(const std::vector<Trajectory> &trajs,
                          std::uint64_t seed, SplitRatio ratio) {
    std::set<std::string> unique;
    for (const Trajectory &t : trajs) unique.insert(t.day_tag);
    std::vector<std::string> days(unique.begin(), unique.end());
    const auto n = static_cast<long>(days.size());
    if (n < 3) {
        throw ConfigError("day split needs at least 3 distinct days, got " +
                          std::to_string(n));
    }
    // Fisher-Yates with an explicit generator so splits are portable.
    std::mt19937_64 rng(seed);
    for (long i = n - 1; i > 0; --i) {
        const auto j = static_cast<long>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(days[static_cast<std::size_t>(i)],
                  days[static_cast<std::size_t>(j)]);
    }
    const double total = ratio.train + ratio.val + ratio.test;
    long n_val = static_cast<long>(std::floor(ratio.val / total * n + 1e-9));
    long n_test = std::lround(ratio.test / total * n);
    n_val = std::max(n_val, 1L);
    n_test = std::max(n_test, 1L);
    long n_train = n - n_val - n_test;
    if (n_train < 1) {
        n_train = 1;
        n_test = n - n_train - n_val;
    }
    DatasetSplit split;
    auto it = days.begin();
    split.train.assign(it, it + n_train);
    it += n_train;
    split.val.assign(it, it + n_val);
    it += n_val;
    split.test.assign(it, days.end());
    for (auto *v : {&split.train, &split.val, &split.test}) {
        std::sort(v->begin(), v->end());
    }
    return split;
}

SplitName parse_split(const std::string &name) {
    if (name == "train") return SplitName::Train;
    if (name == "val") return SplitName::Val;
    if (name == "test") return SplitName::Test;
    throw ConfigError("unknown split '" + name + "'");
}

std::vector<Trajectory> select_split(const std::vector<Trajectory> &trajs,
                                     const DatasetSplit &split,
                                     SplitName which) {
    const std::vector<std::string> &days =
        which == SplitName::Train ? split.train
        : which == SplitName::Val ? split.val
                                  : split.test;
    const std::set<std::string> wanted(days.begin(), days.end());
    std::vector<Trajectory> out;
    for (const Trajectory &t : trajs) {
        if (wanted.count(t.day_tag)) out.push_back(t);
    }
    return out;
}

} // namespace adaptp::data
