// Prior I/O - line-oriented LSSM prior files
// Part of adaptp - adaptive climb/descent trajectory prediction
//
// # adaptp-prior v1
// <type> <phase> <segment> <source_id> <theta0..theta5> <dt> <final_cost>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "adaptp/optimizer.hpp"

namespace adaptp::opt {

void write_prior(const std::string &path, const PriorSet &prior) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot open '" + path + "' for writing");
    }
    out << "# adaptp-prior v1\n";
    out << "# type phase segment source_id phi_a00 phi_a01 phi_a10 phi_a11 "
           "phi_b0 phi_b1 dt final_cost\n";
    char cost[64];
    for (const PriorEntry &e : prior.entries) {
        std::snprintf(cost, sizeof cost, "%.17g", e.final_cost);
        out << e.aircraft_type << ' ' << to_string(e.phase) << ' '
            << e.segment << ' ' << e.source_id << ' '
            << lssm::format_record(e.model) << ' ' << cost << '\n';
    }
    if (!out) {
        throw Error("failed writing prior to '" + path + "'");
    }
}

PriorSet read_prior(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open prior file '" + path + "'");
    }
    PriorSet prior;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        PriorEntry e;
        std::string phase;
        if (!(fields >> e.aircraft_type >> phase >> e.segment >> e.source_id)) {
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": missing tag fields");
        }
        try {
            e.phase = parse_phase(phase);
            std::string rest;
            std::getline(fields, rest);
            const auto last = rest.find_last_not_of(" \t\r");
            const auto split = rest.find_last_of(" \t", last);
            if (last == std::string::npos || split == std::string::npos) {
                throw FormatError("missing final cost");
            }
            e.model = lssm::parse_record(rest.substr(0, split));
            e.final_cost = std::stod(rest.substr(split + 1));
        } catch (const FormatError &err) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": " +
                              err.what());
        } catch (const std::logic_error &) {
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": bad final cost");
        }
        prior.entries.push_back(std::move(e));
    }
    return prior;
}

} // namespace adaptp::opt
