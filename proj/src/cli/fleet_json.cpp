// CLI - aircraft configuration files
// Part of adaptp - adaptive climb/descent trajectory prediction

#include <fstream>

#include "json.hpp"

#include "adaptp/cli.hpp"
#include "adaptp/errors.hpp"

namespace adaptp::cli {

using nlohmann::json;

namespace {

json schedule_json(const perf::SpeedSchedule &s) {
    return {{"cas_kt", s.cas_kt}, {"mach", s.mach}};
}

perf::SpeedSchedule schedule_from(const json &j) {
    return {j.at("cas_kt").get<double>(), j.at("mach").get<double>()};
}

json config_json(const perf::AircraftConfig &c) {
    return {
        {"type", c.type_code},
        {"engine", c.engine == perf::EngineType::Jet ? "jet" : "turboprop"},
        {"mass_kg", c.mass_kg},
        {"g0", c.g0},
        {"thrust",
         {{"c1", c.thrust.c1},
          {"c2", c.thrust.c2},
          {"c3", c.thrust.c3},
          {"break_ft", c.thrust.break_ft},
          {"break_factor", c.thrust.break_factor}}},
        {"drag",
         {{"cd0", c.drag.cd0}, {"cd2", c.drag.cd2}, {"wing_area_m2", c.drag.wing_area_m2}}},
        {"climb_schedule", schedule_json(c.climb_schedule)},
        {"descent_schedule", schedule_json(c.descent_schedule)},
        {"descent_thrust_fraction", c.descent_thrust_fraction},
    };
}

perf::AircraftConfig config_from(const json &j) {
    perf::AircraftConfig c;
    c.type_code = j.at("type").get<std::string>();
    const std::string engine = j.at("engine").get<std::string>();
    if (engine == "jet") {
        c.engine = perf::EngineType::Jet;
    } else if (engine == "turboprop") {
        c.engine = perf::EngineType::Turboprop;
    } else {
        throw ConfigError("aircraft '" + c.type_code + "': unknown engine '" + engine + "'");
    }
    c.mass_kg = j.at("mass_kg").get<double>();
    c.g0 = j.value("g0", c.g0);
    const json &t = j.at("thrust");
    c.thrust.c1 = t.at("c1").get<double>();
    c.thrust.c2 = t.at("c2").get<double>();
    c.thrust.c3 = t.at("c3").get<double>();
    c.thrust.break_ft = t.value("break_ft", 0.0);
    c.thrust.break_factor = t.value("break_factor", 1.0);
    const json &d = j.at("drag");
    c.drag = {d.at("cd0").get<double>(), d.at("cd2").get<double>(),
              d.at("wing_area_m2").get<double>()};
    c.climb_schedule = schedule_from(j.at("climb_schedule"));
    c.descent_schedule = schedule_from(j.at("descent_schedule"));
    c.descent_thrust_fraction = j.value("descent_thrust_fraction", c.descent_thrust_fraction);
    perf::validate(c);
    return c;
}

} // namespace

std::vector<perf::AircraftConfig> load_fleet(const std::string &spec) {
    if (spec == "builtin") return perf::synth_fleet();
    std::ifstream in(spec);
    if (!in) throw ConfigError("cannot open fleet file '" + spec + "'");
    std::vector<perf::AircraftConfig> fleet;
    try {
        const json doc = json::parse(in);
        for (const json &entry : doc.at("aircraft")) fleet.push_back(config_from(entry));
    } catch (const json::exception &e) {
        throw ConfigError("fleet file '" + spec + "': " + e.what());
    }
    if (fleet.empty()) throw ConfigError("fleet file '" + spec + "' lists no aircraft");
    return fleet;
}

void save_fleet(const std::vector<perf::AircraftConfig> &fleet, const std::string &path) {
    json doc;
    doc["aircraft"] = json::array();
    for (const perf::AircraftConfig &c : fleet) doc["aircraft"].push_back(config_json(c));
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
}

} // namespace adaptp::cli
