#include "bessopt/case_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "bessopt/errors.hpp"

namespace bessopt::jsonutil {

namespace {

std::string field(const std::string& where, const char* key) {
    return where.empty() ? std::string(key) : where + "." + key;
}

} // namespace

nlohmann::json read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
}

const nlohmann::json& member(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ConfigError("missing field '" + field(where, key) + "'");
    }
    return obj.at(key);
}

double number(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto& v = member(obj, key, where);
    if (!v.is_number()) {
        throw ConfigError("field '" + field(where, key) + "' must be a number");
    }
    return v.get<double>();
}

double number_or(const nlohmann::json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) {
        return fallback;
    }
    return number(obj, key, where);
}

int integer(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto& v = member(obj, key, where);
    if (!v.is_number_integer()) {
        throw ConfigError("field '" + field(where, key) + "' must be an integer");
    }
    return v.get<int>();
}

int integer_or(const nlohmann::json& obj, const char* key, int fallback, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) {
        return fallback;
    }
    return integer(obj, key, where);
}

std::string string_or(const nlohmann::json& obj, const char* key, const std::string& fallback,
                      const std::string& where) {
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) {
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_string()) {
        throw ConfigError("field '" + field(where, key) + "' must be a string");
    }
    return v.get<std::string>();
}

} // namespace bessopt::jsonutil

namespace bessopt::grid {

using nlohmann::json;
namespace ju = bessopt::jsonutil;

namespace {

BusType parse_bus_type(const std::string& s, const std::string& where) {
    if (s == "slack") return BusType::slack;
    if (s == "pv") return BusType::pv;
    if (s == "pq") return BusType::pq;
    throw ConfigError("field '" + where + ".type' must be one of slack, pv, pq");
}

const char* bus_type_name(BusType t) {
    switch (t) {
    case BusType::slack: return "slack";
    case BusType::pv: return "pv";
    case BusType::pq: return "pq";
    }
    return "pq";
}

const json& array_member(const json& doc, const char* key) {
    const auto& arr = ju::member(doc, key, "");
    if (!arr.is_array()) {
        throw ConfigError(std::string("field '") + key + "' must be an array");
    }
    return arr;
}

} // namespace

Scenario scenario_from_json(const json& doc, const std::string& where) {
    Scenario s;
    s.name = ju::string_or(doc, "name", "base", where);
    s.load_scale = ju::number_or(doc, "load_scale", 1.0, where);
    s.gen_scale = ju::number_or(doc, "gen_scale", 1.0, where);
    if (doc.contains("per_generator_scale")) {
        const auto& m = doc.at("per_generator_scale");
        if (!m.is_object()) {
            throw ConfigError("field '" + where + ".per_generator_scale' must be an object of bus id -> multiplier");
        }
        for (const auto& [key, value] : m.items()) {
            int bus = 0;
            try {
                bus = std::stoi(key);
            } catch (const std::exception&) {
                throw ConfigError("field '" + where + ".per_generator_scale' has non-integer key '" + key + "'");
            }
            if (!value.is_number()) {
                throw ConfigError("field '" + where + ".per_generator_scale." + key + "' must be a number");
            }
            s.per_generator_scale[bus] = value.get<double>();
        }
    }
    s.validate();
    return s;
}

json scenario_to_json(const Scenario& s) {
    json doc{{"name", s.name}, {"load_scale", s.load_scale}, {"gen_scale", s.gen_scale}};
    if (!s.per_generator_scale.empty()) {
        json m = json::object();
        for (const auto& [bus, scale] : s.per_generator_scale) {
            m[std::to_string(bus)] = scale;
        }
        doc["per_generator_scale"] = m;
    }
    return doc;
}

PowerSystemCase case_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("case document must be a JSON object");
    }
    PowerSystemCase c;
    c.name = ju::string_or(doc, "name", "", "");
    c.system_mva_base = ju::number(doc, "base_mva", "");
    c.system_freq = ju::number(doc, "freq_hz", "");

    const auto& buses = array_member(doc, "buses");
    for (std::size_t k = 0; k < buses.size(); ++k) {
        const std::string where = "buses[" + std::to_string(k) + "]";
        Bus b;
        b.id = ju::integer(buses[k], "id", where);
        if (b.id <= 0) {
            throw ConfigError("field '" + where + ".id' must be a positive integer");
        }
        b.type = parse_bus_type(ju::string_or(buses[k], "type", "pq", where), where);
        b.v_set = ju::number_or(buses[k], "v_set", 1.0, where);
        if (buses[k].contains("shunt")) {
            const auto& sh = buses[k].at("shunt");
            if (sh.is_array() && sh.size() == 2 && sh[0].is_number() && sh[1].is_number()) {
                b.shunt = Complex(sh[0].get<double>(), sh[1].get<double>());
            } else if (sh.is_object()) {
                b.shunt = Complex(ju::number_or(sh, "g", 0.0, where + ".shunt"), ju::number_or(sh, "b", 0.0, where + ".shunt"));
            } else {
                throw ConfigError("field '" + where + ".shunt' must be [g, b] or {\"g\":..,\"b\":..}");
            }
        }
        c.buses.push_back(b);
    }

    const auto& branches = array_member(doc, "branches");
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const std::string where = "branches[" + std::to_string(k) + "]";
        Branch br;
        br.from_bus = ju::integer(branches[k], "from_bus", where);
        br.to_bus = ju::integer(branches[k], "to_bus", where);
        br.r = ju::number_or(branches[k], "r", 0.0, where);
        br.x = ju::number(branches[k], "x", where);
        br.b = ju::number_or(branches[k], "b", 0.0, where);
        if (branches[k].contains("status")) {
            const auto& st = branches[k].at("status");
            if (st.is_boolean()) {
                br.in_service = st.get<bool>();
            } else if (st.is_string() && (st == "in" || st == "out")) {
                br.in_service = st == "in";
            } else {
                throw ConfigError("field '" + where + ".status' must be \"in\", \"out\" or a boolean");
            }
        }
        c.branches.push_back(br);
    }

    const auto& gens = array_member(doc, "generators");
    for (std::size_t k = 0; k < gens.size(); ++k) {
        const std::string where = "generators[" + std::to_string(k) + "]";
        Generator g;
        g.bus = ju::integer(gens[k], "bus", where);
        g.p_set = ju::number_or(gens[k], "p_set", 0.0, where);
        g.h = ju::number(gens[k], "h", where);
        g.d = ju::number_or(gens[k], "d", 0.0, where);
        g.xdp = ju::number(gens[k], "xdp", where);
        c.generators.push_back(g);
    }

    if (doc.contains("loads")) {
        const auto& loads = array_member(doc, "loads");
        for (std::size_t k = 0; k < loads.size(); ++k) {
            const std::string where = "loads[" + std::to_string(k) + "]";
            Load l;
            l.bus = ju::integer(loads[k], "bus", where);
            l.p = ju::number_or(loads[k], "p", 0.0, where);
            l.q = ju::number_or(loads[k], "q", 0.0, where);
            c.loads.push_back(l);
        }
    }

    if (doc.contains("scenarios")) {
        const auto& scen = array_member(doc, "scenarios");
        for (std::size_t k = 0; k < scen.size(); ++k) {
            c.scenarios.push_back(scenario_from_json(scen[k], "scenarios[" + std::to_string(k) + "]"));
        }
    }

    try {
        c.validate();
    } catch (const StructuralError& e) {
        throw ConfigError(std::string("invalid case: ") + e.what());
    }
    return c;
}

json case_to_json(const PowerSystemCase& c) {
    json doc;
    if (!c.name.empty()) {
        doc["name"] = c.name;
    }
    doc["base_mva"] = c.system_mva_base;
    doc["freq_hz"] = c.system_freq;
    json buses = json::array();
    for (const auto& b : c.buses) {
        json jb{{"id", b.id}, {"type", bus_type_name(b.type)}};
        if (b.type != BusType::pq) {
            jb["v_set"] = b.v_set;
        }
        if (b.shunt != Complex(0.0, 0.0)) {
            jb["shunt"] = json::array({b.shunt.real(), b.shunt.imag()});
        }
        buses.push_back(jb);
    }
    doc["buses"] = buses;
    json branches = json::array();
    for (const auto& br : c.branches) {
        branches.push_back({{"from_bus", br.from_bus}, {"to_bus", br.to_bus}, {"r", br.r}, {"x", br.x},
                            {"b", br.b}, {"status", br.in_service ? "in" : "out"}});
    }
    doc["branches"] = branches;
    json gens = json::array();
    for (const auto& g : c.generators) {
        gens.push_back({{"bus", g.bus}, {"p_set", g.p_set}, {"h", g.h}, {"d", g.d}, {"xdp", g.xdp}});
    }
    doc["generators"] = gens;
    json loads = json::array();
    for (const auto& l : c.loads) {
        loads.push_back({{"bus", l.bus}, {"p", l.p}, {"q", l.q}});
    }
    doc["loads"] = loads;
    json scen = json::array();
    for (const auto& s : c.scenarios) {
        scen.push_back(scenario_to_json(s));
    }
    doc["scenarios"] = scen;
    return doc;
}

PowerSystemCase load_case_file(const std::filesystem::path& path) {
    return case_from_json(jsonutil::read_file(path));
}

void save_case_file(const PowerSystemCase& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    out << case_to_json(c).dump(2) << '\n';
}

} // namespace bessopt::grid
