#include "bessopt/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "bessopt/case_io.hpp"
#include "bessopt/cases.hpp"
#include "bessopt/errors.hpp"

namespace bessopt::cli {

using nlohmann::json;
using jsonutil::integer_or;
using jsonutil::number;
using jsonutil::number_or;
using jsonutil::string_or;

namespace {

std::string sub(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

std::vector<double> number_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError("field '" + where + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError("field '" + where + "' must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<int> integer_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError("field '" + where + "' must be an array of integers");
    std::vector<int> out;
    for (const auto& x : v) {
        if (!x.is_number_integer()) throw ConfigError("field '" + where + "' must be an array of integers");
        out.push_back(x.get<int>());
    }
    return out;
}

Complex complex_from(const json& v, const std::string& where) {
    const auto parts = number_list(v, where);
    if (parts.size() != 2) throw ConfigError("field '" + where + "' must be [real, imag]");
    return {parts[0], parts[1]};
}

} // namespace

CandidateRule CandidateRule::parse(const json& value, const std::string& where) {
    CandidateRule rule;
    if (value.is_array()) {
        rule.kind = Kind::list;
        rule.buses = integer_list(value, where);
        return rule;
    }
    if (!value.is_string()) throw ConfigError("field '" + where + "' must be \"all\", \"generators+m\" or a list");
    const auto text = value.get<std::string>();
    if (text == "all") return rule;
    const std::string prefix = "generators+";
    if (text == "generators") {
        rule.kind = Kind::generators_plus;
        return rule;
    }
    if (text.rfind(prefix, 0) == 0) {
        try {
            std::size_t used = 0;
            rule.m = std::stoi(text.substr(prefix.size()), &used);
            if (used != text.size() - prefix.size() || rule.m < 0) throw std::invalid_argument("m");
        } catch (const std::exception&) {
            throw ConfigError("field '" + where + "': cannot read m from '" + text + "'");
        }
        rule.kind = Kind::generators_plus;
        return rule;
    }
    throw ConfigError("field '" + where + "': unknown candidate rule '" + text + "'");
}

dynamics::Disturbance disturbance_from_json(const json& doc, const std::string& where) {
    const auto kind = string_or(doc, "kind", "bus_fault", where);
    dynamics::Disturbance d;
    if (kind == "none") return d;
    if (kind == "bus_fault") {
        d.kind = dynamics::DisturbanceKind::bus_fault;
    } else if (kind == "branch_fault") {
        d.kind = dynamics::DisturbanceKind::branch_fault;
    } else {
        throw ConfigError("field '" + sub(where, "kind") + "': unknown disturbance '" + kind + "'");
    }
    d.target = jsonutil::integer(doc, "target", where);
    d.t_on = number_or(doc, "t_on", 0.0, where);
    d.t_off = number_or(doc, "t_off", 0.1, where);
    if (doc.contains("fault_admittance")) {
        d.fault_admittance = complex_from(doc.at("fault_admittance"), sub(where, "fault_admittance"));
    }
    try {
        d.validate();
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return d;
}

json disturbance_to_json(const dynamics::Disturbance& d) {
    const char* kind = d.kind == dynamics::DisturbanceKind::none        ? "none"
                       : d.kind == dynamics::DisturbanceKind::bus_fault ? "bus_fault"
                                                                        : "branch_fault";
    return {{"kind", kind},
            {"target", d.target},
            {"t_on", d.t_on},
            {"t_off", d.t_off},
            {"fault_admittance", {d.fault_admittance.real(), d.fault_admittance.imag()}}};
}

bess::BessParams bess_from_json(const json& doc, const bess::BessParams& defaults, const std::string& where) {
    if (!doc.is_object()) throw ConfigError("field '" + where + "' must be an object");
    bess::BessParams p = defaults;
    p.bus = integer_or(doc, "bus", defaults.bus, where);
    p.k_es = number_or(doc, "k_es", defaults.k_es, where);
    p.t_es = number_or(doc, "t_es", defaults.t_es, where);
    p.p_max = number_or(doc, "p_max", defaults.p_max, where);
    p.e_total = number_or(doc, "e_total", defaults.e_total, where);
    p.soc_min = number_or(doc, "soc_min", defaults.soc_min, where);
    p.soc_max = number_or(doc, "soc_max", defaults.soc_max, where);
    p.soc_init = number_or(doc, "soc_init", defaults.soc_init, where);
    p.t_i = number_or(doc, "t_i", defaults.t_i, where);
    if (doc.contains("controller")) {
        try {
            p.controller = bess::parse_controller(string_or(doc, "controller", "proportional", where));
        } catch (const Error& e) {
            throw ConfigError(sub(where, "controller") + ": " + e.what());
        }
    }
    return p;
}

RunFile parse_run(const json& doc) {
    if (!doc.is_object()) throw ConfigError("run file must be a JSON object");
    RunFile run;
    if (doc.contains("problem")) {
        const auto& p = doc.at("problem");
        const std::string w = "problem";
        run.case_ref = string_or(p, "case", "", w);
        if (p.contains("scenarios")) {
            const auto& s = p.at("scenarios");
            if (!s.is_array()) throw ConfigError("field 'problem.scenarios' must be an array of names");
            for (const auto& name : s) {
                if (!name.is_string()) throw ConfigError("field 'problem.scenarios' must be an array of names");
                run.scenarios.push_back(name.get<std::string>());
            }
        }
        if (p.contains("disturbance")) run.disturbance = disturbance_from_json(p.at("disturbance"), "problem.disturbance");
        run.n_es = integer_or(p, "n_es", run.n_es, w);
        if (p.contains("target_band")) {
            const auto band = number_list(p.at("target_band"), "problem.target_band");
            if (band.size() != 2) throw ConfigError("field 'problem.target_band' must be [f_lo, f_hi]");
            run.target_band = std::make_pair(band[0], band[1]);
        }
        run.zeta_star = number_or(p, "zeta_star", run.zeta_star, w);
        if (p.contains("candidates")) run.candidates = CandidateRule::parse(p.at("candidates"), "problem.candidates");
        run.sim.t_end = number_or(p, "t_end", run.sim.t_end, w);
        run.sim.dt = number_or(p, "dt", run.sim.dt, w);
        run.sim.freq_filter_tf = number_or(p, "freq_filter_tf", run.sim.freq_filter_tf, w);
        run.mode_energy_floor = number_or(p, "mode_energy_floor", run.mode_energy_floor, w);
        run.zeta_drop_tol = number_or(p, "zeta_drop_tol", run.zeta_drop_tol, w);
    }
    if (doc.contains("esprit")) {
        const auto& e = doc.at("esprit");
        run.esprit.window_start = number_or(e, "window_start", run.esprit.window_start, "esprit");
        run.esprit.model_order = integer_or(e, "model_order", run.esprit.model_order, "esprit");
        run.esprit.hankel_rows = integer_or(e, "hankel_rows", run.esprit.hankel_rows, "esprit");
        run.esprit.sv_threshold = number_or(e, "sv_threshold", run.esprit.sv_threshold, "esprit");
        run.esprit.max_order = integer_or(e, "max_order", run.esprit.max_order, "esprit");
    }
    if (doc.contains("pso")) {
        const auto& p = doc.at("pso");
        auto& c = run.pso;
        c.population = integer_or(p, "population", c.population, "pso");
        c.iterations = integer_or(p, "iterations", c.iterations, "pso");
        c.c1 = number_or(p, "c1", c.c1, "pso");
        c.c2 = number_or(p, "c2", c.c2, "pso");
        c.inertia = number_or(p, "inertia", c.inertia, "pso");
        c.k_min = number_or(p, "k_min", c.k_min, "pso");
        c.k_max = number_or(p, "k_max", c.k_max, "pso");
        c.vmax_frac = number_or(p, "vmax_frac", c.vmax_frac, "pso");
        c.penalty_weight = number_or(p, "penalty_weight", c.penalty_weight, "pso");
        if (p.contains("seed")) {
            if (!p.at("seed").is_number_unsigned()) throw ConfigError("field 'pso.seed' must be a non-negative integer");
            c.seed = p.at("seed").get<std::uint64_t>();
        }
    }
    if (doc.contains("bess_defaults")) run.bess_defaults = bess_from_json(doc.at("bess_defaults"), run.bess_defaults, "bess_defaults");
    if (doc.contains("fleet")) {
        const auto& f = doc.at("fleet");
        if (!f.is_array()) throw ConfigError("field 'fleet' must be an array");
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string w = "fleet[" + std::to_string(i) + "]";
            jsonutil::member(f[i], "bus", w);
            run.fleet.push_back(bess_from_json(f[i], run.bess_defaults, w));
        }
    }
    if (doc.contains("simulate")) {
        const auto& s = doc.at("simulate");
        run.sim.t_end = number_or(s, "t_end", run.sim.t_end, "simulate");
        run.sim.dt = number_or(s, "dt", run.sim.dt, "simulate");
        if (s.contains("channels")) {
            const auto& ch = s.at("channels");
            if (!ch.is_array()) throw ConfigError("field 'simulate.channels' must be an array of names");
            for (const auto& name : ch) {
                if (!name.is_string()) throw ConfigError("field 'simulate.channels' must be an array of names");
                run.channels.push_back(name.get<std::string>());
            }
        }
    }
    if (doc.contains("sweep")) {
        const auto& s = doc.at("sweep");
        if (s.contains("n_range")) run.sweep_range = integer_list(s.at("n_range"), "sweep.n_range");
        if (s.contains("cost")) {
            const auto& c = s.at("cost");
            run.cost.cost1 = number_or(c, "cost1", run.cost.cost1, "sweep.cost");
            run.cost.cost2 = number_or(c, "cost2", run.cost.cost2, "sweep.cost");
            run.cost.dw_max = number_or(c, "dw_max", run.cost.dw_max, "sweep.cost");
            run.cost.e_per_unit = number_or(c, "e_per_unit", run.cost.e_per_unit, "sweep.cost");
            run.cost.s_base = number_or(c, "s_base", run.cost.s_base, "sweep.cost");
        }
    }
    if (doc.contains("compare")) {
        const auto& c = doc.at("compare");
        CompareSpec spec;
        spec.placement.locs = integer_list(jsonutil::member(c, "locs", "compare"), "compare.locs");
        spec.placement.gains = number_list(jsonutil::member(c, "gains", "compare"), "compare.gains");
        if (spec.placement.locs.size() != spec.placement.gains.size()) {
            throw ConfigError("fields 'compare.locs' and 'compare.gains' differ in length");
        }
        if (c.contains("t_i")) spec.t_i = number_list(c.at("t_i"), "compare.t_i");
        run.compare = spec;
    }
    return run;
}

RunFile load_run_file(const std::filesystem::path& path) {
    RunFile run = parse_run(jsonutil::read_file(path));
    if (!run.case_ref.empty()) {
        const auto names = cases::bundled_case_names();
        const bool bundled = std::find(names.begin(), names.end(), run.case_ref) != names.end();
        const std::filesystem::path ref(run.case_ref);
        if (!bundled && ref.is_relative()) run.case_ref = (path.parent_path() / ref).string();
    }
    return run;
}

grid::PowerSystemCase resolve_case(const std::string& ref, const std::filesystem::path& base_dir) {
    const auto names = cases::bundled_case_names();
    if (std::find(names.begin(), names.end(), ref) != names.end()) return cases::load_bundled_case(ref);
    std::filesystem::path path(ref);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    if (!std::filesystem::exists(path)) {
        throw ConfigError("case '" + ref + "' is neither a bundled case nor an existing file");
    }
    return grid::load_case_file(path);
}

optimizer::ProblemSpec build_problem(const RunFile& run, const grid::PowerSystemCase& c) {
    optimizer::ProblemSpec spec;
    spec.base_case = c;
    for (const auto& name : run.scenarios) {
        try {
            spec.scenarios.push_back(c.scenario(name));
        } catch (const LookupError& e) {
            throw ConfigError(std::string("problem.scenarios: ") + e.what());
        }
    }
    std::optional<cases::CaseDefaults> defaults;
    try {
        defaults = cases::bundled_defaults(c.name);
    } catch (const LookupError&) {
    }
    if (run.disturbance) {
        spec.disturbance = *run.disturbance;
    } else if (defaults) {
        spec.disturbance = defaults->disturbance;
    } else {
        throw ConfigError("problem.disturbance is required for cases without bundled defaults");
    }
    if (run.target_band) {
        spec.f_lo = run.target_band->first;
        spec.f_hi = run.target_band->second;
    } else if (defaults) {
        spec.f_lo = defaults->f_lo;
        spec.f_hi = defaults->f_hi;
    }
    spec.n_es = run.n_es;
    spec.zeta_star = run.zeta_star;
    spec.sim = run.sim;
    spec.esprit = run.esprit;
    spec.mode_energy_floor = run.mode_energy_floor;
    spec.zeta_drop_tol = run.zeta_drop_tol;
    switch (run.candidates.kind) {
    case CandidateRule::Kind::all: spec.candidate_buses = optimizer::all_buses(c); break;
    case CandidateRule::Kind::generators_plus: spec.candidate_buses = optimizer::reduce_candidates(c, run.candidates.m); break;
    case CandidateRule::Kind::list: {
        auto buses = run.candidates.buses;
        std::sort(buses.begin(), buses.end());
        buses.erase(std::unique(buses.begin(), buses.end()), buses.end());
        spec.candidate_buses = buses;
        break;
    }
    }
    return spec;
}

json result_to_json(const optimizer::OptimizationResult& result, const optimizer::PreparedProblem& problem,
                    const optimizer::PsoConfig& cfg) {
    json levels = json::array();
    for (std::size_t l = 0; l < problem.levels.size(); ++l) {
        const auto& base = problem.levels[l];
        json entry = {{"scenario", base.scenario.name},
                      {"baseline_zeta", base.target.zeta},
                      {"baseline_freq", base.target.freq},
                      {"channel", dynamics::ChannelSpec{dynamics::ChannelKind::rotor_angle, base.channel_bus}.name()}};
        entry["zeta"] = l < result.fitness.target_zeta.size() ? json(result.fitness.target_zeta[l]) : json(nullptr);
        levels.push_back(entry);
    }
    json history = json::array();
    for (const auto& h : result.history) {
        history.push_back({{"iteration", h.iteration}, {"objective", h.objective},
                           {"penalized", std::isfinite(h.penalized) ? json(h.penalized) : json(nullptr)},
                           {"feasible", h.feasible},
                           {"feasible_objective", std::isnan(h.feasible_objective) ? json(nullptr) : json(h.feasible_objective)}});
    }
    return {{"case", problem.spec.base_case.name},
            {"seed", result.seed},
            {"n_es", problem.spec.n_es},
            {"zeta_star", problem.spec.zeta_star},
            {"target_band", {problem.spec.f_lo, problem.spec.f_hi}},
            {"feasible", result.feasible()},
            {"best", {{"locs", result.best.locs}, {"gains", result.best.gains}}},
            {"objective", result.fitness.objective},
            {"violation", std::isfinite(result.fitness.violation) ? json(result.fitness.violation) : json(nullptr)},
            {"levels", levels},
            {"history", history},
            {"evaluations", result.evaluations},
            {"pso", {{"population", cfg.population}, {"iterations", cfg.iterations}, {"c1", cfg.c1}, {"c2", cfg.c2},
                     {"inertia", cfg.inertia}, {"k_min", cfg.k_min}, {"k_max", cfg.k_max},
                     {"vmax_frac", cfg.vmax_frac}, {"penalty_weight", cfg.penalty_weight}}}};
}

optimizer::OptimizationResult result_from_json(const json& doc) {
    optimizer::OptimizationResult r;
    try {
        r.seed = doc.at("seed").get<std::uint64_t>();
        r.best.locs = doc.at("best").at("locs").get<std::vector<int>>();
        r.best.gains = doc.at("best").at("gains").get<std::vector<double>>();
        r.fitness.objective = doc.at("objective").get<double>();
        r.fitness.feasible = doc.at("feasible").get<bool>();
        const auto& v = doc.at("violation");
        r.fitness.violation = v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
        r.fitness.failed = v.is_null();
        for (const auto& level : doc.at("levels")) {
            if (!level.at("zeta").is_null()) r.fitness.target_zeta.push_back(level.at("zeta").get<double>());
        }
        for (const auto& h : doc.at("history")) {
            const auto& p = h.at("penalized");
            optimizer::HistoryEntry e{h.at("iteration").get<int>(), h.at("objective").get<double>(),
                                      p.is_null() ? std::numeric_limits<double>::infinity() : p.get<double>(),
                                      h.at("feasible").get<bool>()};
            if (h.contains("feasible_objective") && !h.at("feasible_objective").is_null()) {
                e.feasible_objective = h.at("feasible_objective").get<double>();
            }
            r.history.push_back(e);
        }
        r.evaluations = doc.at("evaluations").get<long>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("result file: ") + e.what());
    }
    return r;
}

void write_history_csv(const optimizer::OptimizationResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << "iteration,objective,penalized,feasible,feasible_objective\n";
    char line[160];
    for (const auto& h : result.history) {
        std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%d,", h.iteration, h.objective, h.penalized, h.feasible ? 1 : 0);
        out << line;
        if (!std::isnan(h.feasible_objective)) {
            std::snprintf(line, sizeof line, "%.9g", h.feasible_objective);
            out << line;
        }
        out << "\n";
    }
}

void write_modes_csv(const std::vector<modal::Mode>& modes, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << "freq_hz,zeta,amplitude,phase_rad,energy\n";
    char line[160];
    for (const auto& m : modes) {
        std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%.9g\n", m.freq, m.zeta, m.amplitude, m.phase, m.energy);
        out << line;
    }
}

std::vector<modal::Mode> read_modes_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    if (line.rfind("freq_hz,zeta,amplitude,phase_rad,energy", 0) != 0) {
        throw ConfigError(path.string() + ":1: unexpected mode table header");
    }
    std::vector<modal::Mode> modes;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        modal::Mode m;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &m.freq, &m.zeta, &m.amplitude, &m.phase, &m.energy) != 5) {
            throw ConfigError(path.string() + ":" + std::to_string(row) + ": expected five numbers");
        }
        modes.push_back(m);
    }
    return modes;
}

} // namespace bessopt::cli
