#include <algorithm>
#include <cmath>
#include <limits>

#include "bessopt/errors.hpp"
#include "bessopt/problem.hpp"

namespace bessopt::optimizer {

void ProblemSpec::validate() const {
    base_case.validate();
    for (const auto& s : scenarios) s.validate();
    disturbance.validate();
    sim.validate();
    if (n_es < 1) throw ConfigError("problem.n_es must be at least 1");
    if (!(f_lo < f_hi) || f_lo < 0.0) throw ConfigError("problem.target_band must satisfy 0 <= f_lo < f_hi");
    if (!(zeta_star > 0.0 && zeta_star < 1.0)) throw ConfigError("problem.zeta_star must lie in (0, 1)");
    if (static_cast<std::size_t>(n_es) > candidate_buses.size()) {
        throw ConfigError("problem.n_es exceeds the number of candidate buses");
    }
    const grid::BusIndex index(base_case);
    for (int b : candidate_buses) {
        if (!index.contains(b)) throw ConfigError("candidate bus " + std::to_string(b) + " does not exist");
    }
    if (!(match_tol > 0.0)) throw ConfigError("problem.match_tol must be positive");
    if (!(sample_dt > 0.0)) throw ConfigError("problem.sample_dt must be positive");
}

namespace {

dynamics::SimConfig angle_config(const ProblemSpec& spec, const grid::PowerSystemCase& c) {
    dynamics::SimConfig cfg = spec.sim;
    cfg.record_channels.clear();
    for (const auto& g : c.generators) {
        cfg.record_channels.push_back({dynamics::ChannelKind::rotor_angle, g.bus});
    }
    return cfg;
}

std::size_t decimation(const ProblemSpec& spec) {
    return static_cast<std::size_t>(std::max(1.0, std::round(spec.sample_dt / spec.sim.dt)));
}

std::vector<double> coi_angle(const dynamics::TraceSet& trace, const grid::PowerSystemCase& c, int bus) {
    const std::size_t n = trace.samples();
    std::vector<double> coi(n, 0.0);
    double h_total = 0.0;
    for (const auto& g : c.generators) h_total += g.h;
    for (const auto& g : c.generators) {
        const auto& a = trace.channel(dynamics::ChannelSpec{dynamics::ChannelKind::rotor_angle, g.bus}.name());
        for (std::size_t k = 0; k < n; ++k) coi[k] += g.h * a[k] / h_total;
    }
    const auto& a = trace.channel(dynamics::ChannelSpec{dynamics::ChannelKind::rotor_angle, bus}.name());
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] - coi[k];
    return out;
}

std::vector<modal::Mode> significant(const std::vector<modal::Mode>& modes, double floor) {
    std::vector<modal::Mode> out;
    for (const auto& m : modes) {
        if (m.energy >= floor) out.push_back(m);
    }
    return out;
}

std::vector<modal::Mode> identify(const ProblemSpec& spec, const std::vector<double>& signal) {
    const std::size_t factor = decimation(spec);
    const auto samples = modal::decimate(signal, factor);
    return modal::estimate_modes(samples, spec.sim.dt * static_cast<double>(factor), spec.esprit);
}

} // namespace

PreparedProblem prepare(const ProblemSpec& spec) {
    spec.validate();
    PreparedProblem out;
    out.spec = spec;
    std::vector<grid::Scenario> levels = spec.scenarios;
    if (levels.empty()) levels.push_back(grid::Scenario::identity());
    for (const auto& s : levels) {
        LevelBaseline base;
        base.scenario = s;
        base.power_case = grid::apply_scenario(spec.base_case, s);
        base.op = grid::solve_power_flow(base.power_case);
        const auto trace = dynamics::simulate(base.power_case, base.op, {}, spec.disturbance,
                                              angle_config(spec, base.power_case));
        const auto skip = static_cast<std::size_t>(std::round(spec.esprit.window_start / spec.sim.dt));
        double best = -1.0;
        for (const auto& g : base.power_case.generators) {
            const auto rel = coi_angle(trace, base.power_case, g.bus);
            if (skip >= rel.size()) throw ConfigError("simulation ends before the identification window");
            double mean = 0.0;
            for (std::size_t k = skip; k < rel.size(); ++k) mean += rel[k];
            mean /= static_cast<double>(rel.size() - skip);
            double energy = 0.0;
            for (std::size_t k = skip; k < rel.size(); ++k) energy += (rel[k] - mean) * (rel[k] - mean);
            if (energy > best) {
                best = energy;
                base.channel_bus = g.bus;
            }
        }
        base.modes = identify(spec, coi_angle(trace, base.power_case, base.channel_bus));
        base.target = modal::select_target_mode(base.modes, spec.f_lo, spec.f_hi);
        bool target_skipped = false;
        for (const auto& m : base.modes) {
            if (!target_skipped && m.freq == base.target.freq && m.zeta == base.target.zeta) {
                target_skipped = true;
                continue;
            }
            if (m.freq >= spec.band_lo && m.freq <= spec.band_hi && m.energy >= spec.mode_energy_floor) {
                base.checked.push_back(m);
            }
        }
        out.levels.push_back(std::move(base));
    }
    return out;
}

std::vector<bess::BessParams> make_fleet(const Placement& placement, const bess::BessParams& defaults) {
    if (placement.locs.size() != placement.gains.size()) {
        throw DomainError("placement locations and gains differ in length");
    }
    std::vector<bess::BessParams> fleet;
    for (std::size_t i = 0; i < placement.locs.size(); ++i) {
        bess::BessParams unit = defaults;
        unit.bus = placement.locs[i];
        unit.k_es = placement.gains[i];
        fleet.push_back(unit);
    }
    return fleet;
}

dynamics::TraceSet simulate_level(const PreparedProblem& problem, std::size_t level,
                                  std::span<const bess::BessParams> fleet,
                                  const std::vector<dynamics::ChannelSpec>& extra) {
    const auto& base = problem.levels.at(level);
    auto cfg = angle_config(problem.spec, base.power_case);
    cfg.record_channels.insert(cfg.record_channels.end(), extra.begin(), extra.end());
    return dynamics::simulate(base.power_case, base.op, fleet, problem.spec.disturbance, cfg);
}

std::vector<modal::Mode> trace_modes(const PreparedProblem& problem, std::size_t level, const dynamics::TraceSet& trace) {
    const auto& base = problem.levels.at(level);
    return identify(problem.spec, coi_angle(trace, base.power_case, base.channel_bus));
}

std::vector<modal::Mode> level_modes(const PreparedProblem& problem, std::size_t level,
                                     std::span<const bess::BessParams> fleet) {
    return trace_modes(problem, level, simulate_level(problem, level, fleet));
}

LevelOutcome evaluate_level(const PreparedProblem& problem, std::size_t level, const Placement& placement,
                            const bess::BessParams& defaults) {
    const auto& spec = problem.spec;
    const auto& base = problem.levels.at(level);
    const auto fleet = make_fleet(placement, defaults);
    LevelOutcome out;
    out.modes = level_modes(problem, level, fleet);
    try {
        out.target_zeta = modal::select_target_mode(out.modes, spec.f_lo, spec.f_hi).zeta;
        out.target_found = true;
    } catch (const TargetMissingError&) {
        out.target_zeta = 0.0;
    }
    out.target_violation = std::max(0.0, spec.zeta_star - out.target_zeta);
    out.matches = modal::match_modes(base.checked, significant(out.modes, spec.candidate_energy_floor), spec.match_tol);
    for (const auto& pair : out.matches) {
        if (pair.candidate) {
            out.mode_violation += std::max(0.0, pair.baseline.zeta - pair.candidate->zeta - spec.zeta_drop_tol);
        }
    }
    return out;
}

namespace {

double gain_sum(const Placement& placement) {
    double total = 0.0;
    for (double g : placement.gains) total += g;
    return total;
}

} // namespace

Fitness evaluate_particle(const Placement& placement, const PreparedProblem& problem, const bess::BessParams& defaults) {
    Fitness f;
    f.objective = gain_sum(placement);
    try {
        std::vector<LevelOutcome> outcomes;
        for (std::size_t l = 0; l < problem.levels.size(); ++l) {
            outcomes.push_back(evaluate_level(problem, l, placement, defaults));
        }
        double violation = 0.0;
        for (const auto& o : outcomes) violation += o.target_violation;
        for (const auto& o : outcomes) violation += o.mode_violation;
        for (const auto& o : outcomes) f.target_zeta.push_back(o.target_zeta);
        f.violation = violation;
        f.feasible = violation == 0.0;
    } catch (const Error& e) {
        return Fitness::failure(f.objective, e.what());
    }
    return f;
}

Fitness evaluate_single(const Placement& placement, const PreparedProblem& problem, std::size_t level,
                        const bess::BessParams& defaults) {
    const auto& spec = problem.spec;
    const auto& base = problem.levels.at(level);
    Fitness f;
    f.objective = gain_sum(placement);
    try {
        const auto fleet = make_fleet(placement, defaults);
        const auto modes = level_modes(problem, level, fleet);
        double zeta_k = 0.0;
        try {
            zeta_k = modal::select_target_mode(modes, spec.f_lo, spec.f_hi).zeta;
        } catch (const TargetMissingError&) {
        }
        double worse = 0.0;
        const auto strong = significant(modes, spec.candidate_energy_floor);
        for (const auto& pair : modal::match_modes(base.checked, strong, spec.match_tol)) {
            if (pair.candidate) worse += std::max(0.0, pair.baseline.zeta - pair.candidate->zeta - spec.zeta_drop_tol);
        }
        f.target_zeta = {zeta_k};
        f.violation = std::max(0.0, spec.zeta_star - zeta_k) + worse;
        f.feasible = f.violation == 0.0;
    } catch (const Error& e) {
        return Fitness::failure(f.objective, e.what());
    }
    return f;
}

OptimizationResult optimize(const PreparedProblem& problem, const PsoConfig& cfg, const bess::BessParams& defaults) {
    const FitnessFn fn = [&](const Placement& p) { return evaluate_particle(p, problem, defaults); };
    return optimize_with(fn, problem.spec.candidate_buses, problem.spec.n_es, cfg);
}

} // namespace bessopt::optimizer
