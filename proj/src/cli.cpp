#include "bessopt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>

#include "bessopt/case_io.hpp"
#include "bessopt/cases.hpp"
#include "bessopt/cost.hpp"
#include "bessopt/errors.hpp"
#include "bessopt/run_config.hpp"

namespace bessopt::cli {

namespace {

namespace fs = std::filesystem;
using dynamics::ChannelKind;
using dynamics::ChannelSpec;

struct Context {
    RunFile run;
    fs::path run_dir;
    grid::PowerSystemCase power_case;
    bool have_case = false;
};

Context load_context(const RunManifest& m, bool need_case) {
    Context ctx;
    if (!m.run_path.empty()) {
        if (!fs::exists(m.run_path)) throw ConfigError("run file '" + m.run_path + "' does not exist");
        ctx.run = load_run_file(m.run_path);
        ctx.run_dir = fs::path(m.run_path).parent_path();
    }
    if (m.seed) ctx.run.pso.seed = *m.seed;
    ctx.run.pso.workers = m.workers > 0 ? m.workers : optimizer::default_workers();
    const std::string ref = !m.case_path.empty() ? m.case_path : ctx.run.case_ref;
    if (!ref.empty()) {
        ctx.power_case = resolve_case(ref, {});
        ctx.have_case = true;
    } else if (need_case) {
        throw ConfigError("no case given: use --case or problem.case in the run file");
    }
    return ctx;
}

fs::path output_file(const RunManifest& m, const std::string& name) {
    fs::create_directories(m.output_dir);
    return fs::path(m.output_dir) / name;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

int cmd_simulate(const RunManifest& m, std::ostream& out, std::ostream& log) {
    Context ctx = load_context(m, true);
    const auto& c = ctx.power_case;
    dynamics::Disturbance dist;
    if (ctx.run.disturbance) {
        dist = *ctx.run.disturbance;
    } else {
        try {
            dist = cases::bundled_defaults(c.name).disturbance;
        } catch (const LookupError&) {
        }
    }
    dynamics::SimConfig cfg = ctx.run.sim;
    for (const auto& name : ctx.run.channels) {
        try {
            cfg.record_channels.push_back(ChannelSpec::parse(name));
        } catch (const Error& e) {
            throw ConfigError(std::string("simulate.channels: ") + e.what());
        }
    }
    if (cfg.record_channels.empty()) {
        for (const auto& g : c.generators) cfg.record_channels.push_back({ChannelKind::rotor_angle, g.bus});
        for (const auto& g : c.generators) cfg.record_channels.push_back({ChannelKind::rotor_speed, g.bus});
        for (const auto& u : ctx.run.fleet) {
            cfg.record_channels.push_back({ChannelKind::bus_frequency, u.bus});
            cfg.record_channels.push_back({ChannelKind::bess_power, u.bus});
            cfg.record_channels.push_back({ChannelKind::bess_soc, u.bus});
        }
    }
    const auto op = grid::solve_power_flow(c);
    if (!m.quiet) log << "power flow converged in " << op.iterations << " iterations, mismatch " << op.mismatch << "\n";
    const auto trace = dynamics::simulate(c, op, ctx.run.fleet, dist, cfg);
    const auto trace_path = output_file(m, "trace.csv");
    dynamics::write_trace_csv(trace, trace_path);
    std::string soc = "bus,delta_soc_percent\n";
    for (const auto& u : ctx.run.fleet) {
        const auto name = ChannelSpec{ChannelKind::bess_power, u.bus}.name();
        if (!trace.has(name)) continue;
        char line[96];
        std::snprintf(line, sizeof line, "%d,%.9g\n", u.bus,
                      bess::soc_change_percent(trace.t, trace.channel(name), u.e_total, c.system_mva_base));
        soc += line;
    }
    write_text(output_file(m, "soc_report.csv"), soc);
    out << "wrote " << trace_path.string() << " (" << trace.samples() << " samples, " << trace.channels.size()
        << " channels)\n";
    return ok;
}

int cmd_identify(const RunManifest& m, std::ostream& out, std::ostream& log) {
    if (m.trace_path.empty()) throw ConfigError("identify needs --trace");
    Context ctx = load_context(m, m.coi);
    const auto trace = dynamics::read_trace_csv(m.trace_path);
    if (trace.channels.empty()) throw ConfigError("trace has no channels");
    const std::string channel = m.channel.empty() ? trace.channels.front().first : m.channel;
    if (!trace.has(channel)) throw ConfigError("trace has no channel '" + channel + "'");
    std::vector<double> signal = trace.channel(channel);
    if (m.coi) {
        const auto spec = ChannelSpec::parse(channel);
        if (spec.kind != ChannelKind::rotor_angle) throw ConfigError("--coi applies to rotor angle channels only");
        const auto rel = dynamics::coi_relative_angles(trace, ctx.power_case);
        for (std::size_t g = 0; g < ctx.power_case.generators.size(); ++g) {
            if (ctx.power_case.generators[g].bus == spec.id) signal = rel[g];
        }
    }
    if (trace.samples() < 2) throw ConfigError("trace needs at least two samples");
    const double dt = trace.t[1] - trace.t[0];
    const auto factor = static_cast<std::size_t>(std::max(1.0, std::round(m.sample_dt / dt)));
    const auto samples = modal::decimate(signal, factor);
    const auto modes = modal::estimate_modes(samples, dt * static_cast<double>(factor), ctx.run.esprit);
    const auto path = output_file(m, "modes.csv");
    write_modes_csv(modes, path);
    if (!m.quiet) log << "identified " << modes.size() << " oscillatory modes on " << channel << "\n";
    for (const auto& mode : modes) {
        char line[128];
        std::snprintf(line, sizeof line, "%8.4f Hz  zeta %8.4f %%  energy %.4f\n", mode.freq, 100.0 * mode.zeta, mode.energy);
        out << line;
    }
    return ok;
}

void report_levels(const optimizer::PreparedProblem& problem, std::ostream& log) {
    for (const auto& level : problem.levels) {
        char line[160];
        std::snprintf(line, sizeof line, "level %s: target %.4f Hz, zeta %.3f %% without storage (channel delta_g%d)\n",
                      level.scenario.name.c_str(), level.target.freq, 100.0 * level.target.zeta, level.channel_bus);
        log << line;
    }
}

int cmd_optimize(const RunManifest& m, std::ostream& out, std::ostream& log) {
    Context ctx = load_context(m, true);
    const auto spec = build_problem(ctx.run, ctx.power_case);
    const auto problem = optimizer::prepare(spec);
    if (!m.quiet) report_levels(problem, log);
    const auto result = optimizer::optimize(problem, ctx.run.pso, ctx.run.bess_defaults);
    write_text(output_file(m, "result.json"), result_to_json(result, problem, ctx.run.pso).dump(2) + "\n");
    write_history_csv(result, output_file(m, "history.csv"));
    out << (result.feasible() ? "feasible" : "infeasible") << " objective " << result.fitness.objective << " locs";
    for (std::size_t i = 0; i < result.best.locs.size(); ++i) {
        out << " " << result.best.locs[i] << ":" << result.best.gains[i];
    }
    out << "\n";
    return result.feasible() ? ok : infeasible;
}

int cmd_cost_sweep(const RunManifest& m, std::ostream& out, std::ostream& log) {
    Context ctx = load_context(m, true);
    auto range = ctx.run.sweep_range;
    if (range.empty()) range = {1, 2, 3};
    const auto spec = build_problem(ctx.run, ctx.power_case);
    for (int n : range) {
        if (n < 1 || static_cast<std::size_t>(n) > spec.candidate_buses.size()) {
            throw ConfigError("sweep.n_range entry " + std::to_string(n) + " outside [1, candidate count]");
        }
    }
    auto problem = optimizer::prepare([&] {
        auto s = spec;
        s.n_es = range.front();
        return s;
    }());
    if (!m.quiet) report_levels(problem, log);
    const auto reports = cost::nes_sweep(
        range,
        [&](int n) {
            auto p = problem;
            p.spec.n_es = n;
            if (!m.quiet) log << "optimizing n_es = " << n << "\n";
            return optimizer::optimize(p, ctx.run.pso, ctx.run.bess_defaults);
        },
        ctx.run.cost);
    write_text(output_file(m, "cost_sweep.csv"), cost::sweep_csv(reports));
    out << cost::sweep_csv(reports);
    const auto best = cost::recommended_nes(reports);
    if (best) {
        out << "recommended n_es = " << *best << "\n";
        return ok;
    }
    out << "no feasible n_es in the sweep\n";
    return infeasible;
}

int cmd_compare(const RunManifest& m, std::ostream& out, std::ostream& log) {
    Context ctx = load_context(m, true);
    optimizer::Placement placement;
    std::vector<double> t_i = {0.01, 0.1, 1.0};
    if (ctx.run.compare) {
        placement = ctx.run.compare->placement;
        t_i = ctx.run.compare->t_i;
    } else if (!ctx.run.fleet.empty()) {
        for (const auto& u : ctx.run.fleet) {
            placement.locs.push_back(u.bus);
            placement.gains.push_back(u.k_es);
        }
    } else {
        throw ConfigError("compare-controllers needs a 'compare' section or a 'fleet'");
    }
    auto spec = build_problem(ctx.run, ctx.power_case);
    spec.n_es = static_cast<int>(placement.locs.size());
    spec.candidate_buses = placement.locs;
    std::sort(spec.candidate_buses.begin(), spec.candidate_buses.end());
    const auto problem = optimizer::prepare(spec);
    if (!m.quiet) report_levels(problem, log);

    struct Variant {
        std::string label;
        bess::BessParams defaults;
    };
    std::vector<Variant> variants;
    variants.push_back({"proportional", ctx.run.bess_defaults});
    variants.back().defaults.controller = bess::ControllerKind::proportional;
    for (double ti : t_i) {
        Variant v{"pi_ti" + std::to_string(ti), ctx.run.bess_defaults};
        char label[64];
        std::snprintf(label, sizeof label, "pi_ti%g", ti);
        v.label = label;
        v.defaults.controller = bess::ControllerKind::pi;
        v.defaults.t_i = ti;
        variants.push_back(v);
    }
    std::vector<ChannelSpec> pes;
    for (int bus : placement.locs) pes.push_back({ChannelKind::bess_power, bus});

    dynamics::TraceSet combined;
    std::string table = "controller,t_i,target_freq_hz,target_zeta,peak_abs_pes\n";
    for (const auto& v : variants) {
        const auto fleet = optimizer::make_fleet(placement, v.defaults);
        const auto trace = optimizer::simulate_level(problem, 0, fleet, pes);
        const auto modes = optimizer::trace_modes(problem, 0, trace);
        double zeta = std::nan("");
        double freq = std::nan("");
        try {
            const auto target = modal::select_target_mode(modes, spec.f_lo, spec.f_hi);
            zeta = target.zeta;
            freq = target.freq;
        } catch (const TargetMissingError&) {
        }
        double peak = 0.0;
        if (combined.t.empty()) combined.t = trace.t;
        for (const auto& ch : pes) {
            const auto& samples = trace.channel(ch.name());
            for (double p : samples) peak = std::max(peak, std::abs(p));
            combined.add_channel(v.label + "_" + ch.name()) = samples;
        }
        char line[192];
        std::snprintf(line, sizeof line, "%s,%s,%.9g,%.9g,%.9g\n", v.label.c_str(),
                      v.defaults.controller == bess::ControllerKind::pi ? std::to_string(v.defaults.t_i).c_str() : "",
                      freq, zeta, peak);
        table += line;
    }
    write_text(output_file(m, "compare.csv"), table);
    dynamics::write_trace_csv(combined, output_file(m, "compare_traces.csv"));
    out << table;
    return ok;
}

} // namespace

int run(const RunManifest& m, std::ostream& out, std::ostream& log) {
    try {
        if (m.command == "simulate") return cmd_simulate(m, out, log);
        if (m.command == "identify") return cmd_identify(m, out, log);
        if (m.command == "optimize") return cmd_optimize(m, out, log);
        if (m.command == "cost-sweep") return cmd_cost_sweep(m, out, log);
        if (m.command == "compare-controllers") return cmd_compare(m, out, log);
        log << "unknown command '" << m.command
            << "'\nusage: bessopt <simulate|identify|optimize|cost-sweep|compare-controllers> [options]\n";
        return config_error;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const LookupError& e) {
        log << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const StructuralError& e) {
        log << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const CapacityError& e) {
        log << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const Error& e) {
        log << "numerical failure: " << e.what() << "\n";
        return numerical_failure;
    } catch (const fs::filesystem_error& e) {
        log << "config error: " << e.what() << "\n";
        return config_error;
    }
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Placement and gain co-optimisation of storage units for oscillation damping"};
    app.require_subcommand(1);
    RunManifest m;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--case", m.case_path, "Bundled case name (ne39_weak, two_area, smib) or case file");
        sub->add_option("--run", m.run_path, "Run file (JSON)");
        sub->add_option("--out", m.output_dir, "Output directory");
        sub->add_option("--seed", m.seed, "Override the PSO seed");
        sub->add_option("--workers", m.workers, "Concurrent fitness evaluations");
        sub->add_flag("--quiet", m.quiet, "Suppress progress messages");
    };
    common(app.add_subcommand("simulate", "Time-domain run; writes trace.csv and soc_report.csv"));
    common(app.add_subcommand("optimize", "Placement and gain search; writes result.json and history.csv"));
    common(app.add_subcommand("cost-sweep", "One search per unit count; writes cost_sweep.csv"));
    common(app.add_subcommand("compare-controllers", "Proportional against PI at a fixed placement"));
    auto* identify = app.add_subcommand("identify", "Mode table from a trace CSV");
    common(identify);
    identify->add_option("--trace", m.trace_path, "Trace CSV")->required();
    identify->add_option("--channel", m.channel, "Channel name, default the first");
    identify->add_flag("--coi", m.coi, "Use the rotor angle relative to the centre of inertia (needs --case)");
    identify->add_option("--sample-dt", m.sample_dt, "Identification sample interval in seconds");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }
    m.command = app.get_subcommands().front()->get_name();
    return run(m, std::cout, std::cerr);
}

} // namespace bessopt::cli
