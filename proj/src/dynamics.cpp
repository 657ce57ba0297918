#include "bessopt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bessopt/errors.hpp"

namespace bessopt::dynamics {

Disturbance Disturbance::bus_fault(int bus, double t_on, double t_off, Complex y) {
    return Disturbance{DisturbanceKind::bus_fault, bus, t_on, t_off, y};
}

Disturbance Disturbance::branch_fault(int branch, double t_on, double t_off, Complex y) {
    return Disturbance{DisturbanceKind::branch_fault, branch, t_on, t_off, y};
}

void Disturbance::validate() const {
    if (kind == DisturbanceKind::none) {
        return;
    }
    if (!(t_on >= 0.0) || !(t_off > t_on)) {
        throw ConfigError("disturbance needs t_off > t_on >= 0");
    }
    if (!std::isfinite(fault_admittance.real()) || !std::isfinite(fault_admittance.imag())) {
        throw ConfigError("fault admittance must be finite");
    }
}

namespace {

struct ChannelPrefix {
    ChannelKind kind;
    const char* prefix;
};

constexpr ChannelPrefix kPrefixes[] = {
    {ChannelKind::rotor_angle, "delta_g"}, {ChannelKind::rotor_speed, "omega_g"},
    {ChannelKind::bus_frequency, "freq_b"}, {ChannelKind::bess_power, "pes_b"},
    {ChannelKind::bess_soc, "soc_b"},       {ChannelKind::bus_voltage, "vmag_b"},
};

} // namespace

std::string ChannelSpec::name() const {
    for (const auto& p : kPrefixes) {
        if (p.kind == kind) {
            return p.prefix + std::to_string(id);
        }
    }
    return "unknown";
}

ChannelSpec ChannelSpec::parse(const std::string& name) {
    for (const auto& p : kPrefixes) {
        const std::string prefix = p.prefix;
        if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size()) {
            try {
                std::size_t used = 0;
                const int id = std::stoi(name.substr(prefix.size()), &used);
                if (used == name.size() - prefix.size()) {
                    return ChannelSpec{p.kind, id};
                }
            } catch (const std::exception&) {
            }
        }
    }
    throw ConfigError("unrecognised channel '" + name + "'");
}

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(t_end > dt)) throw ConfigError("t_end must exceed dt");
    if (!(freq_filter_tf > 0.0)) throw ConfigError("frequency filter time constant must be positive");
}

bool TraceSet::has(const std::string& name) const {
    return std::any_of(channels.begin(), channels.end(), [&](const auto& c) { return c.first == name; });
}

const std::vector<double>& TraceSet::channel(const std::string& name) const {
    for (const auto& c : channels) {
        if (c.first == name) {
            return c.second;
        }
    }
    throw LookupError("trace has no channel '" + name + "'");
}

std::vector<double>& TraceSet::add_channel(const std::string& name) {
    if (has(name)) {
        throw ConfigError("duplicate channel '" + name + "'");
    }
    channels.emplace_back(name, std::vector<double>{});
    return channels.back().second;
}

MachineModel::MachineModel(const grid::PowerSystemCase& c, const grid::OperatingPoint& op) : case_(&c) {
    const grid::BusIndex index(c);
    const auto n = static_cast<Eigen::Index>(c.buses.size());
    if (op.v.size() != n) {
        throw ConfigError("operating point does not match the case");
    }
    y_eff_ = grid::build_ybus(c);

    std::vector<Complex> load_s(static_cast<std::size_t>(n), Complex(0.0, 0.0));
    for (const auto& l : c.loads) {
        load_s[index.at(l.bus)] += Complex(l.p, l.q);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex s = load_s[static_cast<std::size_t>(i)];
        if (s != Complex(0.0, 0.0)) {
            y_eff_(i, i) += std::conj(s) / std::norm(op.v(i));
        }
    }

    std::vector<bool> has_gen(static_cast<std::size_t>(n), false);
    for (const auto& g : c.generators) {
        const std::size_t node = index.at(g.bus);
        has_gen[node] = true;
        const auto i = static_cast<Eigen::Index>(node);
        const Complex s_gen = op.injections(i) + load_s[node];
        const Complex current = std::conj(s_gen / op.v(i));
        const Complex emf = op.v(i) + Complex(0.0, g.xdp) * current;
        const Complex y_norton = 1.0 / Complex(0.0, g.xdp);
        y_eff_(i, i) += y_norton;
        gen_node_.push_back(node);
        norton_y_.push_back(y_norton);
        pm_.push_back((emf * std::conj(current)).real());
        initial_.delta.push_back(std::arg(emf));
        initial_.omega.push_back(0.0);
        initial_.emf.push_back(std::abs(emf));
    }
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        if (c.buses[i].type == grid::BusType::slack && !has_gen[i]) {
            infinite_.emplace_back(i, op.v(static_cast<Eigen::Index>(i)));
        }
    }
}

CVector MachineModel::source_currents(std::span<const double> delta, std::size_t nodes) const {
    CVector current = CVector::Zero(static_cast<Eigen::Index>(nodes));
    for (std::size_t g = 0; g < gen_node_.size(); ++g) {
        current(static_cast<Eigen::Index>(gen_node_[g])) += std::polar(initial_.emf[g], delta[g]) * norton_y_[g];
    }
    return current;
}

void MachineModel::electrical_power(std::span<const double> delta, const CVector& v, std::span<double> pe) const {
    for (std::size_t g = 0; g < gen_node_.size(); ++g) {
        const Complex e = std::polar(initial_.emf[g], delta[g]);
        const Complex i_out = (e - v(static_cast<Eigen::Index>(gen_node_[g]))) * norton_y_[g];
        pe[g] = (e * std::conj(i_out)).real();
    }
}

FrequencyEstimator::FrequencyEstimator(double dt, double tf, double system_freq, double theta0)
    : dt_(dt), omega_s_(2.0 * M_PI * system_freq), alpha_(1.0 - std::exp(-dt / tf)), prev_(theta0), y_(0.0) {}

double FrequencyEstimator::update(double theta) {
    double step = theta - prev_;
    step = std::remainder(step, 2.0 * M_PI);   // unwrap to (-pi, pi]
    prev_ = theta;
    const double raw = step / (dt_ * omega_s_);
    y_ += alpha_ * (raw - y_);
    return y_;
}

std::vector<double> bus_frequency(std::span<const double> theta, double dt, double tf, double system_freq) {
    std::vector<double> out;
    out.reserve(theta.size());
    if (theta.empty()) {
        return out;
    }
    FrequencyEstimator est(dt, tf, system_freq, theta[0]);
    out.push_back(0.0);
    for (std::size_t k = 1; k < theta.size(); ++k) {
        out.push_back(est.update(theta[k]));
    }
    return out;
}

namespace {

/// Network variants active over the run: index 0 healthy, 1 faulted.
struct Topologies {
    NetworkSolver healthy;
    std::optional<NetworkSolver> faulted;
    std::size_t nodes_faulted = 0;
};

Topologies build_topologies(const MachineModel& model, const Disturbance& dist, const NetworkSolveOptions& opts) {
    const auto& c = model.power_case();
    Topologies topo{NetworkSolver(model.y_effective(), model.infinite_buses(), opts), std::nullopt, 0};
    const grid::BusIndex index(c);
    switch (dist.kind) {
    case DisturbanceKind::none:
        break;
    case DisturbanceKind::bus_fault: {
        if (!index.contains(dist.target)) {
            throw ConfigError("fault bus " + std::to_string(dist.target) + " does not exist");
        }
        CMatrix y = model.y_effective();
        const auto i = static_cast<Eigen::Index>(index.at(dist.target));
        y(i, i) += dist.fault_admittance;
        topo.faulted.emplace(y, model.infinite_buses(), opts);
        topo.nodes_faulted = static_cast<std::size_t>(y.rows());
        break;
    }
    case DisturbanceKind::branch_fault: {
        if (dist.target < 0 || static_cast<std::size_t>(dist.target) >= c.branches.size()) {
            throw ConfigError("fault branch " + std::to_string(dist.target) + " does not exist");
        }
        const auto& br = c.branches[static_cast<std::size_t>(dist.target)];
        if (!br.in_service) {
            throw ConfigError("fault branch " + std::to_string(dist.target) + " is out of service");
        }
        const auto n = model.y_effective().rows();
        CMatrix y = CMatrix::Zero(n + 1, n + 1);
        y.topLeftCorner(n, n) = model.y_effective();
        const auto i = static_cast<Eigen::Index>(index.at(br.from_bus));
        const auto j = static_cast<Eigen::Index>(index.at(br.to_bus));
        const Complex ys = br.series_admittance();
        // Replace the series element by two halves meeting at a midpoint node.
        y(i, i) -= ys;
        y(j, j) -= ys;
        y(i, j) += ys;
        y(j, i) += ys;
        const Complex half = 2.0 * ys;
        y(i, i) += half;
        y(j, j) += half;
        y(i, n) -= half;
        y(n, i) -= half;
        y(j, n) -= half;
        y(n, j) -= half;
        y(n, n) += 2.0 * half + dist.fault_admittance;
        topo.faulted.emplace(y, model.infinite_buses(), opts);
        topo.nodes_faulted = static_cast<std::size_t>(n + 1);
        break;
    }
    }
    return topo;
}

struct Recorder {
    ChannelSpec spec;
    std::vector<double>* out = nullptr;
    std::size_t target = 0;          // generator, unit or node depending on kind
    FrequencyEstimator estimator;
};

} // namespace

TraceSet simulate(const grid::PowerSystemCase& c, const grid::OperatingPoint& op,
                  std::span<const bess::BessParams> fleet, const Disturbance& disturbance, const SimConfig& cfg) {
    cfg.validate();
    disturbance.validate();
    for (const auto& unit : fleet) {
        unit.validate();
    }
    const MachineModel model(c, op);
    const grid::BusIndex index(c);
    const std::size_t ng = model.generator_count();
    const std::size_t nb = fleet.size();
    const double omega_s = c.omega_sync();
    const double s_base = c.system_mva_base;

    std::vector<std::size_t> unit_node(nb);
    for (std::size_t u = 0; u < nb; ++u) {
        if (!index.contains(fleet[u].bus)) {
            throw ConfigError("BESS bus " + std::to_string(fleet[u].bus) + " does not exist");
        }
        unit_node[u] = index.at(fleet[u].bus);
    }

    const Topologies topo = build_topologies(model, disturbance, cfg.network);
    const auto n_steps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
    long on_step = -1;
    long off_step = -1;
    if (disturbance.kind != DisturbanceKind::none) {
        on_step = static_cast<long>(std::llround(disturbance.t_on / cfg.dt));
        off_step = static_cast<long>(std::llround(disturbance.t_off / cfg.dt));
        if (off_step <= on_step) {
            off_step = on_step + 1;
        }
    }
    auto solver_for = [&](long step) -> const NetworkSolver& {
        if (topo.faulted && step >= on_step && step < off_step) {
            return *topo.faulted;
        }
        return topo.healthy;
    };

    std::vector<double> h(ng);
    std::vector<double> damping(ng);
    for (std::size_t g = 0; g < ng; ++g) {
        h[g] = c.generators[g].h;
        damping[g] = c.generators[g].d;
    }

    std::vector<PowerInjection> injections(nb);
    for (std::size_t u = 0; u < nb; ++u) {
        injections[u] = PowerInjection{unit_node[u], 0.0};
    }

    auto network_voltages = [&](const NetworkSolver& solver, std::span<const double> delta) {
        CVector src = model.source_currents(delta, solver.size());
        return solver.solve(src, injections);
    };

    // State vector: [delta..., omega...]
    std::vector<double> x(2 * ng);
    for (std::size_t g = 0; g < ng; ++g) {
        x[g] = model.initial_state().delta[g];
        x[ng + g] = 0.0;
    }
    std::vector<double> pe(ng);
    auto derivative = [&](const NetworkSolver& solver, const std::vector<double>& state, std::vector<double>& dx) {
        const std::span<const double> delta(state.data(), ng);
        const CVector v = network_voltages(solver, delta);
        model.electrical_power(delta, v, pe);
        for (std::size_t g = 0; g < ng; ++g) {
            const double w = state[ng + g];
            dx[g] = omega_s * w;
            dx[ng + g] = (model.mechanical_power(g) - pe[g] - damping[g] * w) / (2.0 * h[g]);
        }
    };

    std::vector<double> k1(2 * ng), k2(2 * ng), k3(2 * ng), k4(2 * ng), tmp(2 * ng);
    auto rk4 = [&](const NetworkSolver& solver, std::vector<double>& state, double step) {
        derivative(solver, state, k1);
        for (std::size_t i = 0; i < state.size(); ++i) tmp[i] = state[i] + 0.5 * step * k1[i];
        derivative(solver, tmp, k2);
        for (std::size_t i = 0; i < state.size(); ++i) tmp[i] = state[i] + 0.5 * step * k2[i];
        derivative(solver, tmp, k3);
        for (std::size_t i = 0; i < state.size(); ++i) tmp[i] = state[i] + step * k3[i];
        derivative(solver, tmp, k4);
        for (std::size_t i = 0; i < state.size(); ++i) {
            state[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    };

    // Channels.
    std::vector<ChannelSpec> specs = cfg.record_channels;
    if (specs.empty()) {
        for (const auto& g : c.generators) specs.push_back({ChannelKind::rotor_angle, g.bus});
        for (const auto& g : c.generators) specs.push_back({ChannelKind::rotor_speed, g.bus});
        for (const auto& u : fleet) specs.push_back({ChannelKind::bess_power, u.bus});
        for (const auto& u : fleet) specs.push_back({ChannelKind::bess_soc, u.bus});
    }

    TraceSet trace;
    trace.t.reserve(static_cast<std::size_t>(n_steps + 1));
    std::vector<Recorder> recorders;
    auto gen_at = [&](int bus) {
        for (std::size_t g = 0; g < ng; ++g) {
            if (c.generators[g].bus == bus) return g;
        }
        throw ConfigError("no generator at bus " + std::to_string(bus));
    };
    auto unit_at = [&](int bus) {
        for (std::size_t u = 0; u < nb; ++u) {
            if (fleet[u].bus == bus) return u;
        }
        throw ConfigError("no BESS at bus " + std::to_string(bus));
    };

    // Algebraic solution at t = 0 under the network active in the first step.
    CVector v_now = network_voltages(solver_for(0), std::span<const double>(x.data(), ng));

    for (const auto& spec : specs) {
        Recorder r;
        r.spec = spec;
        switch (spec.kind) {
        case ChannelKind::rotor_angle:
        case ChannelKind::rotor_speed: r.target = gen_at(spec.id); break;
        case ChannelKind::bess_power:
        case ChannelKind::bess_soc: r.target = unit_at(spec.id); break;
        case ChannelKind::bus_frequency:
        case ChannelKind::bus_voltage:
            if (!index.contains(spec.id)) throw ConfigError("channel bus " + std::to_string(spec.id) + " does not exist");
            r.target = index.at(spec.id);
            break;
        }
        if (spec.kind == ChannelKind::bus_frequency) {
            r.estimator = FrequencyEstimator(cfg.dt, cfg.freq_filter_tf, c.system_freq,
                                             std::arg(v_now(static_cast<Eigen::Index>(r.target))));
        }
        recorders.push_back(r);
    }
    trace.channels.reserve(recorders.size());
    for (auto& r : recorders) {
        r.out = &trace.add_channel(r.spec.name());
        r.out->reserve(static_cast<std::size_t>(n_steps + 1));
    }

    std::vector<bess::BessState> units(nb);
    std::vector<FrequencyEstimator> unit_freq(nb);
    for (std::size_t u = 0; u < nb; ++u) {
        units[u] = bess::BessState::initial(fleet[u]);
        unit_freq[u] = FrequencyEstimator(cfg.dt, cfg.freq_filter_tf, c.system_freq,
                                          std::arg(v_now(static_cast<Eigen::Index>(unit_node[u]))));
    }

    auto control_units = [&](bool first) {
        for (std::size_t u = 0; u < nb; ++u) {
            const double dw = first ? 0.0 : unit_freq[u].update(std::arg(v_now(static_cast<Eigen::Index>(unit_node[u]))));
            units[u] = bess::control_step(units[u], dw, cfg.dt, fleet[u], s_base);
            injections[u].p = units[u].p_es;
        }
    };

    auto record = [&](double t, bool first) {
        trace.t.push_back(t);
        for (auto& r : recorders) {
            double value = 0.0;
            switch (r.spec.kind) {
            case ChannelKind::rotor_angle: value = x[r.target]; break;
            case ChannelKind::rotor_speed: value = x[ng + r.target]; break;
            case ChannelKind::bess_power: value = units[r.target].p_es; break;
            case ChannelKind::bess_soc: value = units[r.target].soc; break;
            case ChannelKind::bus_voltage: value = std::abs(v_now(static_cast<Eigen::Index>(r.target))); break;
            case ChannelKind::bus_frequency:
                value = first ? 0.0 : r.estimator.update(std::arg(v_now(static_cast<Eigen::Index>(r.target))));
                break;
            }
            r.out->push_back(value);
        }
    };

    control_units(true);
    record(0.0, true);

    std::vector<double> backup(2 * ng);
    for (long step = 0; step < n_steps; ++step) {
        const NetworkSolver& solver = solver_for(step);
        backup = x;
        try {
            rk4(solver, x, cfg.dt);
        } catch (const SimulationError&) {
            x = backup;
            try {
                rk4(solver, x, 0.5 * cfg.dt);
                rk4(solver, x, 0.5 * cfg.dt);
            } catch (const SimulationError& e) {
                throw SimulationError(std::string(e.what()) + " at step " + std::to_string(step), step);
            }
        }
        for (double value : x) {
            if (!std::isfinite(value)) {
                throw BlowUpError("non-finite machine state at step " + std::to_string(step), step);
            }
        }
        try {
            v_now = network_voltages(solver_for(step + 1), std::span<const double>(x.data(), ng));
        } catch (const SimulationError& e) {
            throw SimulationError(std::string(e.what()) + " at step " + std::to_string(step + 1), step + 1);
        }
        control_units(false);
        record(static_cast<double>(step + 1) * cfg.dt, false);
    }
    return trace;
}

std::vector<std::pair<int, double>> soc_change_report(const TraceSet& trace, std::span<const bess::BessParams> fleet,
                                                      double s_base_mw) {
    std::vector<std::pair<int, double>> out;
    for (const auto& unit : fleet) {
        const auto& p = trace.channel(ChannelSpec{ChannelKind::bess_power, unit.bus}.name());
        out.emplace_back(unit.bus, bess::soc_change_percent(trace.t, p, unit.e_total, s_base_mw));
    }
    return out;
}

std::vector<std::vector<double>> coi_relative_angles(const TraceSet& trace, const grid::PowerSystemCase& c) {
    std::vector<const std::vector<double>*> angles;
    double h_total = 0.0;
    for (const auto& g : c.generators) {
        angles.push_back(&trace.channel(ChannelSpec{ChannelKind::rotor_angle, g.bus}.name()));
        h_total += g.h;
    }
    const std::size_t n = trace.samples();
    std::vector<double> coi(n, 0.0);
    for (std::size_t g = 0; g < angles.size(); ++g) {
        for (std::size_t k = 0; k < n; ++k) {
            coi[k] += c.generators[g].h * (*angles[g])[k] / h_total;
        }
    }
    std::vector<std::vector<double>> out(angles.size(), std::vector<double>(n));
    for (std::size_t g = 0; g < angles.size(); ++g) {
        for (std::size_t k = 0; k < n; ++k) {
            out[g][k] = (*angles[g])[k] - coi[k];
        }
    }
    return out;
}

} // namespace bessopt::dynamics
