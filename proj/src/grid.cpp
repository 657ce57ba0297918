#include "bessopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "bessopt/errors.hpp"

namespace bessopt::grid {

namespace {

std::string bus_label(int id) {
    return "bus " + std::to_string(id);
}

} // namespace

void Scenario::validate() const {
    if (!(load_scale > 0.0) || !(gen_scale > 0.0)) {
        throw ConfigError("scenario '" + name + "': multipliers must be positive");
    }
    for (const auto& [bus, scale] : per_generator_scale) {
        if (!(scale > 0.0)) {
            throw ConfigError("scenario '" + name + "': multiplier for generator at " + bus_label(bus) +
                              " must be positive");
        }
    }
}

void PowerSystemCase::validate() const {
    if (!(system_mva_base > 0.0)) {
        throw StructuralError("system_mva_base must be positive");
    }
    if (system_freq != 50.0 && system_freq != 60.0) {
        throw StructuralError("system_freq must be 50 or 60 Hz");
    }
    if (buses.empty()) {
        throw StructuralError("case has no buses");
    }
    std::set<int> ids;
    int slack_count = 0;
    for (const auto& bus : buses) {
        if (!ids.insert(bus.id).second) {
            throw StructuralError("duplicate " + bus_label(bus.id));
        }
        if (bus.type == BusType::slack) {
            ++slack_count;
        }
        if (bus.type != BusType::pq && !(bus.v_set > 0.0)) {
            throw StructuralError(bus_label(bus.id) + ": v_set must be positive");
        }
    }
    if (slack_count != 1) {
        throw StructuralError("case must contain exactly one slack bus, found " + std::to_string(slack_count));
    }
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const auto& br = branches[k];
        if (!ids.count(br.from_bus) || !ids.count(br.to_bus)) {
            throw StructuralError("branch " + std::to_string(k) + " references a missing bus");
        }
        if (br.from_bus == br.to_bus) {
            throw StructuralError("branch " + std::to_string(k) + " connects a bus to itself");
        }
        if (br.x == 0.0) {
            throw StructuralError("branch " + std::to_string(k) + " has zero reactance");
        }
    }
    std::set<int> gen_buses;
    for (const auto& g : generators) {
        if (!ids.count(g.bus)) {
            throw StructuralError("generator references missing " + bus_label(g.bus));
        }
        if (!gen_buses.insert(g.bus).second) {
            throw StructuralError("more than one generator at " + bus_label(g.bus));
        }
        if (!(g.h > 0.0) || !(g.xdp > 0.0) || g.d < 0.0) {
            throw StructuralError("generator at " + bus_label(g.bus) + " needs h > 0, xdp > 0, d >= 0");
        }
    }
    for (const auto& l : loads) {
        if (!ids.count(l.bus)) {
            throw StructuralError("load references missing " + bus_label(l.bus));
        }
    }
    for (const auto& s : scenarios) {
        s.validate();
    }
}

std::size_t PowerSystemCase::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].type == BusType::slack) {
            return i;
        }
    }
    throw StructuralError("case has no slack bus");
}

double PowerSystemCase::omega_sync() const {
    return 2.0 * M_PI * system_freq;
}

const Scenario& PowerSystemCase::scenario(const std::string& scenario_name) const {
    for (const auto& s : scenarios) {
        if (s.name == scenario_name) {
            return s;
        }
    }
    throw LookupError("unknown scenario '" + scenario_name + "' in case '" + name + "'");
}

BusIndex::BusIndex(const PowerSystemCase& c) {
    map_.reserve(c.buses.size());
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        map_.emplace(c.buses[i].id, i);
    }
}

std::size_t BusIndex::at(int bus_id) const {
    auto it = map_.find(bus_id);
    if (it == map_.end()) {
        throw StructuralError("unknown " + bus_label(bus_id));
    }
    return it->second;
}

CMatrix build_ybus(const PowerSystemCase& c) {
    const BusIndex index(c);
    const auto n = static_cast<Eigen::Index>(c.buses.size());
    CMatrix y = CMatrix::Zero(n, n);
    for (const auto& br : c.branches) {
        const auto i = static_cast<Eigen::Index>(index.at(br.from_bus));
        const auto j = static_cast<Eigen::Index>(index.at(br.to_bus));
        if (!br.in_service) {
            continue;
        }
        const Complex ys = br.series_admittance();
        const Complex ysh(0.0, 0.5 * br.b);
        y(i, i) += ys + ysh;
        y(j, j) += ys + ysh;
        y(i, j) -= ys;
        y(j, i) -= ys;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i, i) += c.buses[static_cast<std::size_t>(i)].shunt;
    }
    return y;
}

namespace {

void require_connected(const PowerSystemCase& c, const BusIndex& index) {
    const std::size_t n = c.buses.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& br : c.branches) {
        if (br.in_service) {
            adj[index.at(br.from_bus)].push_back(index.at(br.to_bus));
            adj[index.at(br.to_bus)].push_back(index.at(br.from_bus));
        }
    }
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> frontier;
    const std::size_t slack = c.slack_index();
    frontier.push(slack);
    seen[slack] = true;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop();
        for (auto v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                frontier.push(v);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) {
            throw StructuralError(bus_label(c.buses[i].id) + " is not connected to the slack bus");
        }
    }
}

} // namespace

OperatingPoint solve_power_flow(const PowerSystemCase& c, const PowerFlowOptions& options) {
    c.validate();
    const BusIndex index(c);
    require_connected(c, index);

    const CMatrix y = build_ybus(c);
    const auto n = static_cast<Eigen::Index>(c.buses.size());

    Eigen::VectorXd p_spec = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd q_spec = Eigen::VectorXd::Zero(n);
    for (const auto& g : c.generators) {
        p_spec(static_cast<Eigen::Index>(index.at(g.bus))) += g.p_set;
    }
    for (const auto& l : c.loads) {
        const auto i = static_cast<Eigen::Index>(index.at(l.bus));
        p_spec(i) -= l.p;
        q_spec(i) -= l.q;
    }

    std::vector<Eigen::Index> angle_vars;   // every non-slack bus
    std::vector<Eigen::Index> mag_vars;     // pq buses
    Eigen::VectorXd vm = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd va = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& bus = c.buses[static_cast<std::size_t>(i)];
        if (bus.type != BusType::slack) {
            angle_vars.push_back(i);
        }
        if (bus.type == BusType::pq) {
            mag_vars.push_back(i);
        } else {
            vm(i) = bus.v_set;
        }
    }
    const auto na = static_cast<Eigen::Index>(angle_vars.size());
    const auto nm = static_cast<Eigen::Index>(mag_vars.size());

    auto voltages = [&]() {
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v(i) = std::polar(vm(i), va(i));
        }
        return v;
    };

    auto mismatch_vector = [&](const CVector& s) {
        Eigen::VectorXd f(na + nm);
        for (Eigen::Index k = 0; k < na; ++k) {
            f(k) = s(angle_vars[static_cast<std::size_t>(k)]).real() - p_spec(angle_vars[static_cast<std::size_t>(k)]);
        }
        for (Eigen::Index k = 0; k < nm; ++k) {
            f(na + k) = s(mag_vars[static_cast<std::size_t>(k)]).imag() - q_spec(mag_vars[static_cast<std::size_t>(k)]);
        }
        return f;
    };

    OperatingPoint op;
    double worst = 0.0;
    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        const CVector v = voltages();
        const CVector current = y * v;
        const CVector s = v.cwiseProduct(current.conjugate());
        const Eigen::VectorXd f = mismatch_vector(s);
        worst = f.size() > 0 ? f.cwiseAbs().maxCoeff() : 0.0;
        if (!std::isfinite(worst)) {
            break;
        }
        if (worst < options.tolerance) {
            op.v = v;
            op.injections = s;
            op.mismatch = worst;
            op.iterations = iter;
            return op;
        }
        if (iter == options.max_iterations) {
            break;
        }

        // dS/dVa = j diag(V) conj(diag(I) - Y diag(V)); dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
        const CVector vnorm = v.cwiseQuotient(v.cwiseAbs().cast<Complex>());
        CMatrix ds_dva = CMatrix::Zero(n, n);
        CMatrix ds_dvm = CMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const Complex yij = y(i, j);
                if (yij == Complex(0.0, 0.0)) {
                    continue;
                }
                ds_dva(i, j) = Complex(0.0, 1.0) * v(i) * std::conj(-yij * v(j));
                ds_dvm(i, j) = v(i) * std::conj(yij * vnorm(j));
            }
            ds_dva(i, i) += Complex(0.0, 1.0) * v(i) * std::conj(current(i));
            ds_dvm(i, i) += std::conj(current(i)) * vnorm(i);
        }

        Eigen::MatrixXd jac(na + nm, na + nm);
        for (Eigen::Index r = 0; r < na; ++r) {
            const auto bi = angle_vars[static_cast<std::size_t>(r)];
            for (Eigen::Index col = 0; col < na; ++col) {
                jac(r, col) = ds_dva(bi, angle_vars[static_cast<std::size_t>(col)]).real();
            }
            for (Eigen::Index col = 0; col < nm; ++col) {
                jac(r, na + col) = ds_dvm(bi, mag_vars[static_cast<std::size_t>(col)]).real();
            }
        }
        for (Eigen::Index r = 0; r < nm; ++r) {
            const auto bi = mag_vars[static_cast<std::size_t>(r)];
            for (Eigen::Index col = 0; col < na; ++col) {
                jac(na + r, col) = ds_dva(bi, angle_vars[static_cast<std::size_t>(col)]).imag();
            }
            for (Eigen::Index col = 0; col < nm; ++col) {
                jac(na + r, na + col) = ds_dvm(bi, mag_vars[static_cast<std::size_t>(col)]).imag();
            }
        }

        const Eigen::VectorXd dx = jac.partialPivLu().solve(-f);
        if (!dx.allFinite()) {
            break;
        }
        for (Eigen::Index k = 0; k < na; ++k) {
            va(angle_vars[static_cast<std::size_t>(k)]) += dx(k);
        }
        for (Eigen::Index k = 0; k < nm; ++k) {
            vm(mag_vars[static_cast<std::size_t>(k)]) += dx(na + k);
        }
    }
    std::ostringstream msg;
    msg << "power flow did not converge within " << options.max_iterations << " iterations (mismatch " << worst
        << " p.u.)";
    throw DivergenceError(msg.str(), worst, options.max_iterations);
}

PowerSystemCase apply_scenario(const PowerSystemCase& c, const Scenario& s) {
    s.validate();
    PowerSystemCase out = c;
    for (auto& l : out.loads) {
        l.p *= s.load_scale;
        l.q *= s.load_scale;
    }
    for (auto& g : out.generators) {
        auto it = s.per_generator_scale.find(g.bus);
        g.p_set *= (it != s.per_generator_scale.end()) ? it->second : s.gen_scale;
    }
    return out;
}

Eigen::VectorXd power_balance_residual(const PowerSystemCase& c, const OperatingPoint& op) {
    const BusIndex index(c);
    const CMatrix y = build_ybus(c);
    const CVector s_calc = op.v.cwiseProduct((y * op.v).conjugate());
    CVector s_spec = CVector::Zero(s_calc.size());
    for (const auto& g : c.generators) {
        s_spec(static_cast<Eigen::Index>(index.at(g.bus))) += g.p_set;
    }
    for (const auto& l : c.loads) {
        s_spec(static_cast<Eigen::Index>(index.at(l.bus))) -= Complex(l.p, l.q);
    }
    Eigen::VectorXd residual = Eigen::VectorXd::Zero(s_calc.size());
    for (Eigen::Index i = 0; i < residual.size(); ++i) {
        const auto type = c.buses[static_cast<std::size_t>(i)].type;
        if (type == BusType::slack) {
            continue;
        }
        double r = std::abs(s_spec(i).real() - s_calc(i).real());
        if (type == BusType::pq) {
            r = std::max(r, std::abs(s_spec(i).imag() - s_calc(i).imag()));
        }
        residual(i) = r;
    }
    return residual;
}

Scenario split_generation_scenario(const PowerSystemCase& c, const std::string& name, double up, double down) {
    std::vector<int> gen_buses;
    for (const auto& g : c.generators) {
        gen_buses.push_back(g.bus);
    }
    std::sort(gen_buses.begin(), gen_buses.end());
    Scenario s;
    s.name = name;
    const std::size_t half = gen_buses.size() / 2;
    for (std::size_t k = 0; k < gen_buses.size(); ++k) {
        s.per_generator_scale[gen_buses[k]] = (k < half) ? up : down;
    }
    return s;
}

} // namespace bessopt::grid
