#include "bessopt/bess.hpp"

#include <algorithm>
#include <cmath>

#include "bessopt/errors.hpp"

namespace bessopt::bess {

void BessParams::validate() const {
    const std::string where = "BESS at bus " + std::to_string(bus);
    if (k_es < 0.0) throw ConfigError(where + ": k_es must be non-negative");
    if (!(t_es > 0.0)) throw ConfigError(where + ": t_es must be positive");
    if (!(p_max > 0.0)) throw ConfigError(where + ": p_max must be positive");
    if (!(e_total > 0.0)) throw ConfigError(where + ": e_total must be positive");
    if (!(soc_min >= 0.0 && soc_min < soc_init && soc_init < soc_max && soc_max <= 1.0)) {
        throw ConfigError(where + ": need 0 <= soc_min < soc_init < soc_max <= 1");
    }
    if (controller == ControllerKind::pi && !(t_i > 0.0)) {
        throw ConfigError(where + ": t_i must be positive for the PI controller");
    }
}

BessState BessState::initial(const BessParams& params) {
    BessState s;
    s.soc = params.soc_init;
    return s;
}

double controller_reference(double dw, const BessParams& params, double integrator) {
    double p_ref = -params.k_es * dw;
    if (params.controller == ControllerKind::pi) {
        p_ref += integrator / params.t_i;
    }
    return p_ref;
}

double advance_integrator(double integrator, double dw, double dt, const BessParams& params) {
    if (params.controller != ControllerKind::pi) {
        return integrator;
    }
    const double increment = -dw * dt;
    const double candidate = integrator + increment;
    const double output = controller_reference(dw, params, candidate);
    if (std::abs(output) > params.p_max && increment * output > 0.0) {
        return integrator;
    }
    return candidate;
}

double soc_update(double soc, double p_es, double dt, double e_total, double s_base_mw) {
    const double energy_mwh = p_es * s_base_mw * dt / 3600.0;
    return std::clamp(soc - energy_mwh / e_total, 0.0, 1.0);
}

BessState pcs_step(const BessState& state, double p_ref, double dt, const BessParams& params,
                   double s_base_mw) {
    BessState next = state;
    const bool charge_blocked = state.soc >= params.soc_max && p_ref < 0.0;
    const bool discharge_blocked = state.soc <= params.soc_min && p_ref > 0.0;
    if (charge_blocked || discharge_blocked) {
        next.p_es = 0.0;
    } else {
        const double decay = std::exp(-dt / params.t_es);
        const double lagged = p_ref + (state.p_es - p_ref) * decay;
        next.p_es = std::clamp(lagged, -params.p_max, params.p_max);
    }
    next.soc = soc_update(state.soc, next.p_es, dt, params.e_total, s_base_mw);
    return next;
}

BessState control_step(const BessState& state, double dw, double dt, const BessParams& params,
                       double s_base_mw) {
    BessState work = state;
    work.pi_integrator = advance_integrator(state.pi_integrator, dw, dt, params);
    const double p_ref = controller_reference(dw, params, work.pi_integrator);
    BessState next = pcs_step(work, p_ref, dt, params, s_base_mw);
    return next;
}

double soc_change_percent(std::span<const double> t, std::span<const double> p_es, double e_total,
                          double s_base_mw) {
    if (t.size() != p_es.size()) {
        throw DomainError("time and power samples differ in length");
    }
    double mw_seconds = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        mw_seconds += 0.5 * (p_es[k] + p_es[k - 1]) * s_base_mw * (t[k] - t[k - 1]);
    }
    const double mwh = mw_seconds / 3600.0;
    return -100.0 * mwh / e_total;
}

const char* controller_name(ControllerKind kind) {
    return kind == ControllerKind::pi ? "pi" : "proportional";
}

ControllerKind parse_controller(const std::string& name) {
    if (name == "proportional" || name == "p") return ControllerKind::proportional;
    if (name == "pi") return ControllerKind::pi;
    throw ConfigError("unknown controller '" + name + "' (expected proportional or pi)");
}

} // namespace bessopt::bess
