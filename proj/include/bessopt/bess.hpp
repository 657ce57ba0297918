#pragma once

#include <span>
#include <string>
#include <vector>

namespace bessopt::bess {

enum class ControllerKind { proportional, pi };

/// Converter-interfaced storage unit with frequency-feedback damping control.
struct BessParams {
    int bus = 0;
    double k_es = 0.0;      // p.u. power per p.u. frequency deviation
    double t_es = 0.02;     // converter lag, s
    double p_max = 1.0;     // p.u. on system base
    double e_total = 10.0;  // MWh
    double soc_min = 0.1;
    double soc_max = 0.9;
    double soc_init = 0.5;
    ControllerKind controller = ControllerKind::proportional;
    double t_i = 1.0;       // PI integral time, s

    /// k_es == 0 is accepted so a unit can be switched off without removing it.
    void validate() const;
};

struct BessState {
    double p_es = 0.0;           // positive = discharging
    double soc = 0.5;
    double pi_integrator = 0.0;  // running integral of -dw, p.u. s

    static BessState initial(const BessParams& params);
};

/// Power reference for the unit. Proportional: -k_es dw. PI: -k_es dw + integrator / t_i,
/// where the integrator holds the integral of -dw maintained by advance_integrator().
double controller_reference(double dw, const BessParams& params, double integrator = 0.0);

/// Advances the PI integrator by one step of length dt. Integration is suspended while the
/// output is saturated and the increment would push it further into the limit.
double advance_integrator(double integrator, double dw, double dt, const BessParams& params);

/// Energy-balance update: soc' = soc - p_es * s_base_mw * dt / 3600 / e_total, clamped to [0, 1].
double soc_update(double soc, double p_es, double dt, double e_total, double s_base_mw);

/// One converter step: SOC gating, exact first-order lag, power clamp, then SOC update.
BessState pcs_step(const BessState& state, double p_ref, double dt, const BessParams& params,
                   double s_base_mw);

/// Controller + converter in one call, the form used by the simulator each step.
BessState control_step(const BessState& state, double dw, double dt, const BessParams& params,
                       double s_base_mw);

/// Net SOC change in percent over a sampled power trace (trapezoidal rule).
/// Negative when the unit discharged on balance.
double soc_change_percent(std::span<const double> t, std::span<const double> p_es, double e_total,
                          double s_base_mw);

const char* controller_name(ControllerKind kind);
ControllerKind parse_controller(const std::string& name);

} // namespace bessopt::bess
