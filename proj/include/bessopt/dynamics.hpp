#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bessopt/bess.hpp"
#include "bessopt/grid.hpp"
#include "bessopt/network.hpp"

namespace bessopt::dynamics {

enum class DisturbanceKind { none, bus_fault, branch_fault };

/// Temporary shunt fault. For branch faults `target` is the 0-based position in
/// `PowerSystemCase::branches` and the fault sits at the branch midpoint.
struct Disturbance {
    DisturbanceKind kind = DisturbanceKind::none;
    int target = 0;
    double t_on = 0.0;
    double t_off = 0.1;
    Complex fault_admittance{0.0, -1e4};

    static Disturbance none() { return Disturbance{}; }
    static Disturbance bus_fault(int bus, double t_on, double t_off, Complex y = {0.0, -1e4});
    static Disturbance branch_fault(int branch, double t_on, double t_off, Complex y = {0.0, -1e4});
    void validate() const;
};

enum class ChannelKind {
    rotor_angle,    // rad, generator at bus `id`
    rotor_speed,    // p.u. deviation, generator at bus `id`
    bus_frequency,  // p.u. deviation from the filtered voltage angle at bus `id`
    bess_power,     // p.u., unit at bus `id`
    bess_soc,       // fraction, unit at bus `id`
    bus_voltage     // p.u. magnitude at bus `id`
};

struct ChannelSpec {
    ChannelKind kind = ChannelKind::rotor_angle;
    int id = 0;

    /// delta_g<bus>, omega_g<bus>, freq_b<bus>, pes_b<bus>, soc_b<bus>, vmag_b<bus>
    std::string name() const;
    static ChannelSpec parse(const std::string& name);
    bool operator==(const ChannelSpec&) const = default;
};

struct SimConfig {
    double dt = 0.005;
    double t_end = 20.0;
    /// Empty: rotor angle and speed of every generator plus power and SOC of every unit.
    std::vector<ChannelSpec> record_channels;
    double freq_filter_tf = 0.05;
    NetworkSolveOptions network;

    void validate() const;
};

struct TraceSet {
    std::vector<double> t;
    std::vector<std::pair<std::string, std::vector<double>>> channels;

    bool has(const std::string& name) const;
    const std::vector<double>& channel(const std::string& name) const;
    std::vector<double>& add_channel(const std::string& name);
    std::size_t samples() const { return t.size(); }
};

struct DynamicState {
    std::vector<double> delta;
    std::vector<double> omega;
    std::vector<double> emf;
    std::vector<bess::BessState> bess_states;
};

/// Classical machines initialised from a solved operating point; loads become constant
/// admittances at that point.
class MachineModel {
public:
    MachineModel(const grid::PowerSystemCase& c, const grid::OperatingPoint& op);

    const grid::PowerSystemCase& power_case() const { return *case_; }
    /// Bus-level admittance with loads and machine Norton admittances folded in.
    const CMatrix& y_effective() const { return y_eff_; }
    /// Slack buses without a machine act as ideal sources at their solved voltage.
    const std::vector<std::pair<std::size_t, Complex>>& infinite_buses() const { return infinite_; }

    std::size_t generator_count() const { return gen_node_.size(); }
    std::size_t generator_node(std::size_t g) const { return gen_node_[g]; }
    double mechanical_power(std::size_t g) const { return pm_[g]; }
    const DynamicState& initial_state() const { return initial_; }

    /// Norton source currents E/(j xdp) for the given rotor angles (length = bus count).
    CVector source_currents(std::span<const double> delta, std::size_t nodes) const;
    /// Air-gap power of each generator for given angles and network voltages.
    void electrical_power(std::span<const double> delta, const CVector& v, std::span<double> pe) const;

private:
    const grid::PowerSystemCase* case_;
    CMatrix y_eff_;
    std::vector<std::pair<std::size_t, Complex>> infinite_;
    std::vector<std::size_t> gen_node_;
    std::vector<double> pm_;
    std::vector<Complex> norton_y_;
    DynamicState initial_;
};

/// Fixed-step RK4 simulation of swing dynamics with BESS injections. BESS output is held
/// constant across a step; frequency measurement, control and converter update happen at
/// step boundaries.
TraceSet simulate(const grid::PowerSystemCase& c, const grid::OperatingPoint& op,
                  std::span<const bess::BessParams> fleet, const Disturbance& disturbance, const SimConfig& cfg);

/// Frequency deviation (p.u.) from a uniformly sampled voltage angle: backward difference of
/// the unwrapped angle divided by the synchronous speed, then a first-order low-pass with
/// time constant tf. The first sample is 0.
std::vector<double> bus_frequency(std::span<const double> theta, double dt, double tf, double system_freq);

/// Incremental form of bus_frequency() used inside the simulator.
class FrequencyEstimator {
public:
    FrequencyEstimator() = default;
    FrequencyEstimator(double dt, double tf, double system_freq, double theta0);
    /// Feeds the next angle sample and returns the filtered deviation.
    double update(double theta);
    double value() const { return y_; }

private:
    double dt_ = 0.0;
    double omega_s_ = 1.0;
    double alpha_ = 1.0;
    double prev_ = 0.0;
    double y_ = 0.0;
};

/// Net SOC change (%) per unit from its `pes_b<bus>` channel.
std::vector<std::pair<int, double>> soc_change_report(const TraceSet& trace, std::span<const bess::BessParams> fleet,
                                                      double s_base_mw);

/// Rotor angles relative to the inertia-weighted centre of angle.
std::vector<std::vector<double>> coi_relative_angles(const TraceSet& trace, const grid::PowerSystemCase& c);

/// CSV with header `t,<channel>...`, 9 significant digits.
void write_trace_csv(const TraceSet& trace, const std::filesystem::path& path);
TraceSet read_trace_csv(const std::filesystem::path& path);

} // namespace bessopt::dynamics
