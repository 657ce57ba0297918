#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace bessopt {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

namespace grid {

enum class BusType { slack, pv, pq };

struct Bus {
    int id = 0;
    BusType type = BusType::pq;
    double v_set = 1.0;   // p.u., used for slack and pv buses
    Complex shunt{0.0, 0.0};
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double b = 0.0;       // total line charging
    bool in_service = true;

    Complex series_admittance() const { return 1.0 / Complex(r, x); }
};

/// Classical machine: constant EMF behind transient reactance.
struct Generator {
    int bus = 0;
    double p_set = 0.0;   // p.u. on system base
    double h = 1.0;       // s, on system base
    double d = 0.0;       // p.u. torque per p.u. speed
    double xdp = 0.1;
};

/// Positive values consume power; negative values model net injection.
struct Load {
    int bus = 0;
    double p = 0.0;
    double q = 0.0;
};

/// Loading-level transformation applied to a base case.
struct Scenario {
    std::string name = "base";
    double load_scale = 1.0;
    double gen_scale = 1.0;
    std::map<int, double> per_generator_scale;   // generator bus id -> multiplier

    static Scenario identity() { return Scenario{}; }
    void validate() const;
};

struct PowerSystemCase {
    std::string name;
    double system_mva_base = 100.0;
    double system_freq = 60.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<Load> loads;
    std::vector<Scenario> scenarios;

    /// Throws StructuralError when any documented invariant is broken.
    void validate() const;

    std::size_t bus_count() const { return buses.size(); }
    std::size_t slack_index() const;
    double omega_sync() const;
    const Scenario& scenario(const std::string& scenario_name) const;
};

/// Bus id to position in `PowerSystemCase::buses`.
class BusIndex {
public:
    explicit BusIndex(const PowerSystemCase& c);
    std::size_t at(int bus_id) const;
    bool contains(int bus_id) const { return map_.count(bus_id) != 0; }

private:
    std::unordered_map<int, std::size_t> map_;
};

struct OperatingPoint {
    CVector v;            // complex bus voltages
    CVector injections;   // net complex power injected at each bus
    double mismatch = 0.0;
    int iterations = 0;
};

struct PowerFlowOptions {
    double tolerance = 1e-8;
    int max_iterations = 50;
};

CMatrix build_ybus(const PowerSystemCase& c);

/// Full Newton-Raphson in polar coordinates from a flat start.
OperatingPoint solve_power_flow(const PowerSystemCase& c, const PowerFlowOptions& options = {});

/// Returns a copy with loads and generator set points scaled; the slack bus
/// absorbs the resulting imbalance when the power flow is solved.
PowerSystemCase apply_scenario(const PowerSystemCase& c, const Scenario& s);

/// Per-bus |specified - computed| power: P on non-slack buses, Q on pq buses, 0 at the slack.
Eigen::VectorXd power_balance_residual(const PowerSystemCase& c, const OperatingPoint& op);

/// Half the generators (by ascending bus id) scaled up, the rest down.
Scenario split_generation_scenario(const PowerSystemCase& c, const std::string& name, double up, double down);

} // namespace grid
} // namespace bessopt
