#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "bessopt/grid.hpp"

namespace bessopt::dynamics {

/// Constant active-power injection (zero reactive) at a network node.
struct PowerInjection {
    std::size_t node = 0;
    double p = 0.0;   // p.u., positive = injecting into the network
};

struct NetworkSolveOptions {
    double tolerance = 1e-10;
    int max_iterations = 20;
    /// Below this voltage magnitude a constant-power injection behaves as a constant admittance.
    double low_voltage = 0.7;
};

/// Factorized effective admittance matrix (network + loads + machine Norton admittances)
/// with optional ideal voltage sources. Solving is linear in the source currents except for
/// the constant-power injections, which are resolved by fixed-point iteration.
class NetworkSolver {
public:
    NetworkSolver() = default;
    NetworkSolver(const CMatrix& y_effective, std::vector<std::pair<std::size_t, Complex>> fixed_nodes = {},
                  NetworkSolveOptions options = {});

    std::size_t size() const { return static_cast<std::size_t>(n_); }

    /// `currents` holds Norton source currents per node (length = size()). Returns all node voltages.
    /// Throws SimulationError(step = -1) if the fixed point does not converge.
    CVector solve(const CVector& currents, const std::vector<PowerInjection>& injections) const;

    /// Iterations used by the last call to solve().
    int last_iterations() const { return last_iterations_; }

private:
    CVector linear_solve(const CVector& currents) const;
    Complex injection_current(double p, Complex v) const;

    Eigen::Index n_ = 0;
    std::vector<Eigen::Index> free_nodes_;
    std::vector<Eigen::Index> position_;   // node -> row in reduced system, -1 if fixed
    CVector fixed_voltage_;                // full length, zero on free nodes
    CVector fixed_contribution_;           // Y_fs * V_s on free rows
    Eigen::PartialPivLU<CMatrix> lu_;
    NetworkSolveOptions options_;
    mutable int last_iterations_ = 0;
};

/// One-shot network solve: linear solve of y_effective V = I plus constant-power injections.
CVector network_solve(const CMatrix& y_effective, const CVector& source_currents,
                      const std::vector<PowerInjection>& injections, const NetworkSolveOptions& options = {});

} // namespace bessopt::dynamics
