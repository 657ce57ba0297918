#include "bessopt/network.hpp"

#include <cmath>

#include "bessopt/errors.hpp"

namespace bessopt::dynamics {

NetworkSolver::NetworkSolver(const CMatrix& y_effective, std::vector<std::pair<std::size_t, Complex>> fixed_nodes,
                             NetworkSolveOptions options)
    : n_(y_effective.rows()), options_(options) {
    position_.assign(static_cast<std::size_t>(n_), 0);
    fixed_voltage_ = CVector::Zero(n_);
    std::vector<bool> fixed(static_cast<std::size_t>(n_), false);
    for (const auto& [node, v] : fixed_nodes) {
        fixed.at(node) = true;
        fixed_voltage_(static_cast<Eigen::Index>(node)) = v;
    }
    for (Eigen::Index i = 0; i < n_; ++i) {
        if (fixed[static_cast<std::size_t>(i)]) {
            position_[static_cast<std::size_t>(i)] = -1;
        } else {
            position_[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(free_nodes_.size());
            free_nodes_.push_back(i);
        }
    }
    const auto nf = static_cast<Eigen::Index>(free_nodes_.size());
    CMatrix y_ff(nf, nf);
    fixed_contribution_ = CVector::Zero(nf);
    for (Eigen::Index r = 0; r < nf; ++r) {
        const auto i = free_nodes_[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < nf; ++c) {
            y_ff(r, c) = y_effective(i, free_nodes_[static_cast<std::size_t>(c)]);
        }
        for (const auto& [node, v] : fixed_nodes) {
            fixed_contribution_(r) += y_effective(i, static_cast<Eigen::Index>(node)) * v;
        }
    }
    lu_.compute(y_ff);
    // PartialPivLU does not report singularity; probe the factor diagonal.
    const auto& factor = lu_.matrixLU();
    double max_diag = 0.0;
    double min_diag = nf > 0 ? std::abs(factor(0, 0)) : 1.0;
    for (Eigen::Index k = 0; k < nf; ++k) {
        max_diag = std::max(max_diag, std::abs(factor(k, k)));
        min_diag = std::min(min_diag, std::abs(factor(k, k)));
    }
    if (nf > 0 && !(min_diag > 1e-13 * max_diag)) {
        throw SimulationError("effective network admittance matrix is singular", -1);
    }
}

CVector NetworkSolver::linear_solve(const CVector& currents) const {
    const auto nf = static_cast<Eigen::Index>(free_nodes_.size());
    CVector rhs(nf);
    for (Eigen::Index r = 0; r < nf; ++r) {
        rhs(r) = currents(free_nodes_[static_cast<std::size_t>(r)]) - fixed_contribution_(r);
    }
    const CVector vf = lu_.solve(rhs);
    CVector v = fixed_voltage_;
    for (Eigen::Index r = 0; r < nf; ++r) {
        v(free_nodes_[static_cast<std::size_t>(r)]) = vf(r);
    }
    return v;
}

Complex NetworkSolver::injection_current(double p, Complex v) const {
    const double mag = std::abs(v);
    if (mag >= options_.low_voltage) {
        return p / std::conj(v);
    }
    return p * v / (options_.low_voltage * options_.low_voltage);
}

CVector NetworkSolver::solve(const CVector& currents, const std::vector<PowerInjection>& injections) const {
    CVector v = linear_solve(currents);
    last_iterations_ = 1;
    if (injections.empty()) {
        return v;
    }
    for (int iter = 1; iter <= options_.max_iterations; ++iter) {
        CVector total = currents;
        for (const auto& inj : injections) {
            const auto node = static_cast<Eigen::Index>(inj.node);
            total(node) += injection_current(inj.p, v(node));
        }
        CVector next = linear_solve(total);
        const double change = (next - v).cwiseAbs().maxCoeff();
        v = std::move(next);
        last_iterations_ = iter + 1;
        if (!std::isfinite(change)) {
            break;
        }
        if (change <= options_.tolerance) {
            return v;
        }
    }
    throw SimulationError("constant-power injection fixed point did not converge", -1);
}

CVector network_solve(const CMatrix& y_effective, const CVector& source_currents,
                      const std::vector<PowerInjection>& injections, const NetworkSolveOptions& options) {
    const NetworkSolver solver(y_effective, {}, options);
    return solver.solve(source_currents, injections);
}

} // namespace bessopt::dynamics
