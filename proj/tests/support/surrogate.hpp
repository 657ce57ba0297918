#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bessopt/optimizer.hpp"

namespace bessopt::testing {

/// Analytic placement problem: minimise the gain sum subject to
/// 0.02 + 0.001 * sum(c_bus * gain) >= 0.05 with a smooth per-bus coefficient.
struct Surrogate {
    std::vector<int> candidates;
    double k_min = 5.0;
    double k_max = 50.0;
    double required = 30.0;   // (0.05 - 0.02) / 0.001

    static double coefficient(int bus) {
        const double u = (bus - 27.0) / 10.0;
        return 0.2 + 0.8 * std::exp(-u * u);
    }

    optimizer::Fitness operator()(const optimizer::Placement& p) const {
        optimizer::Fitness f;
        double reach = 0.0;
        for (std::size_t k = 0; k < p.locs.size(); ++k) {
            f.objective += p.gains[k];
            reach += coefficient(p.locs[k]) * p.gains[k];
        }
        const double zeta = 0.02 + 0.001 * reach;
        f.target_zeta = {zeta};
        f.violation = std::max(0.0, 0.05 - zeta);
        f.feasible = f.violation == 0.0;
        return f;
    }

    /// Cheapest gains for a fixed set: every unit at k_min, the shortfall filled in order of
    /// decreasing coefficient. Returns +inf when the set cannot reach the requirement.
    double set_cost(std::vector<int> set) const {
        std::sort(set.begin(), set.end(), [](int a, int b) { return coefficient(a) > coefficient(b); });
        double cost = 0.0;
        double reach = 0.0;
        for (int b : set) {
            cost += k_min;
            reach += coefficient(b) * k_min;
        }
        for (int b : set) {
            if (reach >= required) break;
            const double extra = std::min(k_max - k_min, (required - reach) / coefficient(b));
            cost += extra;
            reach += extra * coefficient(b);
        }
        return reach >= required - 1e-12 ? cost : INFINITY;
    }

    /// Exhaustive optimum over all n-subsets of the candidates.
    double optimum(int n) const {
        std::vector<int> pick;
        double best = INFINITY;
        search(0, n, pick, best);
        return best;
    }

private:
    void search(std::size_t from, int left, std::vector<int>& pick, double& best) const {
        if (left == 0) {
            best = std::min(best, set_cost(pick));
            return;
        }
        for (std::size_t k = from; k + static_cast<std::size_t>(left) <= candidates.size(); ++k) {
            pick.push_back(candidates[k]);
            search(k + 1, left - 1, pick, best);
            pick.pop_back();
        }
    }
};

inline Surrogate ne39_surrogate() {
    Surrogate s;
    for (int b = 1; b <= 39; ++b) s.candidates.push_back(b);
    return s;
}

} // namespace bessopt::testing
