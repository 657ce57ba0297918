#include "bessopt/cost.hpp"

#include <cstdio>
#include <sstream>

#include "bessopt/errors.hpp"

namespace bessopt::cost {

void CostConfig::validate() const {
    if (!(cost1 > 0.0 && cost2 > 0.0 && dw_max > 0.0 && e_per_unit > 0.0 && s_base > 0.0)) {
        throw ConfigError("cost parameters must all be positive");
    }
}

CostReport total_cost(double objective, int n_es, const CostConfig& cfg) {
    cfg.validate();
    if (objective < 0.0) throw DomainError("objective must be non-negative");
    if (n_es < 0) throw DomainError("n_es must be non-negative");
    CostReport r;
    r.n_es = n_es;
    r.objective = objective;
    r.conv_cost = objective * cfg.dw_max * cfg.s_base * 1000.0 * cfg.cost1;
    r.cell_cost = static_cast<double>(n_es) * cfg.e_per_unit * 1000.0 * cfg.cost2;
    r.total_cost = r.conv_cost + r.cell_cost;
    return r;
}

std::vector<CostReport> nes_sweep(std::span<const int> n_range, const SweepRunner& run, const CostConfig& cfg) {
    cfg.validate();
    std::vector<CostReport> out;
    for (int n : n_range) {
        try {
            const auto result = run(n);
            CostReport r = total_cost(result.fitness.objective, n, cfg);
            r.feasible = result.feasible();
            r.locs = result.best.locs;
            r.gains = result.best.gains;
            out.push_back(std::move(r));
        } catch (const Error& e) {
            CostReport r;
            r.n_es = n;
            r.error = e.what();
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::optional<int> recommended_nes(std::span<const CostReport> reports) {
    const CostReport* best = nullptr;
    for (const auto& r : reports) {
        if (!r.feasible) continue;
        if (best == nullptr || r.total_cost < best->total_cost ||
            (r.total_cost == best->total_cost && r.n_es < best->n_es)) {
            best = &r;
        }
    }
    if (best == nullptr) return std::nullopt;
    return best->n_es;
}

std::string sweep_csv(std::span<const CostReport> reports) {
    std::ostringstream os;
    os << "n_es,obj,constraint,cost_conv_musd,cost_cell_musd,cost_total_musd\n";
    char line[256];
    for (const auto& r : reports) {
        const char* status = !r.error.empty() ? "Failed" : (r.feasible ? "Satisfied" : "Unsatisfied");
        std::snprintf(line, sizeof line, "%d,%.4f,%s,%.5g,%.5g,%.5g\n", r.n_es, r.objective, status,
                      r.conv_cost / 1e6, r.cell_cost / 1e6, r.total_cost / 1e6);
        os << line;
    }
    return os.str();
}

} // namespace bessopt::cost
