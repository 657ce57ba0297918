#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bessopt/optimizer.hpp"

namespace bessopt::cost {

struct CostConfig {
    double cost1 = 421.43;      // per kW of converter rating
    double cost2 = 218.52;      // per kWh of cells
    double dw_max = 0.01;       // p.u. frequency deviation sizing the converter
    double e_per_unit = 10.0;   // MWh per unit
    double s_base = 100.0;      // MVA

    void validate() const;
};

struct CostReport {
    int n_es = 0;
    double objective = 0.0;
    double conv_cost = 0.0;
    double cell_cost = 0.0;
    double total_cost = 0.0;
    bool feasible = false;
    std::string error;           // set when the optimizer run for this entry failed
    std::vector<int> locs;
    std::vector<double> gains;
};

/// conv = objective * dw_max * s_base[kW] * cost1; cell = n_es * e_per_unit[kWh] * cost2.
CostReport total_cost(double objective, int n_es, const CostConfig& cfg = {});

using SweepRunner = std::function<optimizer::OptimizationResult(int n_es)>;

/// One optimizer run per count. A failing run yields an infeasible entry carrying the error.
std::vector<CostReport> nes_sweep(std::span<const int> n_range, const SweepRunner& run, const CostConfig& cfg = {});

/// Cheapest feasible entry, ties toward the smaller count.
std::optional<int> recommended_nes(std::span<const CostReport> reports);

/// Header and rows in the column order N_es, Obj, Constraint, conv, cell, total (millions).
std::string sweep_csv(std::span<const CostReport> reports);

} // namespace bessopt::cost
