#pragma once

#include <string>
#include <vector>

#include "bessopt/bess.hpp"
#include "bessopt/dynamics.hpp"
#include "bessopt/grid.hpp"
#include "bessopt/modal.hpp"
#include "bessopt/optimizer.hpp"

namespace bessopt::optimizer {

/// Placement problem over one or more loading levels.
struct ProblemSpec {
    grid::PowerSystemCase base_case;
    std::vector<grid::Scenario> scenarios;    // empty means the unscaled base case only
    dynamics::Disturbance disturbance;
    dynamics::SimConfig sim;
    modal::EspritConfig esprit;
    int n_es = 3;
    double f_lo = 0.5;
    double f_hi = 0.8;
    double zeta_star = 0.05;
    std::vector<int> candidate_buses;
    double match_tol = 0.1;            // Hz
    double band_lo = 0.2;              // modes checked for worsening, Hz
    double band_hi = 2.5;
    double mode_energy_floor = 0.01;   // baseline modes below this share are not checked
    double candidate_energy_floor = 0.001;   // candidate modes below this share are not matched
    double zeta_drop_tol = 0.0;        // allowed decrease before a mode counts as worse
    double sample_dt = 0.05;           // identification sample interval, s

    void validate() const;
};

/// Per-level data computed once, without storage units.
struct LevelBaseline {
    grid::Scenario scenario;
    grid::PowerSystemCase power_case;
    grid::OperatingPoint op;
    int channel_bus = 0;                  // generator whose COI-relative angle is identified
    std::vector<modal::Mode> modes;
    modal::Mode target;
    std::vector<modal::Mode> checked;     // baseline modes guarded against worsening
};

struct PreparedProblem {
    ProblemSpec spec;
    std::vector<LevelBaseline> levels;
};

/// Solves every level, simulates it without storage and identifies its baseline modes.
PreparedProblem prepare(const ProblemSpec& spec);

struct LevelOutcome {
    double target_zeta = 0.0;
    bool target_found = false;
    double target_violation = 0.0;
    double mode_violation = 0.0;
    std::vector<modal::Mode> modes;
    std::vector<modal::ModePair> matches;
};

std::vector<bess::BessParams> make_fleet(const Placement& placement, const bess::BessParams& defaults);

/// Simulates one level with a fleet, recording every rotor angle plus `extra` channels.
dynamics::TraceSet simulate_level(const PreparedProblem& problem, std::size_t level,
                                  std::span<const bess::BessParams> fleet,
                                  const std::vector<dynamics::ChannelSpec>& extra = {});

/// Modes of the level's identification channel in a trace from simulate_level().
std::vector<modal::Mode> trace_modes(const PreparedProblem& problem, std::size_t level, const dynamics::TraceSet& trace);

/// Modes of the identification channel of one level for any fleet.
std::vector<modal::Mode> level_modes(const PreparedProblem& problem, std::size_t level,
                                     std::span<const bess::BessParams> fleet);

LevelOutcome evaluate_level(const PreparedProblem& problem, std::size_t level, const Placement& placement,
                            const bess::BessParams& defaults);

/// All loading levels checked together: violations summed over levels.
Fitness evaluate_particle(const Placement& placement, const PreparedProblem& problem, const bess::BessParams& defaults);

/// Single operating condition form, evaluated on the given level only.
Fitness evaluate_single(const Placement& placement, const PreparedProblem& problem, std::size_t level,
                        const bess::BessParams& defaults);

OptimizationResult optimize(const PreparedProblem& problem, const PsoConfig& cfg, const bess::BessParams& defaults);

/// Generator buses plus, for each generator, its m electrically nearest non-generator buses
/// (shortest path over |z| of in-service branches, ties toward the smaller id). Buses that
/// cannot be reached from any generator are left out and reported in `warnings`.
std::vector<int> reduce_candidates(const grid::PowerSystemCase& c, int m, std::vector<std::string>* warnings = nullptr);

/// Every bus id of the case in ascending order.
std::vector<int> all_buses(const grid::PowerSystemCase& c);

} // namespace bessopt::optimizer
