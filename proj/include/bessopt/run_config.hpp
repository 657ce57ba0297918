#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bessopt/bess.hpp"
#include "bessopt/cost.hpp"
#include "bessopt/dynamics.hpp"
#include "bessopt/modal.hpp"
#include "bessopt/optimizer.hpp"
#include "bessopt/problem.hpp"

namespace bessopt::cli {

/// How the candidate bus set is formed: every bus, generators plus m neighbours, or a list.
struct CandidateRule {
    enum class Kind { all, generators_plus, list } kind = Kind::all;
    int m = 0;
    std::vector<int> buses;

    static CandidateRule parse(const nlohmann::json& value, const std::string& where);
};

/// `compare` section: placement and the PI integral times to try.
struct CompareSpec {
    optimizer::Placement placement;
    std::vector<double> t_i = {0.01, 0.1, 1.0};
};

/// Parsed run file. Every section is optional; absent fields keep their defaults.
struct RunFile {
    std::string case_ref;                 // bundled name or path to a case file
    std::vector<std::string> scenarios;   // empty: unscaled base case
    std::optional<dynamics::Disturbance> disturbance;
    int n_es = 3;
    std::optional<std::pair<double, double>> target_band;
    double zeta_star = 0.05;
    CandidateRule candidates;
    dynamics::SimConfig sim;
    modal::EspritConfig esprit;
    optimizer::PsoConfig pso;
    bess::BessParams bess_defaults;
    std::vector<bess::BessParams> fleet;
    std::vector<std::string> channels;
    std::vector<int> sweep_range;
    cost::CostConfig cost;
    std::optional<CompareSpec> compare;
    double mode_energy_floor = 0.01;
    double zeta_drop_tol = 0.0;
};

RunFile parse_run(const nlohmann::json& doc);
RunFile load_run_file(const std::filesystem::path& path);

dynamics::Disturbance disturbance_from_json(const nlohmann::json& doc, const std::string& where);
nlohmann::json disturbance_to_json(const dynamics::Disturbance& d);

bess::BessParams bess_from_json(const nlohmann::json& doc, const bess::BessParams& defaults, const std::string& where);

/// Bundled name, or a case file resolved against `base_dir` when relative.
grid::PowerSystemCase resolve_case(const std::string& ref, const std::filesystem::path& base_dir);

/// Problem definition from a run file and a loaded case.
optimizer::ProblemSpec build_problem(const RunFile& run, const grid::PowerSystemCase& c);

nlohmann::json result_to_json(const optimizer::OptimizationResult& result, const optimizer::PreparedProblem& problem,
                              const optimizer::PsoConfig& cfg);
optimizer::OptimizationResult result_from_json(const nlohmann::json& doc);

void write_history_csv(const optimizer::OptimizationResult& result, const std::filesystem::path& path);
void write_modes_csv(const std::vector<modal::Mode>& modes, const std::filesystem::path& path);
std::vector<modal::Mode> read_modes_csv(const std::filesystem::path& path);

} // namespace bessopt::cli
