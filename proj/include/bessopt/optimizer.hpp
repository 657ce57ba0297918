#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace bessopt::optimizer {

struct PsoConfig {
    int population = 30;
    int iterations = 30;
    double c1 = 2.0;
    double c2 = 2.0;
    double inertia = 0.9;
    double k_min = 5.0;
    double k_max = 50.0;
    double vmax_frac = 0.5;
    std::uint64_t seed = 1;
    double penalty_weight = 1e4;
    int workers = 1;   // concurrent fitness evaluations; results do not depend on it

    void validate() const;
};

/// Locations are bus ids, gains are p.u./p.u.; both have length n_es.
struct Placement {
    std::vector<int> locs;
    std::vector<double> gains;

    bool operator==(const Placement&) const = default;
};

struct Fitness {
    double objective = 0.0;
    std::vector<double> target_zeta;   // one per scenario, empty for analytic fitness functions
    double violation = 0.0;
    bool feasible = true;
    bool failed = false;               // evaluation raised an error; violation is +inf
    std::string note;

    double penalized(double weight) const;
    static Fitness failure(double objective, std::string why);
};

/// True when `a` should replace `b` as best: lower penalized value, or equal value with
/// `a` feasible and `b` not.
bool better(const Fitness& a, const Fitness& b, double weight);

struct Particle {
    Placement position;
    std::vector<double> vel_locs;    // in candidate-index units
    std::vector<double> vel_gains;
    Placement pbest;
    Fitness pbest_fitness;
    Fitness fitness;
};

/// Swarm leader after each iteration, plus the cheapest feasible placement seen so far
/// (NaN until one is found).
struct HistoryEntry {
    int iteration = 0;
    double objective = 0.0;
    double penalized = 0.0;
    bool feasible = false;
    double feasible_objective = std::numeric_limits<double>::quiet_NaN();
};

/// `best` is the cheapest feasible placement evaluated during the run, or the swarm leader
/// when none was feasible.
struct OptimizationResult {
    Placement best;
    Fitness fitness;
    std::vector<HistoryEntry> history;
    long evaluations = 0;
    std::uint64_t seed = 0;

    bool feasible() const { return fitness.feasible; }
};

using FitnessFn = std::function<Fitness(const Placement&)>;

/// Keeps the first occurrence of every value and replaces each later duplicate by the
/// candidate nearest in index that is not yet in use, ties toward the smaller candidate.
/// `candidates` must be sorted ascending and contain every element of `locs`.
std::vector<int> repair_locations(std::span<const int> locs, std::span<const int> candidates);

/// Single-dimension velocity rule, before clamping.
double velocity_update(double v, double x, double pbest, double gbest, double inertia, double c1, double c2,
                       double r1, double r2);

/// Uniform [0, 1) draws from a stream keyed on (seed, iteration, particle).
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t particle);
    double uniform();
    std::uint64_t next();

private:
    std::uint64_t state_;
};

/// Moves every particle once. Iteration selects the random sub-stream of each particle.
void pso_update(std::vector<Particle>& swarm, const Placement& gbest, std::span<const int> candidates,
                const PsoConfig& cfg, int iteration);

/// Random distinct locations and uniform gains, zero velocity.
Particle random_particle(std::span<const int> candidates, int n_es, const PsoConfig& cfg, int index);

/// The optimizer loop for any fitness function. `fn` must be safe to call concurrently
/// when cfg.workers > 1.
OptimizationResult optimize_with(const FitnessFn& fn, std::span<const int> candidates, int n_es, const PsoConfig& cfg);

/// Share of the locations in `b` that also appear in `a`.
double placement_similarity(std::span<const int> a, std::span<const int> b);

/// Calls fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Worker count from BESSOPT_WORKERS, else the hardware concurrency.
int default_workers();

} // namespace bessopt::optimizer
