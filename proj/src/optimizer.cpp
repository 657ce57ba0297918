#include "bessopt/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "bessopt/errors.hpp"

namespace bessopt::optimizer {

void PsoConfig::validate() const {
    if (population < 2) throw ConfigError("pso.population must be at least 2");
    if (iterations < 1) throw ConfigError("pso.iterations must be at least 1");
    if (c1 < 0.0 || c2 < 0.0) throw ConfigError("pso.c1 and pso.c2 must be non-negative");
    if (!(inertia > 0.0 && inertia <= 1.0)) throw ConfigError("pso.inertia must lie in (0, 1]");
    if (!(k_min < k_max)) throw ConfigError("pso.k_min must be below pso.k_max");
    if (k_min < 0.0) throw ConfigError("pso.k_min must be non-negative");
    if (!(vmax_frac > 0.0)) throw ConfigError("pso.vmax_frac must be positive");
    if (!(penalty_weight > 0.0)) throw ConfigError("pso.penalty_weight must be positive");
    if (workers < 1) throw ConfigError("pso.workers must be at least 1");
}

double Fitness::penalized(double weight) const {
    if (failed || !std::isfinite(violation)) {
        return std::numeric_limits<double>::infinity();
    }
    return objective + weight * violation;
}

Fitness Fitness::failure(double objective, std::string why) {
    Fitness f;
    f.objective = objective;
    f.violation = std::numeric_limits<double>::infinity();
    f.feasible = false;
    f.failed = true;
    f.note = std::move(why);
    return f;
}

bool better(const Fitness& a, const Fitness& b, double weight) {
    const double pa = a.penalized(weight);
    const double pb = b.penalized(weight);
    if (pa < pb) return true;
    if (pa > pb) return false;
    return a.feasible && !b.feasible;
}

std::vector<int> repair_locations(std::span<const int> locs, std::span<const int> candidates) {
    if (!std::is_sorted(candidates.begin(), candidates.end()) ||
        std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end()) {
        throw DomainError("candidate set must be sorted and distinct");
    }
    auto index_of = [&](int value) {
        const auto it = std::lower_bound(candidates.begin(), candidates.end(), value);
        if (it == candidates.end() || *it != value) {
            throw DomainError("location " + std::to_string(value) + " is not a candidate");
        }
        return static_cast<std::ptrdiff_t>(it - candidates.begin());
    };
    std::vector<bool> used(candidates.size(), false);
    for (int value : locs) {
        used[static_cast<std::size_t>(index_of(value))] = true;
    }
    std::vector<bool> seen(candidates.size(), false);
    std::vector<int> out(locs.begin(), locs.end());
    const auto n = static_cast<std::ptrdiff_t>(candidates.size());
    for (auto& value : out) {
        const auto idx = index_of(value);
        if (!seen[static_cast<std::size_t>(idx)]) {
            seen[static_cast<std::size_t>(idx)] = true;
            continue;
        }
        std::ptrdiff_t pick = -1;
        for (std::ptrdiff_t gap = 1; gap < n && pick < 0; ++gap) {
            for (const auto probe : {idx - gap, idx + gap}) {
                if (probe >= 0 && probe < n && !used[static_cast<std::size_t>(probe)]) {
                    pick = probe;
                    break;
                }
            }
        }
        if (pick < 0) {
            throw CapacityError("more duplicate locations than spare candidates");
        }
        used[static_cast<std::size_t>(pick)] = true;
        seen[static_cast<std::size_t>(pick)] = true;
        value = candidates[static_cast<std::size_t>(pick)];
    }
    return out;
}

double velocity_update(double v, double x, double pbest, double gbest, double inertia, double c1, double c2,
                       double r1, double r2) {
    return inertia * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x);
}

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t candidate_index(std::span<const int> candidates, int value) {
    const auto it = std::lower_bound(candidates.begin(), candidates.end(), value);
    if (it == candidates.end() || *it != value) {
        throw DomainError("location " + std::to_string(value) + " is not a candidate");
    }
    return static_cast<std::size_t>(it - candidates.begin());
}

} // namespace

Stream::Stream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t particle) : state_(seed) {
    std::uint64_t mix = seed;
    state_ = splitmix(mix) ^ (iteration * 0xd1b54a32d192ed03ULL);
    mix = state_;
    state_ = splitmix(mix) ^ (particle * 0x8cb92ba72f3d8dd7ULL);
    mix = state_;
    state_ = splitmix(mix);
}

std::uint64_t Stream::next() { return splitmix(state_); }

double Stream::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

Particle random_particle(std::span<const int> candidates, int n_es, const PsoConfig& cfg, int index) {
    if (n_es < 1 || static_cast<std::size_t>(n_es) > candidates.size()) {
        throw CapacityError("n_es must lie between 1 and the number of candidates");
    }
    Stream rng(cfg.seed, 0, static_cast<std::uint64_t>(index));
    std::vector<int> pool(candidates.begin(), candidates.end());
    Particle p;
    for (int i = 0; i < n_es; ++i) {
        const auto remaining = pool.size() - static_cast<std::size_t>(i);
        const auto j = static_cast<std::size_t>(i) +
                       std::min(remaining - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(remaining)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        p.position.locs.push_back(pool[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < n_es; ++i) {
        p.position.gains.push_back(cfg.k_min + rng.uniform() * (cfg.k_max - cfg.k_min));
    }
    p.vel_locs.assign(static_cast<std::size_t>(n_es), 0.0);
    p.vel_gains.assign(static_cast<std::size_t>(n_es), 0.0);
    p.pbest = p.position;
    return p;
}

void pso_update(std::vector<Particle>& swarm, const Placement& gbest, std::span<const int> candidates,
                const PsoConfig& cfg, int iteration) {
    const double loc_range = static_cast<double>(candidates.size() - 1);
    const double gain_range = cfg.k_max - cfg.k_min;
    const double vmax_loc = cfg.vmax_frac * loc_range;
    const double vmax_gain = cfg.vmax_frac * gain_range;
    for (std::size_t pi = 0; pi < swarm.size(); ++pi) {
        Particle& p = swarm[pi];
        Stream rng(cfg.seed, static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(pi));
        const std::size_t n = p.position.locs.size();
        std::vector<int> moved(n);
        for (std::size_t d = 0; d < n; ++d) {
            const double x = static_cast<double>(candidate_index(candidates, p.position.locs[d]));
            const double pb = static_cast<double>(candidate_index(candidates, p.pbest.locs[d]));
            const double gb = static_cast<double>(candidate_index(candidates, gbest.locs[d]));
            const double r1 = rng.uniform();
            const double r2 = rng.uniform();
            double v = velocity_update(p.vel_locs[d], x, pb, gb, cfg.inertia, cfg.c1, cfg.c2, r1, r2);
            v = std::clamp(v, -vmax_loc, vmax_loc);
            const double raw = std::round(x + v);
            const double target = std::clamp(raw, 0.0, loc_range);
            p.vel_locs[d] = raw == target ? v : 0.0;
            moved[d] = candidates[static_cast<std::size_t>(target)];
        }
        p.position.locs = repair_locations(moved, candidates);
        for (std::size_t d = 0; d < n; ++d) {
            const double r1 = rng.uniform();
            const double r2 = rng.uniform();
            const double x = p.position.gains[d];
            double v = velocity_update(p.vel_gains[d], x, p.pbest.gains[d], gbest.gains[d], cfg.inertia, cfg.c1,
                                       cfg.c2, r1, r2);
            v = std::clamp(v, -vmax_gain, vmax_gain);
            const double moved_gain = std::clamp(x + v, cfg.k_min, cfg.k_max);
            p.vel_gains[d] = moved_gain == x + v ? v : 0.0;
            p.position.gains[d] = moved_gain;
        }
    }
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const auto threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

int default_workers() {
    if (const char* env = std::getenv("BESSOPT_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

OptimizationResult optimize_with(const FitnessFn& fn, std::span<const int> candidates, int n_es, const PsoConfig& cfg) {
    cfg.validate();
    std::vector<int> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (n_es < 1 || static_cast<std::size_t>(n_es) > sorted.size()) {
        throw CapacityError("n_es must lie between 1 and the number of candidates");
    }
    const std::span<const int> cand(sorted);

    std::vector<Particle> swarm;
    swarm.reserve(static_cast<std::size_t>(cfg.population));
    for (int i = 0; i < cfg.population; ++i) {
        swarm.push_back(random_particle(cand, n_es, cfg, i));
    }

    OptimizationResult result;
    result.seed = cfg.seed;
    Placement leader;
    Fitness leader_fitness = Fitness::failure(0.0, "not evaluated");
    bool have_leader = false;
    Placement archive;
    Fitness archive_fitness;
    bool have_archive = false;
    const double w = cfg.penalty_weight;

    for (int it = 0; it < cfg.iterations; ++it) {
        parallel_for(swarm.size(), cfg.workers, [&](std::size_t i) {
            try {
                swarm[i].fitness = fn(swarm[i].position);
            } catch (const Error& e) {
                double obj = 0.0;
                for (double g : swarm[i].position.gains) obj += g;
                swarm[i].fitness = Fitness::failure(obj, e.what());
            }
        });
        result.evaluations += static_cast<long>(swarm.size());
        for (auto& p : swarm) {
            if (it == 0 || better(p.fitness, p.pbest_fitness, w)) {
                p.pbest = p.position;
                p.pbest_fitness = p.fitness;
            }
            if (!have_leader || better(p.fitness, leader_fitness, w)) {
                leader = p.position;
                leader_fitness = p.fitness;
                have_leader = true;
            }
            if (p.fitness.feasible && !p.fitness.failed &&
                (!have_archive || p.fitness.objective < archive_fitness.objective)) {
                archive = p.position;
                archive_fitness = p.fitness;
                have_archive = true;
            }
        }
        HistoryEntry h{it, leader_fitness.objective, leader_fitness.penalized(w), leader_fitness.feasible};
        if (have_archive) h.feasible_objective = archive_fitness.objective;
        result.history.push_back(h);
        if (it + 1 < cfg.iterations) {
            pso_update(swarm, leader, cand, cfg, it + 1);
        }
    }
    result.best = have_archive ? archive : leader;
    result.fitness = have_archive ? archive_fitness : leader_fitness;
    return result;
}

double placement_similarity(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) {
        throw DomainError("placements must have equal length");
    }
    const std::set<int> sa(a.begin(), a.end());
    const std::set<int> sb(b.begin(), b.end());
    if (sb.empty()) return 0.0;
    std::size_t shared = 0;
    for (int v : sb) shared += sa.count(v);
    return static_cast<double>(shared) / static_cast<double>(sb.size());
}

} // namespace bessopt::optimizer
